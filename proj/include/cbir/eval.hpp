/**
 * @file eval.hpp
 * @brief Seeded stratified hold-out evaluation of kNN retrieval and SVM classification.
 */
#pragma once

#include "cbir/feature_index.hpp"
#include "cbir/retrieval.hpp"
#include "cbir/svm.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cbir {

struct Split {
    std::vector<std::size_t> train; ///< ascending record ids
    std::vector<std::size_t> test;  ///< ascending record ids
};

/// Per class, round(n * test_fraction) records drawn by a seeded shuffle go to
/// the test side, clamped to [1, n-1] when n >= 2. Singleton classes stay in train.
Split stratified_split(std::span<const std::uint16_t> label_ids, double test_fraction, std::uint64_t seed);

struct KnnScore {
    std::size_t k = 0;
    double precision = 0.0; ///< mean over test queries of matching labels in the top k / k
};

struct SvmScore {
    double accuracy = 0.0;
    std::vector<std::vector<std::size_t>> confusion; ///< [true][predicted]
    std::vector<double> per_class_accuracy;          ///< 0 for classes without test records
    std::vector<std::size_t> per_class_count;
    std::size_t pair_models = 0;
};

struct EvalOptions {
    double test_fraction = 0.2;
    std::uint64_t seed = 0;
    std::vector<std::size_t> ks{kDefaultK};
    DistanceMetric metric = DistanceMetric::l1();
    bool normalize = true; ///< z-score kNN space with training-side statistics
    bool run_knn = true;
    bool run_svm = true;
    KernelSpec kernel = KernelSpec::gaussian(0.0);
    double C = 10.0;
    unsigned threads = 0;
};

struct EvalReport {
    std::vector<std::string> classes;
    std::size_t train_count = 0;
    std::size_t test_count = 0;
    double test_fraction = 0.0;
    std::uint64_t seed = 0;
    std::string metric;
    std::vector<KnnScore> knn;
    std::optional<SvmScore> svm;
};

/// Precision@k of the test records queried against the train records only.
std::vector<KnnScore> evaluate_knn(const FeatureIndex& index, const Split& split, std::span<const std::size_t> ks,
                                   const DistanceMetric& metric, bool normalize);

/// One-vs-one model fitted on the train side, scored on the test side.
SvmScore evaluate_svm(const FeatureIndex& index, const Split& split, const KernelSpec& kernel, double C,
                      std::uint64_t seed, unsigned threads = 0);

EvalReport evaluate(const FeatureIndex& index, const EvalOptions& options);

/// Sub-index holding the given records in the given order, without statistics.
FeatureIndex select_records(const FeatureIndex& index, std::span<const std::size_t> ids);

nlohmann::json to_json(const EvalReport& report);
std::string format_report(const EvalReport& report);

} // namespace cbir
