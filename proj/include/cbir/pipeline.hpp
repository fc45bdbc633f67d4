/**
 * @file pipeline.hpp
 * @brief Classify-then-retrieve: kNN restricted to the class an SVM predicts.
 */
#pragma once

#include "cbir/feature_index.hpp"
#include "cbir/retrieval.hpp"
#include "cbir/svm.hpp"

#include <span>
#include <vector>

namespace cbir {

struct SvmRetrieval {
    ClassPrediction prediction;
    std::vector<RankedResult> results; ///< ascending distance within the searched classes
};

/// Predicts the class of a raw descriptor, then ranks the index records whose
/// label matches it. `classes` > 1 widens the search to that many classes in
/// vote order; the default searches the predicted class only. Classes are
/// matched between model and index by name.
SvmRetrieval svm_retrieve(const MulticlassModel& model, const FeatureIndex& index, std::span<const double> descriptor,
                          std::size_t k = kDefaultK, const DistanceMetric& metric = DistanceMetric::l1(),
                          std::size_t classes = 1);

} // namespace cbir
