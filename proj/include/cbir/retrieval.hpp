/**
 * @file retrieval.hpp
 * @brief Distance metrics and exact brute-force top-k search.
 */
#pragma once

#include "cbir/feature_index.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cbir {

/// p-norm (p >= 1) or the infinity norm.
class DistanceMetric {
public:
    static DistanceMetric p_norm(double p);
    static DistanceMetric l1() { return p_norm(1.0); }
    static DistanceMetric l2() { return p_norm(2.0); }
    static DistanceMetric infinity() { return DistanceMetric(0.0, true); }

    /// Accepts "l1", "l2", "linf", "inf" and "p<real>" such as "p1" or "p3.5".
    static DistanceMetric parse(std::string_view text);

    bool is_infinity() const noexcept { return infinity_; }
    double p() const noexcept { return p_; }
    std::string name() const;

    double operator()(std::span<const double> x, std::span<const double> y) const;

private:
    DistanceMetric(double p, bool inf) : p_(p), infinity_(inf) {}
    double p_;
    bool infinity_;
};

double p_norm_distance(std::span<const double> x, std::span<const double> y, double p);
double infinity_norm_distance(std::span<const double> x, std::span<const double> y);

/// Reference L1 scan written as the per-image, per-element loop: materialize
/// every absolute difference, then sum it. Kept as an oracle for batch_distances.
std::vector<double> naive_knn_scan(std::span<const double> query, const FeatureIndex& index);

/// Single pass over the flattened feature block. For L1 the per-record
/// summation order matches naive_knn_scan exactly. Large scans are split
/// across `threads` workers (0 = hardware concurrency); results do not
/// depend on the split.
std::vector<double> batch_distances(std::span<const double> query, const FeatureIndex& index,
                                    const DistanceMetric& metric, unsigned threads = 0);

/// Same scan restricted to the given record ids (returned in that order).
std::vector<double> subset_distances(std::span<const double> query, const FeatureIndex& index,
                                     std::span<const std::size_t> ids, const DistanceMetric& metric);

struct RankedResult {
    std::uint64_t id;
    std::string label;
    double distance;

    friend bool operator==(const RankedResult&, const RankedResult&) = default;
};

/// Ranks of (id, distance) pairs; ascending distance, ties by ascending id.
struct Ranked {
    std::uint64_t id;
    double distance;
};

/// The min(k, N) smallest entries; id i is the position in `distances`.
std::vector<Ranked> top_k(std::span<const double> distances, std::size_t k);
/// As above with explicit ids.
std::vector<Ranked> top_k(std::span<const double> distances, std::span<const std::uint64_t> ids, std::size_t k);

inline constexpr std::size_t kDefaultK = 10;

/// Extracted query descriptor -> ranked records of `index`.
std::vector<RankedResult> knn_query(const FeatureIndex& index, std::span<const double> descriptor,
                                    std::size_t k = kDefaultK, const DistanceMetric& metric = DistanceMetric::l1());

/// kNN restricted to records with one label.
std::vector<RankedResult> knn_query_within(const FeatureIndex& index, std::span<const double> descriptor,
                                           std::span<const std::uint16_t> label_ids, std::size_t k,
                                           const DistanceMetric& metric = DistanceMetric::l1());

} // namespace cbir
