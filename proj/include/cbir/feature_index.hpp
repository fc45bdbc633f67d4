/**
 * @file feature_index.hpp
 * @brief Immutable collection of labelled descriptors.
 *
 * Descriptors are held at single precision, the same precision they have on
 * disk, so a loaded index is bit-identical to the one that was saved. All
 * arithmetic on them (distances, statistics, training) runs in double.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cbir {

/// Per-dimension mean and population standard deviation.
struct NormStats {
    std::vector<double> mean;
    std::vector<double> stddev;

    /// Z-scores `x` in place. Zero-variance dimensions pass through unscaled.
    void apply(std::span<double> x) const;

    static NormStats compute(std::span<const double> rows, std::size_t dim);

    friend bool operator==(const NormStats&, const NormStats&) = default;
};

class FeatureIndex {
public:
    FeatureIndex() = default;

    /// `label_ids[i]` indexes `labels`; `raw` is row-major, size() x dim.
    FeatureIndex(std::size_t dim, std::vector<std::string> labels, std::vector<std::uint16_t> label_ids,
                 std::vector<float> raw, std::vector<std::string> paths,
                 std::optional<NormStats> stats = std::nullopt);

    std::size_t size() const noexcept { return label_ids_.size(); }
    std::size_t dim() const noexcept { return dim_; }
    bool empty() const noexcept { return label_ids_.empty(); }

    /// Ids are dense: record i has id i.
    std::uint64_t id(std::size_t i) const noexcept { return i; }

    const std::vector<std::string>& labels() const noexcept { return labels_; }
    std::uint16_t label_id(std::size_t i) const { return label_ids_.at(i); }
    const std::string& label(std::size_t i) const { return labels_.at(label_ids_.at(i)); }
    const std::string& path(std::size_t i) const { return paths_.at(i); }
    const std::vector<std::string>& paths() const noexcept { return paths_; }
    const std::vector<std::uint16_t>& label_ids() const noexcept { return label_ids_; }

    std::span<const float> raw_row(std::size_t i) const;
    std::span<const float> raw() const noexcept { return raw_; }

    /// Row in search space: the raw row, z-scored when the index is normalized.
    std::span<const double> row(std::size_t i) const;
    /// Flattened search-space block, size() x dim.
    std::span<const double> matrix() const noexcept { return matrix_; }

    bool normalized() const noexcept { return stats_.has_value(); }
    const std::optional<NormStats>& norm_stats() const noexcept { return stats_; }

    /// Maps an extracted descriptor into search space: rounds to storage
    /// precision, then applies the stored statistics if any.
    std::vector<double> transform_query(std::span<const double> descriptor) const;

    /// Ids of records carrying `label_id`, ascending.
    std::vector<std::size_t> records_with_label(std::uint16_t label_id) const;

    friend bool operator==(const FeatureIndex& a, const FeatureIndex& b) {
        return a.dim_ == b.dim_ && a.labels_ == b.labels_ && a.label_ids_ == b.label_ids_ &&
               a.raw_ == b.raw_ && a.paths_ == b.paths_ && a.stats_ == b.stats_;
    }

private:
    std::size_t dim_ = 0;
    std::vector<std::string> labels_;
    std::vector<std::uint16_t> label_ids_;
    std::vector<float> raw_;
    std::vector<std::string> paths_;
    std::optional<NormStats> stats_;
    std::vector<double> matrix_;
};

/// Accumulates records in insertion order; labels get ids by first appearance.
class FeatureIndexBuilder {
public:
    explicit FeatureIndexBuilder(std::size_t dim) : dim_(dim) {}

    void add(const std::string& label, std::span<const double> descriptor, std::string path = {});
    std::size_t size() const noexcept { return label_ids_.size(); }
    FeatureIndex build() &&;

private:
    std::size_t dim_;
    std::vector<std::string> labels_;
    std::vector<std::uint16_t> label_ids_;
    std::vector<float> raw_;
    std::vector<std::string> paths_;
};

/// Same records with per-dimension z-score statistics computed over the index
/// and persisted alongside it.
FeatureIndex normalize_features(const FeatureIndex& index);

} // namespace cbir
