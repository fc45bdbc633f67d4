#include "cbir/feature_index.hpp"
#include "cbir/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cbir {

void NormStats::apply(std::span<double> x) const {
    if (x.size() != mean.size())
        throw Error(ErrorKind::DimensionError, "normalization statistics do not match vector length");
    for (std::size_t j = 0; j < x.size(); ++j)
        if (stddev[j] > 0.0)
            x[j] = (x[j] - mean[j]) / stddev[j];
}

NormStats NormStats::compute(std::span<const double> rows, std::size_t dim) {
    if (dim == 0 || rows.empty() || rows.size() % dim != 0)
        throw Error(ErrorKind::DimensionError, "cannot compute statistics of an empty block");
    const std::size_t n = rows.size() / dim;
    NormStats st;
    st.mean.assign(dim, 0.0);
    st.stddev.assign(dim, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < dim; ++j)
            st.mean[j] += rows[i * dim + j];
    for (double& m : st.mean)
        m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < dim; ++j) {
            const double d = rows[i * dim + j] - st.mean[j];
            st.stddev[j] += d * d;
        }
    for (std::size_t j = 0; j < dim; ++j) {
        st.stddev[j] = std::sqrt(st.stddev[j] / static_cast<double>(n));
        // Rounding in the mean of a constant column leaves residue far below float resolution.
        if (st.stddev[j] <= 1e-10 * std::max(1.0, std::abs(st.mean[j])))
            st.stddev[j] = 0.0;
    }
    return st;
}

FeatureIndex::FeatureIndex(std::size_t dim, std::vector<std::string> labels,
                           std::vector<std::uint16_t> label_ids, std::vector<float> raw,
                           std::vector<std::string> paths, std::optional<NormStats> stats)
    : dim_(dim), labels_(std::move(labels)), label_ids_(std::move(label_ids)), raw_(std::move(raw)),
      paths_(std::move(paths)), stats_(std::move(stats)) {
    if (dim_ == 0)
        throw Error(ErrorKind::DimensionError, "index dimension must be positive");
    if (raw_.size() != label_ids_.size() * dim_)
        throw Error(ErrorKind::DimensionError, "descriptor block does not match record count");
    if (paths_.empty())
        paths_.assign(label_ids_.size(), std::string{});
    if (paths_.size() != label_ids_.size())
        throw Error(ErrorKind::DimensionError, "path manifest does not match record count");
    for (auto id : label_ids_)
        if (id >= labels_.size())
            throw Error(ErrorKind::CorruptFile, "label id out of range");
    if (stats_ && (stats_->mean.size() != dim_ || stats_->stddev.size() != dim_))
        throw Error(ErrorKind::DimensionError, "normalization statistics do not match dimension");

    matrix_.assign(raw_.begin(), raw_.end());
    if (stats_)
        for (std::size_t i = 0; i < size(); ++i)
            stats_->apply(std::span<double>(matrix_).subspan(i * dim_, dim_));
}

std::span<const float> FeatureIndex::raw_row(std::size_t i) const {
    if (i >= size())
        throw Error(ErrorKind::InvalidParameter, "record id out of range");
    return std::span<const float>(raw_).subspan(i * dim_, dim_);
}

std::span<const double> FeatureIndex::row(std::size_t i) const {
    if (i >= size())
        throw Error(ErrorKind::InvalidParameter, "record id out of range");
    return std::span<const double>(matrix_).subspan(i * dim_, dim_);
}

std::vector<double> FeatureIndex::transform_query(std::span<const double> descriptor) const {
    if (descriptor.size() != dim_)
        throw Error(ErrorKind::DimensionError, "query has " + std::to_string(descriptor.size()) +
                                                   " dimensions, index has " + std::to_string(dim_));
    std::vector<double> q(dim_);
    for (std::size_t j = 0; j < dim_; ++j)
        q[j] = static_cast<double>(static_cast<float>(descriptor[j]));
    if (stats_)
        stats_->apply(q);
    return q;
}

std::vector<std::size_t> FeatureIndex::records_with_label(std::uint16_t label_id) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < size(); ++i)
        if (label_ids_[i] == label_id)
            out.push_back(i);
    return out;
}

void FeatureIndexBuilder::add(const std::string& label, std::span<const double> descriptor, std::string path) {
    if (descriptor.size() != dim_)
        throw Error(ErrorKind::DimensionError, "descriptor length does not match index dimension");
    for (double v : descriptor)
        if (!std::isfinite(v))
            throw Error(ErrorKind::InvalidParameter, "non-finite descriptor entry");
    auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) {
        if (labels_.size() >= std::numeric_limits<std::uint16_t>::max())
            throw Error(ErrorKind::InvalidParameter, "too many labels");
        labels_.push_back(label);
        it = labels_.end() - 1;
    }
    label_ids_.push_back(static_cast<std::uint16_t>(it - labels_.begin()));
    for (double v : descriptor)
        raw_.push_back(static_cast<float>(v));
    paths_.push_back(std::move(path));
}

FeatureIndex FeatureIndexBuilder::build() && {
    return FeatureIndex(dim_, std::move(labels_), std::move(label_ids_), std::move(raw_), std::move(paths_));
}

FeatureIndex normalize_features(const FeatureIndex& index) {
    if (index.empty())
        throw Error(ErrorKind::EmptyDataset, "cannot normalize an empty index");
    const std::vector<double> raw(index.raw().begin(), index.raw().end());
    return FeatureIndex(index.dim(), index.labels(), index.label_ids(),
                        std::vector<float>(index.raw().begin(), index.raw().end()), index.paths(),
                        NormStats::compute(raw, index.dim()));
}

} // namespace cbir
