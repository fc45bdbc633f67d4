#include "cbir/retrieval.hpp"
#include "cbir/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <thread>

namespace cbir {

namespace {

void check_lengths(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw Error(ErrorKind::DimensionError,
                    "length mismatch " + std::to_string(x.size()) + " vs " + std::to_string(y.size()));
}

// Shared kernel so scalar and batch paths round identically.
double p_norm_unchecked(const double* x, const double* y, std::size_t n, double p) {
    double acc = 0.0;
    if (p == 1.0) {
        for (std::size_t j = 0; j < n; ++j)
            acc += std::abs(x[j] - y[j]);
        return acc;
    }
    if (p == 2.0) {
        for (std::size_t j = 0; j < n; ++j) {
            const double d = x[j] - y[j];
            acc += d * d;
        }
        return std::sqrt(acc);
    }
    // Scale by the largest difference so large p does not underflow.
    double mx = 0.0;
    for (std::size_t j = 0; j < n; ++j)
        mx = std::max(mx, std::abs(x[j] - y[j]));
    if (mx == 0.0)
        return 0.0;
    for (std::size_t j = 0; j < n; ++j)
        acc += std::pow(std::abs(x[j] - y[j]) / mx, p);
    return mx * std::pow(acc, 1.0 / p);
}

double inf_norm_unchecked(const double* x, const double* y, std::size_t n) {
    double mx = 0.0;
    for (std::size_t j = 0; j < n; ++j)
        mx = std::max(mx, std::abs(x[j] - y[j]));
    return mx;
}

void check_query(std::span<const double> query, const FeatureIndex& index) {
    if (index.empty())
        throw Error(ErrorKind::EmptyDataset, "index is empty");
    if (query.size() != index.dim())
        throw Error(ErrorKind::DimensionError, "query has " + std::to_string(query.size()) +
                                                   " dimensions, index has " + std::to_string(index.dim()));
}

} // namespace

DistanceMetric DistanceMetric::p_norm(double p) {
    if (!(p >= 1.0) || !std::isfinite(p))
        throw Error(ErrorKind::InvalidParameter, "p-norm requires finite p >= 1");
    return DistanceMetric(p, false);
}

DistanceMetric DistanceMetric::parse(std::string_view text) {
    if (text == "linf" || text == "inf" || text == "pinf")
        return infinity();
    if (text == "l1")
        return l1();
    if (text == "l2")
        return l2();
    if (text.size() >= 2 && (text[0] == 'p' || text[0] == 'l')) {
        double p = 0.0;
        const auto* first = text.data() + 1;
        const auto* last = text.data() + text.size();
        auto [ptr, ec] = std::from_chars(first, last, p);
        if (ec == std::errc{} && ptr == last)
            return p_norm(p);
    }
    throw Error(ErrorKind::InvalidParameter, "unknown metric '" + std::string(text) + "'");
}

std::string DistanceMetric::name() const {
    if (infinity_)
        return "linf";
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, p_);
    return "p" + std::string(buf, ptr);
}

double DistanceMetric::operator()(std::span<const double> x, std::span<const double> y) const {
    check_lengths(x, y);
    return infinity_ ? inf_norm_unchecked(x.data(), y.data(), x.size())
                     : p_norm_unchecked(x.data(), y.data(), x.size(), p_);
}

double p_norm_distance(std::span<const double> x, std::span<const double> y, double p) {
    return DistanceMetric::p_norm(p)(x, y);
}

double infinity_norm_distance(std::span<const double> x, std::span<const double> y) {
    return DistanceMetric::infinity()(x, y);
}

std::vector<double> naive_knn_scan(std::span<const double> query, const FeatureIndex& index) {
    check_query(query, index);
    std::vector<double> result(index.size());
    std::vector<double> diff(index.dim());
    for (std::size_t image = 0; image < index.size(); ++image) {
        const std::span<const double> rec = index.row(image);
        for (std::size_t j = 0; j < index.dim(); ++j)
            diff[j] = std::abs(query[j] - rec[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < index.dim(); ++j)
            sum += diff[j];
        result[image] = sum;
    }
    return result;
}

std::vector<double> batch_distances(std::span<const double> query, const FeatureIndex& index,
                                    const DistanceMetric& metric, unsigned threads) {
    check_query(query, index);
    const std::size_t n = index.size();
    const std::size_t d = index.dim();
    const double* block = index.matrix().data();
    std::vector<double> out(n);

    auto scan = [&](std::size_t lo, std::size_t hi) {
        if (metric.is_infinity())
            for (std::size_t i = lo; i < hi; ++i)
                out[i] = inf_norm_unchecked(query.data(), block + i * d, d);
        else
            for (std::size_t i = lo; i < hi; ++i)
                out[i] = p_norm_unchecked(query.data(), block + i * d, d, metric.p());
    };

    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    constexpr std::size_t kMinWork = 1 << 16;
    if (threads == 1 || n * d < kMinWork) {
        scan(0, n);
        return out;
    }
    const std::size_t chunk = (n + threads - 1) / threads;
    std::vector<std::jthread> pool;
    for (std::size_t lo = 0; lo < n; lo += chunk)
        pool.emplace_back(scan, lo, std::min(n, lo + chunk));
    pool.clear();
    return out;
}

std::vector<double> subset_distances(std::span<const double> query, const FeatureIndex& index,
                                     std::span<const std::size_t> ids, const DistanceMetric& metric) {
    check_query(query, index);
    std::vector<double> out;
    out.reserve(ids.size());
    for (std::size_t id : ids)
        out.push_back(metric(query, index.row(id)));
    return out;
}

std::vector<Ranked> top_k(std::span<const double> distances, std::span<const std::uint64_t> ids, std::size_t k) {
    if (k < 1)
        throw Error(ErrorKind::InvalidParameter, "k must be at least 1");
    if (distances.size() != ids.size())
        throw Error(ErrorKind::DimensionError, "ids and distances differ in length");
    std::vector<Ranked> all(distances.size());
    for (std::size_t i = 0; i < all.size(); ++i)
        all[i] = {ids[i], distances[i]};
    const auto less = [](const Ranked& a, const Ranked& b) {
        return a.distance != b.distance ? a.distance < b.distance : a.id < b.id;
    };
    const std::size_t m = std::min(k, all.size());
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(m), all.end(), less);
    all.resize(m);
    return all;
}

std::vector<Ranked> top_k(std::span<const double> distances, std::size_t k) {
    std::vector<std::uint64_t> ids(distances.size());
    for (std::size_t i = 0; i < ids.size(); ++i)
        ids[i] = i;
    return top_k(distances, ids, k);
}

namespace {

std::vector<RankedResult> with_labels(const FeatureIndex& index, const std::vector<Ranked>& ranked) {
    std::vector<RankedResult> out;
    out.reserve(ranked.size());
    for (const Ranked& r : ranked)
        out.push_back({r.id, index.label(r.id), r.distance});
    return out;
}

} // namespace

std::vector<RankedResult> knn_query(const FeatureIndex& index, std::span<const double> descriptor, std::size_t k,
                                    const DistanceMetric& metric) {
    const std::vector<double> q = index.transform_query(descriptor);
    return with_labels(index, top_k(batch_distances(q, index, metric), k));
}

std::vector<RankedResult> knn_query_within(const FeatureIndex& index, std::span<const double> descriptor,
                                           std::span<const std::uint16_t> label_ids, std::size_t k,
                                           const DistanceMetric& metric) {
    const std::vector<double> q = index.transform_query(descriptor);
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < index.size(); ++i)
        if (std::find(label_ids.begin(), label_ids.end(), index.label_id(i)) != label_ids.end())
            rows.push_back(i);
    const std::vector<std::uint64_t> ids(rows.begin(), rows.end());
    if (rows.empty())
        return {};
    return with_labels(index, top_k(subset_distances(q, index, rows, metric), ids, k));
}

} // namespace cbir
