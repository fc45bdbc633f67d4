#include "cbir/error.hpp"
#include "cbir/svm.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

namespace cbir {

std::vector<std::pair<std::uint16_t, std::uint16_t>> class_pairs(std::size_t num_classes) {
    std::vector<std::pair<std::uint16_t, std::uint16_t>> pairs;
    pairs.reserve(num_classes * (num_classes - (num_classes > 0)) / 2);
    for (std::size_t i = 0; i < num_classes; ++i)
        for (std::size_t j = i + 1; j < num_classes; ++j)
            pairs.emplace_back(static_cast<std::uint16_t>(i), static_cast<std::uint16_t>(j));
    return pairs;
}

namespace {

// Higher votes first, then higher strength, then lower index.
bool prefers(const VoteOutcome& v, std::size_t a, std::size_t b) {
    if (v.votes[a] != v.votes[b])
        return v.votes[a] > v.votes[b];
    if (v.strength[a] != v.strength[b])
        return v.strength[a] > v.strength[b];
    return a < b;
}

} // namespace

VoteOutcome tally_votes(std::size_t num_classes, std::span<const PairDecision> decisions) {
    if (num_classes == 0)
        throw Error(ErrorKind::DegenerateLabels, "no classes to vote for");
    VoteOutcome out;
    out.votes.assign(num_classes, 0);
    out.strength.assign(num_classes, 0.0);
    for (const PairDecision& d : decisions) {
        const std::uint16_t winner = d.value >= 0.0 ? d.positive : d.negative;
        if (winner == kRestClass)
            continue;
        if (winner >= num_classes)
            throw Error(ErrorKind::InvalidParameter, "decision refers to an unknown class");
        ++out.votes[winner];
        out.strength[winner] += std::abs(d.value);
    }
    for (std::size_t c = 1; c < num_classes; ++c)
        if (prefers(out, c, out.winner))
            out.winner = c;
    return out;
}

std::vector<std::size_t> ClassPrediction::ranking() const {
    VoteOutcome v{class_index, votes, strength};
    std::vector<std::size_t> order(votes.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return prefers(v, a, b); });
    return order;
}

ClassPrediction MulticlassModel::predict(std::span<const double> x) const {
    if (classes.empty() || models.empty())
        throw Error(ErrorKind::DegenerateModel, "multiclass model is empty");
    ClassPrediction p;
    p.decisions.reserve(models.size());
    for (const PairModel& m : models)
        p.decisions.push_back({m.positive, m.negative, m.model.decision(x)});

    if (strategy == MulticlassStrategy::one_vs_one) {
        VoteOutcome v = tally_votes(classes.size(), p.decisions);
        p.class_index = v.winner;
        p.votes = std::move(v.votes);
        p.strength = std::move(v.strength);
    } else {
        // One-vs-all: the largest real-valued score wins; votes mark positive scores.
        p.votes.assign(classes.size(), 0);
        p.strength.assign(classes.size(), -std::numeric_limits<double>::infinity());
        for (const PairDecision& d : p.decisions) {
            p.strength[d.positive] = d.value;
            p.votes[d.positive] = d.value >= 0.0 ? 1 : 0;
        }
        p.class_index = static_cast<std::size_t>(
            std::max_element(p.strength.begin(), p.strength.end()) - p.strength.begin());
    }
    p.label = classes[p.class_index];
    return p;
}

Matrix raw_matrix(const FeatureIndex& index) {
    return Matrix(index.size(), index.dim(), std::vector<double>(index.raw().begin(), index.raw().end()));
}

MulticlassModel train_multiclass(const Matrix& X, std::span<const std::uint16_t> labels,
                                 std::vector<std::string> classes, const KernelSpec& spec, double C,
                                 const MulticlassOptions& options) {
    if (X.rows != labels.size())
        throw Error(ErrorKind::DimensionError, "labels and rows differ in count");
    std::vector<std::size_t> counts(classes.size(), 0);
    for (auto l : labels) {
        if (l >= classes.size())
            throw Error(ErrorKind::DegenerateLabels, "label id out of range");
        ++counts[l];
    }
    if (classes.size() < 2 || std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; }) < 2)
        throw Error(ErrorKind::DegenerateLabels, "need at least two populated classes");
    for (std::size_t c = 0; c < counts.size(); ++c)
        if (counts[c] == 0)
            throw Error(ErrorKind::DegenerateLabels, "class '" + classes[c] + "' has no examples");
    spec.validate(true);

    MulticlassModel model;
    model.strategy = options.strategy;
    model.classes = std::move(classes);

    std::vector<std::pair<std::uint16_t, std::uint16_t>> jobs;
    if (options.strategy == MulticlassStrategy::one_vs_one)
        jobs = class_pairs(model.classes.size());
    else
        for (std::size_t c = 0; c < model.classes.size(); ++c)
            jobs.emplace_back(static_cast<std::uint16_t>(c), kRestClass);

    std::vector<PairModel> trained(jobs.size());
    auto train_job = [&](std::size_t k) {
        const auto [pos, neg] = jobs[k];
        std::vector<std::size_t> rows;
        std::vector<int> y;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == pos) {
                rows.push_back(i);
                y.push_back(1);
            } else if (neg == kRestClass || labels[i] == neg) {
                rows.push_back(i);
                y.push_back(-1);
            }
        }
        Matrix sub(rows.size(), X.cols);
        for (std::size_t r = 0; r < rows.size(); ++r)
            std::copy(X.row(rows[r]).begin(), X.row(rows[r]).end(), sub.row(r).begin());
        SmoOptions smo = options.smo;
        smo.seed = options.smo.seed + k;
        smo.record_trace = false;
        trained[k] = PairModel{pos, neg, train_binary_smo(sub, y, spec, C, smo).model};
    };

    unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(jobs.size()));
    if (threads <= 1) {
        for (std::size_t k = 0; k < jobs.size(); ++k)
            train_job(k);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::atomic<bool> failed{false};
        {
            std::vector<std::jthread> pool;
            for (unsigned t = 0; t < threads; ++t)
                pool.emplace_back([&] {
                    for (std::size_t k; !failed && (k = next++) < jobs.size();) {
                        try {
                            train_job(k);
                        } catch (...) {
                            if (!failed.exchange(true))
                                failure = std::current_exception();
                        }
                    }
                });
        }
        if (failure)
            std::rethrow_exception(failure);
    }
    model.models = std::move(trained);
    return model;
}

MulticlassModel train_one_vs_one(const FeatureIndex& index, const KernelSpec& spec, double C, std::uint64_t seed) {
    MulticlassOptions options;
    options.smo.seed = seed;
    return train_multiclass(raw_matrix(index), index.label_ids(), index.labels(), spec, C, options);
}

} // namespace cbir
