#include "cbir/eval.hpp"
#include "cbir/error.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

namespace cbir {

Split stratified_split(std::span<const std::uint16_t> label_ids, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw Error(ErrorKind::InvalidParameter, "test fraction must lie in (0, 1)");
    std::uint16_t max_label = 0;
    for (auto l : label_ids)
        max_label = std::max(max_label, l);
    std::vector<std::vector<std::size_t>> members(label_ids.empty() ? 0 : max_label + 1u);
    for (std::size_t i = 0; i < label_ids.size(); ++i)
        members[label_ids[i]].push_back(i);

    std::mt19937_64 rng(seed);
    Split split;
    for (auto& m : members) {
        const std::size_t n = m.size();
        if (n == 0)
            continue;
        for (std::size_t i = n - 1; i > 0; --i) {
            const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
            std::swap(m[i], m[j]);
        }
        std::size_t n_test = 0;
        if (n >= 2)
            n_test = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(n * test_fraction)), 1, n - 1);
        split.test.insert(split.test.end(), m.begin(), m.begin() + static_cast<std::ptrdiff_t>(n_test));
        split.train.insert(split.train.end(), m.begin() + static_cast<std::ptrdiff_t>(n_test), m.end());
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

FeatureIndex select_records(const FeatureIndex& index, std::span<const std::size_t> ids) {
    std::vector<std::uint16_t> label_ids;
    std::vector<float> raw;
    std::vector<std::string> paths;
    label_ids.reserve(ids.size());
    raw.reserve(ids.size() * index.dim());
    for (std::size_t id : ids) {
        label_ids.push_back(index.label_id(id));
        auto row = index.raw_row(id);
        raw.insert(raw.end(), row.begin(), row.end());
        paths.push_back(index.path(id));
    }
    return FeatureIndex(index.dim(), index.labels(), std::move(label_ids), std::move(raw), std::move(paths));
}

namespace {

std::vector<double> raw_double_row(const FeatureIndex& index, std::size_t i) {
    auto r = index.raw_row(i);
    return {r.begin(), r.end()};
}

} // namespace

std::vector<KnnScore> evaluate_knn(const FeatureIndex& index, const Split& split, std::span<const std::size_t> ks,
                                   const DistanceMetric& metric, bool normalize) {
    if (split.train.empty() || split.test.empty())
        throw Error(ErrorKind::EmptyDataset, "split has an empty side");
    FeatureIndex train = select_records(index, split.train);
    if (normalize)
        train = normalize_features(train);

    std::vector<KnnScore> scores;
    for (std::size_t k : ks) {
        if (k < 1)
            throw Error(ErrorKind::InvalidParameter, "k must be at least 1");
        scores.push_back({k, 0.0});
    }
    const std::size_t k_max = ks.empty() ? 0 : *std::max_element(ks.begin(), ks.end());
    for (std::size_t q : split.test) {
        const auto query = train.transform_query(raw_double_row(index, q));
        const auto ranked = top_k(batch_distances(query, train, metric, 1), k_max);
        for (auto& s : scores) {
            std::size_t hits = 0;
            for (std::size_t r = 0; r < std::min(s.k, ranked.size()); ++r)
                hits += train.label_id(ranked[r].id) == index.label_id(q);
            s.precision += static_cast<double>(hits) / static_cast<double>(s.k);
        }
    }
    for (auto& s : scores)
        s.precision /= static_cast<double>(split.test.size());
    return scores;
}

SvmScore evaluate_svm(const FeatureIndex& index, const Split& split, const KernelSpec& kernel, double C,
                      std::uint64_t seed, unsigned threads) {
    if (split.train.empty() || split.test.empty())
        throw Error(ErrorKind::EmptyDataset, "split has an empty side");
    const FeatureIndex train = select_records(index, split.train);
    MulticlassOptions options;
    options.smo.seed = seed;
    options.threads = threads;
    const MulticlassModel model =
        train_multiclass(raw_matrix(train), train.label_ids(), train.labels(), kernel, C, options);

    const std::size_t n_classes = index.labels().size();
    SvmScore score;
    score.pair_models = model.models.size();
    score.confusion.assign(n_classes, std::vector<std::size_t>(n_classes, 0));
    std::size_t correct = 0;
    for (std::size_t q : split.test) {
        const std::size_t predicted = model.predict(raw_double_row(index, q)).class_index;
        ++score.confusion[index.label_id(q)][predicted];
        correct += predicted == index.label_id(q);
    }
    score.accuracy = static_cast<double>(correct) / static_cast<double>(split.test.size());
    for (std::size_t c = 0; c < n_classes; ++c) {
        std::size_t total = 0;
        for (auto v : score.confusion[c])
            total += v;
        score.per_class_count.push_back(total);
        score.per_class_accuracy.push_back(total ? static_cast<double>(score.confusion[c][c]) / total : 0.0);
    }
    return score;
}

EvalReport evaluate(const FeatureIndex& index, const EvalOptions& options) {
    if (index.empty())
        throw Error(ErrorKind::EmptyDataset, "index is empty");
    const Split split = stratified_split(index.label_ids(), options.test_fraction, options.seed);
    EvalReport report;
    report.classes = index.labels();
    report.train_count = split.train.size();
    report.test_count = split.test.size();
    report.test_fraction = options.test_fraction;
    report.seed = options.seed;
    report.metric = options.metric.name();
    if (options.run_knn)
        report.knn = evaluate_knn(index, split, options.ks, options.metric, options.normalize);
    if (options.run_svm)
        report.svm = evaluate_svm(index, split, options.kernel, options.C, options.seed, options.threads);
    return report;
}

nlohmann::json to_json(const EvalReport& report) {
    nlohmann::json j;
    j["classes"] = report.classes;
    j["train_count"] = report.train_count;
    j["test_count"] = report.test_count;
    j["test_fraction"] = report.test_fraction;
    j["seed"] = report.seed;
    j["metric"] = report.metric;
    nlohmann::json p = nlohmann::json::object();
    for (const auto& s : report.knn)
        p[std::to_string(s.k)] = s.precision;
    j["precision_at_k"] = p;
    if (report.svm) {
        j["svm"] = {{"accuracy", report.svm->accuracy},
                    {"confusion", report.svm->confusion},
                    {"per_class_accuracy", report.svm->per_class_accuracy},
                    {"per_class_count", report.svm->per_class_count},
                    {"pair_models", report.svm->pair_models}};
    } else {
        j["svm"] = nullptr;
    }
    return j;
}

std::string format_report(const EvalReport& report) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(4);
    out << "split: " << report.train_count << " train / " << report.test_count << " test, seed " << report.seed
        << "\n";
    for (const auto& s : report.knn)
        out << "knn precision@" << s.k << " (" << report.metric << "): " << s.precision << "\n";
    if (report.svm) {
        const SvmScore& s = *report.svm;
        out << "svm accuracy: " << s.accuracy << " (" << s.pair_models << " pair models)\n";
        std::size_t width = 5;
        for (const auto& c : report.classes)
            width = std::max(width, c.size());
        out << std::left << std::setw(static_cast<int>(width)) << "class" << std::right;
        for (std::size_t c = 0; c < report.classes.size(); ++c)
            out << std::setw(5) << c;
        out << "  accuracy\n";
        for (std::size_t r = 0; r < report.classes.size(); ++r) {
            out << std::left << std::setw(static_cast<int>(width)) << report.classes[r] << std::right;
            for (auto v : s.confusion[r])
                out << std::setw(5) << v;
            out << "  " << s.per_class_accuracy[r] << "\n";
        }
    }
    return out.str();
}

} // namespace cbir
