#include "commands.hpp"

#include "cbir/descriptor.hpp"
#include "cbir/error.hpp"
#include "cbir/eval.hpp"
#include "cbir/pipeline.hpp"
#include "cbir/retrieval.hpp"
#include "cbir/store.hpp"
#include "cbir/svm.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <fstream>
#include <iomanip>
#include <ostream>

namespace cbir::cli {

using nlohmann::json;

namespace {

struct KernelFlags {
    std::string kernel = "gaussian";
    double C = 10.0;
    double sigma = 0.0;
    int degree = 2;
    double coef0 = 1.0;
    std::uint64_t seed = 0;
    std::string strategy = "ovo";

    void add_to(CLI::App* app) {
        app->add_option("--kernel", kernel, "linear, poly or gaussian")->capture_default_str();
        app->add_option("--C", C, "box constraint")->capture_default_str();
        app->add_option("--sigma", sigma, "gaussian width; 0 = median pairwise distance")->capture_default_str();
        app->add_option("--degree", degree, "polynomial degree")->capture_default_str();
        app->add_option("--coef0", coef0, "polynomial offset")->capture_default_str();
        app->add_option("--seed", seed, "tie-breaking seed")->capture_default_str();
        app->add_option("--strategy", strategy, "ovo or ova")->check(CLI::IsMember({"ovo", "ova"}))->capture_default_str();
    }

    KernelSpec spec() const {
        switch (parse_kernel_kind(kernel)) {
        case KernelKind::linear:
            return KernelSpec::linear();
        case KernelKind::polynomial:
            return KernelSpec::polynomial(coef0, degree);
        case KernelKind::gaussian:
            return KernelSpec::gaussian(sigma);
        }
        return {};
    }

    MulticlassOptions options() const {
        MulticlassOptions o;
        o.smo.seed = seed;
        o.strategy = strategy == "ova" ? MulticlassStrategy::one_vs_all : MulticlassStrategy::one_vs_one;
        return o;
    }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void write_json(const std::string& path, const json& j) {
    if (path.empty())
        return;
    const std::string text = j.dump(2) + "\n";
    write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

Descriptor extract_file(const std::string& path) { return compose_descriptor(load_image(path)); }

json results_json(const FeatureIndex& index, const std::vector<RankedResult>& results) {
    json list = json::array();
    for (std::size_t r = 0; r < results.size(); ++r)
        list.push_back({{"rank", r + 1},
                        {"id", results[r].id},
                        {"label", results[r].label},
                        {"distance", results[r].distance},
                        {"path", index.path(results[r].id)}});
    return list;
}

void print_results(std::ostream& out, const FeatureIndex& index, const std::vector<RankedResult>& results) {
    out << std::setw(5) << "rank" << std::setw(8) << "id" << "  " << std::left << std::setw(20) << "label"
        << std::right << std::setw(14) << "distance" << "  path\n";
    for (std::size_t r = 0; r < results.size(); ++r)
        out << std::setw(5) << r + 1 << std::setw(8) << results[r].id << "  " << std::left << std::setw(20)
            << results[r].label << std::right << std::setw(14) << std::setprecision(6) << results[r].distance
            << "  " << index.path(results[r].id) << "\n";
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Content-based image retrieval: indexing, kNN search and SVM classification", "cbir"};
    app.require_subcommand(1);
    std::string json_path;
    app.add_option("--json", json_path, "also write a machine-readable report to this file");

    // index
    auto* index_cmd = app.add_subcommand("index", "extract descriptors from a directory-per-class tree");
    std::string root, index_out;
    bool index_normalize = false;
    unsigned threads = 0;
    index_cmd->add_option("root", root, "dataset root")->required();
    index_cmd->add_option("-o,--out", index_out, "index file")->required();
    index_cmd->add_flag("--normalize", index_normalize, "store z-score statistics");
    index_cmd->add_option("--threads", threads, "0 = hardware concurrency");

    // query
    auto* query_cmd = app.add_subcommand("query", "rank indexed images by distance to a query image");
    std::string index_path, image_path, metric_name = "l1";
    std::size_t k = kDefaultK;
    bool query_normalize = false;
    query_cmd->add_option("--index", index_path)->required();
    query_cmd->add_option("--image", image_path)->required();
    query_cmd->add_option("--k", k)->capture_default_str();
    query_cmd->add_option("--metric", metric_name, "l1, l2, linf or p<real>")->capture_default_str();
    query_cmd->add_flag("--normalize", query_normalize, "z-score the search space");

    // train
    auto* train_cmd = app.add_subcommand("train", "train a multiclass SVM on an index");
    std::string model_out;
    KernelFlags kflags;
    train_cmd->add_option("--index", index_path)->required();
    train_cmd->add_option("-o,--out", model_out, "model file")->required();
    kflags.add_to(train_cmd);

    // classify
    auto* classify_cmd = app.add_subcommand("classify", "predict the class of an image");
    std::string model_path;
    classify_cmd->add_option("--model", model_path)->required();
    classify_cmd->add_option("--image", image_path)->required();

    // retrieve
    auto* retrieve_cmd = app.add_subcommand("retrieve", "kNN within the class the SVM predicts");
    std::size_t search_classes = 1;
    retrieve_cmd->add_option("--model", model_path)->required();
    retrieve_cmd->add_option("--index", index_path)->required();
    retrieve_cmd->add_option("--image", image_path)->required();
    retrieve_cmd->add_option("--k", k)->capture_default_str();
    retrieve_cmd->add_option("--metric", metric_name)->capture_default_str();
    retrieve_cmd->add_option("--classes", search_classes, "search this many top-voted classes")->capture_default_str();

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "hold-out evaluation of kNN precision@k and SVM accuracy");
    double train_fraction = 0.8;
    std::vector<std::size_t> eval_ks{kDefaultK};
    std::string mode = "both";
    bool eval_raw = false;
    KernelFlags eflags;
    eval_cmd->add_option("--index", index_path)->required();
    eval_cmd->add_option("--split", train_fraction, "training fraction per class")->capture_default_str();
    eval_cmd->add_option("--k", eval_ks, "one or more k for precision@k")->capture_default_str();
    eval_cmd->add_option("--metric", metric_name)->capture_default_str();
    eval_cmd->add_option("--mode", mode)->check(CLI::IsMember({"knn", "svm", "both"}))->capture_default_str();
    eval_cmd->add_flag("--raw", eval_raw, "kNN on unnormalized descriptors");
    eflags.add_to(eval_cmd);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        if (auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front())
            err << sub->help();
        else
            err << app.help();
        return kExitUsage;
    }

    const auto start = std::chrono::steady_clock::now();
    try {
        if (index_cmd->parsed()) {
            IngestOptions opts;
            opts.threads = threads;
            IngestReport report = ingest_dataset(root, opts);
            if (index_normalize)
                report.index = normalize_features(report.index);
            save_index(report.index, index_out);
            for (const auto& w : report.warnings)
                err << "warning: " << w << "\n";
            const double secs = seconds_since(start);
            out << report.index.size() << " records, " << report.index.labels().size() << " classes\n";
            out << "skipped " << report.skipped << " files, " << std::fixed << std::setprecision(2) << secs
                << " s\n";
            write_json(json_path, {{"command", "index"},
                                   {"records", report.index.size()},
                                   {"classes", report.index.labels()},
                                   {"skipped", report.skipped},
                                   {"warnings", report.warnings},
                                   {"normalized", report.index.normalized()},
                                   {"seconds", secs},
                                   {"out", index_out}});
        } else if (query_cmd->parsed()) {
            const DistanceMetric metric = DistanceMetric::parse(metric_name);
            FeatureIndex index = load_index(index_path);
            if (query_normalize && !index.normalized())
                index = normalize_features(index);
            const auto results = knn_query(index, extract_file(image_path), k, metric);
            print_results(out, index, results);
            write_json(json_path, {{"command", "query"},
                                   {"image", image_path},
                                   {"k", k},
                                   {"metric", metric.name()},
                                   {"normalized", index.normalized()},
                                   {"results", results_json(index, results)}});
        } else if (train_cmd->parsed()) {
            const FeatureIndex index = load_index(index_path);
            const MulticlassModel model = train_multiclass(raw_matrix(index), index.label_ids(), index.labels(),
                                                           kflags.spec(), kflags.C, kflags.options());
            save_model(model, model_out);
            std::size_t unconverged = 0, support = 0;
            for (const auto& pm : model.models) {
                unconverged += !pm.model.converged;
                support += pm.model.alphas.size();
            }
            const double secs = seconds_since(start);
            out << model.models.size() << " pair models, " << model.classes.size() << " classes\n";
            out << support << " support vectors in total, " << std::fixed << std::setprecision(2) << secs << " s\n";
            if (unconverged)
                err << "warning: " << unconverged << " models stopped at the iteration cap\n";
            write_json(json_path, {{"command", "train"},
                                   {"pair_models", model.models.size()},
                                   {"classes", model.classes},
                                   {"kernel", kflags.spec().name()},
                                   {"C", kflags.C},
                                   {"seed", kflags.seed},
                                   {"support_vectors", support},
                                   {"unconverged", unconverged},
                                   {"seconds", secs},
                                   {"out", model_out}});
        } else if (classify_cmd->parsed()) {
            const MulticlassModel model = load_model(model_path);
            const ClassPrediction p = model.predict(extract_file(image_path));
            out << p.label << "\n";
            json votes = json::object();
            for (std::size_t c = 0; c < model.classes.size(); ++c) {
                out << "  " << std::left << std::setw(20) << model.classes[c] << std::right << std::setw(4)
                    << p.votes[c] << "\n";
                votes[model.classes[c]] = p.votes[c];
            }
            write_json(json_path,
                       {{"command", "classify"}, {"image", image_path}, {"predicted_class", p.label}, {"votes", votes}});
        } else if (retrieve_cmd->parsed()) {
            const DistanceMetric metric = DistanceMetric::parse(metric_name);
            const MulticlassModel model = load_model(model_path);
            const FeatureIndex index = load_index(index_path);
            const SvmRetrieval r = svm_retrieve(model, index, extract_file(image_path), k, metric, search_classes);
            out << "predicted class: " << r.prediction.label << "\n";
            print_results(out, index, r.results);
            write_json(json_path, {{"command", "retrieve"},
                                   {"image", image_path},
                                   {"predicted_class", r.prediction.label},
                                   {"k", k},
                                   {"metric", metric.name()},
                                   {"results", results_json(index, r.results)}});
        } else if (eval_cmd->parsed()) {
            EvalOptions opts;
            opts.test_fraction = 1.0 - train_fraction;
            opts.seed = eflags.seed;
            opts.ks = eval_ks;
            opts.metric = DistanceMetric::parse(metric_name);
            opts.normalize = !eval_raw;
            opts.run_knn = mode != "svm";
            opts.run_svm = mode != "knn";
            opts.kernel = eflags.spec();
            opts.C = eflags.C;
            const EvalReport report = evaluate(load_index(index_path), opts);
            out << format_report(report);
            json j = to_json(report);
            j["command"] = "eval";
            j["seconds"] = seconds_since(start);
            write_json(json_path, j);
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return e.kind() == ErrorKind::InvalidParameter ? kExitUsage : kExitData;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitOk;
}

} // namespace cbir::cli
