#include "cbir/service.hpp"
#include "cbir/descriptor.hpp"
#include "cbir/error.hpp"
#include "cbir/image.hpp"
#include "cbir/pipeline.hpp"
#include "cbir/retrieval.hpp"

#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <charconv>

namespace cbir {

using nlohmann::json;

namespace {

Reply error_reply(int status, const std::string& message) {
    return {status, "application/json", json{{"error", message}}.dump()};
}

struct BadRequest {
    int status;
    std::string message;
};

std::optional<std::string> param(const Params& p, const std::string& key) {
    const auto it = p.find(key);
    if (it == p.end() || it->second.empty())
        return std::nullopt;
    return it->second;
}

std::size_t parse_count(const std::string& text, const char* what) {
    std::size_t v = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || end != text.data() + text.size())
        throw BadRequest{400, std::string("invalid ") + what + ": '" + text + "'"};
    return v;
}

std::string thumb_url(std::size_t id) { return "/thumb/" + std::to_string(id); }

struct QueryParams {
    std::string mode = "knn";
    std::size_t k = kDefaultK;
    DistanceMetric metric = DistanceMetric::l1();
    std::size_t classes = 1;
};

QueryParams parse_query_params(const Params& p, const ServiceConfig& config) {
    QueryParams q;
    if (auto m = param(p, "mode")) {
        if (*m != "knn" && *m != "svm")
            throw BadRequest{400, "mode must be knn or svm"};
        q.mode = *m;
    }
    if (auto k = param(p, "k")) {
        q.k = parse_count(*k, "k");
        if (q.k < 1 || q.k > config.max_k)
            throw BadRequest{400, "k must lie in [1, " + std::to_string(config.max_k) + "]"};
    }
    if (auto m = param(p, "metric")) {
        try {
            q.metric = DistanceMetric::parse(*m);
        } catch (const Error& e) {
            throw BadRequest{400, e.what()};
        }
    }
    if (auto c = param(p, "classes")) {
        q.classes = parse_count(*c, "classes");
        if (q.classes < 1)
            throw BadRequest{400, "classes must be at least 1"};
    }
    return q;
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

} // namespace

QueryService::QueryService(FeatureIndex index, std::optional<MulticlassModel> model, ServiceConfig config)
    : index_(std::move(index)), model_(std::move(model)), config_(std::move(config)) {
    if (index_.empty())
        throw Error(ErrorKind::EmptyDataset, "service needs a nonempty index");
}

Reply QueryService::list_images(const Params& params) const {
    try {
        const std::size_t page = param(params, "page") ? parse_count(*param(params, "page"), "page") : 0;
        std::size_t page_size = config_.default_page_size;
        if (auto s = param(params, "page_size")) {
            page_size = parse_count(*s, "page_size");
            if (page_size < 1 || page_size > config_.max_page_size)
                throw BadRequest{400, "page_size must lie in [1, " + std::to_string(config_.max_page_size) + "]"};
        }
        std::vector<std::size_t> ids;
        if (auto label = param(params, "label")) {
            const auto& labels = index_.labels();
            const auto it = std::find(labels.begin(), labels.end(), *label);
            if (it != labels.end())
                ids = index_.records_with_label(static_cast<std::uint16_t>(it - labels.begin()));
        } else {
            ids.resize(index_.size());
            for (std::size_t i = 0; i < ids.size(); ++i)
                ids[i] = i;
        }
        json images = json::array();
        for (std::size_t r = page * page_size; r < ids.size() && r < (page + 1) * page_size; ++r)
            images.push_back({{"id", ids[r]}, {"label", index_.label(ids[r])}, {"thumbnail_url", thumb_url(ids[r])}});
        json body{{"page", page},
                  {"page_size", page_size},
                  {"total", ids.size()},
                  {"pages", (ids.size() + page_size - 1) / page_size},
                  {"labels", index_.labels()},
                  {"images", std::move(images)}};
        return {200, "application/json", body.dump()};
    } catch (const BadRequest& e) {
        return error_reply(e.status, e.message);
    }
}

namespace {

// Shared tail of both query routes. `raw` is the descriptor before search-space mapping.
json run_query(const FeatureIndex& index, const std::optional<MulticlassModel>& model, const QueryParams& q,
               std::span<const double> raw) {
    json body{{"mode", q.mode}, {"k", q.k}, {"metric", q.metric.name()}};
    std::vector<RankedResult> results;
    if (q.mode == "svm") {
        SvmRetrieval r = svm_retrieve(*model, index, raw, q.k, q.metric, q.classes);
        body["predicted_class"] = r.prediction.label;
        body["votes"] = r.prediction.votes;
        results = std::move(r.results);
    } else {
        results = knn_query(index, raw, q.k, q.metric);
    }
    json list = json::array();
    for (const auto& r : results)
        list.push_back({{"id", r.id}, {"label", r.label}, {"score", r.distance}, {"thumbnail_url", thumb_url(r.id)}});
    body["results"] = std::move(list);
    return body;
}

} // namespace

Reply QueryService::query_by_id(const Params& params) const {
    const auto start = std::chrono::steady_clock::now();
    try {
        const auto id_text = param(params, "id");
        if (!id_text)
            throw BadRequest{400, "missing id"};
        const std::size_t id = parse_count(*id_text, "id");
        if (id >= index_.size())
            throw BadRequest{404, "unknown id " + *id_text};
        const QueryParams q = parse_query_params(params, config_);
        if (q.mode == "svm" && !model_)
            throw BadRequest{409, "svm mode requires a loaded model"};
        const auto row = index_.raw_row(id);
        const std::vector<double> raw(row.begin(), row.end());
        json body = run_query(index_, model_, q, raw);
        body["query"] = {{"id", id}, {"label", index_.label(id)}};
        body["timing_ms"] = elapsed_ms(start);
        return {200, "application/json", body.dump()};
    } catch (const BadRequest& e) {
        return error_reply(e.status, e.message);
    }
}

Reply QueryService::query_by_image(const std::string& image_bytes, const Params& params) const {
    const auto start = std::chrono::steady_clock::now();
    try {
        if (image_bytes.size() > config_.max_upload_bytes)
            throw BadRequest{413, "upload exceeds " + std::to_string(config_.max_upload_bytes) + " bytes"};
        if (image_bytes.empty())
            throw BadRequest{400, "missing image"};
        const QueryParams q = parse_query_params(params, config_);
        if (q.mode == "svm" && !model_)
            throw BadRequest{409, "svm mode requires a loaded model"};
        ImageRaster img;
        try {
            img = decode_image(std::span(reinterpret_cast<const std::uint8_t*>(image_bytes.data()), image_bytes.size()));
        } catch (const Error& e) {
            throw BadRequest{400, e.what()};
        }
        const Descriptor d = compose_descriptor(img);
        json body = run_query(index_, model_, q, d);
        body["query"] = {{"upload", true}};
        body["timing_ms"] = elapsed_ms(start);
        return {200, "application/json", body.dump()};
    } catch (const BadRequest& e) {
        return error_reply(e.status, e.message);
    }
}

Reply QueryService::thumbnail(const std::string& id_text) const {
    std::size_t id = 0;
    try {
        id = parse_count(id_text, "id");
    } catch (const BadRequest&) {
        return error_reply(404, "unknown id " + id_text);
    }
    if (id >= index_.size())
        return error_reply(404, "unknown id " + id_text);
    try {
        const auto bytes = make_thumbnail(load_image(index_.path(id)));
        return {200, "image/jpeg", std::string(bytes.begin(), bytes.end())};
    } catch (const Error& e) {
        return error_reply(404, std::string("image unavailable: ") + e.what());
    }
}

void QueryService::mount(httplib::Server& server) const {
    auto send = [](httplib::Response& res, const Reply& r) {
        res.status = r.status;
        res.set_content(r.body, r.content_type);
    };
    auto params_of = [](const httplib::Request& req) {
        Params p;
        for (const auto& [k, v] : req.params)
            p.emplace(k, v);
        for (const auto& [k, f] : req.files)
            if (k != "image" && f.filename.empty())
                p.emplace(k, f.content);
        return p;
    };

    server.set_default_headers({{"Access-Control-Allow-Origin", config_.cors_origin},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type"}});
    // Multipart framing adds overhead beyond the image itself; the exact cap is enforced per file.
    server.set_payload_max_length(config_.max_upload_bytes + (64u << 10));
    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (res.body.empty())
            res.set_content(json{{"error", httplib::status_message(res.status)}}.dump(), "application/json");
    });

    server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    server.Get("/api/images", [this, send, params_of](const httplib::Request& req, httplib::Response& res) {
        send(res, list_images(params_of(req)));
    });
    server.Get("/api/query", [this, send, params_of](const httplib::Request& req, httplib::Response& res) {
        send(res, query_by_id(params_of(req)));
    });
    server.Post("/api/query", [this, send, params_of](const httplib::Request& req, httplib::Response& res) {
        if (req.is_multipart_form_data()) {
            if (!req.has_file("image"))
                return send(res, error_reply(400, "missing multipart field 'image'"));
            send(res, query_by_image(req.get_file_value("image").content, params_of(req)));
        } else {
            send(res, query_by_image(req.body, params_of(req)));
        }
    });
    server.Get(R"(/thumb/([^/]+))", [this, send](const httplib::Request& req, httplib::Response& res) {
        send(res, thumbnail(req.matches[1]));
    });
    if (!config_.static_dir.empty() && !server.set_mount_point("/", config_.static_dir))
        throw Error(ErrorKind::IoError, "cannot serve static directory " + config_.static_dir);
}

} // namespace cbir
