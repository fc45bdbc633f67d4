/**
 * @file service.hpp
 * @brief Read-only JSON API over a loaded index and optional model.
 *
 *   GET  /api/images?page=&page_size=&label=   paginated listing, 0-based pages, ordered by id
 *   GET  /api/query?id=&mode=&k=&metric=       retrieval by indexed id
 *   POST /api/query                            retrieval by uploaded image (multipart field "image")
 *   GET  /thumb/{id}                           JPEG thumbnail, longest side 128
 *
 * Handlers are pure functions of the request and the immutable loaded data.
 */
#pragma once

#include "cbir/feature_index.hpp"
#include "cbir/svm.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace httplib {
class Server;
}

namespace cbir {

struct ServiceConfig {
    std::size_t max_upload_bytes = 8u << 20;
    std::size_t default_page_size = 50;
    std::size_t max_page_size = 500;
    std::size_t max_k = 1000;
    std::string cors_origin = "*";
    std::string static_dir; ///< mounted at "/" when set
};

struct Reply {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
};

using Params = std::map<std::string, std::string>;

class QueryService {
public:
    QueryService(FeatureIndex index, std::optional<MulticlassModel> model, ServiceConfig config = {});

    const FeatureIndex& index() const noexcept { return index_; }
    bool has_model() const noexcept { return model_.has_value(); }
    const ServiceConfig& config() const noexcept { return config_; }

    Reply list_images(const Params& params) const;
    Reply query_by_id(const Params& params) const;
    Reply query_by_image(const std::string& image_bytes, const Params& params) const;
    Reply thumbnail(const std::string& id_text) const;

    /// Registers the routes, CORS headers, upload cap and static mount.
    void mount(httplib::Server& server) const;

private:
    FeatureIndex index_;
    std::optional<MulticlassModel> model_;
    ServiceConfig config_;
};

} // namespace cbir
