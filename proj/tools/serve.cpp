#include "cbir/error.hpp"
#include "cbir/service.hpp"
#include "cbir/store.hpp"

#include <CLI11.hpp>
#include <httplib.h>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"HTTP JSON API over a feature index", "cbir-serve"};
    int port = 8080;
    std::string host = "127.0.0.1";
    std::string index_path, model_path;
    cbir::ServiceConfig config;
    app.add_option("--port", port)->capture_default_str();
    app.add_option("--host", host)->capture_default_str();
    app.add_option("--index", index_path)->required();
    app.add_option("--model", model_path, "enables svm mode");
    app.add_option("--static-dir", config.static_dir, "directory served at /");
    app.add_option("--max-upload", config.max_upload_bytes, "upload cap in bytes")->capture_default_str();
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        std::optional<cbir::MulticlassModel> model;
        if (!model_path.empty())
            model = cbir::load_model(model_path);
        const cbir::QueryService service(cbir::load_index(index_path), std::move(model), config);
        httplib::Server server;
        service.mount(server);
        std::cerr << "serving " << service.index().size() << " records on http://" << host << ":" << port
                  << (service.has_model() ? " (svm enabled)" : "") << "\n";
        if (!server.listen(host, port)) {
            std::cerr << "error: cannot listen on " << host << ":" << port << "\n";
            return 2;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
