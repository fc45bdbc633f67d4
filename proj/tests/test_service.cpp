#include "cbir/descriptor.hpp"
#include "cbir/image.hpp"
#include "cbir/retrieval.hpp"
#include "cbir/service.hpp"
#include "cbir/store.hpp"
#include "cbir/synthetic.hpp"

#include <doctest.h>
#include <httplib.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <thread>

using namespace cbir;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Fixture {
    fs::path root = fs::temp_directory_path() / "cbir_test_service";
    FeatureIndex index;
    MulticlassModel model;

    Fixture() {
        fs::remove_all(root);
        SyntheticOptions so;
        so.classes = 3;
        so.per_class = 8;
        so.size = 40;
        write_synthetic_corpus(root / "data", so);
        index = ingest_dataset(root / "data").index;
        model = train_one_vs_one(index, KernelSpec::gaussian(0.0), 10.0, 0);
        fs::create_directories(root / "static");
        std::ofstream(root / "static" / "index.html") << "<html>ui</html>";
    }
    ~Fixture() { fs::remove_all(root); }
};

const Fixture& fixture() {
    static Fixture f;
    return f;
}

json body(const Reply& r) { return json::parse(r.body); }

json without_timing(json j) {
    j.erase("timing_ms");
    return j;
}

std::string file_bytes(const std::string& path) {
    const auto b = read_file(path);
    return {b.begin(), b.end()};
}

} // namespace

TEST_CASE("image listing pages by id") {
    const QueryService s(fixture().index, std::nullopt);
    json j = body(s.list_images({{"page_size", "10"}}));
    CHECK(j["total"] == 24);
    CHECK(j["pages"] == 3);
    CHECK(j["images"].size() == 10);
    CHECK(j["images"][0]["id"] == 0);
    CHECK(j["images"][0]["thumbnail_url"] == "/thumb/0");
    CHECK(j["labels"].size() == 3);
    j = body(s.list_images({{"page_size", "10"}, {"page", "2"}}));
    CHECK(j["images"].size() == 4);
    CHECK(j["images"][3]["id"] == 23);
    const Reply beyond = s.list_images({{"page", "9"}});
    CHECK(beyond.status == 200);
    CHECK(body(beyond)["images"].empty());
    j = body(s.list_images({{"label", "green_checks"}}));
    CHECK(j["total"] == 8);
    for (const auto& im : j["images"])
        CHECK(im["label"] == "green_checks");
    CHECK(s.list_images({{"page_size", "0"}}).status == 400);
    CHECK(s.list_images({{"page", "x"}}).status == 400);
}

TEST_CASE("query by id in knn mode") {
    const QueryService s(fixture().index, std::nullopt);
    const Reply r = s.query_by_id({{"id", "5"}, {"k", "5"}});
    REQUIRE(r.status == 200);
    const json j = body(r);
    CHECK(j["mode"] == "knn");
    CHECK(j["results"].size() == 5);
    CHECK(j["results"][0]["id"] == 5);
    CHECK(j["results"][0]["score"].get<double>() == 0.0);
    CHECK(j["results"][0]["thumbnail_url"] == "/thumb/5");
    CHECK_FALSE(j.contains("predicted_class"));
    CHECK(j["timing_ms"].is_number());
    for (std::size_t i = 1; i < j["results"].size(); ++i)
        CHECK(j["results"][i - 1]["score"].get<double>() <= j["results"][i]["score"].get<double>());
}

TEST_CASE("query parameter errors") {
    const QueryService s(fixture().index, std::nullopt);
    CHECK(s.query_by_id({{"id", "999"}}).status == 404);
    CHECK(s.query_by_id({}).status == 400);
    CHECK(s.query_by_id({{"id", "abc"}}).status == 400);
    CHECK(s.query_by_id({{"id", "1"}, {"k", "0"}}).status == 400);
    CHECK(s.query_by_id({{"id", "1"}, {"mode", "magic"}}).status == 400);
    CHECK(s.query_by_id({{"id", "1"}, {"metric", "cosine"}}).status == 400);
    CHECK(s.query_by_id({{"id", "1"}, {"mode", "svm"}}).status == 409);
}

TEST_CASE("query by id in svm mode stays within the predicted class") {
    const QueryService s(fixture().index, fixture().model);
    const json j = body(s.query_by_id({{"id", "9"}, {"mode", "svm"}, {"k", "5"}}));
    REQUIRE(j.contains("predicted_class"));
    CHECK(j["predicted_class"] == fixture().index.label(9));
    CHECK(j["results"].size() <= 5);
    for (const auto& r : j["results"])
        CHECK(r["label"] == j["predicted_class"]);
    CHECK(j["results"][0]["id"] == 9);
}

TEST_CASE("identical requests give identical bodies apart from timing") {
    const QueryService s(fixture().index, fixture().model);
    for (const std::string mode : {"knn", "svm"}) {
        const Params p{{"id", "3"}, {"mode", mode}, {"metric", "l2"}};
        CHECK(without_timing(body(s.query_by_id(p))) == without_timing(body(s.query_by_id(p))));
    }
}

TEST_CASE("upload query") {
    const Fixture& f = fixture();
    const QueryService s(f.index, f.model);
    const std::size_t id = 17;
    const std::string png = file_bytes(f.index.path(id));
    json j = body(s.query_by_image(png, {{"k", "3"}}));
    CHECK(j["results"][0]["id"] == id);
    CHECK(j["results"][0]["score"].get<double>() == 0.0);

    // A lossy copy lands where its own descriptor says it should.
    const auto jpeg = encode_jpeg(load_image(f.index.path(id)), 95);
    j = body(s.query_by_image(std::string(jpeg.begin(), jpeg.end()), {{"k", "3"}}));
    const auto q = f.index.transform_query(compose_descriptor(decode_image(jpeg)));
    const auto d = batch_distances(q, f.index, DistanceMetric::l1());
    const auto best = top_k(d, 1)[0];
    CHECK(j["results"][0]["id"] == best.id);
    CHECK(j["results"][0]["score"].get<double>() == doctest::Approx(best.distance).epsilon(1e-12));
    CHECK(best.id == id);

    j = body(s.query_by_image(png, {{"mode", "svm"}}));
    CHECK(j["predicted_class"] == f.index.label(id));

    CHECK(s.query_by_image("definitely not an image", {}).status == 400);
    CHECK(s.query_by_image("", {}).status == 400);
    ServiceConfig tiny;
    tiny.max_upload_bytes = 100;
    CHECK(QueryService(f.index, std::nullopt, tiny).query_by_image(png, {}).status == 413);
}

TEST_CASE("thumbnails") {
    const QueryService s(fixture().index, std::nullopt);
    const Reply r = s.thumbnail("4");
    REQUIRE(r.status == 200);
    CHECK(r.content_type == "image/jpeg");
    const ImageRaster t = decode_image(std::span(reinterpret_cast<const std::uint8_t*>(r.body.data()), r.body.size()));
    CHECK(std::max(t.width, t.height) <= 128);
    CHECK(s.thumbnail("24").status == 404);
    CHECK(s.thumbnail("nope").status == 404);
}

TEST_CASE("routes over HTTP") {
    const Fixture& f = fixture();
    ServiceConfig config;
    config.static_dir = (f.root / "static").string();
    config.max_upload_bytes = 64 << 10;
    const QueryService s(f.index, f.model, config);
    httplib::Server server;
    s.mount(server);
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread th([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    httplib::Client c("127.0.0.1", port);
    auto r = c.Get("/api/images?page=0&page_size=50");
    REQUIRE(r);
    CHECK(r->status == 200);
    CHECK(r->get_header_value("Access-Control-Allow-Origin") == "*");
    CHECK(json::parse(r->body)["images"].size() == 24);

    r = c.Get("/api/query?id=2&mode=knn&k=4&metric=l1");
    REQUIRE(r);
    CHECK(r->status == 200);
    CHECK(json::parse(r->body)["results"][0]["id"] == 2);
    CHECK(c.Get("/api/query?id=1000")->status == 404);
    CHECK(c.Get("/api/query?id=1&mode=svm")->status == 200);

    const std::string png = file_bytes(f.index.path(11));
    httplib::MultipartFormDataItems items{{"image", png, "q.png", "image/png"}, {"k", "2", "", ""}};
    r = c.Post("/api/query", items);
    REQUIRE(r);
    CHECK(r->status == 200);
    const json j = json::parse(r->body);
    CHECK(j["results"].size() == 2);
    CHECK(j["results"][0]["id"] == 11);

    httplib::MultipartFormDataItems junk{{"image", "garbage bytes", "q.png", "image/png"}};
    CHECK(c.Post("/api/query", junk)->status == 400);
    httplib::MultipartFormDataItems big{{"image", std::string(65 << 10, 'x'), "q.png", "image/png"}};
    CHECK(c.Post("/api/query", big)->status == 413);
    httplib::MultipartFormDataItems huge{{"image", std::string(200 << 10, 'x'), "q.png", "image/png"}};
    auto h = c.Post("/api/query", huge);
    REQUIRE(h);
    CHECK(h->status == 413);

    r = c.Get("/thumb/3");
    REQUIRE(r);
    CHECK(r->status == 200);
    CHECK(r->get_header_value("Content-Type") == "image/jpeg");
    CHECK(c.Get("/thumb/99")->status == 404);

    r = c.Get("/index.html");
    REQUIRE(r);
    CHECK(r->body == "<html>ui</html>");

    server.stop();
    th.join();
}
