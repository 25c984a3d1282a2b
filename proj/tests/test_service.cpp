#include <doctest.h>

#include <chrono>
#include <set>
#include <thread>

#include <httplib.h>

#include "regio/http_service.hpp"
#include "regio/synthetic.hpp"
#include "support.hpp"

using namespace regio;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kData = REGIO_DATA_DIR;

// Store plus a server on an ephemeral port, torn down in reverse order.
class Harness {
public:
    Harness(const fs::path& data_dir, GridRaster grid)
        : store_(data_dir, std::move(grid), FeatureCatalog::load(kData / "catalog.json"),
                 Gazetteer::load(kData / "gazetteer.json")),
          service_(store_) {
        port_ = service_.bind_any_port("127.0.0.1");
        REQUIRE(port_ > 0);
        thread_ = std::thread([this] { service_.listen_after_bind(); });
        service_.wait_until_ready();
        client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    }
    ~Harness() {
        service_.stop();
        thread_.join();
    }

    httplib::Client& client() { return *client_; }
    SessionStore& store() { return store_; }

    std::pair<int, json> get(const std::string& path) { return unpack(client_->Get(path)); }
    std::pair<int, json> post(const std::string& path, const json& body) {
        return unpack(client_->Post(path, body.dump(), "application/json"));
    }
    std::pair<int, json> put(const std::string& path, const json& body) {
        return unpack(client_->Put(path, body.dump(), "application/json"));
    }

    json wait_run(const std::string& sid, const std::string& rid) {
        for (int i = 0; i < 600; ++i) {
            auto [status, body] = get("/sessions/" + sid + "/runs/" + rid);
            REQUIRE(status == 200);
            if (body.at("status") == "completed" || body.at("status") == "failed") return body;
            std::this_thread::sleep_for(std::chrono::milliseconds(20));
        }
        FAIL("run did not finish");
        return {};
    }

private:
    static std::pair<int, json> unpack(const httplib::Result& r) {
        REQUIRE(r);
        return {r->status, r->body.empty() ? json() : json::parse(r->body)};
    }

    SessionStore store_;
    HttpService service_;
    int port_ = 0;
    std::thread thread_;
    std::unique_ptr<httplib::Client> client_;
};

GridRaster fixture_grid() { return demo_study_area(14, 14, 5); }

json quick_config(const std::vector<std::string>& features, std::size_t k) {
    return {{"features", features},
            {"k", k},
            {"seed", 1},
            {"autoencoder", {{"epochs", 40}, {"step", 0.01}}},
            {"som", {{"epochs", 20}}}};
}

std::size_t distinct_regions(const std::string& geojson) {
    const auto doc = json::parse(geojson);
    std::set<std::size_t> ids;
    for (const auto& f : doc.at("features")) ids.insert(f.at("properties").at("region_id").get<std::size_t>());
    return ids.size();
}

}  // namespace

TEST_CASE("status codes per error kind") {
    CHECK(http_status(ErrorKind::NotFound) == 404);
    CHECK(http_status(ErrorKind::Validation) == 422);
    CHECK(http_status(ErrorKind::Infeasible) == 409);
    CHECK(http_status(ErrorKind::Conflict) == 409);
    CHECK(http_status(ErrorKind::Parse) == 400);
    CHECK(http_status(ErrorKind::Corruption) == 500);
}

TEST_CASE("session flow from creation to a refined run") {
    const testing::TempDir dir("service");
    Harness h(dir.path(), fixture_grid());

    auto [s0, summary] = h.get("/dataset/summary");
    CHECK(s0 == 200);
    CHECK(summary.at("features").size() == 12);

    auto [s1, created] = h.post("/sessions", {{"study_area", "Jacksonville, FL"}, {"hazard", "flooding"}});
    REQUIRE(s1 == 201);
    const std::string sid = created.at("session_id");

    auto [s2, sugg] = h.get("/sessions/" + sid + "/suggestions");
    REQUIRE(s2 == 200);
    CHECK(sugg.at("hazard") == "flooding");
    const auto& list = sugg.at("suggestions");
    CHECK(list.at(0).at("feature") == "impervious_surface");
    for (std::size_t i = 1; i < list.size(); ++i) CHECK(list[i - 1].at("score") >= list[i].at("score"));

    std::vector<std::string> features;
    for (std::size_t i = 0; i < 4; ++i) features.push_back(list.at(i).at("feature"));
    auto [s3, rev] = h.put("/sessions/" + sid + "/config", quick_config(features, 4));
    REQUIRE(s3 == 200);
    CHECK(rev.at("revision") == 0);

    auto [s4, started] = h.post("/sessions/" + sid + "/runs", {{"revision", 0}});
    REQUIRE(s4 == 202);
    const std::string rid = started.at("run_id");
    const auto done = h.wait_run(sid, rid);
    REQUIRE(done.at("status") == "completed");
    CHECK(done.at("stages").size() == 6);

    auto r = h.client().Get("/sessions/" + sid + "/runs/" + rid + "/regions.geojson");
    REQUIRE(r);
    CHECK(r->status == 200);
    CHECK(r->get_header_value("Content-Type") == "application/geo+json");
    CHECK(distinct_regions(r->body) == 4);
    auto again = h.client().Get("/sessions/" + sid + "/runs/" + rid + "/regions.geojson");
    CHECK(again->body == r->body);

    auto [s5, stage] = h.get("/sessions/" + sid + "/runs/" + rid + "/stages/metrics");
    CHECK(s5 == 200);
    CHECK(stage.at("data").at("fragmentation") == 0);

    auto [s6, refined] = h.post("/sessions/" + sid + "/refine", {{"delta", {{"k", 3}}}});
    REQUIRE(s6 == 202);
    CHECK(refined.at("revision") == 1);
    const std::string rid2 = refined.at("run_id");
    CHECK(rid2 != rid);
    REQUIRE(h.wait_run(sid, rid2).at("status") == "completed");
    auto r2 = h.client().Get("/sessions/" + sid + "/runs/" + rid2 + "/regions.geojson");
    CHECK(distinct_regions(r2->body) == 3);

    auto [s7, session] = h.get("/sessions/" + sid);
    CHECK(s7 == 200);
    CHECK(session.at("revisions").size() == 2);
    CHECK(session.at("runs").size() == 2);
    CHECK(session.at("revisions").at(1).at("delta") == json{{"k", 3}});
}

TEST_CASE("error paths") {
    const testing::TempDir dir("service-errors");
    Harness h(dir.path(), fixture_grid());
    auto [s0, created] = h.post("/sessions", {{"study_area", "Jacksonville, FL"}, {"hazard", "flooding"}});
    REQUIRE(s0 == 201);
    const std::string sid = created.at("session_id");

    SUBCASE("not found") {
        auto [a, body] = h.get("/sessions/does-not-exist");
        CHECK(a == 404);
        CHECK(body.at("error").at("kind") == "not_found");
        CHECK(h.post("/sessions", {{"study_area", "Atlantis"}, {"hazard", "flooding"}}).first == 404);
        CHECK(h.get("/sessions/" + sid + "/runs/run-9").first == 404);
        CHECK(h.post("/sessions/" + sid + "/runs", {{"revision", 3}}).first == 404);
        CHECK(h.get("/no/such/route").first == 404);
    }

    SUBCASE("validation") {
        auto [a, body] = h.put("/sessions/" + sid + "/config", {{"features", {"impervious_surface"}}, {"k", 0}});
        CHECK(a == 422);
        CHECK(body.at("error").at("fields") == json{"k"});
        auto [b, body2] = h.put("/sessions/" + sid + "/config", {{"features", {"nope"}}, {"k", 2}});
        CHECK(b == 422);
        CHECK(body2.at("error").at("fields") == json{"features[0]"});
        CHECK(h.post("/sessions/" + sid + "/runs", json::object()).first == 422);
        CHECK(h.post("/sessions", {{"hazard", "flooding"}}).first == 422);
        CHECK(h.post("/sessions/" + sid + "/refine", {{"k", 2}}).first == 422);
    }

    SUBCASE("infeasible k") {
        auto [a, body] = h.put("/sessions/" + sid + "/config", quick_config({"elevation", "slope"}, 10000));
        CHECK(a == 409);
        CHECK(body.at("error").at("kind") == "infeasible");
        CHECK(body.at("error").at("fields") == json{"k"});
    }

    SUBCASE("malformed body") {
        auto r = h.client().Put("/sessions/" + sid + "/config", "{nope", "application/json");
        CHECK(r->status == 400);
    }

    SUBCASE("cors") {
        auto r = h.client().Options("/sessions");
        REQUIRE(r);
        CHECK(r->status == 204);
        CHECK(r->get_header_value("Access-Control-Allow-Origin") == "*");
    }
}

TEST_CASE("history survives a restart and a changed grid is rejected") {
    const testing::TempDir dir("service-restart");
    std::string sid, rid, geojson;
    {
        Harness h(dir.path(), fixture_grid());
        sid = h.post("/sessions", {{"study_area", "Jacksonville, FL"}, {"hazard", "flooding"}}).second.at("session_id");
        REQUIRE(h.put("/sessions/" + sid + "/config", quick_config({"elevation", "slope", "dist_to_water"}, 3)).first ==
                200);
        rid = h.post("/sessions/" + sid + "/runs", {{"revision", 0}}).second.at("run_id");
        REQUIRE(h.wait_run(sid, rid).at("status") == "completed");
        geojson = h.client().Get("/sessions/" + sid + "/runs/" + rid + "/regions.geojson")->body;
    }
    {
        Harness h(dir.path(), fixture_grid());
        auto [status, session] = h.get("/sessions/" + sid);
        REQUIRE(status == 200);
        CHECK(session.at("runs").at(0).at("status") == "completed");
        CHECK(h.client().Get("/sessions/" + sid + "/runs/" + rid + "/regions.geojson")->body == geojson);
        CHECK(h.post("/sessions/" + sid + "/runs", {{"revision", 0}}).first == 202);
    }
    {
        Harness h(dir.path(), demo_study_area(14, 14, 6));
        CHECK(h.get("/sessions/" + sid).first == 409);
        auto [status, body] = h.post("/sessions/" + sid + "/runs", {{"revision", 0}});
        CHECK(status == 409);
        CHECK(body.at("error").at("kind") == "conflict");
    }
}

TEST_CASE("runs queue in submission order") {
    const testing::TempDir dir("service-queue");
    Harness h(dir.path(), fixture_grid());
    auto& store = h.store();
    const auto sid = store.create_session("Tampa, FL", "flooding");
    const auto r0 = store.submit_config(sid, quick_config({"elevation", "slope"}, 2));
    std::vector<std::string> ids;
    for (int i = 0; i < 3; ++i) ids.push_back(store.start_run(sid, r0));
    const auto last = store.wait_run(sid, ids.back());
    CHECK(last.status == RunStatus::Completed);
    for (const auto& id : ids) CHECK(store.run(sid, id).status == RunStatus::Completed);
    CHECK(store.run(sid, ids[0]).hashes == last.hashes);
    CHECK(store.run(sid, ids[0]).finished_at <= store.run(sid, ids[1]).finished_at);
}
