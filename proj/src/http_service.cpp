#include "regio/http_service.hpp"

#include <httplib.h>

#include "regio/advisor.hpp"

namespace regio {

using nlohmann::json;

namespace {

constexpr const char* kJson = "application/json";

json error_body(const Error& e) {
    return {{"error",
             {{"kind", to_string(e.kind())}, {"message", e.what()}, {"fields", e.fields()}, {"stage", e.stage()}}}};
}

json parse_body(const httplib::Request& req) {
    try {
        return json::parse(req.body);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("request body is not valid JSON: ") + e.what());
    }
}

std::string required_string(const json& body, const std::string& field) {
    if (!body.is_object() || !body.contains(field) || !body[field].is_string()) {
        throw Error(ErrorKind::Validation, "'" + field + "' must be a string").with_fields({field});
    }
    return body[field].get<std::string>();
}

void send(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), kJson);
}

// Wraps a handler so library errors map to their HTTP status.
template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
        try {
            fn(req, res);
        } catch (const Error& e) {
            send(res, http_status(e.kind()), error_body(e));
        } catch (const std::exception& e) {
            send(res, 500, {{"error", {{"kind", "internal"}, {"message", e.what()}, {"fields", json::array()},
                                       {"stage", ""}}}});
        }
    };
}

}  // namespace

int http_status(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::NotFound: return 404;
        case ErrorKind::Validation: return 422;
        case ErrorKind::Infeasible:
        case ErrorKind::Conflict: return 409;
        case ErrorKind::Parse:
        case ErrorKind::Contract: return 400;
        default: return 500;
    }
}

HttpService::HttpService(SessionStore& store) : store_(store), server_(std::make_unique<httplib::Server>()) {
    routes();
}

HttpService::~HttpService() { stop(); }

bool HttpService::listen(const std::string& host, int port) { return server_->listen(host, port); }
int HttpService::bind_any_port(const std::string& host) { return server_->bind_to_any_port(host); }
bool HttpService::listen_after_bind() { return server_->listen_after_bind(); }
void HttpService::wait_until_ready() const { server_->wait_until_ready(); }

void HttpService::stop() {
    if (server_->is_running()) server_->stop();
}

void HttpService::routes() {
    auto& s = *server_;
    auto& store = store_;

    s.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
    s.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Methods", "GET, POST, PUT, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.status = 204;
    });

    s.Get("/dataset/summary", guarded([&store](const httplib::Request&, httplib::Response& res) {
              send(res, 200, to_json(store.summary()));
          }));

    s.Post("/sessions", guarded([&store](const httplib::Request& req, httplib::Response& res) {
               const auto body = parse_body(req);
               const auto area = required_string(body, "study_area");
               const auto hazard = required_string(body, "hazard");
               send(res, 201, {{"session_id", store.create_session(area, hazard)}});
           }));

    s.Get(R"(/sessions/([^/]+))", guarded([&store](const httplib::Request& req, httplib::Response& res) {
              send(res, 200, to_json(store.session(req.matches[1])));
          }));

    s.Get(R"(/sessions/([^/]+)/suggestions)",
          guarded([&store](const httplib::Request& req, httplib::Response& res) {
              const auto id = std::string(req.matches[1]);
              const auto state = store.session(id);
              send(res, 200, {{"hazard", state.hazard}, {"suggestions", to_json(store.suggestions(id))}});
          }));

    s.Put(R"(/sessions/([^/]+)/config)", guarded([&store](const httplib::Request& req, httplib::Response& res) {
              const auto body = parse_body(req);
              send(res, 200, {{"revision", store.submit_config(req.matches[1], body)}});
          }));

    s.Post(R"(/sessions/([^/]+)/runs)", guarded([&store](const httplib::Request& req, httplib::Response& res) {
               const auto body = parse_body(req);
               if (!body.is_object() || !body.contains("revision") || !body["revision"].is_number_unsigned()) {
                   throw Error(ErrorKind::Validation, "'revision' must be a nonnegative integer")
                       .with_fields({"revision"});
               }
               const auto run_id = store.start_run(req.matches[1], body["revision"].get<std::size_t>());
               send(res, 202, {{"run_id", run_id}});
           }));

    s.Get(R"(/sessions/([^/]+)/runs/([^/]+))", guarded([&store](const httplib::Request& req, httplib::Response& res) {
              send(res, 200, to_json(store.run(req.matches[1], req.matches[2])));
          }));

    s.Get(R"(/sessions/([^/]+)/runs/([^/]+)/stages/([^/]+))",
          guarded([&store](const httplib::Request& req, httplib::Response& res) {
              const std::string stage = req.matches[3];
              const auto data = store.stage(req.matches[1], req.matches[2], stage);
              send(res, 200, {{"stage", stage}, {"data", data}});
          }));

    s.Get(R"(/sessions/([^/]+)/runs/([^/]+)/regions\.geojson)",
          guarded([&store](const httplib::Request& req, httplib::Response& res) {
              res.status = 200;
              res.set_content(store.regions_geojson(req.matches[1], req.matches[2]), "application/geo+json");
          }));

    s.Post(R"(/sessions/([^/]+)/refine)", guarded([&store](const httplib::Request& req, httplib::Response& res) {
               const auto body = parse_body(req);
               if (!body.is_object() || !body.contains("delta") || !body["delta"].is_object()) {
                   throw Error(ErrorKind::Validation, "'delta' must be an object").with_fields({"delta"});
               }
               const auto [revision, run_id] = store.refine_session(req.matches[1], body["delta"]);
               send(res, 202, {{"revision", revision}, {"run_id", run_id}});
           }));

    s.set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (!res.body.empty()) return;
        send(res, res.status, {{"error", {{"kind", res.status == 404 ? "not_found" : "http"},
                                          {"message", "no route"},
                                          {"fields", json::array()},
                                          {"stage", ""}}}});
    });
}

}  // namespace regio
