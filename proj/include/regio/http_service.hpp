#pragma once

#include <memory>
#include <string>

#include "regio/error.hpp"
#include "regio/session_store.hpp"

namespace httplib {
class Server;
}

namespace regio {

/// HTTP status used for each error kind.
int http_status(ErrorKind kind);

// JSON API over a SessionStore. Errors come back as
// {"error": {"kind", "message", "fields", "stage"}}.
class HttpService {
public:
    explicit HttpService(SessionStore& store);
    ~HttpService();

    HttpService(const HttpService&) = delete;
    HttpService& operator=(const HttpService&) = delete;

    /// Blocks serving until stop().
    bool listen(const std::string& host, int port);
    /// Binds an ephemeral port and returns it; pair with listen_after_bind().
    int bind_any_port(const std::string& host);
    bool listen_after_bind();
    void wait_until_ready() const;
    void stop();

private:
    void routes();

    SessionStore& store_;
    std::unique_ptr<httplib::Server> server_;
};

}  // namespace regio
