#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>

#include "viewclean/session.hpp"

namespace viewclean::api {

struct Request {
    std::string method;  // GET, POST, DELETE
    std::string path;    // without query string
    std::map<std::string, std::string> query;
    std::string body;
    std::string content_type;

    /// Splits "/views/1/rows?offset=0&limit=2" into path and decoded query.
    static Request make(std::string method, std::string_view target, std::string body = {},
                        std::string content_type = "application/json");
};

struct Response {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
};

int http_status(ErrorCode code) noexcept;
/// {"error":{"code":...,"message":...,"detail":...}}
std::string error_body(const Error& error);

/// Routes requests to sessions. Session-scoped paths are accepted either
/// prefixed (`/sessions/{id}/views`) or bare (`/views?session={id}`); bare
/// paths fall back to the only session when exactly one exists.
///
/// Thread-safe. Each session has its own reader/writer lock: mutating
/// requests queue behind one another, reads share the lock and see a
/// consistent state. Requests on different sessions proceed in parallel.
class Service {
public:
    explicit Service(Session::Clock clock = {});

    Response handle(const Request& request);

    /// Registers an existing session (CLI session files). Returns its id.
    std::string adopt(Session session);
    std::optional<Session> copy_session(const std::string& id) const;

private:
    struct Slot {
        mutable std::shared_mutex mutex;
        Session session;
    };

    std::shared_ptr<Slot> find(const std::string& id) const;
    std::shared_ptr<Slot> resolve(const Request& request, const std::string& prefixed_id) const;

    Session::Clock clock_;
    mutable std::mutex registry_mutex_;
    std::map<std::string, std::shared_ptr<Slot>> sessions_;
    std::size_t next_session_ = 1;
};

}  // namespace viewclean::api
