#pragma once

#include "ghsec/util.hpp"

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace ghsec::http {

/// Header names are stored lowercased.
using Headers = std::map<std::string, std::string>;

struct Request {
    std::string method = "GET";
    std::string url;
    Headers headers;
    std::string body;
};

struct Response {
    int status = 0; ///< 0 means the request never reached a server.
    Headers headers;
    std::string body;

    std::string header(const std::string& name) const;
};

/// Raised after retries are exhausted. Carries the last HTTP status seen
/// (0 for connection-level failures).
class TransportError : public Error {
public:
    TransportError(const std::string& what, int status) : Error(what), status_(status) {}
    int status() const noexcept { return status_; }

private:
    int status_;
};

/// The single seam through which every network interaction flows. Live and
/// replayed implementations are interchangeable. Implementations must be safe
/// for concurrent send() calls.
class Transport {
public:
    virtual ~Transport() = default;
    virtual Response send(const Request& request) = 0;
};

/// Live HTTP(S) transport backed by cpp-httplib.
std::shared_ptr<Transport> make_live_transport(std::chrono::seconds timeout = std::chrono::seconds{60});

/// Replays recorded responses from a fixture directory. The directory holds
/// an `index.json` array of entries
///   {"method": "GET", "url": "...", "status": 200, "headers": {...},
///    "body_file": "page1.json"}            (or inline "body": "...")
/// Requests match on method, scheme/host/path and the *set* of query
/// parameters, so parameter order does not matter. Unmatched requests yield a
/// 404 with an explanatory body. Entries with the same key are served in
/// order on successive calls (the last one repeats), which lets fixtures
/// script transient failures.
class ReplayTransport : public Transport {
public:
    explicit ReplayTransport(const std::filesystem::path& fixture_dir);
    ReplayTransport() = default;

    void add(const std::string& method, const std::string& url, Response response);
    Response send(const Request& request) override;

    std::size_t calls() const;
    std::vector<Request> requests() const;

private:
    struct Slot {
        std::vector<Response> responses;
        std::size_t served = 0;
    };
    mutable std::mutex mutex_;
    std::map<std::string, Slot> slots_;
    std::vector<Request> log_;
};

/// Canonical match key: METHOD + " " + scheme://host/path + "?" + sorted query.
std::string canonical_key(const std::string& method, const std::string& url);

struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds initial_backoff{1000};
    std::chrono::milliseconds max_wait{60000};
    std::function<void(std::chrono::milliseconds)> sleep; ///< defaults to this_thread::sleep_for
};

/// Sends `request`, retrying connection failures, 429 and 5xx, and 403s that
/// carry rate-limit headers. Waits honor `Retry-After` and
/// `X-RateLimit-Reset`, otherwise back off exponentially from
/// initial_backoff. Non-retryable statuses are returned as-is.
Response send_with_retry(Transport& transport, const Request& request, const RetryPolicy& policy);

/// Percent-encodes a query parameter value.
std::string url_encode(std::string_view value);

} // namespace ghsec::http
