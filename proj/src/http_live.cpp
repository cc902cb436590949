#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "ghsec/http.hpp"

namespace ghsec::http {

namespace {

class HttplibTransport : public Transport {
public:
    explicit HttplibTransport(std::chrono::seconds timeout) : timeout_(timeout) {}

    Response send(const Request& request) override
    {
        auto scheme_end = request.url.find("://");
        if (scheme_end == std::string::npos)
            throw TransportError("not an absolute URL: " + request.url, 0);
        auto path_start = request.url.find('/', scheme_end + 3);
        std::string origin = request.url.substr(0, path_start);
        std::string target = path_start == std::string::npos ? "/" : request.url.substr(path_start);

        // One client per request keeps the transport stateless and thread-safe.
        httplib::Client client(origin);
        client.set_connection_timeout(timeout_);
        client.set_read_timeout(timeout_);
        client.set_follow_location(true);

        httplib::Headers headers;
        std::string content_type = "application/json";
        for (const auto& [k, v] : request.headers) {
            if (k == "content-type")
                content_type = v;
            else
                headers.emplace(k, v);
        }

        httplib::Result result = request.method == "POST"
                                     ? client.Post(target, headers, request.body, content_type)
                                     : client.Get(target, headers);
        if (!result)
            throw TransportError("connection failed: " + httplib::to_string(result.error()), 0);

        Response out;
        out.status = result->status;
        out.body = result->body;
        for (const auto& [k, v] : result->headers)
            out.headers[to_lower(k)] = v;
        return out;
    }

private:
    std::chrono::seconds timeout_;
};

} // namespace

std::shared_ptr<Transport> make_live_transport(std::chrono::seconds timeout)
{
    return std::make_shared<HttplibTransport>(timeout);
}

} // namespace ghsec::http
