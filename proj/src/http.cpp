#include "ghsec/http.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <ctime>
#include <thread>

namespace ghsec::http {

std::string Response::header(const std::string& name) const
{
    auto it = headers.find(to_lower(name));
    return it == headers.end() ? std::string{} : it->second;
}

namespace {

std::string percent_decode(std::string_view s)
{
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '%' && i + 2 < s.size() && std::isxdigit(static_cast<unsigned char>(s[i + 1])) &&
            std::isxdigit(static_cast<unsigned char>(s[i + 2]))) {
            out.push_back(static_cast<char>(std::stoi(std::string(s.substr(i + 1, 2)), nullptr, 16)));
            i += 2;
        } else if (s[i] == '+') {
            out.push_back(' ');
        } else {
            out.push_back(s[i]);
        }
    }
    return out;
}

} // namespace

std::string url_encode(std::string_view value)
{
    static constexpr char hex[] = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : value) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back('%');
            out.push_back(hex[c >> 4]);
            out.push_back(hex[c & 0xf]);
        }
    }
    return out;
}

std::string canonical_key(const std::string& method, const std::string& url)
{
    std::string_view u = url;
    auto hash = u.find('#');
    if (hash != std::string_view::npos)
        u = u.substr(0, hash);
    auto q = u.find('?');
    std::string base(u.substr(0, q));
    std::vector<std::string> params;
    if (q != std::string_view::npos) {
        std::string_view query = u.substr(q + 1);
        while (!query.empty()) {
            auto amp = query.find('&');
            auto part = query.substr(0, amp);
            if (!part.empty()) {
                auto eq = part.find('=');
                std::string k = percent_decode(part.substr(0, eq));
                std::string v = eq == std::string_view::npos ? "" : percent_decode(part.substr(eq + 1));
                params.push_back(k + "=" + v);
            }
            if (amp == std::string_view::npos)
                break;
            query.remove_prefix(amp + 1);
        }
    }
    std::sort(params.begin(), params.end());
    std::string key = to_lower(method) + " " + base;
    for (std::size_t i = 0; i < params.size(); ++i)
        key += (i == 0 ? "?" : "&") + params[i];
    return key;
}

ReplayTransport::ReplayTransport(const std::filesystem::path& fixture_dir)
{
    auto index_path = fixture_dir / "index.json";
    nlohmann::json index;
    try {
        index = nlohmann::json::parse(read_file(index_path));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("replay index '" + index_path.string() + "': " + e.what());
    }
    for (const auto& entry : index) {
        Response r;
        r.status = entry.value("status", 200);
        if (entry.contains("headers"))
            for (auto& [k, v] : entry["headers"].items())
                r.headers[to_lower(k)] = v.get<std::string>();
        if (entry.contains("body_file"))
            r.body = read_file(fixture_dir / entry["body_file"].get<std::string>());
        else
            r.body = entry.value("body", std::string{});
        add(entry.value("method", std::string("GET")), entry.at("url").get<std::string>(), std::move(r));
    }
}

void ReplayTransport::add(const std::string& method, const std::string& url, Response response)
{
    std::lock_guard lock(mutex_);
    slots_[canonical_key(method, url)].responses.push_back(std::move(response));
}

Response ReplayTransport::send(const Request& request)
{
    std::lock_guard lock(mutex_);
    log_.push_back(request);
    auto it = slots_.find(canonical_key(request.method, request.url));
    if (it == slots_.end() || it->second.responses.empty()) {
        Response r;
        r.status = 404;
        r.body = R"({"message":"no recorded response for )" + request.method + " " + request.url + "\"}";
        return r;
    }
    auto& slot = it->second;
    std::size_t idx = std::min(slot.served, slot.responses.size() - 1);
    ++slot.served;
    return slot.responses[idx];
}

std::size_t ReplayTransport::calls() const
{
    std::lock_guard lock(mutex_);
    return log_.size();
}

std::vector<Request> ReplayTransport::requests() const
{
    std::lock_guard lock(mutex_);
    return log_;
}

namespace {

bool is_rate_limited(const Response& r)
{
    if (r.status == 429)
        return true;
    if (r.status == 403)
        return r.header("x-ratelimit-remaining") == "0" || !r.header("retry-after").empty();
    return false;
}

bool is_retryable(const Response& r)
{
    return r.status == 0 || r.status >= 500 || is_rate_limited(r);
}

std::chrono::milliseconds wait_for(const Response& r, std::chrono::milliseconds backoff,
                                   std::chrono::milliseconds cap)
{
    using namespace std::chrono;
    milliseconds wait = backoff;
    if (auto ra = r.header("retry-after"); !ra.empty()) {
        try {
            wait = seconds{std::stoll(ra)};
        } catch (const std::exception&) {
        }
    } else if (auto reset = r.header("x-ratelimit-reset"); !reset.empty() && is_rate_limited(r)) {
        try {
            auto now = duration_cast<seconds>(system_clock::now().time_since_epoch()).count();
            auto delta = std::stoll(reset) - now;
            wait = seconds{std::max<long long>(delta, 1)};
        } catch (const std::exception&) {
        }
    }
    return std::min(wait, cap);
}

} // namespace

Response send_with_retry(Transport& transport, const Request& request, const RetryPolicy& policy)
{
    auto sleep = policy.sleep ? policy.sleep
                              : [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    auto backoff = policy.initial_backoff;
    Response last;
    int attempts = std::max(policy.max_attempts, 1);
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        try {
            last = transport.send(request);
        } catch (const TransportError& e) {
            last = Response{};
            last.status = e.status();
            last.body = e.what();
        }
        if (!is_retryable(last))
            return last;
        if (attempt < attempts) {
            sleep(wait_for(last, backoff, policy.max_wait));
            backoff *= 2;
        }
    }
    throw TransportError(request.method + " " + request.url + " failed after " + std::to_string(attempts) +
                             " attempts (last status " + std::to_string(last.status) + ")",
                         last.status);
}

} // namespace ghsec::http
