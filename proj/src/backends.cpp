#include "ghsec/backends.hpp"

#include "ghsec/prompt.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>

namespace ghsec::backends {

using nlohmann::json;

EmbeddingVector::EmbeddingVector(std::vector<double> values) : values_(std::move(values))
{
    for (double v : values_)
        if (!std::isfinite(v))
            throw PreconditionError("embedding contains a non-finite entry");
}

double EmbeddingVector::norm() const
{
    double s = 0.0;
    for (double v : values_)
        s += v * v;
    return std::sqrt(s);
}

EmbeddingVector EmbeddingVector::normalized() const
{
    double n = norm();
    if (!(n > 0.0) || !std::isfinite(n))
        throw PreconditionError("cannot normalize a zero embedding");
    std::vector<double> out(values_.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = values_[i] / n;
    return EmbeddingVector(std::move(out));
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b)
{
    if (a.dim() != b.dim())
        throw PreconditionError("cosine: dimension mismatch (" + std::to_string(a.dim()) + " vs " +
                                std::to_string(b.dim()) + ")");
    double dot = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i)
        dot += a[i] * b[i];
    double denom = a.norm() * b.norm();
    if (!(denom > 0.0))
        throw PreconditionError("cosine: zero vector");
    return std::clamp(dot / denom, -1.0, 1.0);
}

void BackendConfig::validate() const
{
    switch (kind) {
    case BackendKind::HttpEmbedding:
    case BackendKind::HttpChat:
        if (endpoint.empty())
            throw ConfigError("HTTP backend '" + model_name + "' requires an endpoint");
        break;
    case BackendKind::MockEmbedding:
        if (!dim)
            throw ConfigError("mock embedding backend requires a dimension");
        if (*dim < 8)
            throw ConfigError("mock embedding dimension must be >= 8");
        break;
    case BackendKind::MockChat:
        break;
    }
    if (dim && *dim == 0)
        throw ConfigError("embedding dimension must be positive");
}

EmbeddingVector EmbeddingBackend::embed_one(const std::string& text) const
{
    return embed({text}).front();
}

namespace {

void check_texts(const std::vector<std::string>& texts)
{
    if (texts.empty())
        throw PreconditionError("embed: no texts given");
    for (std::size_t i = 0; i < texts.size(); ++i)
        if (trim(texts[i]).empty())
            throw PreconditionError("embed: text " + std::to_string(i) + " is empty");
}

bool is_word_byte(unsigned char c)
{
    return std::isalnum(c) || c >= 0x80;
}

} // namespace

EmbeddingVector mock_embedding(std::string_view text, std::size_t dim, std::uint64_t seed)
{
    if (dim < 8)
        throw PreconditionError("mock_embedding: dim must be >= 8");
    std::vector<double> v(dim, 0.0);
    const std::uint64_t salt = mix64(seed ^ 0x6a09e667f3bcc909ULL);
    auto add = [&](std::string_view feature, std::uint64_t kind) {
        std::uint64_t h = mix64(fnv1a64(feature) ^ salt ^ kind);
        v[h % dim] += (h >> 63) ? -1.0 : 1.0;
    };

    std::string lower = to_lower(text);
    std::size_t i = 0;
    while (i < lower.size()) {
        while (i < lower.size() && !is_word_byte(static_cast<unsigned char>(lower[i])))
            ++i;
        std::size_t start = i;
        while (i < lower.size() && is_word_byte(static_cast<unsigned char>(lower[i])))
            ++i;
        if (i == start)
            continue;
        std::string_view word(lower.data() + start, i - start);
        add(word, 1);
        std::string padded = " " + std::string(word) + " ";
        for (std::size_t k = 0; k + 3 <= padded.size(); ++k)
            add(std::string_view(padded).substr(k, 3), 2);
    }

    double norm2 = 0.0;
    for (double x : v)
        norm2 += x * x;
    if (norm2 == 0.0) {
        // No word characters at all, or perfectly cancelling features: fall
        // back to a single bucket keyed on the raw text.
        std::uint64_t h = mix64(fnv1a64(text) ^ salt ^ 3);
        v.assign(dim, 0.0);
        v[h % dim] = 1.0;
        return EmbeddingVector(std::move(v));
    }
    return EmbeddingVector(std::move(v)).normalized();
}

MockEmbeddingBackend::MockEmbeddingBackend(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed)
{
    if (dim < 8)
        throw PreconditionError("MockEmbeddingBackend: dim must be >= 8");
}

std::vector<EmbeddingVector> MockEmbeddingBackend::embed(const std::vector<std::string>& texts) const
{
    check_texts(texts);
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts)
        out.push_back(mock_embedding(t, dim_, seed_));
    return out;
}

namespace {

std::string between(std::string_view text, std::string_view open, std::string_view close)
{
    auto a = text.find(open);
    if (a == std::string_view::npos)
        return {};
    a += open.size();
    auto b = text.find(close, a);
    return std::string(text.substr(a, b == std::string_view::npos ? std::string_view::npos : b - a));
}

std::string first_sentence(std::string_view body)
{
    body = trim(body);
    auto end = body.find_first_of(".!?\n");
    auto s = trim(body.substr(0, end == std::string_view::npos ? body.size() : end + 1));
    return std::string(s.substr(0, 300));
}

} // namespace

std::string MockChatBackend::complete(const std::string& system, const std::string& user) const
{
    if (trim(system).empty() || trim(user).empty())
        throw PreconditionError("complete: prompts must be non-empty");

    std::string title = between(user, "\nTitle: ", "\n");
    std::string body = between(user, "--- Start of the Body ---\n", "\n--- End of the Body ---");
    if (title.empty() && body.empty()) {
        auto nl = user.find('\n');
        title = user.substr(0, nl);
    }
    std::string description(trim(title));
    if (auto s = first_sentence(body); !s.empty())
        description += description.empty() ? s : ". " + s;
    if (trim(description).empty())
        description = "Issue without a title or body.";

    prompt::LlmReply reply;
    reply.description = description;
    if (system != prompt::description_system_prompt()) {
        bool flagged = false;
        for (auto trigger : kMockTriggers)
            flagged = flagged || contains_ci(user, trigger);
        reply.vulnerability_detected = flagged;
    }
    return prompt::serialize_reply(reply);
}

// HTTP -----------------------------------------------------------------------

namespace {

http::RetryPolicy retry_for(const BackendConfig& c)
{
    http::RetryPolicy p;
    p.max_attempts = std::max(1, c.max_retries);
    return p;
}

http::Request json_post(const BackendConfig& c, const json& payload)
{
    http::Request req;
    req.method = "POST";
    req.url = c.endpoint;
    req.headers["content-type"] = "application/json";
    if (!c.api_key.empty())
        req.headers["authorization"] = "Bearer " + c.api_key;
    req.body = payload.dump();
    return req;
}

json parse_ok(const http::Response& resp, const std::string& what)
{
    if (resp.status != 200)
        throw BackendError(what + ": HTTP " + std::to_string(resp.status) + ": " + resp.body.substr(0, 200));
    try {
        return json::parse(resp.body);
    } catch (const json::exception& e) {
        throw BackendError(what + ": response is not JSON: " + e.what());
    }
}

} // namespace

HttpEmbeddingBackend::HttpEmbeddingBackend(std::shared_ptr<http::Transport> transport, BackendConfig config)
    : transport_(std::move(transport)), config_(std::move(config))
{
    config_.validate();
    if (!transport_)
        transport_ = http::make_live_transport(config_.timeout);
}

std::size_t HttpEmbeddingBackend::dim() const
{
    return config_.dim.value_or(0);
}

std::vector<EmbeddingVector> HttpEmbeddingBackend::embed(const std::vector<std::string>& texts) const
{
    check_texts(texts);
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    std::size_t batch = std::max<std::size_t>(1, config_.batch_size);
    for (std::size_t i = 0; i < texts.size(); i += batch) {
        auto chunk = std::span<const std::string>(texts).subspan(i, std::min(batch, texts.size() - i));
        for (auto& v : embed_batch(chunk))
            out.push_back(std::move(v));
    }
    return out;
}

std::vector<EmbeddingVector> HttpEmbeddingBackend::embed_batch(std::span<const std::string> texts) const
{
    json payload;
    payload["model"] = config_.model_name;
    payload["input"] = std::vector<std::string>(texts.begin(), texts.end());
    http::Response resp;
    try {
        resp = http::send_with_retry(*transport_, json_post(config_, payload), retry_for(config_));
    } catch (const http::TransportError& e) {
        throw BackendError(std::string("embedding request failed: ") + e.what());
    }
    json doc = parse_ok(resp, "embedding backend " + config_.model_name);

    std::vector<std::optional<EmbeddingVector>> slots(texts.size());
    try {
        const auto& data = doc.at("data");
        for (std::size_t k = 0; k < data.size(); ++k) {
            std::size_t idx = data[k].value("index", k);
            if (idx >= slots.size())
                throw BackendError("embedding response index out of range");
            auto raw = data[k].at("embedding").get<std::vector<double>>();
            if (config_.dim && raw.size() != *config_.dim)
                throw BackendError("embedding dimension " + std::to_string(raw.size()) + " does not match configured " +
                                   std::to_string(*config_.dim));
            slots[idx] = EmbeddingVector(std::move(raw)).normalized();
        }
    } catch (const json::exception& e) {
        throw BackendError(std::string("malformed embedding response: ") + e.what());
    } catch (const PreconditionError& e) {
        throw BackendError(std::string("unusable embedding: ") + e.what());
    }
    std::vector<EmbeddingVector> out;
    for (auto& s : slots) {
        if (!s)
            throw BackendError("embedding response is missing vectors");
        out.push_back(std::move(*s));
    }
    if (!out.empty())
        for (const auto& v : out)
            if (v.dim() != out.front().dim())
                throw BackendError("embedding response mixes dimensions");
    return out;
}

HttpChatBackend::HttpChatBackend(std::shared_ptr<http::Transport> transport, BackendConfig config)
    : transport_(std::move(transport)), config_(std::move(config))
{
    config_.validate();
    if (!transport_)
        transport_ = http::make_live_transport(config_.timeout);
}

std::string HttpChatBackend::complete(const std::string& system, const std::string& user) const
{
    if (trim(system).empty() || trim(user).empty())
        throw PreconditionError("complete: prompts must be non-empty");
    nlohmann::ordered_json payload;
    payload["model"] = config_.model_name;
    payload["temperature"] = 0;
    payload["messages"] = nlohmann::ordered_json::array(
        {nlohmann::ordered_json{{"role", "system"}, {"content", system}},
         nlohmann::ordered_json{{"role", "user"}, {"content", user}}});
    http::Response resp;
    try {
        resp = http::send_with_retry(*transport_, json_post(config_, json::parse(payload.dump())), retry_for(config_));
    } catch (const http::TransportError& e) {
        throw BackendError(std::string("chat request failed: ") + e.what());
    }
    json doc = parse_ok(resp, "chat backend " + config_.model_name);
    std::string content;
    try {
        const auto& msg = doc.at("choices").at(0).at("message");
        if (msg.contains("content") && msg["content"].is_string())
            content = msg["content"].get<std::string>();
    } catch (const json::exception& e) {
        throw BackendError(std::string("malformed chat response: ") + e.what());
    }
    if (trim(content).empty())
        throw BackendError("chat backend " + config_.model_name + " returned an empty reply");
    return content;
}

std::shared_ptr<EmbeddingBackend> make_embedding_backend(const BackendConfig& config,
                                                         std::shared_ptr<http::Transport> transport)
{
    config.validate();
    switch (config.kind) {
    case BackendKind::MockEmbedding:
        return std::make_shared<MockEmbeddingBackend>(*config.dim, config.seed);
    case BackendKind::HttpEmbedding:
        return std::make_shared<HttpEmbeddingBackend>(std::move(transport), config);
    default:
        throw ConfigError("backend kind is not an embedding backend");
    }
}

std::shared_ptr<ChatBackend> make_chat_backend(const BackendConfig& config, std::shared_ptr<http::Transport> transport)
{
    config.validate();
    switch (config.kind) {
    case BackendKind::MockChat:
        return std::make_shared<MockChatBackend>();
    case BackendKind::HttpChat:
        return std::make_shared<HttpChatBackend>(std::move(transport), config);
    default:
        throw ConfigError("backend kind is not a chat backend");
    }
}

} // namespace ghsec::backends
