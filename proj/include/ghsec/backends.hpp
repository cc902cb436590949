#pragma once

#include "ghsec/http.hpp"
#include "ghsec/util.hpp"

#include <chrono>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ghsec::backends {

/// A dense text embedding. Every backend in this library returns unit-norm
/// vectors.
class EmbeddingVector {
public:
    EmbeddingVector() = default;
    explicit EmbeddingVector(std::vector<double> values);

    std::size_t dim() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    double norm() const;
    /// Unit-norm copy. Throws PreconditionError for a zero or non-finite vector.
    EmbeddingVector normalized() const;

    bool operator==(const EmbeddingVector&) const = default;

private:
    std::vector<double> values_;
};

/// Cosine similarity clamped to [-1, 1].
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

class BackendError : public Error {
public:
    using Error::Error;
};

enum class BackendKind { HttpEmbedding, HttpChat, MockEmbedding, MockChat };

struct BackendConfig {
    BackendKind kind = BackendKind::MockEmbedding;
    std::string endpoint;
    std::string model_name = "mock";
    std::optional<std::size_t> dim;
    std::chrono::seconds timeout{60};
    int max_retries = 3;
    std::string api_key;
    std::uint64_t seed = 0;
    std::size_t batch_size = 64;

    /// Throws ConfigError when the kind's required fields are missing.
    void validate() const;
};

class EmbeddingBackend {
public:
    virtual ~EmbeddingBackend() = default;
    virtual std::size_t dim() const = 0;
    virtual std::string name() const = 0;
    /// One unit vector per text, same order. Every text must be non-empty
    /// after trimming.
    virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) const = 0;

    EmbeddingVector embed_one(const std::string& text) const;
};

class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual std::string name() const = 0;
    /// The model's raw text reply. Both prompts must be non-empty.
    virtual std::string complete(const std::string& system, const std::string& user) const = 0;
};

// Offline mocks ------------------------------------------------------------

/// Feature-hashed bag of lowercased word unigrams and per-word character
/// trigrams, signed by hash parity and L2-normalized. dim must be >= 8.
EmbeddingVector mock_embedding(std::string_view text, std::size_t dim, std::uint64_t seed);

class MockEmbeddingBackend : public EmbeddingBackend {
public:
    MockEmbeddingBackend(std::size_t dim, std::uint64_t seed);
    std::size_t dim() const override { return dim_; }
    std::string name() const override { return "mock-embedding"; }
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) const override;

private:
    std::size_t dim_;
    std::uint64_t seed_;
};

/// Deterministic stand-in for a chat model. It flags a vulnerability iff the
/// user prompt contains one of kMockTriggers (case-insensitive) and
/// describes the issue by echoing its title, followed by the first sentence
/// of the body. With the description system prompt it replies with the
/// description only.
class MockChatBackend : public ChatBackend {
public:
    std::string name() const override { return "mock-chat"; }
    std::string complete(const std::string& system, const std::string& user) const override;
};

inline constexpr std::string_view kMockTriggers[] = {"overflow", "injection", "CVE-", "use-after-free", "RCE"};

// HTTP ---------------------------------------------------------------------

/// POST {"model", "input": [...]} -> {"data": [{"index", "embedding"}]}.
class HttpEmbeddingBackend : public EmbeddingBackend {
public:
    HttpEmbeddingBackend(std::shared_ptr<http::Transport> transport, BackendConfig config);
    std::size_t dim() const override;
    std::string name() const override { return config_.model_name; }
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) const override;

private:
    std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const;

    std::shared_ptr<http::Transport> transport_;
    BackendConfig config_;
};

/// POST {"model", "temperature": 0, "messages": [...]} ->
/// {"choices": [{"message": {"content"}}]}.
class HttpChatBackend : public ChatBackend {
public:
    HttpChatBackend(std::shared_ptr<http::Transport> transport, BackendConfig config);
    std::string name() const override { return config_.model_name; }
    std::string complete(const std::string& system, const std::string& user) const override;

private:
    std::shared_ptr<http::Transport> transport_;
    BackendConfig config_;
};

std::shared_ptr<EmbeddingBackend> make_embedding_backend(const BackendConfig& config,
                                                         std::shared_ptr<http::Transport> transport = nullptr);
std::shared_ptr<ChatBackend> make_chat_backend(const BackendConfig& config,
                                               std::shared_ptr<http::Transport> transport = nullptr);

} // namespace ghsec::backends
