#include "ghsec/backends.hpp"
#include "ghsec/prompt.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cmath>
#include <functional>

using namespace ghsec;

namespace {

/// Transport answering every request through a callback.
class FakeServer : public http::Transport {
public:
    explicit FakeServer(std::function<http::Response(const http::Request&)> fn) : fn_(std::move(fn)) {}
    http::Response send(const http::Request& r) override
    {
        requests.push_back(r);
        return fn_(r);
    }
    std::vector<http::Request> requests;

private:
    std::function<http::Response(const http::Request&)> fn_;
};

/// Embeddings server: vector i is [len(text), 1, index-in-batch-independent constant].
http::Response embed_reply(const http::Request& r)
{
    auto req = nlohmann::json::parse(r.body);
    nlohmann::json data = nlohmann::json::array();
    std::size_t k = 0;
    for (const auto& text : req.at("input")) {
        double len = static_cast<double>(text.get<std::string>().size());
        data.push_back({{"index", k++}, {"embedding", {len, 1.0, 2.0}}});
    }
    // Reverse the order to check that the index field is honored.
    std::reverse(data.begin(), data.end());
    http::Response resp;
    resp.status = 200;
    resp.body = nlohmann::json{{"data", data}}.dump();
    return resp;
}

backends::BackendConfig http_embedding(std::size_t batch)
{
    backends::BackendConfig c;
    c.kind = backends::BackendKind::HttpEmbedding;
    c.endpoint = "https://embed.example/v1/embeddings";
    c.model_name = "test-embed";
    c.dim = 3;
    c.batch_size = batch;
    c.api_key = "sk-test";
    return c;
}

std::string issue_prompt(const std::string& title, const std::string& body)
{
    return prompt::render_issue_prompt("repo", "owner", title, body);
}

} // namespace

TEST(EmbeddingVector, RejectsNonFiniteAndNormalizes)
{
    EXPECT_THROW(backends::EmbeddingVector({1.0, NAN}), PreconditionError);
    backends::EmbeddingVector v({3.0, 4.0});
    EXPECT_DOUBLE_EQ(v.norm(), 5.0);
    EXPECT_NEAR(v.normalized().norm(), 1.0, 1e-12);
    EXPECT_NEAR(backends::cosine(backends::EmbeddingVector({1, 1}), backends::EmbeddingVector({1, 0})),
                0.70710678, 1e-6);
}

TEST(MockEmbedding, UnitNormAndRequestedDimension)
{
    for (std::size_t dim : {8u, 64u, 512u}) {
        auto v = backends::mock_embedding("any text here", dim, 1);
        EXPECT_EQ(v.dim(), dim);
        EXPECT_NEAR(v.norm(), 1.0, 1e-6);
    }
}

TEST(MockEmbedding, DeterministicAndSimilarityOrdered)
{
    backends::MockEmbeddingBackend m(64, 7);
    auto same = m.embed({"a", "a"});
    EXPECT_EQ(same[0], same[1]);
    auto base = m.embed_one("security flaw");
    EXPECT_NEAR(backends::cosine(base, m.embed_one("security flaw")), 1.0, 1e-12);
    EXPECT_GT(backends::cosine(base, m.embed_one("security bug")),
              backends::cosine(base, m.embed_one("pink unicorn dance")));
    EXPECT_THROW(m.embed({"ok", ""}), PreconditionError);
}

TEST(MockEmbedding, BatchingIsElementwise)
{
    backends::MockEmbeddingBackend m(32, 2);
    std::vector<std::string> xs = {"one", "two"}, ys = {"three"};
    auto joined = m.embed({"one", "two", "three"});
    auto a = m.embed(xs), b = m.embed(ys);
    EXPECT_EQ(joined[0], a[0]);
    EXPECT_EQ(joined[1], a[1]);
    EXPECT_EQ(joined[2], b[0]);
}

TEST(MockChat, RuleTable)
{
    backends::MockChatBackend chat;
    std::string sys(prompt::classification_system_prompt());
    auto pos = prompt::parse_llm_reply(chat.complete(sys, issue_prompt("Parser bug", "A buffer overflow in the lexer.")), true);
    EXPECT_EQ(pos.vulnerability_detected, true);
    EXPECT_EQ(pos.description.rfind("Parser bug", 0), 0u);
    auto neg = prompt::parse_llm_reply(chat.complete(sys, issue_prompt("Docs", "typo in README")), true);
    EXPECT_EQ(neg.vulnerability_detected, false);
    EXPECT_EQ(chat.complete(sys, issue_prompt("Docs", "typo in README")),
              chat.complete(sys, issue_prompt("Docs", "typo in README")));
    for (auto trigger : {"SQL Injection here", "see CVE-2020-1234", "use-after-free in gc", "leads to RCE"})
        EXPECT_EQ(prompt::parse_llm_reply(chat.complete(sys, issue_prompt("t", trigger)), true).vulnerability_detected,
                  true)
            << trigger;
}

TEST(MockChat, DescriptionModeOmitsLabel)
{
    backends::MockChatBackend chat;
    auto raw = chat.complete(std::string(prompt::description_system_prompt()), issue_prompt("Title", "Body one. Two."));
    auto r = prompt::parse_llm_reply(raw, false);
    EXPECT_EQ(r.description, "Title. Body one.");
    EXPECT_EQ(nlohmann::json::parse(raw).count("vulnerability_detected"), 0u);
}

TEST(BackendConfig, Validation)
{
    backends::BackendConfig c;
    c.kind = backends::BackendKind::HttpChat;
    EXPECT_THROW(c.validate(), ConfigError);
    c.kind = backends::BackendKind::MockEmbedding;
    c.dim.reset();
    EXPECT_THROW(c.validate(), ConfigError);
    c.dim = 4;
    EXPECT_THROW(c.validate(), ConfigError);
    c.dim = 16;
    EXPECT_NO_THROW(c.validate());
}

TEST(HttpEmbedding, WireFormatAndIndexOrder)
{
    auto server = std::make_shared<FakeServer>(embed_reply);
    backends::HttpEmbeddingBackend b(server, http_embedding(64));
    auto v = b.embed({"ab", "abcd"});
    ASSERT_EQ(v.size(), 2u);
    EXPECT_NEAR(v[0][0] / v[0][1], 2.0, 1e-12);
    EXPECT_NEAR(v[1][0] / v[1][1], 4.0, 1e-12);
    EXPECT_NEAR(v[0].norm(), 1.0, 1e-12);
    const auto& req = server->requests.front();
    EXPECT_EQ(req.method, "POST");
    EXPECT_EQ(req.headers.at("authorization"), "Bearer sk-test");
    auto body = nlohmann::json::parse(req.body);
    EXPECT_EQ(body["model"], "test-embed");
    EXPECT_EQ(body["input"].size(), 2u);
}

TEST(HttpEmbedding, BatchingMatchesSeparateCalls)
{
    auto server = std::make_shared<FakeServer>(embed_reply);
    backends::HttpEmbeddingBackend small(server, http_embedding(2));
    std::vector<std::string> texts = {"a", "bb", "ccc", "dddd", "eeeee"};
    auto batched = small.embed(texts);
    EXPECT_EQ(server->requests.size(), 3u);
    backends::HttpEmbeddingBackend big(std::make_shared<FakeServer>(embed_reply), http_embedding(64));
    EXPECT_EQ(batched, big.embed(texts));
}

TEST(HttpEmbedding, DimensionMismatchIsError)
{
    auto server = std::make_shared<FakeServer>(embed_reply);
    auto c = http_embedding(8);
    c.dim = 5;
    backends::HttpEmbeddingBackend b(server, c);
    EXPECT_THROW(b.embed({"x"}), backends::BackendError);
}

TEST(HttpChat, ReadsFirstChoice)
{
    auto server = std::make_shared<FakeServer>([](const http::Request&) {
        http::Response r;
        r.status = 200;
        r.body = R"({"choices":[{"message":{"role":"assistant","content":"{\"description\":\"d\",\"vulnerability_detected\":true}"}}]})";
        return r;
    });
    backends::BackendConfig c;
    c.kind = backends::BackendKind::HttpChat;
    c.endpoint = "https://chat.example/v1/chat/completions";
    c.model_name = "gpt-test";
    backends::HttpChatBackend chat(server, c);
    auto reply = prompt::parse_llm_reply(chat.complete("sys", "user"), true);
    EXPECT_EQ(reply.vulnerability_detected, true);
    auto body = nlohmann::json::parse(server->requests.front().body);
    EXPECT_EQ(body["temperature"], 0);
    EXPECT_EQ(body["messages"][0]["role"], "system");
    EXPECT_EQ(body["messages"][1]["content"], "user");
}

TEST(HttpChat, EmptyOrFailedReplyIsBackendError)
{
    backends::BackendConfig c;
    c.kind = backends::BackendKind::HttpChat;
    c.endpoint = "https://chat.example/v1/chat/completions";
    backends::HttpChatBackend empty(std::make_shared<FakeServer>([](const http::Request&) {
                                        http::Response r;
                                        r.status = 200;
                                        r.body = R"({"choices":[{"message":{"content":""}}]})";
                                        return r;
                                    }),
                                    c);
    EXPECT_THROW(empty.complete("s", "u"), backends::BackendError);
    backends::HttpChatBackend denied(std::make_shared<FakeServer>([](const http::Request&) {
                                         http::Response r;
                                         r.status = 401;
                                         return r;
                                     }),
                                     c);
    EXPECT_THROW(denied.complete("s", "u"), backends::BackendError);
}

TEST(Factories, BuildMocksFromConfig)
{
    backends::BackendConfig e;
    e.dim = 16;
    EXPECT_EQ(backends::make_embedding_backend(e)->dim(), 16u);
    backends::BackendConfig c;
    c.kind = backends::BackendKind::MockChat;
    EXPECT_EQ(backends::make_chat_backend(c)->name(), "mock-chat");
    EXPECT_THROW(backends::make_chat_backend(e), ConfigError);
}
