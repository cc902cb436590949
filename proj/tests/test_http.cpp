#include "ghsec/http.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace ghsec;
using namespace std::chrono_literals;

namespace {

http::RetryPolicy recording_policy(std::vector<std::chrono::milliseconds>& waits)
{
    http::RetryPolicy p;
    p.sleep = [&waits](std::chrono::milliseconds d) { waits.push_back(d); };
    return p;
}

http::Response status(int code, std::map<std::string, std::string> headers = {})
{
    http::Response r;
    r.status = code;
    r.headers = std::move(headers);
    return r;
}

} // namespace

TEST(CanonicalKey, IgnoresQueryOrderAndEncoding)
{
    EXPECT_EQ(http::canonical_key("GET", "https://h/p?b=2&a=x%3Ay"), http::canonical_key("GET", "https://h/p?a=x:y&b=2"));
    EXPECT_NE(http::canonical_key("GET", "https://h/p?a=1"), http::canonical_key("POST", "https://h/p?a=1"));
}

TEST(UrlEncode, ReservedCharacters)
{
    EXPECT_EQ(http::url_encode("2024-01-01T00:00:00.000"), "2024-01-01T00%3A00%3A00.000");
    EXPECT_EQ(http::url_encode("a b&c"), "a%20b%26c");
}

TEST(ReplayTransport, ServesRecordedResponsesInSequence)
{
    http::ReplayTransport t;
    t.add("GET", "https://h/x", status(500));
    t.add("GET", "https://h/x", status(200));
    http::Request req{"GET", "https://h/x", {}, ""};
    EXPECT_EQ(t.send(req).status, 500);
    EXPECT_EQ(t.send(req).status, 200);
    EXPECT_EQ(t.send(req).status, 200);
    EXPECT_EQ(t.send({"GET", "https://h/other", {}, ""}).status, 404);
    EXPECT_EQ(t.calls(), 4u);
}

TEST(Retry, RecoversAfterServerErrorWithBackoff)
{
    http::ReplayTransport t;
    t.add("GET", "https://h/x", status(503));
    t.add("GET", "https://h/x", status(502));
    t.add("GET", "https://h/x", status(200));
    std::vector<std::chrono::milliseconds> waits;
    auto r = http::send_with_retry(t, {"GET", "https://h/x", {}, ""}, recording_policy(waits));
    EXPECT_EQ(r.status, 200);
    ASSERT_EQ(waits.size(), 2u);
    EXPECT_EQ(waits[0], 1000ms);
    EXPECT_EQ(waits[1], 2000ms);
}

TEST(Retry, GivesUpAfterThreeAttempts)
{
    http::ReplayTransport t;
    t.add("GET", "https://h/x", status(429));
    std::vector<std::chrono::milliseconds> waits;
    try {
        http::send_with_retry(t, {"GET", "https://h/x", {}, ""}, recording_policy(waits));
        FAIL() << "expected TransportError";
    } catch (const http::TransportError& e) {
        EXPECT_EQ(e.status(), 429);
    }
    EXPECT_EQ(t.calls(), 3u);
}

TEST(Retry, HonorsRetryAfterHeader)
{
    http::ReplayTransport t;
    t.add("GET", "https://h/x", status(429, {{"retry-after", "7"}}));
    t.add("GET", "https://h/x", status(200));
    std::vector<std::chrono::milliseconds> waits;
    http::send_with_retry(t, {"GET", "https://h/x", {}, ""}, recording_policy(waits));
    ASSERT_EQ(waits.size(), 1u);
    EXPECT_EQ(waits[0], 7000ms);
}

TEST(Retry, ForbiddenWithoutRateLimitIsNotRetried)
{
    http::ReplayTransport t;
    t.add("GET", "https://h/x", status(403));
    std::vector<std::chrono::milliseconds> waits;
    auto r = http::send_with_retry(t, {"GET", "https://h/x", {}, ""}, recording_policy(waits));
    EXPECT_EQ(r.status, 403);
    EXPECT_TRUE(waits.empty());
}

TEST(Retry, RateLimitedForbiddenIsRetried)
{
    http::ReplayTransport t;
    t.add("GET", "https://h/x", status(403, {{"x-ratelimit-remaining", "0"}}));
    t.add("GET", "https://h/x", status(200));
    std::vector<std::chrono::milliseconds> waits;
    EXPECT_EQ(http::send_with_retry(t, {"GET", "https://h/x", {}, ""}, recording_policy(waits)).status, 200);
    EXPECT_EQ(waits.size(), 1u);
}

TEST(ReplayTransport, LoadsIndexFromFixtureDirectory)
{
    http::ReplayTransport t(testing_support::fixtures() / "github");
    auto r = t.send({"GET",
                     "https://api.github.com/repos/acme/imgtool/issues?state=all&sort=created&direction=asc&per_page=100&page=1",
                     {}, ""});
    EXPECT_EQ(r.status, 404);
}
