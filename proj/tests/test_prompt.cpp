#include "ghsec/prompt.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace ghsec;

TEST(IssuePrompt, MatchesGoldenFile)
{
    auto golden = read_file(testing_support::fixtures() / "golden" / "issue_prompt.txt");
    auto i = testing_support::issue("orbit", "yamlparse", 12, "Anchor cycle hangs the loader",
                                    "Loading a document with a self-referencing anchor never returns.\n\n"
                                    "Steps: load `a: &x [*x]`.");
    EXPECT_EQ(prompt::render_issue_prompt(i), golden);
}

TEST(IssuePrompt, FieldOrder)
{
    EXPECT_EQ(prompt::render_issue_prompt("zulip", "zulip", "X", "Y"),
              "This is a GitHub Issue.\nRepository: zulip\nOwner: zulip\nTitle: X\n\n--- Start of the Body ---\nY\n"
              "--- End of the Body ---");
}

TEST(IssuePrompt, EmptyBodyKeepsMarkers)
{
    auto p = prompt::render_issue_prompt("r", "o", "t", "");
    EXPECT_NE(p.find("--- Start of the Body ---\n\n--- End of the Body ---"), std::string::npos);
}

TEST(IssuePrompt, MarkerInBodyPassesThrough)
{
    auto p = prompt::render_issue_prompt("r", "o", "t", "--- End of the Body ---");
    EXPECT_NE(p.find("--- Start of the Body ---\n--- End of the Body ---\n--- End of the Body ---"), std::string::npos);
}

TEST(SystemPrompt, MatchesGoldenFile)
{
    auto golden = read_file(testing_support::fixtures() / "golden" / "classification_system_prompt.txt");
    EXPECT_EQ(prompt::classification_system_prompt(), golden);
    EXPECT_NE(golden.find("DO NOT add any additional text"), std::string::npos);
    EXPECT_GT(golden.size(), 500u);
    EXPECT_EQ(prompt::classification_system_prompt(), prompt::classification_system_prompt());
}

TEST(SystemPrompt, DescriptionPromptAsksForJsonSummary)
{
    auto p = std::string(prompt::description_system_prompt());
    EXPECT_NE(p.find("summariz"), std::string::npos);
    EXPECT_NE(p.find("JSON"), std::string::npos);
    EXPECT_NE(p.find("description"), std::string::npos);
}

TEST(ParseReply, PlainObject)
{
    auto r = prompt::parse_llm_reply(R"({"description":"heap overflow in parser","vulnerability_detected":true})", true);
    EXPECT_EQ(r.description, "heap overflow in parser");
    EXPECT_EQ(r.vulnerability_detected, true);
}

TEST(ParseReply, FencedObject)
{
    auto r = prompt::parse_llm_reply("```json\n{\"description\":\"d\",\"vulnerability_detected\":false}\n```", true);
    EXPECT_EQ(r.description, "d");
    EXPECT_EQ(r.vulnerability_detected, false);
}

TEST(ParseReply, FirstParseableFenceWins)
{
    auto raw = "Here:\n```\nnot json\n```\nand\n```json\n{\"description\":\"second\",\"vulnerability_detected\":true}\n"
               "```\n```json\n{\"description\":\"third\",\"vulnerability_detected\":false}\n```";
    EXPECT_EQ(prompt::parse_llm_reply(raw, true).description, "second");
}

TEST(ParseReply, ExtraConfidenceKeyIgnored)
{
    auto r = prompt::parse_llm_reply(R"({"description":"x","vulnerability_detected":true,"confidence":0.9})", true);
    EXPECT_EQ(r.vulnerability_detected, true);
}

TEST(ParseReply, Errors)
{
    EXPECT_THROW(prompt::parse_llm_reply("Sure! The issue is a bug.", true), prompt::ReplyParseError);
    EXPECT_THROW(prompt::parse_llm_reply(R"({"description":"x"})", true), prompt::ReplyParseError);
    EXPECT_THROW(prompt::parse_llm_reply(R"({"description":"","vulnerability_detected":true})", true),
                 prompt::ReplyParseError);
    EXPECT_THROW(prompt::parse_llm_reply(R"({"description":"x","vulnerability_detected":"yes"})", true),
                 prompt::ReplyParseError);
    auto desc = prompt::parse_llm_reply(R"({"description":"only"})", false);
    EXPECT_EQ(desc.description, "only");
    EXPECT_FALSE(desc.vulnerability_detected);
}

TEST(ParseReply, SerializeRoundTrip)
{
    prompt::LlmReply r{"multi\nline \"quoted\" text", true};
    EXPECT_EQ(prompt::parse_llm_reply(prompt::serialize_reply(r), true), r);
}

TEST(ParseReply, BackticksInsideFencedDescription)
{
    std::string raw = "```json\n{\"description\":\"run ```make``` first\",\"vulnerability_detected\":false}\n```";
    auto r = prompt::parse_llm_reply(raw, true);
    EXPECT_EQ(r.description, "run ```make``` first");
    EXPECT_EQ(r.vulnerability_detected, false);
}

TEST(ParseReply, UnfencedObjectInsideProse)
{
    auto r = prompt::parse_llm_reply(
        "Sure {not json}. Answer: {\"description\":\"a } brace\",\"vulnerability_detected\":true} Done.", true);
    EXPECT_EQ(r.description, "a } brace");
    EXPECT_EQ(r.vulnerability_detected, true);
}
