#include "ghsec/prompt.hpp"

#include <json.hpp>

#include <vector>

namespace ghsec::prompt {

using nlohmann::json;

std::string render_issue_prompt(std::string_view repository, std::string_view owner, std::string_view title,
                                std::string_view body)
{
    std::string out;
    out.reserve(128 + title.size() + body.size());
    out += "This is a GitHub Issue.\n";
    out += "Repository: ";
    out += repository;
    out += "\nOwner: ";
    out += owner;
    out += "\nTitle: ";
    out += title;
    out += "\n\n--- Start of the Body ---\n";
    out += body;
    out += "\n--- End of the Body ---";
    return out;
}

std::string render_issue_prompt(const github::IssueRecord& issue)
{
    return render_issue_prompt(issue.repo_name, issue.repo_owner, issue.title, issue.body);
}

namespace {

constexpr std::string_view kClassificationPrompt =
    "You are a cybersecurity assistant tasked with identifying potential vulnerabilities by analyzing GitHub "
    "issues. Your goal is to review each issue and determine whether it indicates a security vulnerability. "
    "Provide a detailed description of the issue and a confidence score of how much you are confident about the "
    "vulnerability.\n"
    "\n"
    "In addition to identifying security vulnerabilities, you should also recognize cases where the issue is not a "
    "vulnerability. These may include failing tests, minor bugs, or issues related to functionality that do not "
    "present security risks.\n"
    "\n"
    "Please format your response in JSON with the following fields. DO NOT add any additional text to the "
    "response:\n"
    "\n"
    "description: Describe and reason about the issue. Explain if you detect any potential vulnerability or not.\n"
    "\n"
    "vulnerability_detected: A boolean indicating whether the issue is relevant (true) or not (false). This should "
    "be based on the explanation in description.";

constexpr std::string_view kDescriptionPrompt =
    "You are a software engineering assistant that reads GitHub issues. Describe and explain the GitHub issue you "
    "are given: summarize its key details and highlight the main problem it discusses, including the affected "
    "component, the observed behavior, and how it can be triggered. Do not decide whether the issue is a "
    "vulnerability.\n"
    "\n"
    "Please format your response in JSON with a single field. DO NOT add any additional text to the response:\n"
    "\n"
    "description: A concise summary of the issue and the main problem it reports.";

std::string fragment_of(std::string_view raw)
{
    constexpr std::size_t kMax = 200;
    return std::string(raw.substr(0, kMax)) + (raw.size() > kMax ? "..." : "");
}

// Bodies of ``` fenced blocks in order of appearance. The opening fence may
// carry a language tag on the same line; the closing fence starts a line, so
// backticks inside a JSON string do not end the block.
std::vector<std::string_view> fenced_blocks(std::string_view text)
{
    std::vector<std::string_view> blocks;
    std::size_t pos = 0;
    while (true) {
        auto open = text.find("```", pos);
        if (open == std::string_view::npos)
            break;
        auto line_end = text.find('\n', open + 3);
        if (line_end == std::string_view::npos)
            break;
        auto close = text.find("\n```", line_end);
        if (close == std::string_view::npos)
            break;
        ++close;
        blocks.push_back(text.substr(line_end + 1, close - line_end - 1));
        pos = close + 3;
    }
    return blocks;
}

std::optional<json> parse_object(std::string_view text)
{
    auto parsed = json::parse(trim(text), nullptr, /*allow_exceptions=*/false);
    if (parsed.is_discarded() || !parsed.is_object())
        return std::nullopt;
    return parsed;
}

// First balanced {...} span that parses as an object, for replies that wrap
// the JSON in prose without a fence.
std::optional<json> embedded_object(std::string_view text)
{
    for (auto start = text.find('{'); start != std::string_view::npos; start = text.find('{', start + 1)) {
        int depth = 0;
        bool in_string = false, escaped = false;
        for (std::size_t i = start; i < text.size(); ++i) {
            char c = text[i];
            if (in_string) {
                if (escaped)
                    escaped = false;
                else if (c == '\\')
                    escaped = true;
                else if (c == '"')
                    in_string = false;
            } else if (c == '"') {
                in_string = true;
            } else if (c == '{') {
                ++depth;
            } else if (c == '}' && --depth == 0) {
                if (auto obj = parse_object(text.substr(start, i - start + 1)))
                    return obj;
                break;
            }
        }
    }
    return std::nullopt;
}

} // namespace

std::string_view classification_system_prompt()
{
    return kClassificationPrompt;
}

std::string_view description_system_prompt()
{
    return kDescriptionPrompt;
}

LlmReply parse_llm_reply(std::string_view raw, bool require_label)
{
    std::optional<json> obj = parse_object(raw);
    if (!obj)
        for (auto block : fenced_blocks(raw))
            if ((obj = parse_object(block)))
                break;
    if (!obj)
        obj = embedded_object(raw);
    if (!obj)
        throw ReplyParseError("reply contains no JSON object", fragment_of(raw));

    LlmReply reply;
    auto desc = obj->find("description");
    if (desc == obj->end() || !desc->is_string())
        throw ReplyParseError("reply lacks a string \"description\"", fragment_of(raw));
    reply.description = desc->get<std::string>();
    if (trim(reply.description).empty())
        throw ReplyParseError("reply has an empty \"description\"", fragment_of(raw));

    auto label = obj->find("vulnerability_detected");
    if (label != obj->end()) {
        if (!label->is_boolean())
            throw ReplyParseError("\"vulnerability_detected\" is not a boolean", fragment_of(label->dump()));
        reply.vulnerability_detected = label->get<bool>();
    } else if (require_label) {
        throw ReplyParseError("reply lacks \"vulnerability_detected\"", fragment_of(raw));
    }
    if (!require_label)
        reply.vulnerability_detected.reset();
    return reply;
}

std::string serialize_reply(const LlmReply& reply)
{
    nlohmann::ordered_json j;
    j["description"] = reply.description;
    if (reply.vulnerability_detected)
        j["vulnerability_detected"] = *reply.vulnerability_detected;
    return j.dump();
}

} // namespace ghsec::prompt
