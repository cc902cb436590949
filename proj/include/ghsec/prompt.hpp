#pragma once

#include "ghsec/github.hpp"
#include "ghsec/util.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace ghsec::prompt {

/// A reply from the language model. `vulnerability_detected` is absent for
/// description-only replies.
struct LlmReply {
    std::string description;
    std::optional<bool> vulnerability_detected;

    bool operator==(const LlmReply&) const = default;
};

class ReplyParseError : public ParseError {
public:
    ReplyParseError(const std::string& what, std::string fragment)
        : ParseError(what), fragment_(std::move(fragment)) {}
    const std::string& fragment() const noexcept { return fragment_; }

private:
    std::string fragment_;
};

/// The user prompt for one issue. Lines are '\n'-separated with no trailing
/// newline. The body is inserted verbatim.
std::string render_issue_prompt(std::string_view repository, std::string_view owner, std::string_view title,
                                std::string_view body);
std::string render_issue_prompt(const github::IssueRecord& issue);

/// System prompt for zero-shot classification.
std::string_view classification_system_prompt();

/// System prompt for the first stage of the combined pipeline.
std::string_view description_system_prompt();

/// Accepts a bare JSON object or one inside ``` / ```json fences and
/// extracts "description" (and, when `require_label`, the boolean
/// "vulnerability_detected"). Other keys are ignored.
LlmReply parse_llm_reply(std::string_view raw, bool require_label);

/// Compact JSON rendering of a reply (the inverse of parse_llm_reply).
std::string serialize_reply(const LlmReply& reply);

} // namespace ghsec::prompt
