#pragma once

#include "ghsec/http.hpp"
#include "ghsec/nvd.hpp"
#include "ghsec/util.hpp"

#include <json.hpp>

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace ghsec::github {

struct RepoId {
    std::string owner;
    std::string name;

    auto operator<=>(const RepoId&) const = default;
    std::string full_name() const { return owner + "/" + name; }
};

struct IssueRecord {
    std::string repo_owner;
    std::string repo_name;
    std::int64_t issue_number = 0;
    std::string title;
    std::string body;
    Timestamp created_at{};
    std::string html_url;
    std::size_t token_count = 0;

    RepoId repo() const { return {repo_owner, repo_name}; }
    bool operator==(const IssueRecord&) const = default;
};

struct RepoSelection {
    RepoId repo;
    std::size_t cve_count = 0;
    std::size_t rank = 0;
};

/// Canonical issue URL: https://github.com/<owner>/<name>/issues/<n>.
std::string issue_url(const RepoId& repo, std::int64_t number);

struct IssueRef {
    RepoId repo;
    std::int64_t number = 0;
    bool is_pull = false;
};

/// Recognizes github.com/<owner>/<name>/(issues|pull)/<n>[/...] URLs.
std::optional<IssueRef> parse_issue_url(std::string_view url);

// Tokens -------------------------------------------------------------------

class Tokenizer {
public:
    virtual ~Tokenizer() = default;
    virtual std::size_t count(std::string_view text) const = 0;
};

/// ceil(code points / 4).
class CharHeuristicTokenizer : public Tokenizer {
public:
    std::size_t count(std::string_view text) const override;
};

std::size_t count_tokens(std::string_view text);

/// Text that is measured and shipped downstream for an issue.
std::string issue_text(std::string_view title, std::string_view body);

struct TokenFilterResult {
    std::vector<IssueRecord> issues;
    std::size_t dropped = 0;
};

/// Keeps issues with token_count <= limit.
TokenFilterResult filter_by_tokens(std::vector<IssueRecord> issues, std::size_t limit = 8191);

// Repository selection ------------------------------------------------------

struct DateWindow {
    Date start;
    Date end; ///< inclusive
};

struct SelectionResult {
    std::vector<RepoSelection> selections;
    std::vector<std::string> warnings;
};

/// Counts distinct CVE ids per repository over links pointing at GitHub
/// issue/PR paths whose CVE was published inside `window`, then returns the
/// top k (ties: owner, then name ascending).
SelectionResult select_repositories(const std::vector<nvd::ReferenceLink>& links,
                                    const std::map<std::string, nvd::CveRecord>& cves,
                                    const DateWindow& window, std::size_t k);

// Client -------------------------------------------------------------------

class RepoNotFound : public Error {
public:
    using Error::Error;
};

struct ClientConfig {
    std::string base_url = "https://api.github.com";
    std::string token;
    std::size_t per_page = 100;
    std::size_t concurrency = 4;
    http::RetryPolicy retry;
    std::shared_ptr<const Tokenizer> tokenizer;
};

class GitHubClient {
public:
    GitHubClient(std::shared_ptr<http::Transport> transport, ClientConfig config);

    /// All issues (pull requests excluded), ascending by number, with
    /// token_count filled in.
    std::vector<IssueRecord> fetch_issues(const RepoId& repo) const;

    /// Fetches several repositories with bounded concurrency; results keep
    /// the order of `repos`.
    std::vector<std::vector<IssueRecord>> fetch_many(const std::vector<RepoId>& repos) const;

    std::string page_url(const RepoId& repo, std::size_t page) const;

private:
    std::shared_ptr<http::Transport> transport_;
    ClientConfig config_;
};

/// Parses one element of the GitHub REST v3 issues listing. Returns nullopt
/// for pull requests.
std::optional<IssueRecord> parse_issue(const nlohmann::json& item, const RepoId& repo, const Tokenizer& tokenizer);

nlohmann::ordered_json to_json(const IssueRecord& issue);
IssueRecord issue_from_json(const nlohmann::json& j);

} // namespace ghsec::github
