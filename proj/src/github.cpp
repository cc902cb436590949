#include "ghsec/github.hpp"

#include <algorithm>
#include <future>
#include <set>

namespace ghsec::github {

using nlohmann::json;
using nlohmann::ordered_json;

std::string issue_url(const RepoId& repo, std::int64_t number)
{
    return "https://github.com/" + repo.owner + "/" + repo.name + "/issues/" + std::to_string(number);
}

std::optional<IssueRef> parse_issue_url(std::string_view url)
{
    auto parsed = nvd::parse_url(url);
    if (!parsed || (parsed->host != "github.com" && parsed->host != "www.github.com"))
        return std::nullopt;
    std::string_view path = parsed->path_and_query;
    if (auto q = path.find('?'); q != std::string_view::npos)
        path = path.substr(0, q);

    std::vector<std::string_view> parts;
    while (!path.empty()) {
        if (path.front() == '/') {
            path.remove_prefix(1);
            continue;
        }
        auto slash = path.find('/');
        parts.push_back(path.substr(0, slash));
        if (slash == std::string_view::npos)
            break;
        path.remove_prefix(slash);
    }
    if (parts.size() < 4 || (parts[2] != "issues" && parts[2] != "pull"))
        return std::nullopt;
    std::int64_t number = 0;
    for (char c : parts[3]) {
        if (c < '0' || c > '9')
            return std::nullopt;
        number = number * 10 + (c - '0');
        if (number > (std::int64_t{1} << 40))
            return std::nullopt;
    }
    if (parts[3].empty() || number <= 0)
        return std::nullopt;
    return IssueRef{{std::string(parts[0]), std::string(parts[1])}, number, parts[2] == "pull"};
}

std::size_t CharHeuristicTokenizer::count(std::string_view text) const
{
    std::size_t chars = 0;
    for (unsigned char c : text)
        if ((c & 0xC0) != 0x80)
            ++chars;
    return (chars + 3) / 4;
}

std::size_t count_tokens(std::string_view text)
{
    return CharHeuristicTokenizer{}.count(text);
}

std::string issue_text(std::string_view title, std::string_view body)
{
    std::string out(title);
    out += "\n\n";
    out += body;
    return out;
}

TokenFilterResult filter_by_tokens(std::vector<IssueRecord> issues, std::size_t limit)
{
    if (limit < 1)
        throw PreconditionError("filter_by_tokens: limit must be >= 1");
    TokenFilterResult out;
    for (auto& issue : issues) {
        if (issue.token_count > limit)
            ++out.dropped;
        else
            out.issues.push_back(std::move(issue));
    }
    return out;
}

SelectionResult select_repositories(const std::vector<nvd::ReferenceLink>& links,
                                    const std::map<std::string, nvd::CveRecord>& cves, const DateWindow& window,
                                    std::size_t k)
{
    if (k < 1)
        throw PreconditionError("select_repositories: k must be >= 1");
    std::map<RepoId, std::set<std::string>> per_repo;
    for (const auto& link : links) {
        auto ref = parse_issue_url(link.url);
        if (!ref)
            continue;
        auto cve = cves.find(link.cve_id);
        if (cve == cves.end())
            continue;
        Date published = day_of(cve->second.published);
        if (published < window.start || published > window.end)
            continue;
        per_repo[ref->repo].insert(link.cve_id);
    }

    std::vector<RepoSelection> all;
    for (const auto& [repo, ids] : per_repo)
        all.push_back({repo, ids.size(), 0});
    // per_repo is ordered by (owner, name), so a stable sort keeps the tie order.
    std::stable_sort(all.begin(), all.end(),
                     [](const RepoSelection& a, const RepoSelection& b) { return a.cve_count > b.cve_count; });

    SelectionResult out;
    if (all.size() < k)
        out.warnings.push_back("requested top " + std::to_string(k) + " repositories but only " +
                               std::to_string(all.size()) + " qualify");
    all.resize(std::min(all.size(), k));
    for (std::size_t i = 0; i < all.size(); ++i)
        all[i].rank = i + 1;
    out.selections = std::move(all);
    return out;
}

std::optional<IssueRecord> parse_issue(const json& item, const RepoId& repo, const Tokenizer& tokenizer)
{
    if (item.contains("pull_request"))
        return std::nullopt;
    try {
        IssueRecord issue;
        issue.repo_owner = repo.owner;
        issue.repo_name = repo.name;
        issue.issue_number = item.at("number").get<std::int64_t>();
        issue.title = item.value("title", "");
        if (item.contains("body") && item["body"].is_string())
            issue.body = item["body"].get<std::string>();
        issue.created_at = parse_timestamp(item.at("created_at").get<std::string>());
        issue.html_url = issue_url(repo, issue.issue_number);
        issue.token_count = tokenizer.count(issue_text(issue.title, issue.body));
        return issue;
    } catch (const json::exception& e) {
        throw ParseError("issue in " + repo.full_name() + ": " + e.what());
    }
}

GitHubClient::GitHubClient(std::shared_ptr<http::Transport> transport, ClientConfig config)
    : transport_(std::move(transport)), config_(std::move(config))
{
    if (!transport_)
        throw PreconditionError("GitHubClient requires a transport");
    if (!config_.tokenizer)
        config_.tokenizer = std::make_shared<CharHeuristicTokenizer>();
    if (config_.per_page == 0 || config_.concurrency == 0)
        throw PreconditionError("GitHubClient: per_page and concurrency must be positive");
}

std::string GitHubClient::page_url(const RepoId& repo, std::size_t page) const
{
    return config_.base_url + "/repos/" + repo.owner + "/" + repo.name +
           "/issues?state=all&sort=created&direction=asc&per_page=" + std::to_string(config_.per_page) +
           "&page=" + std::to_string(page);
}

std::vector<IssueRecord> GitHubClient::fetch_issues(const RepoId& repo) const
{
    std::vector<IssueRecord> out;
    for (std::size_t page = 1;; ++page) {
        http::Request req;
        req.url = page_url(repo, page);
        req.headers["accept"] = "application/vnd.github+json";
        if (!config_.token.empty())
            req.headers["authorization"] = "Bearer " + config_.token;
        auto resp = http::send_with_retry(*transport_, req, config_.retry);
        if (resp.status == 404)
            throw RepoNotFound("repository not found: " + repo.full_name());
        if (resp.status != 200)
            throw http::TransportError("GitHub returned HTTP " + std::to_string(resp.status) + " for " + req.url,
                                       resp.status);
        json items;
        try {
            items = json::parse(resp.body);
        } catch (const json::exception& e) {
            throw ParseError("GitHub issues page for " + repo.full_name() + ": " + e.what());
        }
        if (!items.is_array())
            throw ParseError("GitHub issues page for " + repo.full_name() + " is not an array");
        for (const auto& item : items)
            if (auto issue = parse_issue(item, repo, *config_.tokenizer))
                out.push_back(std::move(*issue));

        // The listing counts pull requests against per_page, so a short page
        // is the reliable end marker when no Link header is present.
        auto link = resp.header("link");
        bool has_next = link.empty() ? items.size() >= config_.per_page
                                     : link.find("rel=\"next\"") != std::string::npos;
        if (!has_next || items.empty())
            break;
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const IssueRecord& a, const IssueRecord& b) { return a.issue_number < b.issue_number; });
    out.erase(std::unique(out.begin(), out.end(),
                          [](const IssueRecord& a, const IssueRecord& b) { return a.issue_number == b.issue_number; }),
              out.end());
    return out;
}

std::vector<std::vector<IssueRecord>> GitHubClient::fetch_many(const std::vector<RepoId>& repos) const
{
    std::vector<std::vector<IssueRecord>> out;
    out.reserve(repos.size());
    for (std::size_t i = 0; i < repos.size(); i += config_.concurrency) {
        std::vector<std::future<std::vector<IssueRecord>>> batch;
        for (std::size_t j = i; j < std::min(repos.size(), i + config_.concurrency); ++j)
            batch.push_back(std::async(std::launch::async, [this, &repo = repos[j]] { return fetch_issues(repo); }));
        for (auto& f : batch)
            out.push_back(f.get());
    }
    return out;
}

ordered_json to_json(const IssueRecord& issue)
{
    ordered_json j;
    j["repo_owner"] = issue.repo_owner;
    j["repo_name"] = issue.repo_name;
    j["issue_number"] = issue.issue_number;
    j["title"] = issue.title;
    j["body"] = issue.body;
    j["created_at"] = format_timestamp(issue.created_at);
    j["html_url"] = issue.html_url;
    j["token_count"] = issue.token_count;
    return j;
}

IssueRecord issue_from_json(const json& j)
{
    try {
        IssueRecord issue;
        issue.repo_owner = j.at("repo_owner").get<std::string>();
        issue.repo_name = j.at("repo_name").get<std::string>();
        issue.issue_number = j.at("issue_number").get<std::int64_t>();
        issue.title = j.at("title").get<std::string>();
        issue.body = j.at("body").get<std::string>();
        issue.created_at = parse_timestamp(j.at("created_at").get<std::string>());
        issue.html_url = j.at("html_url").get<std::string>();
        issue.token_count = j.at("token_count").get<std::size_t>();
        if (issue.issue_number <= 0)
            throw ParseError("issue_number must be positive");
        return issue;
    } catch (const json::exception& e) {
        throw ParseError(std::string("issue record: ") + e.what());
    }
}

} // namespace ghsec::github
