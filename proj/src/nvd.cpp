#include "ghsec/nvd.hpp"

#include <algorithm>
#include <future>
#include <set>

namespace ghsec::nvd {

using nlohmann::json;
using nlohmann::ordered_json;

CveStatus status_from_api(std::string_view text)
{
    std::string s = to_lower(trim(text));
    if (s == "analyzed")
        return CveStatus::Analyzed;
    if (s == "modified")
        return CveStatus::Modified;
    if (s == "rejected")
        return CveStatus::Rejected;
    if (s == "awaiting analysis" || s == "undergoing analysis" || s == "under examination")
        return CveStatus::UnderExamination;
    return CveStatus::Other;
}

std::string status_name(CveStatus status)
{
    switch (status) {
    case CveStatus::Analyzed: return "Analyzed";
    case CveStatus::Modified: return "Modified";
    case CveStatus::UnderExamination: return "UnderExamination";
    case CveStatus::Rejected: return "Rejected";
    case CveStatus::Other: return "Other";
    }
    return "Other";
}

std::optional<ParsedUrl> parse_url(std::string_view url)
{
    url = trim(url);
    auto sep = url.find("://");
    if (sep == std::string_view::npos)
        return std::nullopt;
    ParsedUrl out;
    out.scheme = to_lower(url.substr(0, sep));
    if (out.scheme != "http" && out.scheme != "https")
        return std::nullopt;
    auto rest = url.substr(sep + 3);
    auto hash = rest.find('#');
    if (hash != std::string_view::npos)
        rest = rest.substr(0, hash);
    auto host_end = rest.find_first_of("/?");
    auto authority = rest.substr(0, host_end);
    if (auto at = authority.rfind('@'); at != std::string_view::npos)
        authority = authority.substr(at + 1);
    if (authority.empty() || authority.find_first_of(" \t<>\"") != std::string_view::npos)
        return std::nullopt;
    out.host = to_lower(authority);
    if (host_end == std::string_view::npos) {
        out.path_and_query = "/";
    } else {
        out.path_and_query = std::string(rest.substr(host_end));
        if (out.path_and_query.front() == '?')
            out.path_and_query.insert(out.path_and_query.begin(), '/');
    }
    return out;
}

std::optional<std::string> normalize_url(std::string_view url)
{
    auto parsed = parse_url(url);
    if (!parsed)
        return std::nullopt;
    return parsed->scheme + "://" + parsed->host + parsed->path_and_query;
}

namespace {

std::string domain_of(const std::string& normalized)
{
    auto p = parse_url(normalized);
    std::string host = p ? p->host : std::string{};
    if (auto colon = host.find(':'); colon != std::string::npos)
        host.resize(colon);
    return host;
}

std::optional<Severity> parse_severity(const json& metrics)
{
    // Prefer the newest CVSS version present, and the NVD's own ("Primary")
    // assessment within a version.
    for (const char* key : {"cvssMetricV40", "cvssMetricV31", "cvssMetricV30", "cvssMetricV2"}) {
        if (!metrics.contains(key) || !metrics[key].is_array() || metrics[key].empty())
            continue;
        const json* chosen = &metrics[key].front();
        for (const auto& m : metrics[key])
            if (m.value("type", "") == "Primary") {
                chosen = &m;
                break;
            }
        const auto& data = chosen->at("cvssData");
        Severity s;
        s.score = data.at("baseScore").get<double>();
        s.vector = data.value("vectorString", "");
        if (!(s.score >= 0.0 && s.score <= 10.0))
            throw ParseError("CVSS base score out of range");
        return s;
    }
    return std::nullopt;
}

} // namespace

CveRecord parse_cve_item(const json& item)
{
    const json& cve = item.contains("cve") ? item.at("cve") : item;
    CveRecord r;
    try {
        r.cve_id = cve.at("id").get<std::string>();
        if (!is_cve_id(r.cve_id))
            throw ParseError("malformed CVE id '" + r.cve_id + "'");
        r.published = parse_timestamp(cve.at("published").get<std::string>());
        r.last_modified = parse_timestamp(cve.at("lastModified").get<std::string>());
        if (r.published > r.last_modified)
            throw ParseError(r.cve_id + ": published after lastModified");
        std::string raw_status = cve.value("vulnStatus", "");
        r.status = status_from_api(raw_status);
        if (r.status == CveStatus::Other)
            r.status_text = raw_status;
        if (cve.contains("descriptions"))
            for (const auto& d : cve["descriptions"])
                if (d.value("lang", "") == "en") {
                    r.description = d.at("value").get<std::string>();
                    break;
                }
        std::set<std::string> seen;
        if (cve.contains("references"))
            for (const auto& ref : cve["references"]) {
                auto url = ref.at("url").get<std::string>();
                auto key = normalize_url(url).value_or(url);
                if (seen.insert(key).second)
                    r.references.push_back(url);
            }
        if (cve.contains("metrics"))
            r.severity = parse_severity(cve["metrics"]);
    } catch (const json::exception& e) {
        throw ParseError((r.cve_id.empty() ? std::string("record") : r.cve_id) + ": " + e.what());
    }
    return r;
}

Page parse_page(std::string_view body)
{
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::exception& e) {
        throw ParseError(std::string("NVD page is not JSON: ") + e.what());
    }
    Page page;
    try {
        page.start_index = doc.at("startIndex").get<std::size_t>();
        page.results_per_page = doc.at("resultsPerPage").get<std::size_t>();
        page.total_results = doc.at("totalResults").get<std::size_t>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("NVD page header: ") + e.what());
    }
    if (!doc.contains("vulnerabilities"))
        return page;
    for (const auto& item : doc["vulnerabilities"]) {
        try {
            page.records.push_back(parse_cve_item(item));
        } catch (const ParseError& e) {
            std::string id;
            if (item.contains("cve") && item["cve"].contains("id") && item["cve"]["id"].is_string())
                id = item["cve"]["id"].get<std::string>();
            page.skipped.push_back({id, e.what()});
        }
    }
    return page;
}

NvdClient::NvdClient(std::shared_ptr<http::Transport> transport, ClientConfig config)
    : transport_(std::move(transport)), config_(std::move(config))
{
    if (!transport_)
        throw PreconditionError("NvdClient requires a transport");
    if (config_.page_size == 0 || config_.concurrency == 0)
        throw PreconditionError("NvdClient: page_size and concurrency must be positive");
}

namespace {

std::string nvd_time(Timestamp t)
{
    // NVD expects extended ISO-8601 with milliseconds.
    auto s = format_timestamp(t);
    s.pop_back(); // 'Z'
    return s + ".000";
}

} // namespace

std::string NvdClient::page_url(Timestamp from, Timestamp to, std::size_t start_index) const
{
    return config_.base_url + "?pubStartDate=" + http::url_encode(nvd_time(from)) +
           "&pubEndDate=" + http::url_encode(nvd_time(to)) +
           "&resultsPerPage=" + std::to_string(config_.page_size) +
           "&startIndex=" + std::to_string(start_index);
}

Page NvdClient::fetch_page(Timestamp from, Timestamp to, std::size_t start_index) const
{
    http::Request req;
    req.url = page_url(from, to, start_index);
    if (!config_.api_key.empty())
        req.headers["apikey"] = config_.api_key;
    auto resp = http::send_with_retry(*transport_, req, config_.retry);
    if (resp.status != 200)
        throw http::TransportError("NVD returned HTTP " + std::to_string(resp.status) + " for " + req.url,
                                   resp.status);
    return parse_page(resp.body);
}

FetchResult NvdClient::fetch_window(Date start, Date end) const
{
    using namespace std::chrono;
    if (start > end)
        throw PreconditionError("fetch_window: start after end");

    FetchResult out;
    auto absorb = [&out](Page&& page) {
        for (auto& r : page.records)
            out.records.push_back(std::move(r));
        for (auto& s : page.skipped)
            out.skipped.push_back(std::move(s));
    };

    for (Date chunk_start = start; chunk_start <= end;) {
        Date chunk_end = std::min(end, chunk_start + days{config_.max_window_days - 1});
        Timestamp from = to_timestamp(chunk_start);
        Timestamp to = to_timestamp(chunk_end) + hours{23} + minutes{59} + seconds{59};

        Page first = fetch_page(from, to, 0);
        std::size_t total = first.total_results;
        std::size_t step = first.results_per_page > 0 ? first.results_per_page : config_.page_size;
        absorb(std::move(first));

        std::vector<std::size_t> offsets;
        for (std::size_t off = step; off < total; off += step)
            offsets.push_back(off);
        for (std::size_t i = 0; i < offsets.size(); i += config_.concurrency) {
            std::vector<std::future<Page>> batch;
            for (std::size_t j = i; j < std::min(offsets.size(), i + config_.concurrency); ++j)
                batch.push_back(std::async(std::launch::async,
                                           [this, from, to, off = offsets[j]] { return fetch_page(from, to, off); }));
            for (auto& f : batch)
                absorb(f.get());
        }
        chunk_start = chunk_end + days{1};
    }

    std::stable_sort(out.records.begin(), out.records.end(),
                     [](const CveRecord& a, const CveRecord& b) { return a.published < b.published; });
    return out;
}

FilterResult filter_valid(std::vector<CveRecord> records)
{
    FilterResult out;
    for (auto& r : records) {
        if (r.status == CveStatus::UnderExamination || r.status == CveStatus::Rejected)
            ++out.dropped;
        else
            out.records.push_back(std::move(r));
    }
    return out;
}

ReferenceExtraction extract_references(const CveRecord& record)
{
    ReferenceExtraction out;
    std::set<std::string> seen;
    for (const auto& url : record.references) {
        auto norm = normalize_url(url);
        if (!norm) {
            out.warnings.push_back(record.cve_id + ": skipped unsupported reference '" + url + "'");
            continue;
        }
        if (!seen.insert(*norm).second)
            continue;
        out.links.push_back({*norm, domain_of(*norm), record.cve_id});
    }
    return out;
}

std::vector<std::pair<std::string, std::size_t>> rank_domains(const std::vector<ReferenceLink>& links)
{
    std::map<std::string, std::size_t> counts;
    for (const auto& l : links)
        ++counts[l.domain];
    std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    return ranked;
}

ordered_json to_json(const CveRecord& r)
{
    ordered_json j;
    j["cve_id"] = r.cve_id;
    j["published"] = format_timestamp(r.published);
    j["last_modified"] = format_timestamp(r.last_modified);
    j["status"] = r.status == CveStatus::Other ? r.status_text : status_name(r.status);
    j["description"] = r.description;
    j["references"] = r.references;
    if (r.severity)
        j["severity"] = ordered_json{{"score", r.severity->score}, {"vector", r.severity->vector}};
    else
        j["severity"] = nullptr;
    return j;
}

CveRecord cve_from_json(const json& j)
{
    try {
        CveRecord r;
        r.cve_id = j.at("cve_id").get<std::string>();
        if (!is_cve_id(r.cve_id))
            throw ParseError("malformed CVE id '" + r.cve_id + "'");
        r.published = parse_timestamp(j.at("published").get<std::string>());
        r.last_modified = parse_timestamp(j.at("last_modified").get<std::string>());
        std::string status = j.at("status").get<std::string>();
        if (status == "UnderExamination")
            r.status = CveStatus::UnderExamination;
        else
            r.status = status_from_api(status);
        r.status_text = r.status == CveStatus::Other ? status : std::string{};
        r.description = j.value("description", "");
        r.references = j.value("references", std::vector<std::string>{});
        if (j.contains("severity") && !j["severity"].is_null())
            r.severity = Severity{j["severity"].at("score").get<double>(), j["severity"].value("vector", "")};
        return r;
    } catch (const json::exception& e) {
        throw ParseError(std::string("CVE record: ") + e.what());
    }
}

ordered_json to_json(const ReferenceLink& l)
{
    return ordered_json{{"url", l.url}, {"domain", l.domain}, {"cve_id", l.cve_id}};
}

ReferenceLink link_from_json(const json& j)
{
    try {
        return {j.at("url").get<std::string>(), j.at("domain").get<std::string>(), j.at("cve_id").get<std::string>()};
    } catch (const json::exception& e) {
        throw ParseError(std::string("reference link: ") + e.what());
    }
}

ordered_json to_json(const SkipEntry& e)
{
    return ordered_json{{"cve_id", e.cve_id}, {"reason", e.reason}};
}

} // namespace ghsec::nvd
