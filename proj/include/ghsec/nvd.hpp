#pragma once

#include "ghsec/http.hpp"
#include "ghsec/util.hpp"

#include <json.hpp>

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace ghsec::nvd {

enum class CveStatus { Analyzed, Modified, UnderExamination, Rejected, Other };

struct Severity {
    double score = 0.0; ///< CVSS base score in [0, 10]
    std::string vector;

    bool operator==(const Severity&) const = default;
};

struct CveRecord {
    std::string cve_id;
    Timestamp published{};
    Timestamp last_modified{};
    CveStatus status = CveStatus::Other;
    std::string status_text; ///< raw API string, kept for Other
    std::string description;
    std::vector<std::string> references;
    std::optional<Severity> severity;

    bool operator==(const CveRecord&) const = default;
};

struct ReferenceLink {
    std::string url;    ///< normalized
    std::string domain; ///< lowercased host
    std::string cve_id;

    bool operator==(const ReferenceLink&) const = default;
};

/// One record the parser could not accept, as written to the skip report.
struct SkipEntry {
    std::string cve_id; ///< empty when the id itself was unreadable
    std::string reason;
};

CveStatus status_from_api(std::string_view text);
std::string status_name(CveStatus status);

// URLs ---------------------------------------------------------------------

struct ParsedUrl {
    std::string scheme;
    std::string host;
    std::string path_and_query; ///< includes leading '/', fragment removed
};

/// Only http and https URLs with a non-empty host are accepted.
std::optional<ParsedUrl> parse_url(std::string_view url);

/// Lowercases scheme and host, strips the fragment, keeps path and query.
/// Returns nullopt for URLs outside the {http, https} allowlist.
std::optional<std::string> normalize_url(std::string_view url);

// Parsing ------------------------------------------------------------------

/// Parses one element of the NVD 2.0 "vulnerabilities" array. Throws
/// ParseError for records violating the CveRecord invariants.
CveRecord parse_cve_item(const nlohmann::json& item);

struct Page {
    std::size_t start_index = 0;
    std::size_t results_per_page = 0;
    std::size_t total_results = 0;
    std::vector<CveRecord> records;
    std::vector<SkipEntry> skipped;
};

Page parse_page(std::string_view body);

// Client -------------------------------------------------------------------

struct ClientConfig {
    std::string base_url = "https://services.nvd.nist.gov/rest/json/cves/2.0";
    std::string api_key; ///< sent as the `apiKey` header when non-empty
    std::size_t page_size = 2000;
    std::size_t concurrency = 4;
    int max_window_days = 120; ///< NVD rejects wider publication ranges
    http::RetryPolicy retry;
};

struct FetchResult {
    std::vector<CveRecord> records; ///< ascending by published
    std::vector<SkipEntry> skipped;
};

class NvdClient {
public:
    NvdClient(std::shared_ptr<http::Transport> transport, ClientConfig config);

    /// Every CVE published in [start, end] (whole days, UTC), pagination
    /// followed to exhaustion.
    FetchResult fetch_window(Date start, Date end) const;

    /// URL for one page of one sub-window; exposed for fixture recording.
    std::string page_url(Timestamp from, Timestamp to, std::size_t start_index) const;

private:
    Page fetch_page(Timestamp from, Timestamp to, std::size_t start_index) const;

    std::shared_ptr<http::Transport> transport_;
    ClientConfig config_;
};

// Filtering and reference extraction -----------------------------------------

struct FilterResult {
    std::vector<CveRecord> records;
    std::size_t dropped = 0;
};

/// Drops UnderExamination and Rejected records, preserving order.
FilterResult filter_valid(std::vector<CveRecord> records);

struct ReferenceExtraction {
    std::vector<ReferenceLink> links;
    std::vector<std::string> warnings;
};

ReferenceExtraction extract_references(const CveRecord& record);

/// (domain, count) sorted by count descending, then domain ascending.
std::vector<std::pair<std::string, std::size_t>> rank_domains(const std::vector<ReferenceLink>& links);

// Serialization ------------------------------------------------------------

nlohmann::ordered_json to_json(const CveRecord& record);
CveRecord cve_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const ReferenceLink& link);
ReferenceLink link_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const SkipEntry& entry);

} // namespace ghsec::nvd
