#pragma once

#include "ghsec/backends.hpp"
#include "ghsec/gbdt.hpp"
#include "ghsec/util.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace ghsec::config {

/// Everything a CLI run needs. File values are applied over these defaults
/// and command-line flags over the file.
struct RunConfig {
    std::uint64_t seed = 42;
    std::filesystem::path out_dir = "out";
    std::optional<std::filesystem::path> replay_dir; ///< serve HTTP from fixtures

    // ingest
    std::optional<Date> nvd_start;
    std::optional<Date> nvd_end;
    std::string nvd_base_url = "https://services.nvd.nist.gov/rest/json/cves/2.0";
    std::string nvd_api_key;
    std::size_t nvd_page_size = 2000;
    std::size_t nvd_concurrency = 4;

    // harvest
    std::string github_base_url = "https://api.github.com";
    std::string github_token;
    std::size_t github_concurrency = 4;
    std::size_t repos_top_k = 31;
    std::size_t token_limit = 8191;
    int ranking_window_days = 365;

    // build
    Date cutoff = parse_date("2021-09-01");
    double train_fraction = 49.0 / 82.0;
    double neg_per_pos = 4.19;

    // models
    backends::BackendConfig embedding{backends::BackendKind::MockEmbedding, "", "mock", 256};
    backends::BackendConfig chat{backends::BackendKind::MockChat, "", "mock"};
    gbdt::GbdtParams gbdt;
    double threshold = 0.5;
    bool combined_on_descriptions = true;
    std::size_t detect_concurrency = 1;

    // evaluation
    bool word_boundary = false;
    std::size_t histogram_bins = 20;
};

/// Parses `key = value` lines. `#` starts a comment line, `${NAME}` expands
/// to the environment variable (empty when unset). Throws ConfigError on
/// unknown keys or malformed values.
std::map<std::string, std::string> parse_key_values(std::string_view text);

/// Applies one key to `config`. Throws ConfigError for unknown keys.
void apply(RunConfig& config, const std::string& key, const std::string& value);

RunConfig load(const std::filesystem::path& path, RunConfig base = {});

/// Canonical text of the effective configuration with secrets omitted;
/// hashed into run manifests.
std::string canonical(const RunConfig& config);

} // namespace ghsec::config
