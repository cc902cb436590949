#pragma once

#include "ghsec/github.hpp"
#include "ghsec/nvd.hpp"
#include "ghsec/util.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ghsec::dataset {

enum class Split { Unassigned, ExcludedPreCutoff, ExcludedContaminated, Train, Test };

std::string split_name(Split split);
Split split_from_name(std::string_view name);

struct LinkedCve {
    std::string cve_id;
    Timestamp disclosure_date{};
    std::string description;
    std::optional<nvd::Severity> severity;

    bool operator==(const LinkedCve&) const = default;
};

struct LabeledIssue {
    github::IssueRecord issue;
    bool label = false;
    std::vector<LinkedCve> linked_cves; ///< empty iff !label
    Split split = Split::Unassigned;

    bool operator==(const LabeledIssue&) const = default;
};

struct SplitCounts {
    std::size_t excluded_pre_cutoff = 0;
    std::size_t excluded_contaminated = 0;
    std::size_t train = 0;
    std::size_t test = 0;
    std::size_t unassigned = 0;

    std::size_t total() const
    {
        return excluded_pre_cutoff + excluded_contaminated + train + test + unassigned;
    }
    bool operator==(const SplitCounts&) const = default;
};

struct CorpusManifest {
    std::size_t total = 0;
    std::size_t positives = 0;
    std::size_t negatives = 0;
    SplitCounts splits;
    std::uint64_t seed = 0;
    Date cutoff{};
    Timestamp created{};
    double train_fraction = 0.0;

    bool operator==(const CorpusManifest&) const = default;
};

CorpusManifest summarize(const std::vector<LabeledIssue>& corpus, std::uint64_t seed, Date cutoff,
                         double train_fraction, Timestamp created);

// Labeling -----------------------------------------------------------------

struct LabelResult {
    std::vector<LabeledIssue> issues;
    /// Issue links whose issue is absent from the harvested set.
    std::vector<nvd::ReferenceLink> orphans;
};

/// An issue is positive iff its html_url is cited by at least one link;
/// every citing CVE is attached, ordered by CVE id.
LabelResult label_issues(const std::vector<github::IssueRecord>& issues, const std::vector<nvd::ReferenceLink>& links,
                         const std::map<std::string, nvd::CveRecord>& cves);

/// Keeps every positive and, per repository, a seeded uniform sample of
/// round(neg_per_pos * positives) negatives (clipped to availability).
/// Input order is preserved.
std::vector<LabeledIssue> sample_negatives(const std::vector<LabeledIssue>& labeled, double neg_per_pos,
                                           std::uint64_t seed);

inline constexpr double kDefaultNegPerPos = 4.19;
inline constexpr double kDefaultTrainFraction = 49.0 / 82.0;

struct SplitResult {
    std::vector<LabeledIssue> issues;
    CorpusManifest manifest;
    std::vector<std::string> warnings;
};

/// Date-based exclusions, then a seeded label-stratified Train/Test split of
/// the remainder. See README "Dataset splits" for the exact rules.
SplitResult assign_splits(std::vector<LabeledIssue> labeled, Date cutoff, double train_fraction_of_remainder,
                          std::uint64_t seed, Timestamp created = {});

// Persistence --------------------------------------------------------------

nlohmann::ordered_json to_json(const LabeledIssue& issue);
LabeledIssue labeled_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const CorpusManifest& manifest);
CorpusManifest manifest_from_json(const nlohmann::json& j);

std::filesystem::path manifest_path(const std::filesystem::path& corpus_path);

/// JSON-lines corpus plus `<path>.manifest.json`. Both written atomically.
CorpusManifest write_corpus(const std::vector<LabeledIssue>& corpus, const std::filesystem::path& path,
                            CorpusManifest manifest);

struct Corpus {
    std::vector<LabeledIssue> issues;
    CorpusManifest manifest;
};

/// Throws IntegrityError (with a 1-based line number where applicable) for
/// malformed lines or manifest/content disagreement.
Corpus read_corpus(const std::filesystem::path& path);

std::vector<LabeledIssue> select_split(const std::vector<LabeledIssue>& corpus, Split split);

} // namespace ghsec::dataset
