#pragma once

#include "ghsec/backends.hpp"
#include "ghsec/dataset.hpp"
#include "ghsec/gbdt.hpp"
#include "ghsec/github.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ghsec::detectors {

enum class DetectorKind { Baseline, Embedding, Llm, Combined };

std::string detector_name(DetectorKind kind);
DetectorKind detector_from_name(std::string_view name);
/// Row label used in metric reports.
std::string detector_display_name(DetectorKind kind);

struct DetectionResult {
    bool label = false;
    std::optional<std::string> description;
    std::optional<double> score;
    DetectorKind detector = DetectorKind::Baseline;
    std::string issue_url;

    /// Throws PreconditionError if the per-detector field rules are violated.
    void validate() const;
    bool operator==(const DetectionResult&) const = default;
};

class DetectorError : public Error {
public:
    using Error::Error;
};

inline const std::vector<std::string> kDefaultKeywords = {"vulnerability", "NVD", "security"};

struct BaselineOptions {
    std::vector<std::string> keywords = kDefaultKeywords;
    /// Require keyword matches to sit on word boundaries instead of
    /// substring matching.
    bool word_boundary = false;
};

/// True iff title or body contains a CVE id or any keyword
/// (case-insensitive).
DetectionResult baseline_classify(const github::IssueRecord& issue, const BaselineOptions& options = {});

/// Embeds the rendered issue prompt and thresholds the classifier
/// probability.
DetectionResult embedding_classify(const github::IssueRecord& issue, const backends::EmbeddingBackend& embedder,
                                   const gbdt::GbdtModel& model, double threshold = 0.5);

/// Zero-shot classification. A reply that fails to parse is retried once
/// with the same prompt before a DetectorError is raised.
DetectionResult llm_classify(const github::IssueRecord& issue, const backends::ChatBackend& chat);

/// LLM description of the issue (first stage of the combined pipeline).
std::string describe_issue(const github::IssueRecord& issue, const backends::ChatBackend& chat);

/// Describe with the LLM, embed the description, classify it.
DetectionResult combined_classify(const github::IssueRecord& issue, const backends::ChatBackend& chat,
                                  const backends::EmbeddingBackend& embedder, const gbdt::GbdtModel& model,
                                  double threshold = 0.5);

/// Row-per-text feature matrix from embeddings. All vectors must share a
/// dimension.
gbdt::FeatureMatrix to_features(const std::vector<backends::EmbeddingVector>& vectors);

/// What the classifier of the embedding detector (or the combined detector)
/// is trained on.
enum class FeatureSource { IssuePrompt, LlmDescription };

gbdt::GbdtModel train_classifier(const std::vector<dataset::LabeledIssue>& training,
                                 const backends::EmbeddingBackend& embedder, const gbdt::GbdtParams& params,
                                 FeatureSource source, const backends::ChatBackend* chat = nullptr,
                                 gbdt::TrainingReport* report = nullptr);

// Batch runs -----------------------------------------------------------------

struct DetectionError {
    std::string issue_url;
    DetectorKind detector = DetectorKind::Baseline;
    std::string message;
};

struct RunReport {
    std::vector<DetectionResult> results; ///< corpus order, failures omitted
    std::vector<DetectionError> errors;
    bool failed = false; ///< more than 10% of issues errored

    std::size_t attempted() const { return results.size() + errors.size(); }
};

using IssueDetector = std::function<DetectionResult(const github::IssueRecord&)>;

/// Applies `detector` to every issue with up to `concurrency` workers.
/// Per-issue Error exceptions are collected, not propagated.
RunReport run_detector(const std::vector<dataset::LabeledIssue>& split, DetectorKind kind,
                       const IssueDetector& detector, std::size_t concurrency = 1);

nlohmann::ordered_json to_json(const DetectionResult& result);
DetectionResult result_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const DetectionError& error);

std::string results_to_jsonl(const std::vector<DetectionResult>& results);
std::vector<DetectionResult> read_results(const std::filesystem::path& path);

} // namespace ghsec::detectors
