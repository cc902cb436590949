#pragma once

#include "ghsec/backends.hpp"
#include "ghsec/dataset.hpp"
#include "ghsec/detectors.hpp"

#include <string>
#include <vector>

namespace ghsec::evaluation {

struct ConfusionMatrix {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

    std::size_t total() const { return tp + fp + fn + tn; }
    bool operator==(const ConfusionMatrix&) const = default;
};

/// Predictions paired with ground truth by issue URL. Both lists must have
/// the same length and the same URL set.
ConfusionMatrix confusion(const std::vector<detectors::DetectionResult>& results,
                          const std::vector<dataset::LabeledIssue>& truth);

/// Direct tally of parallel prediction/truth vectors.
ConfusionMatrix confusion(const std::vector<bool>& predicted, const std::vector<bool>& actual);

enum class ClassName { Vuln, NoVuln };

std::string class_display_name(ClassName c);

/// Undefined ratios (zero denominators) are reported as 0 with the
/// matching flag set.
struct ClassMetrics {
    ClassName class_name = ClassName::Vuln;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool precision_undefined = false;
    bool recall_undefined = false;
    std::size_t support = 0; ///< ground-truth members of the class
};

struct ClassReport {
    ClassMetrics vuln;
    ClassMetrics no_vuln;
};

ClassReport class_metrics(const ConfusionMatrix& cm);

// Sensitivity to the positive fraction --------------------------------------

struct SensitivityPoint {
    double pi = 0.0;
    double r_pos = 0.0;
    double r_neg = 0.0;
    double precision = 0.0;
    double f1 = 0.0;
    bool precision_undefined = false;
};

/// Vuln-class precision and F1 on a test set with positive fraction `pi`,
/// given the (fraction-independent) recalls of both classes:
///   precision = pi r+ / (pi r+ + (1 - pi)(1 - r-)),  F1 = 2 p r+ / (p + r+).
SensitivityPoint sensitivity_f1(double r_pos, double r_neg, double pi);

/// Evenly spaced pi grid over [pi_from, pi_to], endpoints included.
std::vector<SensitivityPoint> sensitivity_curve(double r_pos, double r_neg, double pi_from = 0.08,
                                                double pi_to = 0.20, std::size_t steps = 13);

// Description similarity -----------------------------------------------------

double description_similarity(const std::string& generated, const std::string& official,
                              const backends::EmbeddingBackend& embedder);

struct HistogramBin {
    double low = 0.0;
    double high = 0.0;
    std::size_t count = 0;
};

struct SimilarityReport {
    std::vector<double> scores;
    std::vector<HistogramBin> histogram;
    double mean = 0.0;
    bool mean_undefined = false;
    std::size_t clamped = 0; ///< scores pulled into range
};

/// Left-closed, right-open bins; the last bin is closed. Scores outside the
/// range are clamped into it and counted in `clamped`.
SimilarityReport similarity_histogram(const std::vector<double>& scores, std::size_t n_bins = 20, double low = 0.0,
                                      double high = 1.0);

// Reports ----------------------------------------------------------------------

struct DetectorMetrics {
    std::string model;
    ConfusionMatrix confusion;
    ClassReport metrics;
};

/// Columns: model,class,precision,recall,f1,support with the No Vuln.
/// row before the Vuln. row for each model.
std::string metrics_csv(const std::vector<DetectorMetrics>& rows);
std::string metrics_json(const std::vector<DetectorMetrics>& rows);
std::string sensitivity_csv(const std::vector<SensitivityPoint>& points);
std::string histogram_csv(const SimilarityReport& report);

} // namespace ghsec::evaluation
