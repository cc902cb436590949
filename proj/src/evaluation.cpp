#include "ghsec/evaluation.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

namespace ghsec::evaluation {

ConfusionMatrix confusion(const std::vector<detectors::DetectionResult>& results,
                          const std::vector<dataset::LabeledIssue>& truth)
{
    if (results.size() != truth.size())
        throw PreconditionError("confusion: " + std::to_string(results.size()) + " results vs " +
                                std::to_string(truth.size()) + " ground-truth issues");
    std::map<std::string, bool> labels;
    for (const auto& t : truth)
        if (!labels.emplace(t.issue.html_url, t.label).second)
            throw PreconditionError("confusion: duplicate ground-truth URL " + t.issue.html_url);
    ConfusionMatrix cm;
    std::map<std::string, bool> seen;
    for (const auto& r : results) {
        auto it = labels.find(r.issue_url);
        if (it == labels.end())
            throw PreconditionError("confusion: no ground truth for " + r.issue_url);
        if (!seen.emplace(r.issue_url, true).second)
            throw PreconditionError("confusion: duplicate result for " + r.issue_url);
        bool actual = it->second;
        if (r.label && actual)
            ++cm.tp;
        else if (r.label)
            ++cm.fp;
        else if (actual)
            ++cm.fn;
        else
            ++cm.tn;
    }
    return cm;
}

ConfusionMatrix confusion(const std::vector<bool>& predicted, const std::vector<bool>& actual)
{
    if (predicted.size() != actual.size())
        throw PreconditionError("confusion: length mismatch");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i])
            (actual[i] ? cm.tp : cm.fp)++;
        else
            (actual[i] ? cm.fn : cm.tn)++;
    }
    return cm;
}

std::string class_display_name(ClassName c)
{
    return c == ClassName::Vuln ? "Vuln." : "No Vuln.";
}

namespace {

ClassMetrics metrics_for(ClassName name, std::size_t tp, std::size_t fp, std::size_t fn)
{
    ClassMetrics m;
    m.class_name = name;
    m.support = tp + fn;
    if (tp + fp > 0)
        m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    else
        m.precision_undefined = true;
    if (tp + fn > 0)
        m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    else
        m.recall_undefined = true;
    if (m.precision + m.recall > 0.0)
        m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    return m;
}

} // namespace

ClassReport class_metrics(const ConfusionMatrix& cm)
{
    return {metrics_for(ClassName::Vuln, cm.tp, cm.fp, cm.fn), metrics_for(ClassName::NoVuln, cm.tn, cm.fn, cm.fp)};
}

SensitivityPoint sensitivity_f1(double r_pos, double r_neg, double pi)
{
    if (!(pi > 0.0 && pi < 1.0))
        throw PreconditionError("sensitivity_f1: pi must lie in (0, 1)");
    if (!(r_pos >= 0.0 && r_pos <= 1.0) || !(r_neg >= 0.0 && r_neg <= 1.0))
        throw PreconditionError("sensitivity_f1: recalls must lie in [0, 1]");
    SensitivityPoint p{pi, r_pos, r_neg, 0.0, 0.0, false};
    double true_pos = pi * r_pos;
    double false_pos = (1.0 - pi) * (1.0 - r_neg);
    if (true_pos + false_pos > 0.0)
        p.precision = true_pos / (true_pos + false_pos);
    else
        p.precision_undefined = true;
    if (p.precision + r_pos > 0.0)
        p.f1 = 2.0 * p.precision * r_pos / (p.precision + r_pos);
    return p;
}

std::vector<SensitivityPoint> sensitivity_curve(double r_pos, double r_neg, double pi_from, double pi_to,
                                                std::size_t steps)
{
    if (!(pi_from > 0.0 && pi_from < pi_to && pi_to < 1.0))
        throw PreconditionError("sensitivity_curve: need 0 < pi_from < pi_to < 1");
    if (steps < 2)
        throw PreconditionError("sensitivity_curve: need at least two steps");
    std::vector<SensitivityPoint> out;
    out.reserve(steps);
    for (std::size_t i = 0; i < steps; ++i) {
        double t = static_cast<double>(i) / static_cast<double>(steps - 1);
        double pi = i + 1 == steps ? pi_to : pi_from + t * (pi_to - pi_from);
        out.push_back(sensitivity_f1(r_pos, r_neg, pi));
    }
    return out;
}

double description_similarity(const std::string& generated, const std::string& official,
                              const backends::EmbeddingBackend& embedder)
{
    if (trim(generated).empty() || trim(official).empty())
        throw PreconditionError("description_similarity: texts must be non-empty");
    auto v = embedder.embed({generated, official});
    return backends::cosine(v[0], v[1]);
}

SimilarityReport similarity_histogram(const std::vector<double>& scores, std::size_t n_bins, double low, double high)
{
    if (n_bins < 1)
        throw PreconditionError("similarity_histogram: need at least one bin");
    if (!(low < high))
        throw PreconditionError("similarity_histogram: empty range");
    SimilarityReport rep;
    rep.scores = scores;
    const double width = (high - low) / static_cast<double>(n_bins);
    for (std::size_t b = 0; b < n_bins; ++b)
        rep.histogram.push_back({low + width * static_cast<double>(b),
                                 b + 1 == n_bins ? high : low + width * static_cast<double>(b + 1), 0});
    double sum = 0.0;
    for (double s : scores) {
        if (std::isnan(s))
            throw PreconditionError("similarity_histogram: NaN score");
        if (s < low || s > high) {
            ++rep.clamped;
            s = std::clamp(s, low, high);
        }
        sum += s;
        auto bin = static_cast<std::size_t>(std::floor((s - low) / width));
        bin = std::min(bin, n_bins - 1);
        // Guard the floor against rounding across a boundary.
        while (bin > 0 && s < rep.histogram[bin].low)
            --bin;
        while (bin + 1 < n_bins && s >= rep.histogram[bin + 1].low)
            ++bin;
        ++rep.histogram[bin].count;
    }
    if (scores.empty())
        rep.mean_undefined = true;
    else
        rep.mean = sum / static_cast<double>(scores.size());
    return rep;
}

namespace {

std::string fmt4(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

} // namespace

std::string metrics_csv(const std::vector<DetectorMetrics>& rows)
{
    std::string out = "model,class,precision,recall,f1,support\n";
    for (const auto& row : rows)
        for (const auto* m : {&row.metrics.no_vuln, &row.metrics.vuln})
            out += csv_field(row.model) + "," + class_display_name(m->class_name) + "," + fmt4(m->precision) + "," +
                   fmt4(m->recall) + "," + fmt4(m->f1) + "," + std::to_string(m->support) + "\n";
    return out;
}

std::string metrics_json(const std::vector<DetectorMetrics>& rows)
{
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    auto class_json = [](const ClassMetrics& m) {
        return nlohmann::ordered_json{{"class", class_display_name(m.class_name)},
                                      {"precision", m.precision},
                                      {"recall", m.recall},
                                      {"f1", m.f1},
                                      {"support", m.support},
                                      {"precision_undefined", m.precision_undefined},
                                      {"recall_undefined", m.recall_undefined}};
    };
    for (const auto& row : rows) {
        nlohmann::ordered_json j;
        j["model"] = row.model;
        j["confusion"] = {{"tp", row.confusion.tp}, {"fp", row.confusion.fp}, {"fn", row.confusion.fn},
                          {"tn", row.confusion.tn}};
        j["classes"] = nlohmann::ordered_json::array({class_json(row.metrics.no_vuln), class_json(row.metrics.vuln)});
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

std::string sensitivity_csv(const std::vector<SensitivityPoint>& points)
{
    std::string out = "pi,r_pos,r_neg,precision,f1,precision_undefined\n";
    for (const auto& p : points)
        out += fmt4(p.pi) + "," + fmt4(p.r_pos) + "," + fmt4(p.r_neg) + "," + fmt4(p.precision) + "," + fmt4(p.f1) +
               "," + (p.precision_undefined ? "1" : "0") + "\n";
    return out;
}

std::string histogram_csv(const SimilarityReport& report)
{
    std::string out = "bin_low,bin_high,count\n";
    for (const auto& b : report.histogram)
        out += fmt4(b.low) + "," + fmt4(b.high) + "," + std::to_string(b.count) + "\n";
    return out;
}

} // namespace ghsec::evaluation
