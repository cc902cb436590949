#include "ghsec/detectors.hpp"

#include "ghsec/prompt.hpp"

#include <cctype>
#include <future>

namespace ghsec::detectors {

using nlohmann::json;
using nlohmann::ordered_json;

std::string detector_name(DetectorKind kind)
{
    switch (kind) {
    case DetectorKind::Baseline: return "baseline";
    case DetectorKind::Embedding: return "embedding";
    case DetectorKind::Llm: return "llm";
    case DetectorKind::Combined: return "combined";
    }
    return "baseline";
}

DetectorKind detector_from_name(std::string_view name)
{
    for (auto k : {DetectorKind::Baseline, DetectorKind::Embedding, DetectorKind::Llm, DetectorKind::Combined})
        if (detector_name(k) == name)
            return k;
    throw ParseError("unknown detector '" + std::string(name) + "'");
}

std::string detector_display_name(DetectorKind kind)
{
    switch (kind) {
    case DetectorKind::Baseline: return "Baseline";
    case DetectorKind::Embedding: return "Embeddings + GBDT";
    case DetectorKind::Llm: return "LLM-only";
    case DetectorKind::Combined: return "Combined";
    }
    return "";
}

void DetectionResult::validate() const
{
    switch (detector) {
    case DetectorKind::Baseline:
        if (description || score)
            throw PreconditionError("baseline results carry neither description nor score");
        break;
    case DetectorKind::Embedding:
        if (!score)
            throw PreconditionError("embedding results require a score");
        break;
    case DetectorKind::Llm:
        if (!description)
            throw PreconditionError("llm results require a description");
        break;
    case DetectorKind::Combined:
        if (!description || !score)
            throw PreconditionError("combined results require a description and a score");
        break;
    }
    if (score && !(*score >= 0.0 && *score <= 1.0))
        throw PreconditionError("score must lie in [0, 1]");
}

namespace {

bool is_word_char(char c)
{
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

bool contains_word_ci(std::string_view haystack, std::string_view needle)
{
    std::string h = to_lower(haystack), n = to_lower(needle);
    if (n.empty())
        return false;
    for (auto pos = h.find(n); pos != std::string::npos; pos = h.find(n, pos + 1)) {
        bool left_ok = pos == 0 || !is_word_char(h[pos - 1]);
        bool right_ok = pos + n.size() == h.size() || !is_word_char(h[pos + n.size()]);
        if (left_ok && right_ok)
            return true;
    }
    return false;
}

} // namespace

DetectionResult baseline_classify(const github::IssueRecord& issue, const BaselineOptions& options)
{
    auto text = github::issue_text(issue.title, issue.body);
    bool hit = contains_cve_id(text);
    for (const auto& kw : options.keywords) {
        if (hit)
            break;
        hit = options.word_boundary ? contains_word_ci(text, kw) : contains_ci(text, kw);
    }
    return DetectionResult{hit, std::nullopt, std::nullopt, DetectorKind::Baseline, issue.html_url};
}

gbdt::FeatureMatrix to_features(const std::vector<backends::EmbeddingVector>& vectors)
{
    if (vectors.empty())
        return {};
    std::size_t dim = vectors.front().dim();
    gbdt::FeatureMatrix m(vectors.size(), dim);
    for (std::size_t r = 0; r < vectors.size(); ++r) {
        if (vectors[r].dim() != dim)
            throw PreconditionError("to_features: embeddings have mixed dimensions");
        auto v = vectors[r].values();
        std::copy(v.begin(), v.end(), m.row(r).begin());
    }
    return m;
}

namespace {

double classify_vector(const backends::EmbeddingVector& v, const gbdt::GbdtModel& model)
{
    if (v.dim() != model.feature_dim)
        throw PreconditionError("embedding dimension " + std::to_string(v.dim()) +
                                " does not match classifier dimension " + std::to_string(model.feature_dim));
    return gbdt::predict_proba(model, to_features({v})).front();
}

void check_threshold(double threshold)
{
    if (!(threshold > 0.0 && threshold < 1.0))
        throw PreconditionError("threshold must lie in (0, 1)");
}

} // namespace

DetectionResult embedding_classify(const github::IssueRecord& issue, const backends::EmbeddingBackend& embedder,
                                   const gbdt::GbdtModel& model, double threshold)
{
    check_threshold(threshold);
    if (embedder.dim() != 0 && embedder.dim() != model.feature_dim)
        throw PreconditionError("embedder dimension " + std::to_string(embedder.dim()) +
                                " does not match classifier dimension " + std::to_string(model.feature_dim));
    double p = classify_vector(embedder.embed_one(prompt::render_issue_prompt(issue)), model);
    return DetectionResult{p >= threshold, std::nullopt, p, DetectorKind::Embedding, issue.html_url};
}

DetectionResult llm_classify(const github::IssueRecord& issue, const backends::ChatBackend& chat)
{
    const std::string system(prompt::classification_system_prompt());
    const std::string user = prompt::render_issue_prompt(issue);
    std::string last_error;
    for (int attempt = 0; attempt < 2; ++attempt) {
        try {
            auto reply = prompt::parse_llm_reply(chat.complete(system, user), /*require_label=*/true);
            return DetectionResult{*reply.vulnerability_detected, reply.description, std::nullopt, DetectorKind::Llm,
                                   issue.html_url};
        } catch (const prompt::ReplyParseError& e) {
            last_error = std::string(e.what()) + ": " + e.fragment();
        }
    }
    throw DetectorError("unparseable LLM reply for " + issue.html_url + ": " + last_error);
}

std::string describe_issue(const github::IssueRecord& issue, const backends::ChatBackend& chat)
{
    const std::string system(prompt::description_system_prompt());
    const std::string user = prompt::render_issue_prompt(issue);
    std::string last_error;
    for (int attempt = 0; attempt < 2; ++attempt) {
        try {
            return prompt::parse_llm_reply(chat.complete(system, user), /*require_label=*/false).description;
        } catch (const prompt::ReplyParseError& e) {
            last_error = std::string(e.what()) + ": " + e.fragment();
        }
    }
    throw DetectorError("unparseable LLM description for " + issue.html_url + ": " + last_error);
}

DetectionResult combined_classify(const github::IssueRecord& issue, const backends::ChatBackend& chat,
                                  const backends::EmbeddingBackend& embedder, const gbdt::GbdtModel& model,
                                  double threshold)
{
    check_threshold(threshold);
    std::string description = describe_issue(issue, chat);
    double p = classify_vector(embedder.embed_one(description), model);
    return DetectionResult{p >= threshold, description, p, DetectorKind::Combined, issue.html_url};
}

gbdt::GbdtModel train_classifier(const std::vector<dataset::LabeledIssue>& training,
                                 const backends::EmbeddingBackend& embedder, const gbdt::GbdtParams& params,
                                 FeatureSource source, const backends::ChatBackend* chat,
                                 gbdt::TrainingReport* report)
{
    if (training.empty())
        throw PreconditionError("train_classifier: empty training split");
    if (source == FeatureSource::LlmDescription && !chat)
        throw PreconditionError("train_classifier: description features need a chat backend");
    std::vector<std::string> texts;
    std::vector<bool> labels;
    for (const auto& item : training) {
        texts.push_back(source == FeatureSource::IssuePrompt ? prompt::render_issue_prompt(item.issue)
                                                             : describe_issue(item.issue, *chat));
        labels.push_back(item.label);
    }
    return gbdt::train(to_features(embedder.embed(texts)), labels, params, report);
}

RunReport run_detector(const std::vector<dataset::LabeledIssue>& split, DetectorKind kind,
                       const IssueDetector& detector, std::size_t concurrency)
{
    if (split.empty())
        throw PreconditionError("run_detector: empty split");
    concurrency = std::max<std::size_t>(concurrency, 1);

    struct Outcome {
        std::optional<DetectionResult> result;
        std::optional<DetectionError> error;
    };
    auto run_one = [&](const dataset::LabeledIssue& item) {
        Outcome o;
        try {
            o.result = detector(item.issue);
            o.result->validate();
        } catch (const Error& e) {
            o.result.reset();
            o.error = DetectionError{item.issue.html_url, kind, e.what()};
        }
        return o;
    };

    std::vector<Outcome> outcomes(split.size());
    if (concurrency == 1) {
        for (std::size_t i = 0; i < split.size(); ++i)
            outcomes[i] = run_one(split[i]);
    } else {
        for (std::size_t i = 0; i < split.size(); i += concurrency) {
            std::vector<std::future<Outcome>> batch;
            for (std::size_t j = i; j < std::min(split.size(), i + concurrency); ++j)
                batch.push_back(std::async(std::launch::async, run_one, std::cref(split[j])));
            for (std::size_t j = 0; j < batch.size(); ++j)
                outcomes[i + j] = batch[j].get();
        }
    }

    RunReport report;
    for (auto& o : outcomes) {
        if (o.result)
            report.results.push_back(std::move(*o.result));
        else
            report.errors.push_back(std::move(*o.error));
    }
    // More than 10% failures marks the run failed.
    report.failed = report.errors.size() * 10 > split.size();
    return report;
}

ordered_json to_json(const DetectionResult& r)
{
    ordered_json j;
    j["issue_url"] = r.issue_url;
    j["detector"] = detector_name(r.detector);
    j["label"] = r.label;
    if (r.score)
        j["score"] = *r.score;
    if (r.description)
        j["description"] = *r.description;
    return j;
}

DetectionResult result_from_json(const json& j)
{
    try {
        DetectionResult r;
        r.issue_url = j.at("issue_url").get<std::string>();
        r.detector = detector_from_name(j.at("detector").get<std::string>());
        r.label = j.at("label").get<bool>();
        if (j.contains("score"))
            r.score = j["score"].get<double>();
        if (j.contains("description"))
            r.description = j["description"].get<std::string>();
        r.validate();
        return r;
    } catch (const json::exception& e) {
        throw ParseError(std::string("detection result: ") + e.what());
    } catch (const PreconditionError& e) {
        throw ParseError(std::string("detection result: ") + e.what());
    }
}

ordered_json to_json(const DetectionError& e)
{
    return ordered_json{{"issue_url", e.issue_url}, {"detector", detector_name(e.detector)}, {"error", e.message}};
}

std::string results_to_jsonl(const std::vector<DetectionResult>& results)
{
    std::string out;
    for (const auto& r : results)
        out += to_json(r).dump() + "\n";
    return out;
}

std::vector<DetectionResult> read_results(const std::filesystem::path& path)
{
    std::vector<DetectionResult> out;
    std::string content = read_file(path);
    std::size_t line_no = 0, pos = 0;
    while (pos < content.size()) {
        ++line_no;
        auto nl = content.find('\n', pos);
        std::string_view line(content.data() + pos, (nl == std::string::npos ? content.size() : nl) - pos);
        pos = nl == std::string::npos ? content.size() : nl + 1;
        if (trim(line).empty())
            continue;
        try {
            out.push_back(result_from_json(json::parse(line)));
        } catch (const std::exception& e) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

} // namespace ghsec::detectors
