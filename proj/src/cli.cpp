#include "ghsec/cli.hpp"

#include "ghsec/config.hpp"
#include "ghsec/dataset.hpp"
#include "ghsec/detectors.hpp"
#include "ghsec/evaluation.hpp"
#include "ghsec/github.hpp"
#include "ghsec/nvd.hpp"
#include "ghsec/svg.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <set>

namespace ghsec::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

class UsageError : public Error {
public:
    using Error::Error;
};

// Flag values that override the config file when given.
struct Overrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::string> replay_dir;

    std::optional<std::string> start, end;
    std::optional<std::size_t> repos_top_k, token_limit;
    std::optional<int> ranking_window_days;
    std::optional<std::string> cutoff;
    std::optional<double> train_fraction, neg_per_pos;
    std::optional<int> n_rounds, max_depth, min_samples_leaf;
    std::optional<double> learning_rate, subsample;
    std::optional<double> threshold;
    std::optional<std::string> combined_features;
    bool word_boundary = false;
    std::optional<std::size_t> bins;

    // Input paths; default to files in the output directory.
    std::optional<std::string> issues_path, references_path, cves_path, corpus_path;

    std::vector<std::string> detectors;
    std::string split = "test";
    std::optional<double> r_pos, r_neg;
    double pi_from = 0.08, pi_to = 0.20, reference_pi = 0.122;
    std::size_t steps = 13;
};

config::RunConfig effective_config(const Overrides& o)
{
    config::RunConfig c;
    if (!o.config_path.empty())
        c = config::load(o.config_path);
    if (c.nvd_api_key.empty())
        if (const char* k = std::getenv("NVD_API_KEY"))
            c.nvd_api_key = k;
    if (c.github_token.empty())
        if (const char* t = std::getenv("GITHUB_TOKEN"))
            c.github_token = t;

    auto date_flag = [](const std::string& name, const std::string& v) {
        try {
            return parse_date(v);
        } catch (const Error&) {
            throw UsageError(name + ": expected an ISO-8601 date, got '" + v + "'");
        }
    };
    if (o.seed)
        c.seed = *o.seed;
    if (o.out_dir)
        c.out_dir = *o.out_dir;
    if (o.replay_dir)
        c.replay_dir = *o.replay_dir;
    if (o.start)
        c.nvd_start = date_flag("--start", *o.start);
    if (o.end)
        c.nvd_end = date_flag("--end", *o.end);
    if (o.repos_top_k)
        c.repos_top_k = *o.repos_top_k;
    if (o.token_limit)
        c.token_limit = *o.token_limit;
    if (o.ranking_window_days)
        c.ranking_window_days = *o.ranking_window_days;
    if (o.cutoff)
        c.cutoff = date_flag("--cutoff", *o.cutoff);
    if (o.train_fraction)
        c.train_fraction = *o.train_fraction;
    if (o.neg_per_pos)
        c.neg_per_pos = *o.neg_per_pos;
    if (o.n_rounds)
        c.gbdt.n_rounds = *o.n_rounds;
    if (o.max_depth)
        c.gbdt.max_depth = *o.max_depth;
    if (o.min_samples_leaf)
        c.gbdt.min_samples_leaf = *o.min_samples_leaf;
    if (o.learning_rate)
        c.gbdt.learning_rate = *o.learning_rate;
    if (o.subsample)
        c.gbdt.subsample = *o.subsample;
    if (o.threshold)
        c.threshold = *o.threshold;
    if (o.combined_features)
        config::apply(c, "combined.features", *o.combined_features);
    if (o.word_boundary)
        c.word_boundary = true;
    if (o.bins)
        c.histogram_bins = *o.bins;

    c.gbdt.seed = c.seed;
    c.embedding.seed = c.seed;
    c.chat.seed = c.seed;
    c.out_dir = fs::absolute(c.out_dir).lexically_normal();
    if (c.replay_dir)
        c.replay_dir = fs::absolute(*c.replay_dir).lexically_normal();
    return c;
}

// Run bookkeeping ------------------------------------------------------------

class Run {
public:
    Run(std::string subcommand, const config::RunConfig& config, std::ostream& out, std::ostream& err)
        : subcommand_(std::move(subcommand)), config_(config), out_(out), err_(err),
          started_(std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()))
    {
        std::error_code ec;
        fs::create_directories(config_.out_dir, ec);
        if (ec)
            throw IoError("cannot create output directory " + config_.out_dir.string() + ": " + ec.message());
    }

    const config::RunConfig& config() const { return config_; }
    std::ostream& out() { return out_; }

    void warn(const std::string& message) { err_ << "warning: " << message << "\n"; }

    fs::path path(const std::string& name) const { return config_.out_dir / name; }

    fs::path input(const std::optional<std::string>& flag, const std::string& default_name)
    {
        fs::path p = flag ? fs::absolute(*flag).lexically_normal() : path(default_name);
        if (!fs::exists(p))
            throw IoError("missing input " + p.string());
        return p;
    }

    std::string read(const fs::path& p)
    {
        std::string content = read_file(p);
        inputs_.emplace_back(p.string(), sha256_hex(content));
        return content;
    }

    void write(const fs::path& p, const std::string& content)
    {
        atomic_write(p, content);
        outputs_.emplace_back(p.string(), sha256_hex(content));
        out_ << "wrote " << p.string() << "\n";
    }

    /// Records a file written by a module function.
    void wrote(const fs::path& p)
    {
        outputs_.emplace_back(p.string(), sha256_hex(read_file(p)));
        out_ << "wrote " << p.string() << "\n";
    }

    void finish()
    {
        ordered_json j;
        j["subcommand"] = subcommand_;
        j["config_sha256"] = sha256_hex(config::canonical(config_));
        j["seed"] = config_.seed;
        j["started"] = format_timestamp(started_);
        j["finished"] = format_timestamp(std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()));
        auto files = [](const std::vector<std::pair<std::string, std::string>>& list) {
            ordered_json arr = ordered_json::array();
            for (const auto& [p, h] : list)
                arr.push_back(ordered_json{{"path", p}, {"sha256", h}});
            return arr;
        };
        j["inputs"] = files(inputs_);
        j["outputs"] = files(outputs_);
        atomic_write(path("run-" + subcommand_ + ".json"), j.dump(2) + "\n");
    }

private:
    std::string subcommand_;
    config::RunConfig config_;
    std::ostream& out_;
    std::ostream& err_;
    Timestamp started_;
    std::vector<std::pair<std::string, std::string>> inputs_, outputs_;
};

template <class T, class Fn>
std::vector<T> parse_jsonl(const std::string& content, const fs::path& p, Fn from_json)
{
    std::vector<T> out;
    std::size_t pos = 0, line_no = 0;
    while (pos < content.size()) {
        ++line_no;
        auto nl = content.find('\n', pos);
        std::string_view line(content.data() + pos, (nl == std::string::npos ? content.size() : nl) - pos);
        pos = nl == std::string::npos ? content.size() : nl + 1;
        if (trim(line).empty())
            continue;
        try {
            out.push_back(from_json(json::parse(line)));
        } catch (const std::exception& e) {
            throw ParseError(p.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

template <class Range>
std::string to_jsonl(const Range& items)
{
    std::string out;
    for (const auto& item : items)
        out += to_json(item).dump() + "\n";
    return out;
}

std::shared_ptr<http::Transport> transport_for(const config::RunConfig& c)
{
    if (c.replay_dir)
        return std::make_shared<http::ReplayTransport>(*c.replay_dir);
    return http::make_live_transport();
}

std::shared_ptr<backends::EmbeddingBackend> embedder_for(const config::RunConfig& c)
{
    bool mock = c.embedding.kind == backends::BackendKind::MockEmbedding;
    return backends::make_embedding_backend(c.embedding, mock ? nullptr : transport_for(c));
}

std::shared_ptr<backends::ChatBackend> chat_for(const config::RunConfig& c)
{
    bool mock = c.chat.kind == backends::BackendKind::MockChat;
    return backends::make_chat_backend(c.chat, mock ? nullptr : transport_for(c));
}

std::map<std::string, nvd::CveRecord> cve_map(const std::vector<nvd::CveRecord>& records)
{
    std::map<std::string, nvd::CveRecord> out;
    for (const auto& r : records)
        out.emplace(r.cve_id, r);
    return out;
}

std::string fmt(double v, const char* spec = "%.4f")
{
    char buf[32];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

// Subcommands ------------------------------------------------------------------

void cmd_ingest(Run& run)
{
    const auto& c = run.config();
    if (!c.nvd_start || !c.nvd_end)
        throw UsageError("ingest needs --start and --end (or nvd.start / nvd.end in the config)");
    if (*c.nvd_start > *c.nvd_end)
        throw UsageError("ingest: --start is after --end");
    nvd::ClientConfig nc;
    nc.base_url = c.nvd_base_url;
    nc.api_key = c.nvd_api_key;
    nc.page_size = c.nvd_page_size;
    nc.concurrency = c.nvd_concurrency;
    nvd::NvdClient client(transport_for(c), nc);
    auto fetched = client.fetch_window(*c.nvd_start, *c.nvd_end);
    auto valid = nvd::filter_valid(std::move(fetched.records));

    std::vector<nvd::ReferenceLink> links;
    for (const auto& r : valid.records) {
        auto ex = nvd::extract_references(r);
        for (const auto& w : ex.warnings)
            run.warn(w);
        links.insert(links.end(), ex.links.begin(), ex.links.end());
    }
    std::string domains = "domain,count\n";
    for (const auto& [d, n] : nvd::rank_domains(links))
        domains += d + "," + std::to_string(n) + "\n";

    run.write(run.path("cves.jsonl"), to_jsonl(valid.records));
    run.write(run.path("references.jsonl"), to_jsonl(links));
    run.write(run.path("domains.csv"), domains);
    run.write(run.path("skipped.jsonl"), to_jsonl(fetched.skipped));
    run.out() << valid.records.size() << " CVEs kept, " << valid.dropped << " dropped by status, "
              << fetched.skipped.size() << " unparseable\n";
}

void cmd_harvest(Run& run, const Overrides& o)
{
    const auto& c = run.config();
    auto cves_path = run.input(o.cves_path, "cves.jsonl");
    auto refs_path = run.input(o.references_path, "references.jsonl");
    auto cves = parse_jsonl<nvd::CveRecord>(run.read(cves_path), cves_path, nvd::cve_from_json);
    auto links = parse_jsonl<nvd::ReferenceLink>(run.read(refs_path), refs_path, nvd::link_from_json);
    if (cves.empty())
        throw PreconditionError("harvest: no CVEs in " + cves_path.string());

    // The ranking window ends on the collection date: the configured NVD end
    // date, else the newest publication in the input.
    Date end = c.nvd_end ? *c.nvd_end : day_of(std::max_element(cves.begin(), cves.end(), [](auto& a, auto& b) {
                                                   return a.published < b.published;
                                               })->published);
    github::DateWindow window{end - std::chrono::days(c.ranking_window_days - 1), end};
    auto selection = github::select_repositories(links, cve_map(cves), window, c.repos_top_k);
    for (const auto& w : selection.warnings)
        run.warn(w);

    github::ClientConfig gc;
    gc.base_url = c.github_base_url;
    gc.token = c.github_token;
    gc.concurrency = c.github_concurrency;
    github::GitHubClient client(transport_for(c), gc);

    std::string repos_csv = "rank,owner,name,cve_count\n";
    std::vector<github::IssueRecord> issues;
    std::size_t dropped = 0;
    for (const auto& sel : selection.selections) {
        repos_csv += std::to_string(sel.rank) + "," + sel.repo.owner + "," + sel.repo.name + "," +
                     std::to_string(sel.cve_count) + "\n";
        try {
            auto kept = github::filter_by_tokens(client.fetch_issues(sel.repo), c.token_limit);
            dropped += kept.dropped;
            issues.insert(issues.end(), kept.issues.begin(), kept.issues.end());
        } catch (const github::RepoNotFound& e) {
            run.warn(e.what());
        }
    }
    run.write(run.path("repos.csv"), repos_csv);
    run.write(run.path("issues.jsonl"), to_jsonl(issues));
    run.out() << selection.selections.size() << " repositories, " << issues.size() << " issues kept, " << dropped
              << " over the token limit\n";
}

void cmd_build(Run& run, const Overrides& o)
{
    const auto& c = run.config();
    auto issues_path = run.input(o.issues_path, "issues.jsonl");
    auto refs_path = run.input(o.references_path, "references.jsonl");
    auto cves_path = run.input(o.cves_path, "cves.jsonl");
    auto issues = parse_jsonl<github::IssueRecord>(run.read(issues_path), issues_path, github::issue_from_json);
    auto links = parse_jsonl<nvd::ReferenceLink>(run.read(refs_path), refs_path, nvd::link_from_json);
    auto cves = parse_jsonl<nvd::CveRecord>(run.read(cves_path), cves_path, nvd::cve_from_json);
    if (issues.empty())
        throw PreconditionError("build: no issues in " + issues_path.string());

    auto labeled = dataset::label_issues(issues, links, cve_map(cves));
    if (!labeled.orphans.empty())
        run.warn(std::to_string(labeled.orphans.size()) + " referenced issues are not in the harvested set");
    auto sampled = dataset::sample_negatives(labeled.issues, c.neg_per_pos, c.seed);

    // The manifest's creation stamp is the newest issue date so that rebuilding
    // from the same inputs gives identical bytes.
    Timestamp newest{};
    for (const auto& item : sampled)
        newest = std::max(newest, item.issue.created_at);
    auto split = dataset::assign_splits(std::move(sampled), c.cutoff, c.train_fraction, c.seed, newest);
    for (const auto& w : split.warnings)
        run.warn(w);

    fs::path corpus = o.corpus_path ? fs::absolute(*o.corpus_path) : run.path("corpus.jsonl");
    auto manifest = dataset::write_corpus(split.issues, corpus, split.manifest);
    run.wrote(corpus);
    run.wrote(dataset::manifest_path(corpus));
    run.out() << manifest.total << " issues (" << manifest.positives << " positive): train " << manifest.splits.train
              << ", test " << manifest.splits.test << ", excluded " << manifest.splits.excluded_pre_cutoff << " + "
              << manifest.splits.excluded_contaminated << "\n";
}

dataset::Corpus load_corpus(Run& run, const Overrides& o)
{
    auto p = run.input(o.corpus_path, "corpus.jsonl");
    run.read(p);
    return dataset::read_corpus(p);
}

dataset::Split split_flag(const std::string& name)
{
    if (name == "train")
        return dataset::Split::Train;
    if (name == "test")
        return dataset::Split::Test;
    throw UsageError("--split must be train or test");
}

std::vector<detectors::DetectorKind> detector_flags(const std::vector<std::string>& names,
                                                    std::vector<detectors::DetectorKind> fallback)
{
    if (names.empty())
        return fallback;
    std::vector<detectors::DetectorKind> out;
    for (const auto& n : names) {
        try {
            auto k = detectors::detector_from_name(n);
            if (std::find(out.begin(), out.end(), k) == out.end())
                out.push_back(k);
        } catch (const ParseError& e) {
            throw UsageError(e.what());
        }
    }
    return out;
}

std::string model_file(detectors::DetectorKind kind)
{
    return "model-" + detectors::detector_name(kind) + ".json";
}

void cmd_train(Run& run, const Overrides& o)
{
    using detectors::DetectorKind;
    const auto& c = run.config();
    auto kinds = detector_flags(o.detectors, {DetectorKind::Embedding, DetectorKind::Combined});
    auto corpus = load_corpus(run, o);
    auto training = dataset::select_split(corpus.issues, dataset::Split::Train);
    if (training.empty())
        throw PreconditionError("train: the corpus has no training issues");
    auto embedder = embedder_for(c);
    std::shared_ptr<backends::ChatBackend> chat;

    for (auto kind : kinds) {
        if (kind != DetectorKind::Embedding && kind != DetectorKind::Combined)
            throw UsageError("train: only the embedding and combined detectors have a classifier");
        auto source = detectors::FeatureSource::IssuePrompt;
        if (kind == DetectorKind::Combined && c.combined_on_descriptions) {
            source = detectors::FeatureSource::LlmDescription;
            if (!chat)
                chat = chat_for(c);
        }
        gbdt::TrainingReport report;
        auto model = detectors::train_classifier(training, *embedder, c.gbdt, source, chat.get(), &report);
        run.write(run.path(model_file(kind)), gbdt::model_to_json(model));
        std::string loss = "round,log_loss\n";
        for (std::size_t i = 0; i < report.loss_history.size(); ++i)
            loss += std::to_string(i) + "," + fmt(report.loss_history[i], "%.6f") + "\n";
        run.write(run.path("training-" + detectors::detector_name(kind) + ".csv"), loss);
        run.out() << detectors::detector_name(kind) << ": " << model.trees.size() << " trees on " << training.size()
                  << " issues, final log-loss " << fmt(report.loss_history.back(), "%.6f") << "\n";
    }
}

std::string results_file(detectors::DetectorKind kind, const std::string& split)
{
    return "results-" + detectors::detector_name(kind) + "-" + split + ".jsonl";
}

bool cmd_detect(Run& run, const Overrides& o)
{
    using detectors::DetectorKind;
    const auto& c = run.config();
    auto kinds = detector_flags(o.detectors, {DetectorKind::Baseline});
    split_flag(o.split);
    auto corpus = load_corpus(run, o);
    auto items = dataset::select_split(corpus.issues, split_flag(o.split));
    if (items.empty())
        throw PreconditionError("detect: the " + o.split + " split is empty");

    bool all_ok = true;
    for (auto kind : kinds) {
        detectors::IssueDetector fn;
        std::shared_ptr<backends::EmbeddingBackend> embedder;
        std::shared_ptr<backends::ChatBackend> chat;
        std::shared_ptr<gbdt::GbdtModel> model;
        if (kind == DetectorKind::Embedding || kind == DetectorKind::Combined) {
            auto p = run.input(std::nullopt, model_file(kind));
            model = std::make_shared<gbdt::GbdtModel>(gbdt::model_from_json(run.read(p)));
            embedder = embedder_for(c);
        }
        if (kind == DetectorKind::Llm || kind == DetectorKind::Combined)
            chat = chat_for(c);
        double threshold = c.threshold;
        switch (kind) {
        case DetectorKind::Baseline: {
            detectors::BaselineOptions opts;
            opts.word_boundary = c.word_boundary;
            fn = [opts](const github::IssueRecord& i) { return detectors::baseline_classify(i, opts); };
            break;
        }
        case DetectorKind::Embedding:
            fn = [=](const github::IssueRecord& i) {
                return detectors::embedding_classify(i, *embedder, *model, threshold);
            };
            break;
        case DetectorKind::Llm:
            fn = [=](const github::IssueRecord& i) { return detectors::llm_classify(i, *chat); };
            break;
        case DetectorKind::Combined:
            if (c.combined_on_descriptions) {
                fn = [=](const github::IssueRecord& i) {
                    return detectors::combined_classify(i, *chat, *embedder, *model, threshold);
                };
            } else {
                fn = [=](const github::IssueRecord& i) {
                    auto r = detectors::embedding_classify(i, *embedder, *model, threshold);
                    r.description = detectors::describe_issue(i, *chat);
                    r.detector = DetectorKind::Combined;
                    return r;
                };
            }
            break;
        }
        auto report = detectors::run_detector(items, kind, fn, c.detect_concurrency);
        run.write(run.path(results_file(kind, o.split)), detectors::results_to_jsonl(report.results));
        std::string errors;
        for (const auto& e : report.errors)
            errors += detectors::to_json(e).dump() + "\n";
        run.write(run.path("errors-" + detectors::detector_name(kind) + "-" + o.split + ".jsonl"), errors);
        std::size_t positives = 0;
        for (const auto& r : report.results)
            positives += r.label;
        run.out() << detectors::detector_name(kind) << ": " << report.results.size() << " issues, " << positives
                  << " flagged, " << report.errors.size() << " errors\n";
        if (report.failed) {
            run.warn(detectors::detector_name(kind) + ": more than 10% of issues failed");
            all_ok = false;
        }
    }
    return all_ok;
}

void cmd_evaluate(Run& run, const Overrides& o)
{
    using detectors::DetectorKind;
    auto all = {DetectorKind::Baseline, DetectorKind::Embedding, DetectorKind::Llm, DetectorKind::Combined};
    split_flag(o.split);
    auto corpus = load_corpus(run, o);
    auto truth = dataset::select_split(corpus.issues, split_flag(o.split));

    std::vector<DetectorKind> kinds;
    if (o.detectors.empty()) {
        for (auto k : all)
            if (fs::exists(run.path(results_file(k, o.split))))
                kinds.push_back(k);
        if (kinds.empty())
            throw IoError("evaluate: no results files for the " + o.split + " split in " +
                          run.config().out_dir.string());
    } else {
        kinds = detector_flags(o.detectors, {});
    }

    std::vector<evaluation::DetectorMetrics> rows;
    for (auto kind : kinds) {
        auto p = run.input(std::nullopt, results_file(kind, o.split));
        auto results = parse_jsonl<detectors::DetectionResult>(run.read(p), p, detectors::result_from_json);
        evaluation::DetectorMetrics row;
        row.model = detectors::detector_display_name(kind);
        row.confusion = evaluation::confusion(results, truth);
        row.metrics = evaluation::class_metrics(row.confusion);
        run.out() << row.model << ": Vuln. F1 " << fmt(row.metrics.vuln.f1) << "\n";
        rows.push_back(std::move(row));
    }
    run.write(run.path("metrics-" + o.split + ".csv"), evaluation::metrics_csv(rows));
    run.write(run.path("metrics-" + o.split + ".json"), evaluation::metrics_json(rows));
}

void cmd_sensitivity(Run& run, const Overrides& o)
{
    if (!o.r_pos || !o.r_neg)
        throw UsageError("sensitivity needs --r-pos and --r-neg");
    auto curve = evaluation::sensitivity_curve(*o.r_pos, *o.r_neg, o.pi_from, o.pi_to, o.steps);

    // The reference fraction gets its own CSV row, kept in pi order.
    auto rows = curve;
    auto ref = evaluation::sensitivity_f1(*o.r_pos, *o.r_neg, o.reference_pi);
    auto at = std::find_if(rows.begin(), rows.end(), [&](auto& p) { return p.pi >= ref.pi; });
    if (at == rows.end() || at->pi != ref.pi)
        rows.insert(at, ref);
    run.write(run.path("sensitivity.csv"), evaluation::sensitivity_csv(rows));

    svg::LinePlot plot;
    plot.title = "Vuln. F1 against positive fraction (r+ " + fmt(*o.r_pos, "%.2f") + ", r- " + fmt(*o.r_neg, "%.2f") +
                 ")";
    plot.x_label = "positive fraction";
    plot.y_label = "F1";
    for (const auto& p : curve) {
        plot.xs.push_back(p.pi);
        plot.ys.push_back(p.f1);
    }
    plot.reference_x = o.reference_pi;
    run.write(run.path("sensitivity.svg"), svg::render_line(plot));
    run.out() << "pi " << fmt(ref.pi, "%.3f") << ": precision " << fmt(ref.precision) << ", f1 " << fmt(ref.f1)
              << "\n";
}

void cmd_similarity(Run& run, const Overrides& o)
{
    using detectors::DetectorKind;
    const auto& c = run.config();
    auto kind = detector_flags(o.detectors, {DetectorKind::Combined}).front();
    split_flag(o.split);
    auto corpus = load_corpus(run, o);
    std::map<std::string, const dataset::LabeledIssue*> by_url;
    for (const auto& item : corpus.issues)
        by_url[item.issue.html_url] = &item;
    auto p = run.input(std::nullopt, results_file(kind, o.split));
    auto results = parse_jsonl<detectors::DetectionResult>(run.read(p), p, detectors::result_from_json);

    auto embedder = embedder_for(c);
    std::vector<double> scores;
    std::string detail = "issue_url,cve_id,similarity\n";
    for (const auto& r : results) {
        auto it = by_url.find(r.issue_url);
        if (!r.description || it == by_url.end() || !it->second->label)
            continue;
        // Issues citing several CVEs are scored against the closest one.
        double best = -2.0;
        std::string best_id;
        for (const auto& cve : it->second->linked_cves) {
            if (trim(cve.description).empty())
                continue;
            double s = evaluation::description_similarity(*r.description, cve.description, *embedder);
            if (s > best) {
                best = s;
                best_id = cve.cve_id;
            }
        }
        if (best_id.empty())
            continue;
        scores.push_back(best);
        detail += r.issue_url + "," + best_id + "," + fmt(best, "%.6f") + "\n";
    }
    auto report = evaluation::similarity_histogram(scores, c.histogram_bins);
    if (report.clamped)
        run.warn(std::to_string(report.clamped) + " similarity scores fell outside [0, 1] and were clamped");
    run.write(run.path("similarity-scores.csv"), detail);
    run.write(run.path("similarity.csv"), evaluation::histogram_csv(report));
    svg::HistogramPlot plot{"Description similarity (" + detectors::detector_display_name(kind) + ")",
                            "cosine similarity", report.histogram};
    run.write(run.path("similarity.svg"), svg::render_histogram(plot));
    if (report.mean_undefined)
        run.out() << "no positive issues with descriptions\n";
    else
        run.out() << scores.size() << " descriptions, mean similarity " << fmt(report.mean) << "\n";
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Vulnerability-report detection for GitHub issues", "ghsec"};
    app.require_subcommand(1, 1);
    app.fallthrough();

    Overrides o;
    app.add_option("--config", o.config_path, "key = value config file")->check(CLI::ExistingFile);
    app.add_option("--seed", o.seed, "seed for every sampled step");
    app.add_option("--out-dir", o.out_dir, "directory for all artifacts");
    app.add_option("--replay-dir", o.replay_dir, "serve HTTP from recorded fixtures");

    auto* ingest = app.add_subcommand("ingest", "fetch CVEs from NVD and extract reference links");
    ingest->add_option("--start", o.start, "first publication date (YYYY-MM-DD)");
    ingest->add_option("--end", o.end, "last publication date (YYYY-MM-DD)");

    auto* harvest = app.add_subcommand("harvest", "rank repositories and fetch their issues");
    harvest->add_option("--repos-top-k", o.repos_top_k, "repositories to keep (default 31)");
    harvest->add_option("--token-limit", o.token_limit, "drop issues above this many tokens (default 8191)");
    harvest->add_option("--ranking-window-days", o.ranking_window_days, "ranking window length (default 365)");
    harvest->add_option("--end", o.end, "collection date ending the ranking window");
    harvest->add_option("--cves", o.cves_path);
    harvest->add_option("--references", o.references_path);

    auto* build = app.add_subcommand("build", "label, sample and split the corpus");
    build->add_option("--cutoff", o.cutoff, "training-data cutoff date (default 2021-09-01)");
    build->add_option("--train-fraction", o.train_fraction, "train share of the post-cutoff remainder");
    build->add_option("--neg-per-pos", o.neg_per_pos, "negatives kept per positive in each repository");
    build->add_option("--issues", o.issues_path);
    build->add_option("--references", o.references_path);
    build->add_option("--cves", o.cves_path);
    build->add_option("--corpus", o.corpus_path, "output corpus path");

    auto* train = app.add_subcommand("train", "train the classifiers of the embedding and combined detectors");
    train->add_option("--detector", o.detectors, "embedding and/or combined (default both)");
    train->add_option("--n-rounds", o.n_rounds);
    train->add_option("--max-depth", o.max_depth);
    train->add_option("--learning-rate", o.learning_rate);
    train->add_option("--min-samples-leaf", o.min_samples_leaf);
    train->add_option("--subsample", o.subsample);
    train->add_option("--combined-features", o.combined_features, "description or issue");
    train->add_option("--corpus", o.corpus_path);

    auto* detect = app.add_subcommand("detect", "run detectors over a split");
    detect->add_option("--detector", o.detectors, "baseline, embedding, llm or combined");
    detect->add_option("--split", o.split, "train or test (default test)");
    detect->add_option("--threshold", o.threshold, "classifier probability threshold (default 0.5)");
    detect->add_option("--combined-features", o.combined_features, "description or issue");
    detect->add_flag("--word-boundary", o.word_boundary, "baseline keywords must match whole words");
    detect->add_option("--corpus", o.corpus_path);

    auto* evaluate = app.add_subcommand("evaluate", "per-class metrics for detector results");
    evaluate->add_option("--detector", o.detectors, "detectors to report (default: all with results)");
    evaluate->add_option("--split", o.split, "train or test (default test)");
    evaluate->add_option("--corpus", o.corpus_path);

    auto* sensitivity = app.add_subcommand("sensitivity", "F1 as the positive fraction varies");
    sensitivity->add_option("--r-pos", o.r_pos, "positive-class recall")->check(CLI::Range(0.0, 1.0));
    sensitivity->add_option("--r-neg", o.r_neg, "negative-class recall")->check(CLI::Range(0.0, 1.0));
    sensitivity->add_option("--pi-from", o.pi_from, "smallest positive fraction (default 0.08)");
    sensitivity->add_option("--pi-to", o.pi_to, "largest positive fraction (default 0.20)");
    sensitivity->add_option("--steps", o.steps, "grid points (default 13)");
    sensitivity->add_option("--reference-pi", o.reference_pi, "marked fraction (default 0.122)");

    auto* similarity = app.add_subcommand("similarity", "compare generated and official vulnerability descriptions");
    similarity->add_option("--detector", o.detectors, "detector whose descriptions are scored (default combined)");
    similarity->add_option("--split", o.split, "train or test (default test)");
    similarity->add_option("--bins", o.bins, "histogram bins (default 20)");
    similarity->add_option("--corpus", o.corpus_path);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsageError;
    }

    try {
        auto cfg = effective_config(o);
        auto* sub = app.get_subcommands().front();
        Run r(sub->get_name(), cfg, out, err);
        bool ok = true;
        if (sub == ingest)
            cmd_ingest(r);
        else if (sub == harvest)
            cmd_harvest(r, o);
        else if (sub == build)
            cmd_build(r, o);
        else if (sub == train)
            cmd_train(r, o);
        else if (sub == detect)
            ok = cmd_detect(r, o);
        else if (sub == evaluate)
            cmd_evaluate(r, o);
        else if (sub == sensitivity)
            cmd_sensitivity(r, o);
        else if (sub == similarity)
            cmd_similarity(r, o);
        r.finish();
        return ok ? kExitOk : kExitDataError;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitUsageError;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsageError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitDataError;
    }
}

int run_command(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

} // namespace ghsec::cli
