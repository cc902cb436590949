#include "ghsec/config.hpp"

#include <cstdlib>
#include <functional>
#include <sstream>

namespace ghsec::config {

namespace {

std::string interpolate(std::string_view value, std::size_t line_no)
{
    std::string out;
    for (std::size_t i = 0; i < value.size(); ++i) {
        if (value[i] == '$' && i + 1 < value.size() && value[i + 1] == '{') {
            auto close = value.find('}', i + 2);
            if (close == std::string_view::npos)
                throw ConfigError("line " + std::to_string(line_no) + ": unterminated ${...}");
            std::string name(value.substr(i + 2, close - i - 2));
            if (const char* env = std::getenv(name.c_str()))
                out += env;
            i = close;
        } else {
            out += value[i];
        }
    }
    return out;
}

std::size_t to_size(const std::string& key, const std::string& v)
{
    try {
        std::size_t used = 0;
        long long n = std::stoll(v, &used);
        if (used != v.size() || n < 0)
            throw std::invalid_argument(v);
        return static_cast<std::size_t>(n);
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
    }
}

double to_double(const std::string& key, const std::string& v)
{
    try {
        std::size_t used = 0;
        double d = std::stod(v, &used);
        if (used != v.size())
            throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    }
}

double to_fraction(const std::string& key, const std::string& v)
{
    double d = to_double(key, v);
    if (!(d > 0.0 && d < 1.0))
        throw ConfigError(key + ": expected a value in (0, 1), got '" + v + "'");
    return d;
}

bool to_bool(const std::string& key, const std::string& v)
{
    auto l = to_lower(v);
    if (l == "true" || l == "1" || l == "yes")
        return true;
    if (l == "false" || l == "0" || l == "no")
        return false;
    throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

Date to_date(const std::string& key, const std::string& v)
{
    try {
        return parse_date(v);
    } catch (const Error&) {
        throw ConfigError(key + ": expected an ISO-8601 date, got '" + v + "'");
    }
}

backends::BackendKind to_kind(const std::string& key, const std::string& v, bool chat)
{
    auto l = to_lower(v);
    if (l == "mock")
        return chat ? backends::BackendKind::MockChat : backends::BackendKind::MockEmbedding;
    if (l == "http")
        return chat ? backends::BackendKind::HttpChat : backends::BackendKind::HttpEmbedding;
    throw ConfigError(key + ": expected mock or http, got '" + v + "'");
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters()
{
    static const std::map<std::string, Setter> table = {
        {"seed", [](RunConfig& c, auto& k, auto& v) { c.seed = to_size(k, v); }},
        {"out_dir", [](RunConfig& c, auto&, auto& v) { c.out_dir = v; }},
        {"replay_dir", [](RunConfig& c, auto&, auto& v) { c.replay_dir = v; }},
        {"nvd.start", [](RunConfig& c, auto& k, auto& v) { c.nvd_start = to_date(k, v); }},
        {"nvd.end", [](RunConfig& c, auto& k, auto& v) { c.nvd_end = to_date(k, v); }},
        {"nvd.base_url", [](RunConfig& c, auto&, auto& v) { c.nvd_base_url = v; }},
        {"nvd.api_key", [](RunConfig& c, auto&, auto& v) { c.nvd_api_key = v; }},
        {"nvd.page_size", [](RunConfig& c, auto& k, auto& v) { c.nvd_page_size = to_size(k, v); }},
        {"nvd.concurrency", [](RunConfig& c, auto& k, auto& v) { c.nvd_concurrency = to_size(k, v); }},
        {"github.base_url", [](RunConfig& c, auto&, auto& v) { c.github_base_url = v; }},
        {"github.token", [](RunConfig& c, auto&, auto& v) { c.github_token = v; }},
        {"github.concurrency", [](RunConfig& c, auto& k, auto& v) { c.github_concurrency = to_size(k, v); }},
        {"repos_top_k", [](RunConfig& c, auto& k, auto& v) { c.repos_top_k = to_size(k, v); }},
        {"token_limit", [](RunConfig& c, auto& k, auto& v) { c.token_limit = to_size(k, v); }},
        {"ranking_window_days",
         [](RunConfig& c, auto& k, auto& v) { c.ranking_window_days = static_cast<int>(to_size(k, v)); }},
        {"cutoff", [](RunConfig& c, auto& k, auto& v) { c.cutoff = to_date(k, v); }},
        {"train_fraction", [](RunConfig& c, auto& k, auto& v) { c.train_fraction = to_fraction(k, v); }},
        {"neg_per_pos", [](RunConfig& c, auto& k, auto& v) { c.neg_per_pos = to_double(k, v); }},
        {"embedding.kind", [](RunConfig& c, auto& k, auto& v) { c.embedding.kind = to_kind(k, v, false); }},
        {"embedding.endpoint", [](RunConfig& c, auto&, auto& v) { c.embedding.endpoint = v; }},
        {"embedding.model", [](RunConfig& c, auto&, auto& v) { c.embedding.model_name = v; }},
        {"embedding.dim", [](RunConfig& c, auto& k, auto& v) { c.embedding.dim = to_size(k, v); }},
        {"embedding.api_key", [](RunConfig& c, auto&, auto& v) { c.embedding.api_key = v; }},
        {"embedding.batch_size", [](RunConfig& c, auto& k, auto& v) { c.embedding.batch_size = to_size(k, v); }},
        {"chat.kind", [](RunConfig& c, auto& k, auto& v) { c.chat.kind = to_kind(k, v, true); }},
        {"chat.endpoint", [](RunConfig& c, auto&, auto& v) { c.chat.endpoint = v; }},
        {"chat.model", [](RunConfig& c, auto&, auto& v) { c.chat.model_name = v; }},
        {"chat.api_key", [](RunConfig& c, auto&, auto& v) { c.chat.api_key = v; }},
        {"gbdt.n_rounds", [](RunConfig& c, auto& k, auto& v) { c.gbdt.n_rounds = static_cast<int>(to_size(k, v)); }},
        {"gbdt.max_depth", [](RunConfig& c, auto& k, auto& v) { c.gbdt.max_depth = static_cast<int>(to_size(k, v)); }},
        {"gbdt.learning_rate", [](RunConfig& c, auto& k, auto& v) { c.gbdt.learning_rate = to_double(k, v); }},
        {"gbdt.min_samples_leaf",
         [](RunConfig& c, auto& k, auto& v) { c.gbdt.min_samples_leaf = static_cast<int>(to_size(k, v)); }},
        {"gbdt.subsample", [](RunConfig& c, auto& k, auto& v) { c.gbdt.subsample = to_double(k, v); }},
        {"threshold", [](RunConfig& c, auto& k, auto& v) { c.threshold = to_double(k, v); }},
        {"combined.features",
         [](RunConfig& c, auto& k, auto& v) {
             if (v == "description")
                 c.combined_on_descriptions = true;
             else if (v == "issue")
                 c.combined_on_descriptions = false;
             else
                 throw ConfigError(k + ": expected description or issue, got '" + v + "'");
         }},
        {"detect.concurrency", [](RunConfig& c, auto& k, auto& v) { c.detect_concurrency = to_size(k, v); }},
        {"baseline.word_boundary", [](RunConfig& c, auto& k, auto& v) { c.word_boundary = to_bool(k, v); }},
        {"similarity.bins", [](RunConfig& c, auto& k, auto& v) { c.histogram_bins = to_size(k, v); }},
    };
    return table;
}

} // namespace

std::map<std::string, std::string> parse_key_values(std::string_view text)
{
    std::map<std::string, std::string> out;
    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        auto line = trim(raw);
        if (line.empty() || line.front() == '#')
            continue;
        auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        std::string key(trim(line.substr(0, eq)));
        if (key.empty())
            throw ConfigError("line " + std::to_string(line_no) + ": empty key");
        out[key] = interpolate(trim(line.substr(eq + 1)), line_no);
    }
    return out;
}

void apply(RunConfig& config, const std::string& key, const std::string& value)
{
    auto it = setters().find(key);
    if (it == setters().end())
        throw ConfigError("unknown config key '" + key + "'");
    it->second(config, key, value);
}

RunConfig load(const std::filesystem::path& path, RunConfig base)
{
    std::string text;
    try {
        text = read_file(path);
    } catch (const Error& e) {
        throw ConfigError("cannot read config " + path.string() + ": " + e.what());
    }
    for (const auto& [k, v] : parse_key_values(text))
        apply(base, k, v);
    return base;
}

std::string canonical(const RunConfig& c)
{
    auto kind = [](backends::BackendKind k) {
        return k == backends::BackendKind::MockEmbedding || k == backends::BackendKind::MockChat ? "mock" : "http";
    };
    std::ostringstream out;
    out.precision(17);
    out << "seed=" << c.seed << "\nout_dir=" << c.out_dir.string()
        << "\nreplay_dir=" << (c.replay_dir ? c.replay_dir->string() : "")
        << "\nnvd.start=" << (c.nvd_start ? format_date(*c.nvd_start) : "")
        << "\nnvd.end=" << (c.nvd_end ? format_date(*c.nvd_end) : "") << "\nnvd.base_url=" << c.nvd_base_url
        << "\nnvd.page_size=" << c.nvd_page_size << "\nnvd.concurrency=" << c.nvd_concurrency
        << "\ngithub.base_url=" << c.github_base_url << "\ngithub.concurrency=" << c.github_concurrency
        << "\nrepos_top_k=" << c.repos_top_k << "\ntoken_limit=" << c.token_limit
        << "\nranking_window_days=" << c.ranking_window_days << "\ncutoff=" << format_date(c.cutoff)
        << "\ntrain_fraction=" << c.train_fraction << "\nneg_per_pos=" << c.neg_per_pos
        << "\nembedding.kind=" << kind(c.embedding.kind) << "\nembedding.endpoint=" << c.embedding.endpoint
        << "\nembedding.model=" << c.embedding.model_name
        << "\nembedding.dim=" << (c.embedding.dim ? std::to_string(*c.embedding.dim) : "")
        << "\nchat.kind=" << kind(c.chat.kind) << "\nchat.endpoint=" << c.chat.endpoint
        << "\nchat.model=" << c.chat.model_name << "\ngbdt.n_rounds=" << c.gbdt.n_rounds
        << "\ngbdt.max_depth=" << c.gbdt.max_depth << "\ngbdt.learning_rate=" << c.gbdt.learning_rate
        << "\ngbdt.min_samples_leaf=" << c.gbdt.min_samples_leaf << "\ngbdt.subsample=" << c.gbdt.subsample
        << "\nthreshold=" << c.threshold
        << "\ncombined.features=" << (c.combined_on_descriptions ? "description" : "issue")
        << "\nbaseline.word_boundary=" << c.word_boundary << "\nsimilarity.bins=" << c.histogram_bins << "\n";
    return out.str();
}

} // namespace ghsec::config
