#include "ghsec/gbdt.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ghsec::gbdt {

using nlohmann::json;
using nlohmann::ordered_json;

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data))
{
    if (data_.size() != rows_ * cols_)
        throw PreconditionError("FeatureMatrix: data size does not match shape");
}

FeatureMatrix FeatureMatrix::from_rows(const std::vector<std::vector<double>>& rows, std::size_t cols)
{
    FeatureMatrix m(rows.size(), cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != cols)
            throw PreconditionError("FeatureMatrix::from_rows: row " + std::to_string(r) + " has " +
                                    std::to_string(rows[r].size()) + " columns, expected " + std::to_string(cols));
        std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
    }
    return m;
}

void GbdtParams::validate() const
{
    if (n_rounds < 0)
        throw PreconditionError("n_rounds must be non-negative");
    if (max_depth < 0)
        throw PreconditionError("max_depth must be non-negative");
    if (!(learning_rate > 0.0 && learning_rate <= 1.0))
        throw PreconditionError("learning_rate must lie in (0, 1]");
    if (min_samples_leaf < 1)
        throw PreconditionError("min_samples_leaf must be >= 1");
    if (!(subsample > 0.0 && subsample <= 1.0))
        throw PreconditionError("subsample must lie in (0, 1]");
    if (!(lambda >= 0.0) || !(leaf_clamp > 0.0))
        throw PreconditionError("lambda must be >= 0 and leaf_clamp > 0");
}

double Tree::predict(std::span<const double> x) const
{
    if (nodes.empty())
        return 0.0;
    std::size_t i = 0;
    while (!nodes[i].is_leaf())
        i = static_cast<std::size_t>(x[static_cast<std::size_t>(nodes[i].feature)] < nodes[i].threshold
                                         ? nodes[i].left
                                         : nodes[i].right);
    return nodes[i].value;
}

double split_gain(double gl, double hl, double gr, double hr, double lambda)
{
    auto score = [lambda](double g, double h) { return g * g / (h + lambda); };
    return 0.5 * (score(gl, hl) + score(gr, hr) - score(gl + gr, hl + hr));
}

double leaf_value(double g, double h, const GbdtParams& params)
{
    double denom = h + params.lambda;
    double w = denom > 0.0 ? -g / denom : 0.0;
    return std::clamp(w, -params.leaf_clamp, params.leaf_clamp);
}

namespace {

constexpr double kMinGain = 1e-12;

double midpoint(double lo, double hi)
{
    double mid = lo + (hi - lo) / 2.0;
    // Adjacent doubles can round the midpoint onto `lo`.
    return lo < mid ? mid : hi;
}

// Scans one feature's samples (already sorted by value) and updates `best`.
void scan_feature(const FeatureMatrix& x, int feature, std::span<const std::size_t> sorted,
                  std::span<const double> grad, std::span<const double> hess, double g_total, double h_total,
                  const GbdtParams& params, SplitCandidate& best)
{
    const auto f = static_cast<std::size_t>(feature);
    const std::size_t n = sorted.size();
    const auto msl = static_cast<std::size_t>(params.min_samples_leaf);
    double gl = 0.0, hl = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        gl += grad[sorted[i]];
        hl += hess[sorted[i]];
        double v = x(sorted[i], f), next = x(sorted[i + 1], f);
        if (!(v < next))
            continue;
        std::size_t n_left = i + 1;
        if (n_left < msl || n - n_left < msl)
            continue;
        double gain = split_gain(gl, hl, g_total - gl, h_total - hl, params.lambda);
        if (gain > kMinGain && (!best.valid || gain > best.gain)) {
            best.valid = true;
            best.feature = feature;
            best.threshold = midpoint(v, next);
            best.gain = gain;
        }
    }
}

std::vector<std::size_t> sorted_by_feature(const FeatureMatrix& x, std::span<const std::size_t> samples,
                                           std::size_t f)
{
    std::vector<std::size_t> order(samples.begin(), samples.end());
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        double va = x(a, f), vb = x(b, f);
        return va < vb || (va == vb && a < b);
    });
    return order;
}

struct TreeBuilder {
    const FeatureMatrix& x;
    std::span<const double> grad;
    std::span<const double> hess;
    const GbdtParams& params;
    Tree tree;

    // `sorted[f]` holds the node's samples ordered by feature f.
    int build(std::vector<std::vector<std::size_t>> sorted, int depth)
    {
        const auto& any = sorted.front();
        double g = 0.0, h = 0.0;
        for (auto s : any) {
            g += grad[s];
            h += hess[s];
        }
        int index = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back(TreeNode{});

        SplitCandidate best;
        if (depth < params.max_depth && any.size() >= 2 * static_cast<std::size_t>(params.min_samples_leaf))
            for (std::size_t f = 0; f < x.cols(); ++f)
                scan_feature(x, static_cast<int>(f), sorted[f], grad, hess, g, h, params, best);

        if (!best.valid) {
            tree.nodes[static_cast<std::size_t>(index)].value = leaf_value(g, h, params);
            return index;
        }

        const auto bf = static_cast<std::size_t>(best.feature);
        std::vector<std::vector<std::size_t>> left(sorted.size()), right(sorted.size());
        for (std::size_t f = 0; f < sorted.size(); ++f)
            for (auto s : sorted[f])
                (x(s, bf) < best.threshold ? left[f] : right[f]).push_back(s);
        sorted.clear();
        sorted.shrink_to_fit();

        int l = build(std::move(left), depth + 1);
        int r = build(std::move(right), depth + 1);
        auto& node = tree.nodes[static_cast<std::size_t>(index)];
        node.feature = best.feature;
        node.threshold = best.threshold;
        node.left = l;
        node.right = r;
        return index;
    }
};

double sigmoid(double m)
{
    return 1.0 / (1.0 + std::exp(-m));
}

double mean_log_loss(std::span<const double> margin, const std::vector<bool>& labels)
{
    // log(1 + e^m) - y*m, evaluated stably.
    double total = 0.0;
    for (std::size_t i = 0; i < margin.size(); ++i) {
        double m = margin[i];
        double softplus = m > 0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
        total += softplus - (labels[i] ? m : 0.0);
    }
    return total / static_cast<double>(margin.size());
}

} // namespace

SplitCandidate find_best_split(const FeatureMatrix& x, std::span<const std::size_t> samples,
                               std::span<const double> grad, std::span<const double> hess, const GbdtParams& params)
{
    double g = 0.0, h = 0.0;
    for (auto s : samples) {
        g += grad[s];
        h += hess[s];
    }
    SplitCandidate best;
    if (samples.size() < 2 * static_cast<std::size_t>(params.min_samples_leaf))
        return best;
    for (std::size_t f = 0; f < x.cols(); ++f) {
        auto order = sorted_by_feature(x, samples, f);
        scan_feature(x, static_cast<int>(f), order, grad, hess, g, h, params, best);
    }
    return best;
}

GbdtModel train(const FeatureMatrix& x, const std::vector<bool>& labels, const GbdtParams& params,
                TrainingReport* report)
{
    params.validate();
    const std::size_t n = x.rows();
    if (labels.size() != n)
        throw PreconditionError("train: label count does not match feature rows");
    if (n < 2)
        throw PreconditionError("train: need at least two samples");
    if (x.cols() == 0)
        throw PreconditionError("train: need at least one feature");
    for (std::size_t r = 0; r < n; ++r)
        for (double v : x.row(r))
            if (!std::isfinite(v))
                throw PreconditionError("train: feature matrix contains NaN or infinity (row " + std::to_string(r) +
                                        ")");
    auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), true));
    if (positives == 0 || positives == n)
        throw TrainingError("train: labels contain a single class");

    GbdtModel model;
    model.params = params;
    model.feature_dim = x.cols();
    double rate = static_cast<double>(positives) / static_cast<double>(n);
    model.base_score = std::log(rate / (1.0 - rate));

    std::vector<double> margin(n, model.base_score), grad(n), hess(n);
    if (report)
        report->loss_history = {mean_log_loss(margin, labels)};

    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    // Presort once; subsampled rounds filter these orders.
    std::vector<std::vector<std::size_t>> presorted(x.cols());
    for (std::size_t f = 0; f < x.cols(); ++f)
        presorted[f] = sorted_by_feature(x, all, f);

    SplitMix64 rng(params.seed);
    std::vector<bool> in_round(n, true);
    for (int round = 0; round < params.n_rounds; ++round) {
        for (std::size_t i = 0; i < n; ++i) {
            double p = sigmoid(margin[i]);
            grad[i] = p - (labels[i] ? 1.0 : 0.0);
            hess[i] = std::max(p * (1.0 - p), 1e-16);
        }

        std::vector<std::vector<std::size_t>> sorted;
        if (params.subsample < 1.0) {
            std::size_t kept = 0;
            for (std::size_t i = 0; i < n; ++i)
                kept += (in_round[i] = rng.uniform() < params.subsample);
            if (kept < 2)
                std::fill(in_round.begin(), in_round.end(), true);
            sorted.resize(x.cols());
            for (std::size_t f = 0; f < x.cols(); ++f)
                for (auto s : presorted[f])
                    if (in_round[s])
                        sorted[f].push_back(s);
        } else {
            sorted = presorted;
        }

        TreeBuilder builder{x, grad, hess, params, {}};
        builder.build(std::move(sorted), 0);
        for (std::size_t i = 0; i < n; ++i)
            margin[i] += params.learning_rate * builder.tree.predict(x.row(i));
        model.trees.push_back(std::move(builder.tree));
        if (report)
            report->loss_history.push_back(mean_log_loss(margin, labels));
    }
    return model;
}

double predict_margin(const GbdtModel& model, std::span<const double> x)
{
    double m = model.base_score;
    for (const auto& t : model.trees)
        m += model.params.learning_rate * t.predict(x);
    return m;
}

std::vector<double> predict_proba(const GbdtModel& model, const FeatureMatrix& features)
{
    if (features.rows() > 0 && features.cols() != model.feature_dim)
        throw PreconditionError("predict_proba: feature dimension " + std::to_string(features.cols()) +
                                " does not match model dimension " + std::to_string(model.feature_dim));
    std::vector<double> out(features.rows());
    for (std::size_t r = 0; r < features.rows(); ++r) {
        // Clamping the margin keeps probabilities strictly inside (0, 1).
        double m = std::clamp(predict_margin(model, features.row(r)), -30.0, 30.0);
        out[r] = sigmoid(m);
    }
    return out;
}

std::vector<bool> predict(const GbdtModel& model, const FeatureMatrix& features, double threshold)
{
    if (!(threshold > 0.0 && threshold < 1.0))
        throw PreconditionError("predict: threshold must lie in (0, 1)");
    auto proba = predict_proba(model, features);
    std::vector<bool> out(proba.size());
    for (std::size_t i = 0; i < proba.size(); ++i)
        out[i] = proba[i] >= threshold;
    return out;
}

// Persistence ------------------------------------------------------------------

std::string model_to_json(const GbdtModel& model)
{
    ordered_json j;
    j["format"] = "ghsec-gbdt";
    j["version"] = kModelFormatVersion;
    j["feature_dim"] = model.feature_dim;
    j["base_score"] = model.base_score;
    const auto& p = model.params;
    j["params"] = ordered_json{{"n_rounds", p.n_rounds},
                               {"max_depth", p.max_depth},
                               {"learning_rate", p.learning_rate},
                               {"min_samples_leaf", p.min_samples_leaf},
                               {"subsample", p.subsample},
                               {"seed", p.seed},
                               {"lambda", p.lambda},
                               {"leaf_clamp", p.leaf_clamp}};
    ordered_json trees = ordered_json::array();
    for (const auto& t : model.trees) {
        ordered_json nodes = ordered_json::array();
        for (const auto& nd : t.nodes) {
            if (nd.is_leaf())
                nodes.push_back(ordered_json{{"value", nd.value}});
            else
                nodes.push_back(ordered_json{
                    {"feature", nd.feature}, {"threshold", nd.threshold}, {"left", nd.left}, {"right", nd.right}});
        }
        trees.push_back(std::move(nodes));
    }
    j["trees"] = std::move(trees);
    return j.dump() + "\n";
}

GbdtModel model_from_json(std::string_view text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ModelLoadError(std::string("model file is not valid JSON: ") + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "ghsec-gbdt")
            throw ModelLoadError("not a ghsec-gbdt model file");
        int version = j.at("version").get<int>();
        if (version != kModelFormatVersion)
            throw ModelLoadError("model format version " + std::to_string(version) + " is not supported (expected " +
                                 std::to_string(kModelFormatVersion) + ")");
        GbdtModel m;
        m.feature_dim = j.at("feature_dim").get<std::size_t>();
        m.base_score = j.at("base_score").get<double>();
        const auto& p = j.at("params");
        m.params.n_rounds = p.at("n_rounds").get<int>();
        m.params.max_depth = p.at("max_depth").get<int>();
        m.params.learning_rate = p.at("learning_rate").get<double>();
        m.params.min_samples_leaf = p.at("min_samples_leaf").get<int>();
        m.params.subsample = p.at("subsample").get<double>();
        m.params.seed = p.at("seed").get<std::uint64_t>();
        m.params.lambda = p.at("lambda").get<double>();
        m.params.leaf_clamp = p.at("leaf_clamp").get<double>();
        m.params.validate();
        for (const auto& tj : j.at("trees")) {
            Tree t;
            for (const auto& nj : tj) {
                TreeNode nd;
                if (nj.contains("feature")) {
                    nd.feature = nj.at("feature").get<int>();
                    nd.threshold = nj.at("threshold").get<double>();
                    nd.left = nj.at("left").get<int>();
                    nd.right = nj.at("right").get<int>();
                } else {
                    nd.value = nj.at("value").get<double>();
                }
                t.nodes.push_back(nd);
            }
            const auto count = static_cast<int>(t.nodes.size());
            for (int k = 0; k < count; ++k) {
                const auto& nd = t.nodes[static_cast<std::size_t>(k)];
                if (nd.is_leaf()) {
                    if (!std::isfinite(nd.value))
                        throw ModelLoadError("non-finite leaf value");
                    continue;
                }
                if (static_cast<std::size_t>(nd.feature) >= m.feature_dim)
                    throw ModelLoadError("split feature index out of range");
                if (nd.left <= k || nd.right <= k || nd.left >= count || nd.right >= count)
                    throw ModelLoadError("child index out of range");
            }
            m.trees.push_back(std::move(t));
        }
        return m;
    } catch (const json::exception& e) {
        throw ModelLoadError(std::string("model file schema: ") + e.what());
    } catch (const PreconditionError& e) {
        throw ModelLoadError(std::string("model parameters: ") + e.what());
    }
}

void save_model(const GbdtModel& model, const std::filesystem::path& path)
{
    atomic_write(path, model_to_json(model));
}

GbdtModel load_model(const std::filesystem::path& path)
{
    return model_from_json(read_file(path));
}

} // namespace ghsec::gbdt
