#include "ghsec/gbdt.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cmath>
#include <fstream>

using namespace ghsec;
using namespace ghsec::gbdt;

namespace {

GbdtParams small_params()
{
    GbdtParams p;
    p.n_rounds = 20;
    p.max_depth = 2;
    p.learning_rate = 0.3;
    p.min_samples_leaf = 1;
    return p;
}

/// 1-D data separable at 0.5, plus a noise column.
void separable(FeatureMatrix& x, std::vector<bool>& y, std::size_t n)
{
    SplitMix64 rng(5);
    x = FeatureMatrix(n, 2);
    y.clear();
    for (std::size_t i = 0; i < n; ++i) {
        double v = rng.uniform();
        x(i, 0) = v;
        x(i, 1) = rng.uniform();
        y.push_back(v >= 0.5);
    }
}

} // namespace

TEST(Gbdt, SplitGainAndLeafValueByHand)
{
    EXPECT_NEAR(split_gain(0.5, 0.25, -0.5, 0.25, 1.0), 0.2, 1e-12);
    GbdtParams p;
    EXPECT_NEAR(leaf_value(0.5, 0.25, p), -0.4, 1e-12);
    EXPECT_NEAR(leaf_value(-0.5, 0.25, p), 0.4, 1e-12);
    p.lambda = 0.0;
    p.leaf_clamp = 3.0;
    EXPECT_DOUBLE_EQ(leaf_value(-100.0, 1.0, p), 3.0);
}

TEST(Gbdt, BestSplitSeparatesTwoGroups)
{
    auto x = FeatureMatrix::from_rows({{0.0, 5.0}, {1.0, 5.0}, {2.0, 5.0}, {3.0, 5.0}}, 2);
    std::vector<std::size_t> idx = {0, 1, 2, 3};
    std::vector<double> g = {0.5, 0.5, -0.5, -0.5}, h(4, 0.25);
    auto params = small_params();
    auto s = find_best_split(x, idx, g, h, params);
    ASSERT_TRUE(s.valid);
    EXPECT_EQ(s.feature, 0);
    EXPECT_DOUBLE_EQ(s.threshold, 1.5);
    EXPECT_NEAR(s.gain, split_gain(1.0, 0.5, -1.0, 0.5, 1.0), 1e-12);
    params.min_samples_leaf = 3;
    EXPECT_FALSE(find_best_split(x, idx, g, h, params).valid);
}

TEST(Gbdt, LearnsSeparableData)
{
    FeatureMatrix x;
    std::vector<bool> y;
    separable(x, y, 200);
    TrainingReport report;
    auto model = train(x, y, small_params(), &report);
    EXPECT_EQ(predict(model, x), y);
    ASSERT_EQ(report.loss_history.size(), 21u);
    for (std::size_t i = 1; i < report.loss_history.size(); ++i)
        EXPECT_LE(report.loss_history[i], report.loss_history[i - 1] + 1e-12);
    for (double p : predict_proba(model, x)) {
        EXPECT_GT(p, 0.0);
        EXPECT_LT(p, 1.0);
    }
}

TEST(Gbdt, ConstantFeaturesPredictBaseRate)
{
    FeatureMatrix x(10, 3);
    std::vector<bool> y = {true, true, true, false, false, false, false, false, false, false};
    auto model = train(x, y, small_params());
    for (double p : predict_proba(model, x))
        EXPECT_NEAR(p, 0.3, 1e-9);
}

TEST(Gbdt, DeterministicForFixedSeed)
{
    FeatureMatrix x;
    std::vector<bool> y;
    separable(x, y, 120);
    auto params = small_params();
    params.subsample = 0.7;
    params.seed = 11;
    EXPECT_EQ(train(x, y, params), train(x, y, params));
    EXPECT_EQ(model_to_json(train(x, y, params)), model_to_json(train(x, y, params)));
}

TEST(Gbdt, EmptyModelAndEmptyInput)
{
    GbdtModel empty;
    empty.feature_dim = 2;
    auto p = predict_proba(empty, FeatureMatrix::from_rows({{1.0, 2.0}}, 2));
    EXPECT_DOUBLE_EQ(p[0], 0.5);
    EXPECT_TRUE(predict_proba(empty, FeatureMatrix(0, 2)).empty());
    EXPECT_THROW(predict_proba(empty, FeatureMatrix(1, 3)), PreconditionError);
}

TEST(Gbdt, ThresholdRules)
{
    FeatureMatrix x;
    std::vector<bool> y;
    separable(x, y, 50);
    auto model = train(x, y, small_params());
    auto proba = predict_proba(model, x);
    auto labels = predict(model, x, proba[0]);
    EXPECT_TRUE(labels[0]); // >= threshold counts as positive
    EXPECT_THROW(predict(model, x, 1.5), PreconditionError);
    EXPECT_THROW(predict(model, x, 0.0), PreconditionError);
}

TEST(Gbdt, InputValidation)
{
    FeatureMatrix x(4, 1);
    x(0, 0) = NAN;
    EXPECT_THROW(train(x, {true, false, true, false}, small_params()), PreconditionError);
    FeatureMatrix ok(4, 1);
    EXPECT_THROW(train(ok, {true, true, true, true}, small_params()), TrainingError);
    EXPECT_THROW(train(ok, {true, false}, small_params()), PreconditionError);
    auto bad = small_params();
    bad.learning_rate = 0.0;
    EXPECT_THROW(train(ok, {true, false, true, false}, bad), PreconditionError);
    EXPECT_THROW(FeatureMatrix::from_rows({{1.0}, {1.0, 2.0}}, 1), PreconditionError);
}

TEST(Gbdt, SaveLoadRoundTrip)
{
    testing_support::TempDir dir;
    FeatureMatrix x;
    std::vector<bool> y;
    separable(x, y, 80);
    auto model = train(x, y, small_params());
    save_model(model, dir / "m.json");
    auto back = load_model(dir / "m.json");
    EXPECT_EQ(back, model);
    EXPECT_EQ(predict_proba(back, x), predict_proba(model, x));
}

TEST(Gbdt, CorruptModelFilesAreRejected)
{
    testing_support::TempDir dir;
    FeatureMatrix x;
    std::vector<bool> y;
    separable(x, y, 40);
    auto text = model_to_json(train(x, y, small_params()));
    EXPECT_THROW(model_from_json(text.substr(0, text.size() / 2)), ModelLoadError);

    auto j = nlohmann::json::parse(text);
    j["version"] = kModelFormatVersion + 1;
    EXPECT_THROW(model_from_json(j.dump()), ModelLoadError);

    j = nlohmann::json::parse(text);
    j["trees"][0][0]["left"] = 999;
    EXPECT_THROW(model_from_json(j.dump()), ModelLoadError);

    EXPECT_THROW(load_model(dir / "missing.json"), Error);
}
