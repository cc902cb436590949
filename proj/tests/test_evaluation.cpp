#include "ghsec/evaluation.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

using namespace ghsec;
using namespace ghsec::evaluation;

TEST(Confusion, ParallelVectors)
{
    auto cm = confusion(std::vector<bool>{true, true, false, false}, std::vector<bool>{true, false, true, false});
    EXPECT_EQ(cm, (ConfusionMatrix{1, 1, 1, 1}));
    EXPECT_EQ(cm.total(), 4u);
    EXPECT_THROW(confusion(std::vector<bool>{true}, std::vector<bool>{}), PreconditionError);
}

TEST(Confusion, PairsByUrl)
{
    std::vector<dataset::LabeledIssue> truth(3);
    for (int i = 0; i < 3; ++i) {
        truth[i].issue = testing_support::issue("o", "r", i + 1, "t", "b");
        truth[i].label = i == 0;
    }
    using detectors::DetectorKind;
    // Results in a different order than the ground truth.
    std::vector<detectors::DetectionResult> res = {{true, {}, {}, DetectorKind::Baseline, truth[2].issue.html_url},
                                                   {true, {}, {}, DetectorKind::Baseline, truth[0].issue.html_url},
                                                   {false, {}, {}, DetectorKind::Baseline, truth[1].issue.html_url}};
    EXPECT_EQ(confusion(res, truth), (ConfusionMatrix{1, 1, 0, 1}));
    auto dup = res;
    dup[2].issue_url = dup[1].issue_url;
    EXPECT_THROW(confusion(dup, truth), PreconditionError);
    auto unknown = res;
    unknown[0].issue_url = "https://github.com/o/r/issues/99";
    EXPECT_THROW(confusion(unknown, truth), PreconditionError);
    res.pop_back();
    EXPECT_THROW(confusion(res, truth), PreconditionError);
}

TEST(ClassMetrics, BothClasses)
{
    auto rep = class_metrics({2, 1, 1, 6});
    EXPECT_NEAR(rep.vuln.precision, 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(rep.vuln.recall, 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(rep.vuln.f1, 2.0 / 3.0, 1e-12);
    EXPECT_EQ(rep.vuln.support, 3u);
    EXPECT_NEAR(rep.no_vuln.precision, 6.0 / 7.0, 1e-12);
    EXPECT_NEAR(rep.no_vuln.recall, 6.0 / 7.0, 1e-12);
    EXPECT_EQ(rep.no_vuln.support, 7u);
}

TEST(ClassMetrics, DegenerateFlagsUndefined)
{
    auto rep = class_metrics({0, 0, 0, 5});
    EXPECT_TRUE(rep.vuln.precision_undefined);
    EXPECT_TRUE(rep.vuln.recall_undefined);
    EXPECT_DOUBLE_EQ(rep.vuln.f1, 0.0);
    EXPECT_FALSE(rep.no_vuln.precision_undefined);
    EXPECT_DOUBLE_EQ(rep.no_vuln.recall, 1.0);
}

TEST(Sensitivity, KnownPoints)
{
    auto p = sensitivity_f1(0.55, 0.96, 0.122);
    EXPECT_NEAR(p.precision, 0.6564, 1e-4);
    EXPECT_NEAR(p.f1, 0.5985, 1e-4);
    auto q = sensitivity_f1(0.24, 0.96, 0.122);
    EXPECT_NEAR(q.precision, 0.4547, 1e-4);
    EXPECT_NEAR(q.f1, 0.3142, 1e-4);
    auto none = sensitivity_f1(0.0, 1.0, 0.1);
    EXPECT_TRUE(none.precision_undefined);
    EXPECT_DOUBLE_EQ(none.f1, 0.0);
    EXPECT_THROW(sensitivity_f1(0.5, 0.5, 0.0), PreconditionError);
    EXPECT_THROW(sensitivity_f1(0.5, 0.5, 1.0), PreconditionError);
    EXPECT_THROW(sensitivity_f1(1.1, 0.5, 0.5), PreconditionError);
}

TEST(Sensitivity, CurveShape)
{
    auto c = sensitivity_curve(0.55, 0.96);
    ASSERT_EQ(c.size(), 13u);
    EXPECT_DOUBLE_EQ(c.front().pi, 0.08);
    EXPECT_DOUBLE_EQ(c.back().pi, 0.20);
    EXPECT_NEAR(c[1].pi, 0.09, 1e-12);
    EXPECT_NEAR(c.front().precision, 0.544554, 1e-6);
    EXPECT_NEAR(c.front().f1, 0.547264, 1e-6);
    EXPECT_NEAR(c.back().precision, 0.774648, 1e-6);
    EXPECT_NEAR(c.back().f1, 0.643275, 1e-6);
    for (std::size_t i = 1; i < c.size(); ++i)
        EXPECT_GT(c[i].f1, c[i - 1].f1);
    for (const auto& p : sensitivity_curve(0.4, 1.0))
        EXPECT_NEAR(p.f1, 2 * 0.4 / 1.4, 1e-12);
    EXPECT_THROW(sensitivity_curve(0.5, 0.5, 0.2, 0.1), PreconditionError);
    EXPECT_THROW(sensitivity_curve(0.5, 0.5, 0.1, 0.2, 1), PreconditionError);
}

TEST(Similarity, DescriptionCosine)
{
    backends::MockEmbeddingBackend m(64, 1);
    EXPECT_NEAR(description_similarity("heap overflow", "heap overflow", m), 1.0, 1e-12);
    EXPECT_THROW(description_similarity("  ", "x", m), PreconditionError);
}

TEST(Similarity, HistogramBinning)
{
    auto rep = similarity_histogram({0.0, 0.05, 0.5, 0.99, 1.0, 1.2, -0.1}, 20);
    ASSERT_EQ(rep.histogram.size(), 20u);
    EXPECT_EQ(rep.histogram[0].count, 2u); // 0.0 and clamped -0.1
    EXPECT_EQ(rep.histogram[1].count, 1u); // 0.05 opens bin 1
    EXPECT_EQ(rep.histogram[10].count, 1u);
    EXPECT_EQ(rep.histogram[19].count, 3u); // last bin is closed
    EXPECT_EQ(rep.clamped, 2u);
    EXPECT_DOUBLE_EQ(rep.histogram[19].high, 1.0);
    std::size_t total = 0;
    for (const auto& b : rep.histogram)
        total += b.count;
    EXPECT_EQ(total, 7u);
    EXPECT_TRUE(similarity_histogram({}).mean_undefined);
    EXPECT_THROW(similarity_histogram({NAN}), PreconditionError);
    EXPECT_THROW(similarity_histogram({0.5}, 0), PreconditionError);
}

TEST(Reports, MetricsCsvLayout)
{
    DetectorMetrics row{"Combined", {2, 1, 1, 6}, class_metrics({2, 1, 1, 6})};
    auto csv = metrics_csv({row});
    EXPECT_EQ(csv, "model,class,precision,recall,f1,support\n"
                   "Combined,No Vuln.,0.8571,0.8571,0.8571,7\n"
                   "Combined,Vuln.,0.6667,0.6667,0.6667,3\n");
    auto j = nlohmann::json::parse(metrics_json({row}));
    EXPECT_EQ(j[0]["confusion"]["tp"], 2);
    EXPECT_EQ(j[0]["classes"][1]["class"], "Vuln.");
}

TEST(Reports, SensitivityAndHistogramCsv)
{
    auto csv = sensitivity_csv({sensitivity_f1(0.55, 0.96, 0.122)});
    EXPECT_EQ(csv, "pi,r_pos,r_neg,precision,f1,precision_undefined\n0.1220,0.5500,0.9600,0.6564,0.5985,0\n");
    auto h = histogram_csv(similarity_histogram({0.3}, 2));
    EXPECT_EQ(h, "bin_low,bin_high,count\n0.0000,0.5000,1\n0.5000,1.0000,0\n");
}
