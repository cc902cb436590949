#include "ghsec/svg.hpp"

#include <gtest/gtest.h>

using namespace ghsec;

namespace {

std::size_t count(const std::string& haystack, const std::string& needle)
{
    std::size_t n = 0;
    for (auto p = haystack.find(needle); p != std::string::npos; p = haystack.find(needle, p + 1))
        ++n;
    return n;
}

svg::LinePlot curve()
{
    svg::LinePlot p{"F1 vs positive fraction", "pi", "F1", {}, {}, 0.122};
    for (const auto& pt : evaluation::sensitivity_curve(0.55, 0.96)) {
        p.xs.push_back(pt.pi);
        p.ys.push_back(pt.f1);
    }
    return p;
}

} // namespace

TEST(Svg, LinePlotMarkersAndReference)
{
    auto out = svg::render_line(curve());
    EXPECT_EQ(out.rfind("<svg", 0), 0u);
    EXPECT_EQ(count(out, "class=\"marker\""), 13u);
    EXPECT_EQ(count(out, "class=\"reference\""), 1u);
    EXPECT_NE(out.find("<polyline"), std::string::npos);
    EXPECT_EQ(out, svg::render_line(curve()));
    auto no_ref = curve();
    no_ref.reference_x.reset();
    EXPECT_EQ(count(svg::render_line(no_ref), "class=\"reference\""), 0u);
}

TEST(Svg, HistogramBars)
{
    auto rep = evaluation::similarity_histogram({0.1, 0.7, 0.8}, 2);
    auto out = svg::render_histogram({"Similarity", "cosine", rep.histogram});
    EXPECT_EQ(count(out, "class=\"bar\""), 2u);
    EXPECT_EQ(out, svg::render_histogram({"Similarity", "cosine", rep.histogram}));
}

TEST(Svg, RejectsEmptyOrMismatchedInput)
{
    EXPECT_THROW(svg::render_line({"t", "x", "y", {}, {}, {}}), PreconditionError);
    EXPECT_THROW(svg::render_line({"t", "x", "y", {1.0}, {}, {}}), PreconditionError);
    EXPECT_THROW(svg::render_histogram({"t", "x", {}}), PreconditionError);
}

TEST(Svg, EscapesText)
{
    EXPECT_EQ(svg::escape("a<b & \"c\""), "a&lt;b &amp; &quot;c&quot;");
    auto p = curve();
    p.title = "<script>";
    EXPECT_EQ(svg::render_line(p).find("<script>"), std::string::npos);
}
