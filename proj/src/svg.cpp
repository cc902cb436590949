#include "ghsec/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace ghsec::svg {

namespace {

constexpr double kWidth = 640, kHeight = 400;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 60;

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

struct Frame {
    double x0, x1, y0, y1;

    double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
    double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

std::string header(const std::string& title)
{
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
           "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n" +
           "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" + "<text x=\"" + num(kWidth / 2) +
           "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" + escape(title) + "</text>\n";
}

std::string axes(const Frame& f, const std::string& x_label, const std::string& y_label, int ticks)
{
    std::string out;
    double bx = kHeight - kBottom;
    out += "<line class=\"axis\" x1=\"" + num(kLeft) + "\" y1=\"" + num(bx) + "\" x2=\"" + num(kWidth - kRight) +
           "\" y2=\"" + num(bx) + "\" stroke=\"black\"/>\n";
    out += "<line class=\"axis\" x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(kLeft) + "\" y2=\"" +
           num(bx) + "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= ticks; ++i) {
        double t = static_cast<double>(i) / ticks;
        double xv = f.x0 + t * (f.x1 - f.x0), yv = f.y0 + t * (f.y1 - f.y0);
        out += "<text x=\"" + num(f.px(xv)) + "\" y=\"" + num(bx + 16) + "\" text-anchor=\"middle\">" + tick(xv) +
               "</text>\n";
        out += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(f.py(yv) + 4) + "\" text-anchor=\"end\">" + tick(yv) +
               "</text>\n";
    }
    out += "<text x=\"" + num((kLeft + kWidth - kRight) / 2) + "\" y=\"" + num(kHeight - 16) +
           "\" text-anchor=\"middle\">" + escape(x_label) + "</text>\n";
    out += "<text x=\"18\" y=\"" + num((kTop + bx) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
           num((kTop + bx) / 2) + ")\">" + escape(y_label) + "</text>\n";
    return out;
}

} // namespace

std::string escape(std::string_view text)
{
    std::string out;
    for (char c : text) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string render_line(const LinePlot& plot)
{
    if (plot.xs.empty() || plot.xs.size() != plot.ys.size())
        throw PreconditionError("render_line: need a non-empty series with matching x and y");
    auto [xmin, xmax] = std::minmax_element(plot.xs.begin(), plot.xs.end());
    auto [ymin, ymax] = std::minmax_element(plot.ys.begin(), plot.ys.end());
    Frame f{*xmin, *xmax, std::min(0.0, *ymin), std::max(1.0, *ymax)};
    if (plot.reference_x) {
        f.x0 = std::min(f.x0, *plot.reference_x);
        f.x1 = std::max(f.x1, *plot.reference_x);
    }
    if (f.x1 == f.x0) {
        f.x0 -= 0.5;
        f.x1 += 0.5;
    }

    std::string out = header(plot.title) + axes(f, plot.x_label, plot.y_label, 4);
    if (plot.reference_x)
        out += "<line class=\"reference\" x1=\"" + num(f.px(*plot.reference_x)) + "\" y1=\"" + num(kTop) +
               "\" x2=\"" + num(f.px(*plot.reference_x)) + "\" y2=\"" + num(kHeight - kBottom) +
               "\" stroke=\"red\" stroke-dasharray=\"5,4\"/>\n";
    out += "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < plot.xs.size(); ++i)
        out += (i ? " " : "") + num(f.px(plot.xs[i])) + "," + num(f.py(plot.ys[i]));
    out += "\"/>\n";
    for (std::size_t i = 0; i < plot.xs.size(); ++i)
        out += "<circle class=\"marker\" cx=\"" + num(f.px(plot.xs[i])) + "\" cy=\"" + num(f.py(plot.ys[i])) +
               "\" r=\"3.5\" fill=\"steelblue\"><title>" + tick(plot.xs[i]) + ", " + tick(plot.ys[i]) +
               "</title></circle>\n";
    return out + "</svg>\n";
}

std::string render_histogram(const HistogramPlot& plot)
{
    if (plot.bins.empty())
        throw PreconditionError("render_histogram: no bins");
    std::size_t peak = 0;
    for (const auto& b : plot.bins)
        peak = std::max(peak, b.count);
    Frame f{plot.bins.front().low, plot.bins.back().high, 0.0, static_cast<double>(std::max<std::size_t>(peak, 1))};

    std::string out = header(plot.title) + axes(f, plot.x_label, "count", 4);
    for (const auto& b : plot.bins) {
        double x = f.px(b.low), w = f.px(b.high) - x;
        double y = f.py(static_cast<double>(b.count));
        out += "<rect class=\"bar\" x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) + "\" height=\"" +
               num(kHeight - kBottom - y) + "\" fill=\"steelblue\" stroke=\"white\"><title>" + tick(b.low) + "-" +
               tick(b.high) + ": " + std::to_string(b.count) + "</title></rect>\n";
    }
    return out + "</svg>\n";
}

} // namespace ghsec::svg
