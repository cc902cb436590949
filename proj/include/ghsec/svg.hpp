#pragma once

#include "ghsec/evaluation.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ghsec::svg {

struct LinePlot {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<double> xs;
    std::vector<double> ys;
    /// Draws a dashed vertical marker at this x when set.
    std::optional<double> reference_x;
};

/// Self-contained SVG with axes, tick labels and one `class="marker"` circle
/// per point. Output depends only on the input.
std::string render_line(const LinePlot& plot);

struct HistogramPlot {
    std::string title;
    std::string x_label;
    std::vector<evaluation::HistogramBin> bins;
};

/// One `class="bar"` rect per bin.
std::string render_histogram(const HistogramPlot& plot);

std::string escape(std::string_view text);

} // namespace ghsec::svg
