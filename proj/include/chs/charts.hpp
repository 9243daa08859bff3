#pragma once

#include <map>
#include <string>
#include <vector>

#include "chs/stats.hpp"

namespace chs {

// One bar of a grouped score chart. "Overall" is used as the environment
// label of the cross-environment aggregate.
struct BarGroup {
    std::string environment;
    std::string algorithm;
    double value = 0.0;
    Interval interval;
};

// SVG bar chart with error bars plus a CSV sidecar holding exactly the
// rendered numbers (label,value,lower,upper). Bars are ordered by
// (environment, algorithm).
void emit_bar_chart(std::vector<BarGroup> groups, const std::string& svg_path,
                    const std::string& csv_path);

struct SensitivityPoint {
    double x = 0.0;
    double mean = 0.0;
    Interval interval;
};

// Multi-line sensitivity chart, one line per environment, x ascending.
// Positive log-spaced axes are drawn in log2 scale with power-of-two labels.
// Each series needs at least two points.
void emit_sensitivity_curve(const std::map<std::string, std::vector<SensitivityPoint>>& series,
                            const std::string& svg_path, const std::string& csv_path);

// Density line chart for the `dist` subcommand; CSV sidecar holds (x,y).
void emit_density_chart(const DensityCurve& curve, const std::string& title,
                        const std::string& svg_path, const std::string& csv_path);

}  // namespace chs
