#include "chs/charts.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "chs/error.hpp"
#include "chs/manifest.hpp"

namespace chs {

namespace {

const char* kPalette[] = {"#4878d0", "#ee854a", "#6acc64", "#d65f5f",
                          "#956cb4", "#8c613c", "#dc7ec0", "#797979"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return std::string(buf);
}

std::string csv_num(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

struct Scale {
    double lo, hi, pix_lo, pix_hi;
    double operator()(double v) const {
        return pix_lo + (v - lo) / (hi - lo) * (pix_hi - pix_lo);
    }
};

std::string svg_header(double width, double height) {
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
      << num(height) << "\" viewBox=\"0 0 " << num(width) << " " << num(height) << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << num(width) << "\" height=\"" << num(height)
      << "\" fill=\"white\"/>\n";
    return s.str();
}

void value_axis(std::ostringstream& s, const Scale& y, double x_at, double x_end) {
    s << "<line x1=\"" << num(x_at) << "\" y1=\"" << num(y.pix_lo) << "\" x2=\"" << num(x_at)
      << "\" y2=\"" << num(y.pix_hi) << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double v = y.lo + (y.hi - y.lo) * t / 4.0;
        const double py = y(v);
        s << "<line x1=\"" << num(x_at - 4) << "\" y1=\"" << num(py) << "\" x2=\"" << num(x_end)
          << "\" y2=\"" << num(py) << "\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>\n"
          << "<text x=\"" << num(x_at - 8) << "\" y=\"" << num(py + 3)
          << "\" font-size=\"10\" text-anchor=\"end\" font-family=\"sans-serif\">" << num(v)
          << "</text>\n";
    }
}

}  // namespace

void emit_bar_chart(std::vector<BarGroup> groups, const std::string& svg_path,
                    const std::string& csv_path) {
    if (groups.empty()) {
        throw Error(Error::Kind::Validation, "bar chart needs at least one group");
    }
    std::sort(groups.begin(), groups.end(), [](const BarGroup& a, const BarGroup& b) {
        if (a.environment != b.environment) return a.environment < b.environment;
        return a.algorithm < b.algorithm;
    });

    std::map<std::string, std::size_t> color_of;
    for (const BarGroup& g : groups) color_of.emplace(g.algorithm, color_of.size());

    double lo = 0.0, hi = 0.0;
    for (const BarGroup& g : groups) {
        lo = std::min({lo, g.value, g.interval.lower});
        hi = std::max({hi, g.value, g.interval.upper});
    }
    if (hi <= lo) hi = lo + 1.0;

    const double bar_w = 26.0, gap = 10.0, left = 60.0, top = 24.0, bottom = 70.0;
    const double height = 360.0;
    const double width = left + static_cast<double>(groups.size()) * (bar_w + gap) + gap + 20.0;
    const Scale y{lo, hi, height - bottom, top};

    std::ostringstream s;
    s << svg_header(width, height);
    value_axis(s, y, left, width - 10.0);

    double x = left + gap;
    const double base = y(std::max(0.0, lo));
    for (const BarGroup& g : groups) {
        const double py = y(g.value);
        const double bar_top = std::min(py, base);
        const double bar_h = std::abs(base - py);
        s << "<rect class=\"bar\" x=\"" << num(x) << "\" y=\"" << num(bar_top) << "\" width=\""
          << num(bar_w) << "\" height=\"" << num(bar_h) << "\" fill=\""
          << kPalette[color_of[g.algorithm] % 8] << "\"/>\n";
        const double cx = x + bar_w / 2.0;
        s << "<line class=\"errorbar\" x1=\"" << num(cx) << "\" y1=\"" << num(y(g.interval.lower))
          << "\" x2=\"" << num(cx) << "\" y2=\"" << num(y(g.interval.upper))
          << "\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
        s << "<text x=\"" << num(cx) << "\" y=\"" << num(height - bottom + 12)
          << "\" font-size=\"9\" text-anchor=\"end\" font-family=\"sans-serif\" transform=\"rotate(-45 "
          << num(cx) << " " << num(height - bottom + 12) << ")\">" << g.environment << "/"
          << g.algorithm << "</text>\n";
        x += bar_w + gap;
    }
    s << "</svg>\n";
    write_file_atomic(svg_path, s.str());

    std::ostringstream csv;
    csv << "label,value,lower,upper\n";
    for (const BarGroup& g : groups) {
        csv << g.environment << "/" << g.algorithm << "," << csv_num(g.value) << ","
            << csv_num(g.interval.lower) << "," << csv_num(g.interval.upper) << "\n";
    }
    write_file_atomic(csv_path, csv.str());
}

void emit_sensitivity_curve(const std::map<std::string, std::vector<SensitivityPoint>>& series,
                            const std::string& svg_path, const std::string& csv_path) {
    if (series.empty()) {
        throw Error(Error::Kind::Validation, "sensitivity chart needs at least one series");
    }
    bool log_scale = true;
    double x_lo = 0.0, x_hi = 0.0, y_lo = 0.0, y_hi = 0.0;
    bool first = true;
    for (const auto& [env, points] : series) {
        if (points.size() < 2) {
            throw Error(Error::Kind::Validation,
                        "sensitivity series for '" + env + "' needs at least 2 points");
        }
        for (const SensitivityPoint& p : points) {
            if (!std::isfinite(p.x)) {
                throw Error(Error::Kind::Validation, "non-finite hyperparameter value");
            }
            if (p.x <= 0.0) log_scale = false;
            if (first) {
                x_lo = x_hi = p.x;
                y_lo = p.interval.lower;
                y_hi = p.interval.upper;
                first = false;
            }
            x_lo = std::min(x_lo, p.x);
            x_hi = std::max(x_hi, p.x);
            y_lo = std::min({y_lo, p.mean, p.interval.lower});
            y_hi = std::max({y_hi, p.mean, p.interval.upper});
        }
    }
    if (log_scale && x_hi / x_lo < 16.0) log_scale = false;
    if (x_hi <= x_lo) x_hi = x_lo + 1.0;
    if (y_hi <= y_lo) y_hi = y_lo + 1.0;

    auto xval = [&](double v) { return log_scale ? std::log2(v) : v; };
    const double width = 560.0, height = 360.0;
    const Scale sx{xval(x_lo), xval(x_hi), 70.0, width - 20.0};
    const Scale sy{y_lo, y_hi, height - 50.0, 20.0};

    std::ostringstream s;
    s << svg_header(width, height);
    value_axis(s, sy, 70.0, width - 20.0);

    // x tick labels at each distinct point; powers of two get 2^k labels.
    std::set<double> xs;
    for (const auto& [env, points] : series) {
        for (const SensitivityPoint& p : points) xs.insert(p.x);
    }
    for (double v : xs) {
        const double px = sx(xval(v));
        std::string label;
        const double l2 = std::log2(v);
        if (log_scale && v > 0.0 && l2 == std::round(l2)) {
            label = "2^" + std::to_string(static_cast<long long>(l2));
        } else {
            label = csv_num(v);
        }
        s << "<line x1=\"" << num(px) << "\" y1=\"" << num(height - 50.0) << "\" x2=\"" << num(px)
          << "\" y2=\"" << num(height - 46.0) << "\" stroke=\"black\"/>\n"
          << "<text x=\"" << num(px) << "\" y=\"" << num(height - 34.0)
          << "\" font-size=\"9\" text-anchor=\"middle\" font-family=\"sans-serif\">" << label
          << "</text>\n";
    }

    std::size_t color = 0;
    for (const auto& [env, points] : series) {
        std::vector<SensitivityPoint> sorted = points;
        std::sort(sorted.begin(), sorted.end(),
                  [](const SensitivityPoint& a, const SensitivityPoint& b) { return a.x < b.x; });
        std::ostringstream poly;
        for (const SensitivityPoint& p : sorted) {
            poly << num(sx(xval(p.x))) << "," << num(sy(p.mean)) << " ";
        }
        const char* stroke = kPalette[color % 8];
        s << "<polyline class=\"series\" fill=\"none\" stroke=\"" << stroke
          << "\" stroke-width=\"1.5\" points=\"" << poly.str() << "\"/>\n";
        for (const SensitivityPoint& p : sorted) {
            const double px = sx(xval(p.x));
            s << "<line class=\"errorbar\" x1=\"" << num(px) << "\" y1=\""
              << num(sy(p.interval.lower)) << "\" x2=\"" << num(px) << "\" y2=\""
              << num(sy(p.interval.upper)) << "\" stroke=\"" << stroke
              << "\" stroke-width=\"1\"/>\n";
        }
        s << "<text x=\"" << num(width - 24.0) << "\" y=\""
          << num(24.0 + 12.0 * static_cast<double>(color)) << "\" font-size=\"10\" fill=\""
          << stroke << "\" text-anchor=\"end\" font-family=\"sans-serif\">" << env << "</text>\n";
        ++color;
    }
    s << "</svg>\n";
    write_file_atomic(svg_path, s.str());

    std::ostringstream csv;
    csv << "environment,x,mean,lower,upper\n";
    for (const auto& [env, points] : series) {
        std::vector<SensitivityPoint> sorted = points;
        std::sort(sorted.begin(), sorted.end(),
                  [](const SensitivityPoint& a, const SensitivityPoint& b) { return a.x < b.x; });
        for (const SensitivityPoint& p : sorted) {
            csv << env << "," << csv_num(p.x) << "," << csv_num(p.mean) << ","
                << csv_num(p.interval.lower) << "," << csv_num(p.interval.upper) << "\n";
        }
    }
    write_file_atomic(csv_path, csv.str());
}

void emit_density_chart(const DensityCurve& curve, const std::string& title,
                        const std::string& svg_path, const std::string& csv_path) {
    if (curve.xs.empty() || curve.xs.size() != curve.ys.size()) {
        throw Error(Error::Kind::Validation, "density curve is empty or inconsistent");
    }
    const double width = 560.0, height = 360.0;
    const double y_hi = *std::max_element(curve.ys.begin(), curve.ys.end());
    const Scale sx{curve.xs.front(), curve.xs.back(), 70.0, width - 20.0};
    const Scale sy{0.0, y_hi > 0.0 ? y_hi : 1.0, height - 50.0, 20.0};

    std::ostringstream s;
    s << svg_header(width, height);
    value_axis(s, sy, 70.0, width - 20.0);
    s << "<text x=\"" << num(width / 2.0)
      << "\" y=\"14\" font-size=\"11\" text-anchor=\"middle\" font-family=\"sans-serif\">" << title
      << "</text>\n";
    std::ostringstream poly;
    for (std::size_t i = 0; i < curve.xs.size(); ++i) {
        poly << num(sx(curve.xs[i])) << "," << num(sy(curve.ys[i])) << " ";
    }
    s << "<polyline class=\"density\" fill=\"none\" stroke=\"" << kPalette[0]
      << "\" stroke-width=\"1.5\" points=\"" << poly.str() << "\"/>\n</svg>\n";
    write_file_atomic(svg_path, s.str());

    std::ostringstream csv;
    csv << "x,y\n";
    for (std::size_t i = 0; i < curve.xs.size(); ++i) {
        csv << csv_num(curve.xs[i]) << "," << csv_num(curve.ys[i]) << "\n";
    }
    write_file_atomic(csv_path, csv.str());
}

}  // namespace chs
