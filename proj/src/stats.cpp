#include "chs/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "chs/error.hpp"

namespace chs {

double mean(const std::vector<double>& values) {
    if (values.empty()) throw Error(Error::Kind::Validation, "mean of empty list");
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

double sample_sd(const std::vector<double>& values) {
    if (values.size() < 2) throw Error(Error::Kind::Validation, "sd needs at least 2 samples");
    const double m = mean(values);
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) throw Error(Error::Kind::Validation, "quantile of empty list");
    if (q <= 0.0) return sorted.front();
    if (q >= 1.0) return sorted.back();
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

Interval percentile_ci(const std::vector<double>& samples, double level, int n_boot,
                       RngStream& rng) {
    if (samples.size() < 2) {
        throw Error(Error::Kind::Validation, "percentile_ci needs at least 2 samples");
    }
    if (!(level > 0.0 && level < 1.0)) {
        throw Error(Error::Kind::Validation, "confidence level must be in (0, 1)");
    }
    if (n_boot < 1) throw Error(Error::Kind::Validation, "n_boot must be positive");

    const std::size_t n = samples.size();
    std::vector<double> means(static_cast<std::size_t>(n_boot));
    for (auto& m : means) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += samples[rng.next_index(n)];
        m = sum / static_cast<double>(n);
    }
    std::sort(means.begin(), means.end());
    return Interval{quantile_sorted(means, (1.0 - level) / 2.0),
                    quantile_sorted(means, (1.0 + level) / 2.0), level};
}

Interval percentile_interval(std::vector<double> values, double level) {
    if (values.empty()) throw Error(Error::Kind::Validation, "percentile interval of empty list");
    if (!(level > 0.0 && level < 1.0)) {
        throw Error(Error::Kind::Validation, "confidence level must be in (0, 1)");
    }
    std::sort(values.begin(), values.end());
    return Interval{quantile_sorted(values, (1.0 - level) / 2.0),
                    quantile_sorted(values, (1.0 + level) / 2.0), level};
}

double silverman_bandwidth(const std::vector<double>& samples) {
    if (samples.empty()) throw Error(Error::Kind::Validation, "bandwidth of empty sample");
    const double m = mean(samples);
    double h = 0.0;
    if (samples.size() >= 2) {
        std::vector<double> sorted = samples;
        std::sort(sorted.begin(), sorted.end());
        const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
        const double spread = std::min(sample_sd(samples), iqr / 1.34);
        h = 0.9 * spread * std::pow(static_cast<double>(samples.size()), -0.2);
    }
    if (!(h > 0.0) || !std::isfinite(h)) h = std::max(std::abs(m), 1.0) * 1e-3;
    return h;
}

DensityCurve kde(const std::vector<double>& samples, std::optional<double> bandwidth,
                 std::size_t grid_size) {
    if (samples.empty()) throw Error(Error::Kind::Validation, "kde of empty sample");
    if (grid_size < 2) throw Error(Error::Kind::Validation, "kde grid needs at least 2 points");
    if (bandwidth && !(*bandwidth > 0.0)) {
        throw Error(Error::Kind::Validation, "kde bandwidth must be positive");
    }
    const double h = bandwidth ? *bandwidth : silverman_bandwidth(samples);

    const auto [min_it, max_it] = std::minmax_element(samples.begin(), samples.end());
    const double lo = *min_it - 3.0 * h;
    const double hi = *max_it + 3.0 * h;
    const double step = (hi - lo) / static_cast<double>(grid_size - 1);

    DensityCurve curve;
    curve.bandwidth = h;
    curve.xs.resize(grid_size);
    curve.ys.resize(grid_size);
    const double norm = 1.0 / (static_cast<double>(samples.size()) * h *
                               std::sqrt(6.283185307179586476925286766559));
    for (std::size_t i = 0; i < grid_size; ++i) {
        const double x = lo + step * static_cast<double>(i);
        double density = 0.0;
        for (double s : samples) {
            const double z = (x - s) / h;
            density += std::exp(-0.5 * z * z);
        }
        curve.xs[i] = x;
        curve.ys[i] = density * norm;
    }
    return curve;
}

RankingComparison compare_rankings(const std::vector<std::string>& a,
                                   const std::vector<std::string>& b) {
    if (a.size() != b.size()) {
        throw Error(Error::Kind::Validation, "rankings have different lengths");
    }
    std::map<std::string, std::size_t> pos_b;
    for (std::size_t i = 0; i < b.size(); ++i) {
        if (!pos_b.emplace(b[i], i).second) {
            throw Error(Error::Kind::Validation, "duplicate id '" + b[i] + "' in ranking");
        }
    }
    std::vector<std::size_t> mapped(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        auto it = pos_b.find(a[i]);
        if (it == pos_b.end()) {
            throw Error(Error::Kind::Validation, "rankings cover different id sets ('" + a[i] +
                                                     "' missing)");
        }
        mapped[i] = it->second;
    }
    std::size_t inversions = 0;
    for (std::size_t i = 0; i < mapped.size(); ++i) {
        for (std::size_t j = i + 1; j < mapped.size(); ++j) {
            if (mapped[i] > mapped[j]) ++inversions;
        }
    }
    return RankingComparison{a == b, inversions};
}

}  // namespace chs
