#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "chs/rng.hpp"

namespace chs {

struct Interval {
    double lower = 0.0;
    double upper = 0.0;
    double level = 0.0;
};

struct DensityCurve {
    std::vector<double> xs;  // evenly spaced grid
    std::vector<double> ys;  // non-negative densities
    double bandwidth = 0.0;
};

struct RankingComparison {
    bool exact_match = false;
    std::size_t pairwise_inversions = 0;
};

double mean(const std::vector<double>& values);
double sample_sd(const std::vector<double>& values);

// Empirical quantile with linear interpolation between order statistics
// (position q*(n-1)); input must be sorted ascending.
double quantile_sorted(const std::vector<double>& sorted, double q);

// Percentile bootstrap CI of the mean: resample means n_boot times and take
// the (1-level)/2 and (1+level)/2 quantiles.
Interval percentile_ci(const std::vector<double>& samples, double level, int n_boot,
                       RngStream& rng);

// Direct percentile interval of an already-resampled statistic (e.g. the
// per-experiment scores of a simulation study, which are themselves the
// bootstrap replicates).
Interval percentile_interval(std::vector<double> values, double level);

// Gaussian kernel density on an even grid spanning [min - 3h, max + 3h].
// Default bandwidth is Silverman's rule h = 0.9*min(sd, IQR/1.34)*n^(-1/5);
// degenerate spread falls back to h = max(|mean|, 1)*1e-3.
DensityCurve kde(const std::vector<double>& samples, std::optional<double> bandwidth,
                 std::size_t grid_size);

double silverman_bandwidth(const std::vector<double>& samples);

// Exact-match flag plus the number of discordant pairs between two rankings
// of the same id set.
RankingComparison compare_rankings(const std::vector<std::string>& a,
                                   const std::vector<std::string>& b);

}  // namespace chs
