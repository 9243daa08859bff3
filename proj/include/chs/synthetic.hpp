#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "chs/dataset.hpp"

namespace chs {

// Gaussian mixture over run scores; weights sum to 1.
struct MixtureComponent {
    double weight = 1.0;
    double mean = 0.0;
    double sd = 1.0;
};

struct MixtureSpec {
    std::vector<MixtureComponent> components;

    void validate() const;
};

// Complete description of a synthetic sweep: which cells exist and what
// distribution each one draws from. Means (and the large-sample limit of the
// normalized means) are known in closed form, so generated datasets act as
// ground-truth oracles for the meta-evaluation machinery.
struct SyntheticStudySpec {
    std::string name;
    std::vector<std::string> algorithms;
    std::vector<std::string> environments;
    std::map<std::string, std::vector<HyperparameterSetting>> settings_per_algorithm;
    std::map<CellKey, MixtureSpec> cell_distributions;
    int runs_per_cell = 1;
    std::uint64_t seed = 0;

    // Frozen constants from this instance's calibration run (see the
    // calibrate-presets tool), keyed by what they measure.
    std::map<std::string, double> calibration;

    void validate() const;
    const MixtureSpec& distribution(const CellKey& key) const;
};

double analytic_mean(const MixtureSpec& spec);
double analytic_variance(const MixtureSpec& spec);

// P(Y < X) for two independent mixture draws; closed form over component
// pairs.
double probability_less(const MixtureSpec& y, const MixtureSpec& x);

// Large-sample limit of the normalized cell mean: the average over the
// environment's cells of P(other cell's draw < this cell's draw), assuming
// equal run counts per cell.
double analytic_normalized_mean(const SyntheticStudySpec& spec, const CellKey& key);

// Draws runs_per_cell i.i.d. scores for every cell from counter-derived
// per-cell streams; deterministic given spec.seed.
Dataset generate_dataset(const SyntheticStudySpec& spec);

// Named test instances: "dominance", "bimodal-overlap", "heterogeneous",
// "many-settings".
std::vector<SyntheticStudySpec> preset_instances();
const SyntheticStudySpec& preset_instance(const std::string& name);

}  // namespace chs
