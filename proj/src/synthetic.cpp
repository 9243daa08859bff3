#include "chs/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "chs/error.hpp"

namespace chs {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / 1.4142135623730950488); }

}  // namespace

void MixtureSpec::validate() const {
    if (components.empty()) {
        throw Error(Error::Kind::Validation, "mixture has no components");
    }
    double total = 0.0;
    for (const MixtureComponent& c : components) {
        if (!(c.weight > 0.0 && c.weight <= 1.0)) {
            throw Error(Error::Kind::Validation, "mixture weight must be in (0, 1]");
        }
        if (!(c.sd > 0.0)) throw Error(Error::Kind::Validation, "mixture sd must be positive");
        if (!std::isfinite(c.mean)) {
            throw Error(Error::Kind::Validation, "mixture mean must be finite");
        }
        total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw Error(Error::Kind::Validation, "mixture weights must sum to 1");
    }
}

void SyntheticStudySpec::validate() const {
    if (algorithms.empty() || environments.empty()) {
        throw Error(Error::Kind::Validation, "spec needs algorithms and environments");
    }
    if (runs_per_cell < 1) {
        throw Error(Error::Kind::Validation, "runs_per_cell must be positive");
    }
    std::size_t expected = 0;
    for (const std::string& algo : algorithms) {
        auto it = settings_per_algorithm.find(algo);
        if (it == settings_per_algorithm.end() || it->second.empty()) {
            throw Error(Error::Kind::Validation, "no settings for algorithm '" + algo + "'");
        }
        expected += it->second.size() * environments.size();
        for (const std::string& env : environments) {
            for (const HyperparameterSetting& setting : it->second) {
                const CellKey key{algo, env, setting.id()};
                auto cell = cell_distributions.find(key);
                if (cell == cell_distributions.end()) {
                    throw Error(Error::Kind::Validation,
                                "missing distribution for cell " + key.to_string());
                }
                cell->second.validate();
            }
        }
    }
    if (cell_distributions.size() != expected) {
        throw Error(Error::Kind::Validation, "spec has distributions for unknown cells");
    }
}

const MixtureSpec& SyntheticStudySpec::distribution(const CellKey& key) const {
    auto it = cell_distributions.find(key);
    if (it == cell_distributions.end()) {
        throw Error(Error::Kind::Validation, "no distribution for cell " + key.to_string());
    }
    return it->second;
}

double analytic_mean(const MixtureSpec& spec) {
    double m = 0.0;
    for (const MixtureComponent& c : spec.components) m += c.weight * c.mean;
    return m;
}

double analytic_variance(const MixtureSpec& spec) {
    const double m = analytic_mean(spec);
    double v = 0.0;
    for (const MixtureComponent& c : spec.components) {
        v += c.weight * (c.sd * c.sd + c.mean * c.mean);
    }
    return v - m * m;
}

double probability_less(const MixtureSpec& y, const MixtureSpec& x) {
    double p = 0.0;
    for (const MixtureComponent& cy : y.components) {
        for (const MixtureComponent& cx : x.components) {
            const double z = (cx.mean - cy.mean) / std::sqrt(cx.sd * cx.sd + cy.sd * cy.sd);
            p += cy.weight * cx.weight * normal_cdf(z);
        }
    }
    return p;
}

double analytic_normalized_mean(const SyntheticStudySpec& spec, const CellKey& key) {
    const MixtureSpec& x = spec.distribution(key);
    double sum = 0.0;
    std::size_t cells = 0;
    for (const auto& [other, dist] : spec.cell_distributions) {
        if (other.environment != key.environment) continue;
        sum += probability_less(dist, x);
        ++cells;
    }
    return sum / static_cast<double>(cells);
}

Dataset generate_dataset(const SyntheticStudySpec& spec) {
    spec.validate();

    // Cells in canonical key order so per-cell streams are stable.
    std::vector<const std::pair<const CellKey, MixtureSpec>*> cells;
    cells.reserve(spec.cell_distributions.size());
    for (const auto& entry : spec.cell_distributions) cells.push_back(&entry);

    DatasetBuilder builder;
    for (std::size_t ordinal = 0; ordinal < cells.size(); ++ordinal) {
        const CellKey& key = cells[ordinal]->first;
        const MixtureSpec& dist = cells[ordinal]->second;
        RngStream rng = make_stream(spec.seed, rng_tag::kGenerate, ordinal, 0);
        std::vector<double> scores(static_cast<std::size_t>(spec.runs_per_cell));
        for (double& s : scores) {
            const double u = rng.next_double();
            double cum = 0.0;
            const MixtureComponent* picked = &dist.components.back();
            for (const MixtureComponent& c : dist.components) {
                cum += c.weight;
                if (u < cum) {
                    picked = &c;
                    break;
                }
            }
            s = picked->mean + picked->sd * rng.next_normal();
        }
        const HyperparameterSetting& setting =
            [&]() -> const HyperparameterSetting& {
            for (const HyperparameterSetting& s : spec.settings_per_algorithm.at(key.algorithm)) {
                if (s.id() == key.setting_id) return s;
            }
            throw Error(Error::Kind::Internal, "setting not found for " + key.to_string());
        }();
        builder.add_cell(key.algorithm, key.environment, setting, std::move(scores));
    }
    return builder.finish();
}

namespace {

HyperparameterSetting alpha_setting(double value) {
    return HyperparameterSetting({{"alpha", HyperValue{value}}});
}

MixtureSpec gaussian(double mean, double sd) { return MixtureSpec{{{1.0, mean, sd}}}; }

MixtureSpec bimodal(double w1, double m1, double sd1, double m2, double sd2) {
    return MixtureSpec{{{w1, m1, sd1}, {1.0 - w1, m2, sd2}}};
}

// One algorithm strictly better than the other in every cell by ~19 standard
// deviations; any sane pipeline ranks them correctly from any subsample.
SyntheticStudySpec make_dominance() {
    SyntheticStudySpec spec;
    spec.name = "dominance";
    spec.seed = 0x1001;
    spec.runs_per_cell = 1000;
    spec.algorithms = {"strong", "weak"};
    spec.environments = {"env_a", "env_b"};
    const auto lo = alpha_setting(0.1);
    const auto hi = alpha_setting(0.2);
    spec.settings_per_algorithm["strong"] = {lo, hi};
    spec.settings_per_algorithm["weak"] = {lo, hi};
    for (const std::string& env : spec.environments) {
        spec.cell_distributions[{"strong", env, lo.id()}] = gaussian(10.0, 0.5);
        spec.cell_distributions[{"strong", env, hi.id()}] = gaussian(9.5, 0.5);
        spec.cell_distributions[{"weak", env, lo.id()}] = gaussian(0.0, 0.5);
        spec.cell_distributions[{"weak", env, hi.id()}] = gaussian(-0.5, 0.5);
    }
    // calibrate-presets, 10k experiments, n_tune=3, n_eval=50, seed 72.
    spec.calibration["failure_rate_n3"] = 0.0;
    return spec;
}

// Two algorithms whose ordering is unstable under 3-run tuning: "spiky" has
// a strong setting with a failure mode (bimodal) and a trap setting whose
// tuning means often look better under few runs; "steady" sits between the
// two. Calibrated so the 3-run failure rate lands well inside (5%, 60%) and
// decays toward zero by 100 tuning runs.
SyntheticStudySpec make_bimodal_overlap() {
    SyntheticStudySpec spec;
    spec.name = "bimodal-overlap";
    spec.seed = 0x2002;
    spec.runs_per_cell = 1000;
    spec.algorithms = {"spiky", "steady"};
    spec.environments = {"env_a", "env_b"};
    const auto good = alpha_setting(0.01);
    const auto trap = alpha_setting(0.1);
    spec.settings_per_algorithm["spiky"] = {good, trap};
    spec.settings_per_algorithm["steady"] = {good, trap};
    double offset = 0.0;
    for (const std::string& env : spec.environments) {
        spec.cell_distributions[{"spiky", env, good.id()}] =
            bimodal(0.65, 100.0 + offset, 10.0, 0.0 + offset, 10.0);
        spec.cell_distributions[{"spiky", env, trap.id()}] =
            bimodal(0.5, 70.0 + offset, 10.0, 10.0 + offset, 10.0);
        spec.cell_distributions[{"steady", env, good.id()}] = gaussian(50.0 + offset, 5.0);
        spec.cell_distributions[{"steady", env, trap.id()}] = gaussian(49.0 + offset, 5.0);
        offset += 5.0;
    }
    // calibrate-presets, 5k experiments per point, n_eval=50, seed 71.
    spec.calibration["failure_rate_n3"] = 0.1314;
    spec.calibration["failure_rate_n10"] = 0.0426;
    spec.calibration["failure_rate_n30"] = 0.0022;
    spec.calibration["failure_rate_n100"] = 0.0002;
    return spec;
}

// Per-environment optima disagree: the generalist setting wins env_1..env_5,
// the specialist wins env_6 by a larger margin. The margins are sized so a
// cross-environment selection keeps the generalist for any tuning subset of
// three or more environments, while two-environment subsets containing env_6
// flip to the specialist.
SyntheticStudySpec make_heterogeneous() {
    SyntheticStudySpec spec;
    spec.name = "heterogeneous";
    spec.seed = 0x3003;
    spec.runs_per_cell = 1000;
    spec.algorithms = {"shifty", "steady"};
    spec.environments = {"env_1", "env_2", "env_3", "env_4", "env_5", "env_6"};
    const auto generalist = alpha_setting(0.1);
    const auto specialist = alpha_setting(0.9);
    spec.settings_per_algorithm["shifty"] = {generalist, specialist};
    spec.settings_per_algorithm["steady"] = {generalist, specialist};
    for (const std::string& env : spec.environments) {
        const bool sacrificed = env == "env_6";
        spec.cell_distributions[{"shifty", env, generalist.id()}] =
            gaussian(sacrificed ? 30.0 : 60.0, 5.0);
        spec.cell_distributions[{"shifty", env, specialist.id()}] =
            gaussian(sacrificed ? 70.0 : 44.0, 5.0);
        spec.cell_distributions[{"steady", env, generalist.id()}] = gaussian(50.0, 5.0);
        spec.cell_distributions[{"steady", env, specialist.id()}] = gaussian(49.5, 5.0);
    }
    // calibrate-presets: drop over 2k reps at n_tune=3 (seed 73); subset
    // studies over 3k experiments at n_tune=100 (seed 74).
    spec.calibration["analytic_drop_env_6"] = 0.747635;
    spec.calibration["measured_drop_env_6_n3"] = 0.747809;
    spec.calibration["full_chs_ci_width_shifty"] = 0.020255;
    spec.calibration["subset2_ci_width_shifty"] = 0.398201;
    spec.calibration["subset2_failure"] = 0.329;
    spec.calibration["subset3_failure"] = 0.0;
    spec.calibration["subset4_failure"] = 0.0;
    return spec;
}

// 48 settings with a single true optimum and otherwise identical cells.
// Selection from few runs maximizes over 47 equally-noisy rivals, so the
// selection bias is large for per-environment tuning and markedly smaller
// when tuning means are averaged across the six environments first.
SyntheticStudySpec make_many_settings() {
    SyntheticStudySpec spec;
    spec.name = "many-settings";
    spec.seed = 0x4004;
    spec.runs_per_cell = 1000;
    spec.algorithms = {"alg"};
    spec.environments = {"env_1", "env_2", "env_3", "env_4", "env_5", "env_6"};
    std::vector<HyperparameterSetting> settings;
    for (int j = 0; j < 48; ++j) settings.push_back(alpha_setting(static_cast<double>(j)));
    spec.settings_per_algorithm["alg"] = settings;
    double base = 10.0;
    for (const std::string& env : spec.environments) {
        for (int j = 0; j < 48; ++j) {
            spec.cell_distributions[{"alg", env, settings[static_cast<std::size_t>(j)].id()}] =
                gaussian(base + (j == 0 ? 0.8 : 0.0), 1.0);
        }
        base += 10.0;
    }
    // calibrate-presets, 2k reps each, seed 75.
    spec.calibration["bias_per_env_n3"] = 0.167494;
    spec.calibration["bias_chs_n3"] = 0.034135;
    spec.calibration["bias_per_env_n100"] = 0.0;
    spec.calibration["bias_chs_n100"] = 0.0;
    return spec;
}

}  // namespace

std::vector<SyntheticStudySpec> preset_instances() {
    return {make_dominance(), make_bimodal_overlap(), make_heterogeneous(), make_many_settings()};
}

const SyntheticStudySpec& preset_instance(const std::string& name) {
    static const std::vector<SyntheticStudySpec> presets = preset_instances();
    for (const SyntheticStudySpec& spec : presets) {
        if (spec.name == name) return spec;
    }
    std::string names;
    for (const SyntheticStudySpec& spec : presets) {
        if (!names.empty()) names += ", ";
        names += spec.name;
    }
    throw Error(Error::Kind::Config, "unknown preset '" + name + "' (available: " + names + ")");
}

}  // namespace chs
