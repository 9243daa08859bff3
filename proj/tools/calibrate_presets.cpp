// Recomputes the calibration constants documented in the synthetic presets
// (synthetic.cpp). Run after changing any preset distribution and copy the
// printed values into the preset's calibration map.

#include <cstdio>
#include <iostream>

#include "chs/simulate.hpp"
#include "chs/synthetic.hpp"

using namespace chs;

namespace {

int g_workers = 2;

void show(const char* name, double value) { std::printf("  %-46s %.6f\n", name, value); }

void truth_summary(const Dataset& ds, const SyntheticStudySpec& spec) {
    const GroundTruth truth = ground_truth(ds, Procedure::Chs);
    std::printf("  ground truth (chs): ");
    for (const auto& algo : truth.overall_ranking) {
        std::printf("%s(%.4f) ", algo.c_str(), truth.overall.at(algo));
    }
    std::printf("\n");
    for (const auto& [algo, sel] : truth.selections) {
        std::printf("    %s -> %s\n", algo.c_str(),
                    sel.setting_for(ds.environments().front()).id().c_str());
    }
    // Empirical vs analytic normalized means of the chosen cells.
    for (const auto& [algo, sel] : truth.selections) {
        for (const auto& env : ds.environments()) {
            const CellKey key{algo, env, sel.setting_for(env).id()};
            const double analytic = analytic_normalized_mean(spec, key);
            const double empirical = truth.eval_scores.at(algo).at(env);
            if (std::abs(analytic - empirical) > 0.05) {
                std::printf("    WARN %s/%s: analytic %.4f vs empirical %.4f\n", algo.c_str(),
                            env.c_str(), analytic, empirical);
            }
        }
    }
}

void calibrate_bimodal() {
    const SyntheticStudySpec spec = preset_instance("bimodal-overlap");
    const Dataset ds = generate_dataset(spec);
    std::printf("[bimodal-overlap]\n");
    truth_summary(ds, spec);
    for (int n_tune : {3, 10, 30, 100}) {
        ExperimentConfig cfg;
        cfg.procedure = Procedure::Chs;
        cfg.n_tune = n_tune;
        cfg.n_eval = 50;
        cfg.n_experiments = 5000;
        cfg.master_seed = 71;
        const StudyReport report = run_study(ds, cfg, g_workers);
        char name[64];
        std::snprintf(name, sizeof(name), "failure_rate_n%d", n_tune);
        show(name, report.failure_rate_overall);
    }
}

void calibrate_dominance() {
    const SyntheticStudySpec spec = preset_instance("dominance");
    const Dataset ds = generate_dataset(spec);
    std::printf("[dominance]\n");
    truth_summary(ds, spec);
    ExperimentConfig cfg;
    cfg.n_tune = 3;
    cfg.n_eval = 50;
    cfg.n_experiments = 10000;
    cfg.master_seed = 72;
    const StudyReport report = run_study(ds, cfg, g_workers);
    show("failure_rate_n3", report.failure_rate_overall);
}

void calibrate_heterogeneous() {
    const SyntheticStudySpec spec = preset_instance("heterogeneous");
    const Dataset ds = generate_dataset(spec);
    std::printf("[heterogeneous]\n");
    truth_summary(ds, spec);

    const CellKey specialist{"shifty", "env_6", "alpha=0.9"};
    const CellKey generalist{"shifty", "env_6", "alpha=0.1"};
    const double analytic_gap =
        analytic_normalized_mean(spec, specialist) - analytic_normalized_mean(spec, generalist);
    show("analytic_drop_env_6", analytic_gap);

    const DropReport drop = performance_drop(ds, 3, 2000, 73, 0.95,
                                             PoolingPolicy::ProvidedSubsample, g_workers);
    show("measured_drop_env_6_n3", drop.drops.at("shifty").at("env_6").mean);

    ExperimentConfig full;
    full.n_tune = 100;
    full.n_eval = 100;
    full.n_experiments = 3000;
    full.master_seed = 74;
    const StudyReport full_report = run_study(ds, full, g_workers);
    const Interval full_ci = full_report.overall_summary.at("shifty").ci;
    show("full_chs_ci_width_shifty", full_ci.upper - full_ci.lower);
    show("full_chs_failure", full_report.failure_rate_overall);

    for (int size : {2, 3, 4}) {
        ExperimentConfig cfg = full;
        cfg.procedure = Procedure::SubsetChs;
        cfg.subset_size = size;
        const StudyReport report = subset_study(ds, cfg, g_workers);
        char name[64];
        std::snprintf(name, sizeof(name), "subset%d_failure", size);
        show(name, report.failure_rate_overall);
        const Interval ci = report.overall_summary.at("shifty").ci;
        std::snprintf(name, sizeof(name), "subset%d_ci_width_shifty", size);
        show(name, ci.upper - ci.lower);
    }
}

void calibrate_many_settings() {
    const SyntheticStudySpec spec = preset_instance("many-settings");
    const Dataset ds = generate_dataset(spec);
    std::printf("[many-settings]\n");
    truth_summary(ds, spec);
    for (int n_tune : {3, 100}) {
        for (Procedure procedure : {Procedure::PerEnv, Procedure::Chs}) {
            const BiasReport bias = estimate_bias(ds, procedure, n_tune, 2000, 75,
                                                  PoolingPolicy::ProvidedSubsample, g_workers);
            char name[64];
            std::snprintf(name, sizeof(name), "bias_%s_n%d", to_string(procedure), n_tune);
            show(name, bias.algorithms.at("alg").overall);
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    if (argc > 1) g_workers = std::atoi(argv[1]);
    calibrate_dominance();
    calibrate_bimodal();
    calibrate_heterogeneous();
    calibrate_many_settings();
    return 0;
}
