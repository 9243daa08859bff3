#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chs/select.hpp"
#include "chs/stats.hpp"

namespace chs {

// One simulated-experiment study design. master_seed plus the experiment
// index fully determine every random draw, so studies are reproducible and
// independent of worker scheduling.
struct ExperimentConfig {
    Procedure procedure = Procedure::Chs;
    int n_tune = 3;
    int n_eval = 100;
    int n_experiments = 1000;
    std::optional<int> subset_size;  // required iff procedure == SubsetChs
    std::uint64_t master_seed = 0;
    PoolingPolicy pooling_policy = PoolingPolicy::ProvidedSubsample;
    double confidence_level = 0.95;

    void validate(std::size_t n_environments) const;
};

// Rankings computed from the complete dataset, treated as the source of
// truth a simulated experiment is judged against.
struct GroundTruth {
    Procedure procedure = Procedure::Chs;
    std::map<std::string, SelectionResult> selections;                 // per algorithm
    std::map<std::string, std::map<std::string, double>> eval_scores;  // algo -> env -> mean
    std::map<std::string, double> overall;                             // algo -> mean over envs
    std::vector<std::string> overall_ranking;
    std::map<std::string, std::vector<std::string>> per_env_ranking;
};

// One simulated application of the selection-plus-evaluation protocol.
struct ExperimentOutcome {
    std::map<std::string, SelectionResult> selections;
    std::map<std::string, std::map<std::string, double>> eval_scores;  // algo -> env
    std::map<std::string, double> overall;
    std::vector<std::string> ranking;  // descending by overall, ties by id
    std::vector<std::string> subset_envs;  // subset-chs only, sorted
};

struct ScoreSummary {
    double mean = 0.0;
    Interval ci;
};

struct StudyReport {
    ExperimentConfig config;
    GroundTruth truth;
    std::map<std::string, ScoreSummary> overall_summary;  // per algorithm
    std::map<std::string, std::map<std::string, ScoreSummary>> per_env_summary;
    std::map<std::string, double> ordering_frequency;  // "A>B>C" -> fraction
    double failure_rate_overall = 0.0;                 // ranking != truth
    std::map<std::string, double> failure_rate_per_env;
    double mean_inversions_overall = 0.0;
    std::map<std::string, double> mean_inversions_per_env;
    std::vector<std::vector<std::string>> subsets;  // per experiment, subset-chs only
};

// Per-algorithm selection bias of a procedure at a given tuning budget:
// mean over replicates of (full-data score of the true best setting minus
// full-data score of the setting picked from an n_tune subsample).
struct BiasReport {
    Procedure procedure = Procedure::Chs;
    int n_tune = 0;
    int n_reps = 0;
    std::uint64_t master_seed = 0;

    struct PerAlgorithm {
        std::map<std::string, double> per_env;      // normalized units
        double overall = 0.0;                       // mean over environments
        std::map<std::string, double> per_env_raw;  // raw score units
    };
    std::map<std::string, PerAlgorithm> algorithms;
};

// Normalized-score gap between per-environment optima and the single
// cross-environment setting, per (algorithm, environment).
struct DropReport {
    int n_tune = 0;
    int n_reps = 0;
    std::uint64_t master_seed = 0;
    double confidence_level = 0.95;
    std::map<std::string, std::map<std::string, ScoreSummary>> drops;  // algo -> env
};

GroundTruth ground_truth(const Dataset& dataset, Procedure procedure);

ExperimentOutcome simulate_experiment(const Dataset& dataset, const ExperimentConfig& config,
                                      std::int64_t experiment_index);

StudyReport run_study(const Dataset& dataset, const ExperimentConfig& config, int workers = 1);

// run_study with a fresh environment subset per experiment; requires
// procedure == SubsetChs and records the drawn subsets.
StudyReport subset_study(const Dataset& dataset, const ExperimentConfig& config, int workers = 1);

BiasReport estimate_bias(const Dataset& dataset, Procedure procedure, int n_tune, int n_reps,
                         std::uint64_t master_seed,
                         PoolingPolicy pooling_policy = PoolingPolicy::ProvidedSubsample,
                         int workers = 1);

DropReport performance_drop(const Dataset& dataset, int n_tune, int n_reps,
                            std::uint64_t master_seed, double confidence_level = 0.95,
                            PoolingPolicy pooling_policy = PoolingPolicy::ProvidedSubsample,
                            int workers = 1);

// Algorithms sorted by score descending, ties by id ascending.
std::vector<std::string> rank_by_score(const std::map<std::string, double>& scores);

}  // namespace chs
