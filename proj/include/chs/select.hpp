#pragma once

#include <map>
#include <string>
#include <vector>

#include "chs/normalize.hpp"

namespace chs {

enum class Procedure { Chs, PerEnv, WorstCase, SubsetChs };

const char* to_string(Procedure procedure);
Procedure procedure_from_string(const std::string& name);

// Outcome of one hyperparameter-selection procedure for one algorithm.
// Cross-environment procedures map every environment to the same setting;
// per-environment tuning can differ per environment. Ties are always broken
// toward the lexicographically smallest canonical setting id.
struct SelectionResult {
    std::string algorithm;
    Procedure procedure = Procedure::Chs;
    std::map<std::string, HyperparameterSetting> chosen;  // environment -> setting
    double aggregate_score = 0.0;
    std::map<std::string, double> per_env_scores;
    std::vector<std::string> tuning_envs;  // sorted

    const HyperparameterSetting& setting_for(const std::string& environment) const;
};

// Mean over `envs` of the normalized cell mean of (algorithm, env, setting).
// `scores_per_cell` supplies the raw scores per cell (tuning subsample or
// full data); null means the cells' stored scores.
double score_setting(const NormalizedView& view, const std::string& algorithm,
                     const HyperparameterSetting& setting, const std::vector<std::string>& envs,
                     const CellScores* scores_per_cell);

// argmax over the algorithm's settings of score_setting across all
// environments of the source dataset.
SelectionResult select_chs(const NormalizedView& view, const std::string& algorithm,
                           const CellScores* scores_per_cell);

// Conventional baseline: argmax of the mean raw score in one environment.
SelectionResult select_per_env(const Dataset& dataset, const std::string& algorithm,
                               const std::string& environment,
                               const CellScores* scores_per_cell);

// select_per_env applied to every environment, merged into one result whose
// chosen map can differ per environment. aggregate_score is the mean of the
// per-environment raw means (informational only).
SelectionResult select_per_env_all(const Dataset& dataset, const std::string& algorithm,
                                   const CellScores* scores_per_cell);

// argmax over settings of the minimum normalized cell mean across
// environments.
SelectionResult select_worst_case(const NormalizedView& view, const std::string& algorithm,
                                  const CellScores* scores_per_cell);

// select_chs restricted to a non-empty subset of the dataset's environments.
SelectionResult select_subset_chs(const NormalizedView& view, const std::string& algorithm,
                                  std::vector<std::string> tuning_envs,
                                  const CellScores* scores_per_cell);

}  // namespace chs
