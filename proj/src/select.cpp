#include "chs/select.hpp"

#include <algorithm>
#include <set>

#include "chs/error.hpp"
#include "chs/stats.hpp"

namespace chs {

const char* to_string(Procedure procedure) {
    switch (procedure) {
        case Procedure::Chs: return "chs";
        case Procedure::PerEnv: return "per-env";
        case Procedure::WorstCase: return "worst-case";
        case Procedure::SubsetChs: return "subset-chs";
    }
    return "?";
}

Procedure procedure_from_string(const std::string& name) {
    if (name == "chs") return Procedure::Chs;
    if (name == "per-env") return Procedure::PerEnv;
    if (name == "worst-case") return Procedure::WorstCase;
    if (name == "subset-chs") return Procedure::SubsetChs;
    throw Error(Error::Kind::Config,
                "unknown procedure '" + name +
                    "' (expected chs, per-env, worst-case or subset-chs)");
}

const HyperparameterSetting& SelectionResult::setting_for(const std::string& environment) const {
    auto it = chosen.find(environment);
    if (it == chosen.end()) {
        throw Error(Error::Kind::Validation,
                    "no chosen setting for environment '" + environment + "'");
    }
    return it->second;
}

namespace {

const std::vector<double>* cell_values(const Dataset& ds, const CellKey& key,
                                       const CellScores* scores_per_cell) {
    if (scores_per_cell == nullptr) return &ds.cell_scores(key);
    auto it = scores_per_cell->find(key);
    if (it == scores_per_cell->end()) {
        throw Error(Error::Kind::Validation, "missing cell " + key.to_string() + " in scores map");
    }
    ds.cell(key);  // validate the key against the dataset as well
    return &it->second;
}

std::vector<std::string> unique_sorted(std::vector<std::string> ids) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

// Per-environment normalized means of one setting.
std::map<std::string, double> env_means(const NormalizedView& view, const std::string& algorithm,
                                        const HyperparameterSetting& setting,
                                        const std::vector<std::string>& envs,
                                        const CellScores* scores_per_cell) {
    std::map<std::string, double> out;
    for (const std::string& env : envs) {
        const CellKey key{algorithm, env, setting.id()};
        out[env] = normalized_cell_mean(view, key, cell_values(view.source(), key, scores_per_cell));
    }
    return out;
}

}  // namespace

double score_setting(const NormalizedView& view, const std::string& algorithm,
                     const HyperparameterSetting& setting, const std::vector<std::string>& envs,
                     const CellScores* scores_per_cell) {
    const auto unique_envs = unique_sorted(envs);
    if (unique_envs.empty()) {
        throw Error(Error::Kind::Validation, "score_setting over an empty environment set");
    }
    double sum = 0.0;
    for (const auto& [env, value] :
         env_means(view, algorithm, setting, unique_envs, scores_per_cell)) {
        sum += value;
    }
    return sum / static_cast<double>(unique_envs.size());
}

namespace {

// Shared argmax skeleton for the cross-environment procedures. `aggregate`
// folds per-environment normalized means into the score being maximized.
template <typename Aggregate>
SelectionResult select_cross_env(const NormalizedView& view, const std::string& algorithm,
                                 const std::vector<std::string>& envs,
                                 const CellScores* scores_per_cell, Procedure procedure,
                                 Aggregate aggregate) {
    const auto& settings = view.source().settings(algorithm);
    if (settings.empty()) {
        throw Error(Error::Kind::Validation, "algorithm '" + algorithm + "' has no settings");
    }
    const HyperparameterSetting* best = nullptr;
    double best_score = 0.0;
    std::map<std::string, double> best_means;
    for (const HyperparameterSetting& setting : settings) {
        auto means = env_means(view, algorithm, setting, envs, scores_per_cell);
        const double score = aggregate(means);
        // Settings iterate in ascending id order, so strict improvement
        // implements the lexicographic tie rule.
        if (best == nullptr || score > best_score) {
            best = &setting;
            best_score = score;
            best_means = std::move(means);
        }
    }
    SelectionResult result;
    result.algorithm = algorithm;
    result.procedure = procedure;
    result.aggregate_score = best_score;
    result.per_env_scores = std::move(best_means);
    result.tuning_envs = envs;
    for (const std::string& env : view.source().environments()) {
        result.chosen.emplace(env, *best);
    }
    return result;
}

double mean_of_map(const std::map<std::string, double>& values) {
    double sum = 0.0;
    for (const auto& [k, v] : values) sum += v;
    return sum / static_cast<double>(values.size());
}

double min_of_map(const std::map<std::string, double>& values) {
    double m = values.begin()->second;
    for (const auto& [k, v] : values) m = std::min(m, v);
    return m;
}

}  // namespace

SelectionResult select_chs(const NormalizedView& view, const std::string& algorithm,
                           const CellScores* scores_per_cell) {
    return select_cross_env(view, algorithm, view.source().environments(), scores_per_cell,
                            Procedure::Chs, mean_of_map);
}

SelectionResult select_worst_case(const NormalizedView& view, const std::string& algorithm,
                                  const CellScores* scores_per_cell) {
    return select_cross_env(view, algorithm, view.source().environments(), scores_per_cell,
                            Procedure::WorstCase, min_of_map);
}

SelectionResult select_subset_chs(const NormalizedView& view, const std::string& algorithm,
                                  std::vector<std::string> tuning_envs,
                                  const CellScores* scores_per_cell) {
    auto envs = unique_sorted(std::move(tuning_envs));
    if (envs.empty()) {
        throw Error(Error::Kind::Validation, "subset-chs needs a non-empty environment subset");
    }
    const auto& all = view.source().environments();
    for (const std::string& env : envs) {
        if (!std::binary_search(all.begin(), all.end(), env)) {
            throw Error(Error::Kind::Validation,
                        "tuning environment '" + env + "' is not in the dataset");
        }
    }
    return select_cross_env(view, algorithm, envs, scores_per_cell, Procedure::SubsetChs,
                            mean_of_map);
}

SelectionResult select_per_env(const Dataset& dataset, const std::string& algorithm,
                               const std::string& environment,
                               const CellScores* scores_per_cell) {
    const auto& settings = dataset.settings(algorithm);
    if (settings.empty()) {
        throw Error(Error::Kind::Validation, "algorithm '" + algorithm + "' has no settings");
    }
    const HyperparameterSetting* best = nullptr;
    double best_score = 0.0;
    for (const HyperparameterSetting& setting : settings) {
        const CellKey key{algorithm, environment, setting.id()};
        const std::vector<double>* values = cell_values(dataset, key, scores_per_cell);
        if (values->empty()) {
            throw Error(Error::Kind::Validation, "empty score list for cell " + key.to_string());
        }
        const double score = mean(*values);
        if (best == nullptr || score > best_score) {
            best = &setting;
            best_score = score;
        }
    }
    SelectionResult result;
    result.algorithm = algorithm;
    result.procedure = Procedure::PerEnv;
    result.aggregate_score = best_score;
    result.per_env_scores[environment] = best_score;
    result.tuning_envs = {environment};
    result.chosen.emplace(environment, *best);
    return result;
}

SelectionResult select_per_env_all(const Dataset& dataset, const std::string& algorithm,
                                   const CellScores* scores_per_cell) {
    SelectionResult merged;
    merged.algorithm = algorithm;
    merged.procedure = Procedure::PerEnv;
    double sum = 0.0;
    for (const std::string& env : dataset.environments()) {
        SelectionResult r = select_per_env(dataset, algorithm, env, scores_per_cell);
        merged.chosen.emplace(env, r.setting_for(env));
        merged.per_env_scores[env] = r.aggregate_score;
        merged.tuning_envs.push_back(env);
        sum += r.aggregate_score;
    }
    merged.aggregate_score = sum / static_cast<double>(dataset.environments().size());
    return merged;
}

}  // namespace chs
