#include "chs/serialize.hpp"

namespace chs {

using nlohmann::json;

json to_json(const HyperparameterSetting& setting) {
    json hypers = json::object();
    for (const auto& [name, value] : setting.entries()) {
        if (std::holds_alternative<double>(value)) {
            hypers[name] = std::get<double>(value);
        } else {
            hypers[name] = std::get<std::string>(value);
        }
    }
    return json{{"id", setting.id()}, {"hypers", hypers}};
}

json to_json(const Interval& interval) {
    return json{{"lower", interval.lower}, {"upper", interval.upper}, {"level", interval.level}};
}

json to_json(const SelectionResult& result) {
    json chosen = json::object();
    for (const auto& [env, setting] : result.chosen) chosen[env] = to_json(setting);
    return json{{"algorithm", result.algorithm},
                {"procedure", to_string(result.procedure)},
                {"chosen", chosen},
                {"aggregate_score", result.aggregate_score},
                {"per_env_scores", result.per_env_scores},
                {"tuning_envs", result.tuning_envs}};
}

json to_json(const ExperimentConfig& config) {
    json j{{"procedure", to_string(config.procedure)},
           {"n_tune", config.n_tune},
           {"n_eval", config.n_eval},
           {"n_experiments", config.n_experiments},
           {"master_seed", config.master_seed},
           {"pooling_policy", to_string(config.pooling_policy)},
           {"confidence_level", config.confidence_level}};
    if (config.subset_size) j["subset_size"] = *config.subset_size;
    return j;
}

json to_json(const GroundTruth& truth) {
    json selections = json::object();
    for (const auto& [algo, sel] : truth.selections) selections[algo] = to_json(sel);
    return json{{"procedure", to_string(truth.procedure)},
                {"selections", selections},
                {"eval_scores", truth.eval_scores},
                {"overall", truth.overall},
                {"overall_ranking", truth.overall_ranking},
                {"per_env_ranking", truth.per_env_ranking}};
}

json to_json(const ScoreSummary& summary) {
    return json{{"mean", summary.mean}, {"ci", to_json(summary.ci)}};
}

json to_json(const StudyReport& report) {
    json algorithms = json::object();
    for (const auto& [algo, summary] : report.overall_summary) {
        json per_env = json::object();
        for (const auto& [env, s] : report.per_env_summary.at(algo)) per_env[env] = to_json(s);
        algorithms[algo] = json{{"overall", to_json(summary)}, {"per_env", per_env}};
    }
    json j{{"config", to_json(report.config)},
           {"ground_truth", to_json(report.truth)},
           {"algorithms", algorithms},
           {"ordering_frequency", report.ordering_frequency},
           {"failure_rate",
            json{{"overall", report.failure_rate_overall},
                 {"per_env", report.failure_rate_per_env}}},
           {"pairwise_inversions",
            json{{"overall_mean", report.mean_inversions_overall},
                 {"per_env_mean", report.mean_inversions_per_env}}}};
    if (report.config.procedure == Procedure::SubsetChs) j["subsets"] = report.subsets;
    return j;
}

json to_json(const BiasReport& report) {
    json algorithms = json::object();
    for (const auto& [algo, entry] : report.algorithms) {
        algorithms[algo] = json{{"per_env", entry.per_env},
                                {"overall", entry.overall},
                                {"per_env_raw", entry.per_env_raw}};
    }
    return json{{"procedure", to_string(report.procedure)},
                {"n_tune", report.n_tune},
                {"n_reps", report.n_reps},
                {"master_seed", report.master_seed},
                {"algorithms", algorithms}};
}

json to_json(const DropReport& report) {
    json drops = json::object();
    for (const auto& [algo, envs] : report.drops) {
        json per_env = json::object();
        for (const auto& [env, summary] : envs) per_env[env] = to_json(summary);
        drops[algo] = per_env;
    }
    return json{{"n_tune", report.n_tune},
                {"n_reps", report.n_reps},
                {"master_seed", report.master_seed},
                {"confidence_level", report.confidence_level},
                {"drops", drops}};
}

}  // namespace chs
