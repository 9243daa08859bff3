#include "chs/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "chs/error.hpp"

namespace chs {

void ExperimentConfig::validate(std::size_t n_environments) const {
    if (n_tune < 1) throw Error(Error::Kind::Config, "n_tune must be positive");
    if (n_eval < 1) throw Error(Error::Kind::Config, "n_eval must be positive");
    if (n_experiments < 1) throw Error(Error::Kind::Config, "n_experiments must be positive");
    if (!(confidence_level > 0.0 && confidence_level < 1.0)) {
        throw Error(Error::Kind::Config, "confidence_level must be in (0, 1)");
    }
    if (procedure == Procedure::SubsetChs) {
        if (!subset_size) {
            throw Error(Error::Kind::Config, "subset-chs requires subset_size");
        }
        if (*subset_size < 1 || static_cast<std::size_t>(*subset_size) > n_environments) {
            throw Error(Error::Kind::Config,
                        "subset_size must be in [1, " + std::to_string(n_environments) + "]");
        }
    } else if (subset_size) {
        throw Error(Error::Kind::Config,
                    "subset_size is only valid with the subset-chs procedure");
    }
}

std::vector<std::string> rank_by_score(const std::map<std::string, double>& scores) {
    std::vector<std::string> ids;
    ids.reserve(scores.size());
    for (const auto& [id, s] : scores) ids.push_back(id);
    std::stable_sort(ids.begin(), ids.end(), [&](const std::string& a, const std::string& b) {
        const double sa = scores.at(a), sb = scores.at(b);
        if (sa != sb) return sa > sb;
        return a < b;
    });
    return ids;
}

namespace {

// Shared immutable state for one study: the source dataset plus full-data
// pools used by the evaluation phase.
struct StudyContext {
    const Dataset& dataset;
    NormalizedView full_view;

    explicit StudyContext(const Dataset& ds)
        : dataset(ds), full_view(build_pools(ds, PoolingPolicy::FullDataset)) {}
};

// Selection per the configured procedure over one set of per-cell scores.
std::map<std::string, SelectionResult> select_all(const StudyContext& ctx,
                                                  const NormalizedView& tuning_view,
                                                  Procedure procedure,
                                                  const std::vector<std::string>& subset_envs,
                                                  const CellScores* scores) {
    std::map<std::string, SelectionResult> out;
    for (const std::string& algo : ctx.dataset.algorithms()) {
        switch (procedure) {
            case Procedure::Chs:
                out.emplace(algo, select_chs(tuning_view, algo, scores));
                break;
            case Procedure::WorstCase:
                out.emplace(algo, select_worst_case(tuning_view, algo, scores));
                break;
            case Procedure::SubsetChs:
                out.emplace(algo, select_subset_chs(tuning_view, algo, subset_envs, scores));
                break;
            case Procedure::PerEnv:
                out.emplace(algo, select_per_env_all(ctx.dataset, algo, scores));
                break;
        }
    }
    return out;
}

ExperimentOutcome run_one(const StudyContext& ctx, const ExperimentConfig& cfg,
                          std::int64_t index) {
    const Dataset& ds = ctx.dataset;
    const auto& envs = ds.environments();

    // Tuning subsample: one counter-derived stream per cell, so results do
    // not depend on iteration or scheduling order.
    CellScores tune;
    for (const Dataset::Cell& cell : ds.cells()) {
        RngStream rng = make_stream(cfg.master_seed, static_cast<std::uint64_t>(index),
                                    ds.cell_ordinal(cell.key), rng_tag::kTune);
        tune[cell.key] =
            ds.subsample_cell(cell.key, static_cast<std::size_t>(cfg.n_tune), rng);
    }

    std::optional<NormalizedView> tuning_view;
    if (cfg.pooling_policy == PoolingPolicy::ProvidedSubsample) {
        tuning_view.emplace(build_pools(ds, PoolingPolicy::ProvidedSubsample, &tune));
    }
    const NormalizedView& view = tuning_view ? *tuning_view : ctx.full_view;

    ExperimentOutcome outcome;
    if (cfg.procedure == Procedure::SubsetChs) {
        // Partial Fisher-Yates over the sorted environment list; the same
        // subset is used by every algorithm in this experiment.
        RngStream rng = make_stream(cfg.master_seed, static_cast<std::uint64_t>(index), 0,
                                    rng_tag::kSubset);
        std::vector<std::string> shuffled = envs;
        const auto k = static_cast<std::size_t>(*cfg.subset_size);
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + rng.next_index(shuffled.size() - i);
            std::swap(shuffled[i], shuffled[j]);
        }
        shuffled.resize(k);
        std::sort(shuffled.begin(), shuffled.end());
        outcome.subset_envs = std::move(shuffled);
    }

    outcome.selections = select_all(ctx, view, cfg.procedure, outcome.subset_envs, &tune);

    // Re-evaluation: fresh draws from the full dataset, normalized against
    // the full-data pools.
    for (const std::string& algo : ds.algorithms()) {
        const SelectionResult& sel = outcome.selections.at(algo);
        double sum = 0.0;
        for (const std::string& env : envs) {
            const CellKey key{algo, env, sel.setting_for(env).id()};
            RngStream rng = make_stream(cfg.master_seed, static_cast<std::uint64_t>(index),
                                        ds.cell_ordinal(key), rng_tag::kEval);
            const std::vector<double> draws =
                ds.subsample_cell(key, static_cast<std::size_t>(cfg.n_eval), rng);
            const double score = normalized_cell_mean(ctx.full_view, key, &draws);
            outcome.eval_scores[algo][env] = score;
            sum += score;
        }
        outcome.overall[algo] = sum / static_cast<double>(envs.size());
    }
    outcome.ranking = rank_by_score(outcome.overall);
    return outcome;
}

// Runs fn(i) for i in [0, n) across `workers` threads. Results must be
// written to preallocated slots; the first exception wins and is rethrown.
void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
    workers = std::max(1, std::min(workers, n));
    if (workers == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto body = [&] {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) threads.emplace_back(body);
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

GroundTruth ground_truth(const Dataset& dataset, Procedure procedure) {
    StudyContext ctx(dataset);
    GroundTruth truth;
    truth.procedure = procedure;

    // Subset tuning is judged against the full cross-environment optimum.
    const Procedure selection_procedure =
        procedure == Procedure::SubsetChs ? Procedure::Chs : procedure;
    truth.selections =
        select_all(ctx, ctx.full_view, selection_procedure, dataset.environments(), nullptr);

    for (const std::string& algo : dataset.algorithms()) {
        const SelectionResult& sel = truth.selections.at(algo);
        double sum = 0.0;
        for (const std::string& env : dataset.environments()) {
            const CellKey key{algo, env, sel.setting_for(env).id()};
            const double score = normalized_cell_mean(ctx.full_view, key);
            truth.eval_scores[algo][env] = score;
            sum += score;
        }
        truth.overall[algo] = sum / static_cast<double>(dataset.environments().size());
    }
    truth.overall_ranking = rank_by_score(truth.overall);
    for (const std::string& env : dataset.environments()) {
        std::map<std::string, double> scores;
        for (const std::string& algo : dataset.algorithms()) {
            scores[algo] = truth.eval_scores.at(algo).at(env);
        }
        truth.per_env_ranking[env] = rank_by_score(scores);
    }
    return truth;
}

ExperimentOutcome simulate_experiment(const Dataset& dataset, const ExperimentConfig& config,
                                      std::int64_t experiment_index) {
    config.validate(dataset.environments().size());
    StudyContext ctx(dataset);
    return run_one(ctx, config, experiment_index);
}

StudyReport run_study(const Dataset& dataset, const ExperimentConfig& config, int workers) {
    config.validate(dataset.environments().size());
    StudyContext ctx(dataset);

    const int n = config.n_experiments;
    std::vector<ExperimentOutcome> outcomes(static_cast<std::size_t>(n));
    parallel_for(n, workers, [&](int i) { outcomes[static_cast<std::size_t>(i)] = run_one(ctx, config, i); });

    StudyReport report;
    report.config = config;
    report.truth = ground_truth(dataset, config.procedure);

    const auto& algorithms = dataset.algorithms();
    const auto& envs = dataset.environments();
    const double n_d = static_cast<double>(n);

    // Deterministic ordered reduction over experiment index.
    std::map<std::string, int> ordering_counts;
    int overall_failures = 0;
    std::size_t overall_inversions = 0;
    std::map<std::string, int> env_failures;
    std::map<std::string, std::size_t> env_inversions;
    for (const std::string& env : envs) {
        env_failures[env] = 0;
        env_inversions[env] = 0;
    }

    for (const ExperimentOutcome& outcome : outcomes) {
        std::string key;
        for (const std::string& algo : outcome.ranking) {
            if (!key.empty()) key += '>';
            key += algo;
        }
        ordering_counts[key] += 1;

        const RankingComparison overall_cmp =
            compare_rankings(outcome.ranking, report.truth.overall_ranking);
        if (!overall_cmp.exact_match) ++overall_failures;
        overall_inversions += overall_cmp.pairwise_inversions;

        for (const std::string& env : envs) {
            std::map<std::string, double> scores;
            for (const std::string& algo : algorithms) {
                scores[algo] = outcome.eval_scores.at(algo).at(env);
            }
            const RankingComparison cmp =
                compare_rankings(rank_by_score(scores), report.truth.per_env_ranking.at(env));
            if (cmp.pairwise_inversions > 0) env_failures[env] += 1;
            env_inversions[env] += cmp.pairwise_inversions;
        }

        if (config.procedure == Procedure::SubsetChs) {
            report.subsets.push_back(outcome.subset_envs);
        }
    }

    for (const auto& [key, count] : ordering_counts) {
        report.ordering_frequency[key] = static_cast<double>(count) / n_d;
    }
    report.failure_rate_overall = static_cast<double>(overall_failures) / n_d;
    report.mean_inversions_overall = static_cast<double>(overall_inversions) / n_d;
    for (const std::string& env : envs) {
        report.failure_rate_per_env[env] = static_cast<double>(env_failures[env]) / n_d;
        report.mean_inversions_per_env[env] = static_cast<double>(env_inversions[env]) / n_d;
    }

    for (const std::string& algo : algorithms) {
        std::vector<double> overall_values(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            overall_values[static_cast<std::size_t>(i)] =
                outcomes[static_cast<std::size_t>(i)].overall.at(algo);
        }
        report.overall_summary[algo] =
            ScoreSummary{mean(overall_values),
                         percentile_interval(overall_values, config.confidence_level)};
        for (const std::string& env : envs) {
            std::vector<double> values(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) {
                values[static_cast<std::size_t>(i)] =
                    outcomes[static_cast<std::size_t>(i)].eval_scores.at(algo).at(env);
            }
            report.per_env_summary[algo][env] = ScoreSummary{
                mean(values), percentile_interval(values, config.confidence_level)};
        }
    }
    return report;
}

StudyReport subset_study(const Dataset& dataset, const ExperimentConfig& config, int workers) {
    if (config.procedure != Procedure::SubsetChs) {
        throw Error(Error::Kind::Config, "subset_study requires procedure subset-chs");
    }
    return run_study(dataset, config, workers);
}

namespace {

// Full-data normalized and raw means for one (algorithm, environment) pair
// at a given setting.
struct FullScores {
    const StudyContext& ctx;

    double normalized(const std::string& algo, const std::string& env,
                      const HyperparameterSetting& setting) const {
        return normalized_cell_mean(ctx.full_view, CellKey{algo, env, setting.id()});
    }
    double raw(const std::string& algo, const std::string& env,
               const HyperparameterSetting& setting) const {
        return mean(ctx.dataset.cell_scores(CellKey{algo, env, setting.id()}));
    }
};

CellScores draw_tuning_subsample(const Dataset& ds, int n_tune, std::uint64_t master_seed,
                                 std::int64_t rep) {
    CellScores tune;
    for (const Dataset::Cell& cell : ds.cells()) {
        RngStream rng = make_stream(master_seed, static_cast<std::uint64_t>(rep),
                                    ds.cell_ordinal(cell.key), rng_tag::kTune);
        tune[cell.key] = ds.subsample_cell(cell.key, static_cast<std::size_t>(n_tune), rng);
    }
    return tune;
}

}  // namespace

BiasReport estimate_bias(const Dataset& dataset, Procedure procedure, int n_tune, int n_reps,
                         std::uint64_t master_seed, PoolingPolicy pooling_policy, int workers) {
    if (n_tune < 1) throw Error(Error::Kind::Config, "n_tune must be positive");
    if (n_reps < 1) throw Error(Error::Kind::Config, "n_reps must be positive");
    if (procedure == Procedure::SubsetChs) {
        throw Error(Error::Kind::Config, "estimate_bias supports chs, per-env and worst-case");
    }

    StudyContext ctx(dataset);
    const FullScores full{ctx};
    const auto& algorithms = dataset.algorithms();
    const auto& envs = dataset.environments();

    // True optima from the complete dataset.
    const auto truth =
        select_all(ctx, ctx.full_view, procedure, dataset.environments(), nullptr);

    // per rep, per algorithm, per environment: normalized and raw shortfall.
    struct RepValues {
        std::map<std::string, std::map<std::string, double>> norm, raw;
    };
    std::vector<RepValues> reps(static_cast<std::size_t>(n_reps));

    parallel_for(n_reps, workers, [&](int rep) {
        const CellScores tune = draw_tuning_subsample(dataset, n_tune, master_seed, rep);
        std::optional<NormalizedView> tuning_view;
        if (pooling_policy == PoolingPolicy::ProvidedSubsample) {
            tuning_view.emplace(build_pools(dataset, PoolingPolicy::ProvidedSubsample, &tune));
        }
        const NormalizedView& view = tuning_view ? *tuning_view : ctx.full_view;
        const auto picked = select_all(ctx, view, procedure, dataset.environments(), &tune);

        RepValues& out = reps[static_cast<std::size_t>(rep)];
        for (const std::string& algo : algorithms) {
            for (const std::string& env : envs) {
                const HyperparameterSetting& best = truth.at(algo).setting_for(env);
                const HyperparameterSetting& chosen = picked.at(algo).setting_for(env);
                out.norm[algo][env] =
                    full.normalized(algo, env, best) - full.normalized(algo, env, chosen);
                out.raw[algo][env] = full.raw(algo, env, best) - full.raw(algo, env, chosen);
            }
        }
    });

    BiasReport report;
    report.procedure = procedure;
    report.n_tune = n_tune;
    report.n_reps = n_reps;
    report.master_seed = master_seed;
    for (const std::string& algo : algorithms) {
        BiasReport::PerAlgorithm entry;
        double total = 0.0;
        for (const std::string& env : envs) {
            double sum_norm = 0.0, sum_raw = 0.0;
            for (const RepValues& rep : reps) {
                sum_norm += rep.norm.at(algo).at(env);
                sum_raw += rep.raw.at(algo).at(env);
            }
            entry.per_env[env] = sum_norm / static_cast<double>(n_reps);
            entry.per_env_raw[env] = sum_raw / static_cast<double>(n_reps);
            total += entry.per_env[env];
        }
        entry.overall = total / static_cast<double>(envs.size());
        report.algorithms[algo] = std::move(entry);
    }
    return report;
}

DropReport performance_drop(const Dataset& dataset, int n_tune, int n_reps,
                            std::uint64_t master_seed, double confidence_level,
                            PoolingPolicy pooling_policy, int workers) {
    if (n_tune < 1) throw Error(Error::Kind::Config, "n_tune must be positive");
    if (n_reps < 1) throw Error(Error::Kind::Config, "n_reps must be positive");
    if (!(confidence_level > 0.0 && confidence_level < 1.0)) {
        throw Error(Error::Kind::Config, "confidence_level must be in (0, 1)");
    }

    StudyContext ctx(dataset);
    const auto& algorithms = dataset.algorithms();
    const auto& envs = dataset.environments();

    // Per-environment optimum in normalized units from the full dataset.
    std::map<std::string, std::map<std::string, double>> best_full;  // algo -> env -> score
    for (const std::string& algo : algorithms) {
        for (const std::string& env : envs) {
            const HyperparameterSetting* best = nullptr;
            double best_score = 0.0;
            for (const HyperparameterSetting& setting : dataset.settings(algo)) {
                const double s =
                    normalized_cell_mean(ctx.full_view, CellKey{algo, env, setting.id()});
                if (best == nullptr || s > best_score) {
                    best = &setting;
                    best_score = s;
                }
            }
            best_full[algo][env] = best_score;
        }
    }

    std::map<std::string, std::map<std::string, std::vector<double>>> drops;
    for (const std::string& algo : algorithms) {
        for (const std::string& env : envs) {
            drops[algo][env].resize(static_cast<std::size_t>(n_reps));
        }
    }

    parallel_for(n_reps, workers, [&](int rep) {
        const CellScores tune = draw_tuning_subsample(dataset, n_tune, master_seed, rep);
        std::optional<NormalizedView> tuning_view;
        if (pooling_policy == PoolingPolicy::ProvidedSubsample) {
            tuning_view.emplace(build_pools(dataset, PoolingPolicy::ProvidedSubsample, &tune));
        }
        const NormalizedView& view = tuning_view ? *tuning_view : ctx.full_view;
        for (const std::string& algo : algorithms) {
            const SelectionResult sel = select_chs(view, algo, &tune);
            for (const std::string& env : envs) {
                const double chosen_full = normalized_cell_mean(
                    ctx.full_view, CellKey{algo, env, sel.setting_for(env).id()});
                drops[algo][env][static_cast<std::size_t>(rep)] =
                    best_full.at(algo).at(env) - chosen_full;
            }
        }
    });

    DropReport report;
    report.n_tune = n_tune;
    report.n_reps = n_reps;
    report.master_seed = master_seed;
    report.confidence_level = confidence_level;
    for (const std::string& algo : algorithms) {
        for (const std::string& env : envs) {
            const auto& values = drops.at(algo).at(env);
            report.drops[algo][env] =
                ScoreSummary{mean(values), percentile_interval(values, confidence_level)};
        }
    }
    return report;
}

}  // namespace chs
