// Independent oracles used by the unit and acceptance suites. Everything in
// here deliberately avoids the library's normalization/selection/simulation
// code paths: counts are plain loops, probabilities are enumerated, and the
// Monte Carlo reference uses the standard-library generator.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace oracles {

// Strict less-than count, the brute-force counterpart of cdf_normalize.
inline double brute_force_cdf(double x, const std::vector<double>& pool) {
    std::size_t below = 0;
    for (double g : pool) {
        if (g < x) ++below;
    }
    return static_cast<double>(below) / static_cast<double>(pool.size());
}

inline double brute_force_cell_mean(const std::vector<double>& scores,
                                    const std::vector<double>& pool) {
    double sum = 0.0;
    for (double s : scores) sum += brute_force_cdf(s, pool);
    return sum / static_cast<double>(scores.size());
}

// Discordant pairs counted directly off the two sequences.
inline std::size_t brute_force_inversions(const std::vector<std::string>& a,
                                          const std::vector<std::string>& b) {
    auto position = [](const std::vector<std::string>& r, const std::string& id) {
        return static_cast<std::size_t>(std::find(r.begin(), r.end(), id) - r.begin());
    };
    std::size_t count = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            if (position(b, a[i]) > position(b, a[j])) ++count;
        }
    }
    return count;
}

// ---------------------------------------------------------------------------
// Exhaustive enumeration of a two-algorithm chs study on tiny instances.
//
// Cells are keyed by (algorithm, environment, setting); each holds at most
// two distinct run values, so every subsample is a binomial multiset and all
// outcome probabilities are dyadic rationals, exactly representable in
// doubles. The pipeline semantics mirror the documented engine behaviour:
// tuning pools from the tuning draws, selection by normalized tuning mean
// with ties to the smaller setting id, evaluation draws normalized against
// the full-data pool, ranking descending with ties to the smaller algorithm
// id. Failure is an overall ranking different from the full-data ranking.

struct TinyInstance {
    std::vector<std::string> algorithms;  // sorted
    std::vector<std::string> environments;
    std::vector<std::string> settings;  // sorted ids, shared by both algorithms
    // scores[algo][env][setting] -> one or two run values
    std::map<std::string, std::map<std::string, std::map<std::string, std::vector<double>>>>
        scores;
};

namespace detail {

inline double binomial(int n, int k) {
    double c = 1.0;
    for (int i = 0; i < k; ++i) c = c * static_cast<double>(n - i) / static_cast<double>(i + 1);
    return c;
}

struct CellRef {
    const std::vector<double>* values;
    std::string algo, env, setting;
};

// Multiset of n draws from a cell with <= 2 distinct values: k copies of
// values[0] and n-k of values[1] (or all values[0] for single-valued cells).
struct Multiset {
    double prob;
    std::vector<double> draws;
};

inline std::vector<Multiset> enumerate_multisets(const std::vector<double>& cell, int n) {
    std::vector<Multiset> out;
    if (cell.size() == 1 || cell[0] == cell[1]) {
        out.push_back({1.0, std::vector<double>(static_cast<std::size_t>(n), cell[0])});
        return out;
    }
    const double p = 0.5;  // two distinct values, each drawn with prob 1/2
    for (int k = 0; k <= n; ++k) {
        Multiset m;
        m.prob = binomial(n, k) * std::pow(p, n);
        for (int i = 0; i < k; ++i) m.draws.push_back(cell[0]);
        for (int i = k; i < n; ++i) m.draws.push_back(cell[1]);
        out.push_back(std::move(m));
    }
    return out;
}

}  // namespace detail

struct TinyStudyExact {
    double failure_probability = 0.0;
    std::vector<std::string> truth_ranking;
};

inline TinyStudyExact enumerate_study(const TinyInstance& inst, int n_tune, int n_eval) {
    using detail::CellRef;
    using detail::Multiset;

    std::vector<CellRef> cells;
    for (const auto& algo : inst.algorithms) {
        for (const auto& env : inst.environments) {
            for (const auto& setting : inst.settings) {
                cells.push_back({&inst.scores.at(algo).at(env).at(setting), algo, env, setting});
            }
        }
    }

    // Full pools and full-data normalized means per cell.
    std::map<std::string, std::vector<double>> full_pool;
    for (const CellRef& c : cells) {
        auto& pool = full_pool[c.env];
        pool.insert(pool.end(), c.values->begin(), c.values->end());
    }
    auto full_mean = [&](const std::string& algo, const std::string& env,
                         const std::string& setting) {
        return brute_force_cell_mean(inst.scores.at(algo).at(env).at(setting),
                                     full_pool.at(env));
    };

    // Ground truth: full-data chs selection, full-data evaluation.
    std::map<std::string, double> truth_overall;
    for (const auto& algo : inst.algorithms) {
        std::string best;
        double best_score = 0.0;
        for (const auto& setting : inst.settings) {  // ascending id: ties keep first
            double sum = 0.0;
            for (const auto& env : inst.environments) sum += full_mean(algo, env, setting);
            const double score = sum / static_cast<double>(inst.environments.size());
            if (best.empty() || score > best_score) {
                best = setting;
                best_score = score;
            }
        }
        double sum = 0.0;
        for (const auto& env : inst.environments) sum += full_mean(algo, env, best);
        truth_overall[algo] = sum / static_cast<double>(inst.environments.size());
    }
    TinyStudyExact result;
    result.truth_ranking = inst.algorithms;
    std::sort(result.truth_ranking.begin(), result.truth_ranking.end(),
              [&](const std::string& a, const std::string& b) {
                  if (truth_overall.at(a) != truth_overall.at(b)) {
                      return truth_overall.at(a) > truth_overall.at(b);
                  }
                  return a < b;
              });

    // Per-cell evaluation distributions at a given setting: distribution of
    // the normalized mean of n_eval draws from the full cell.
    auto eval_distribution = [&](const std::string& algo, const std::string& env,
                                 const std::string& setting) {
        std::vector<std::pair<double, double>> dist;  // (score, prob)
        for (const Multiset& m :
             detail::enumerate_multisets(inst.scores.at(algo).at(env).at(setting), n_eval)) {
            dist.emplace_back(brute_force_cell_mean(m.draws, full_pool.at(env)), m.prob);
        }
        return dist;
    };

    // Enumerate the joint tuning outcome across all cells.
    std::vector<std::vector<Multiset>> tune_options;
    tune_options.reserve(cells.size());
    for (const CellRef& c : cells) {
        tune_options.push_back(detail::enumerate_multisets(*c.values, n_tune));
    }

    double failure = 0.0;
    std::vector<std::size_t> pick(cells.size(), 0);
    while (true) {
        double tune_prob = 1.0;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            tune_prob *= tune_options[i][pick[i]].prob;
        }

        // Tuning pools from the drawn subsample.
        std::map<std::string, std::vector<double>> tune_pool;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            auto& pool = tune_pool[cells[i].env];
            const auto& draws = tune_options[i][pick[i]].draws;
            pool.insert(pool.end(), draws.begin(), draws.end());
        }
        auto tune_draws = [&](const std::string& algo, const std::string& env,
                              const std::string& setting) -> const std::vector<double>& {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (cells[i].algo == algo && cells[i].env == env &&
                    cells[i].setting == setting) {
                    return tune_options[i][pick[i]].draws;
                }
            }
            throw std::logic_error("cell not found");
        };

        // chs selection per algorithm.
        std::map<std::string, std::string> chosen;
        for (const auto& algo : inst.algorithms) {
            std::string best;
            double best_score = 0.0;
            for (const auto& setting : inst.settings) {
                double sum = 0.0;
                for (const auto& env : inst.environments) {
                    sum += brute_force_cell_mean(tune_draws(algo, env, setting),
                                                 tune_pool.at(env));
                }
                const double score = sum / static_cast<double>(inst.environments.size());
                if (best.empty() || score > best_score) {
                    best = setting;
                    best_score = score;
                }
            }
            chosen[algo] = best;
        }

        // Joint evaluation outcome distribution; algorithms and environments
        // are independent given the selection.
        std::vector<std::pair<double, double>> overall_a{{0.0, 1.0}}, overall_b{{0.0, 1.0}};
        auto accumulate = [&](const std::string& algo,
                              std::vector<std::pair<double, double>>& acc) {
            for (const auto& env : inst.environments) {
                std::vector<std::pair<double, double>> next;
                for (const auto& [sum, prob] : acc) {
                    for (const auto& [score, p] : eval_distribution(algo, env, chosen.at(algo))) {
                        next.emplace_back(sum + score, prob * p);
                    }
                }
                acc = std::move(next);
            }
            for (auto& [sum, prob] : acc) {
                sum /= static_cast<double>(inst.environments.size());
            }
        };
        accumulate(inst.algorithms[0], overall_a);
        accumulate(inst.algorithms[1], overall_b);

        double fail_given_tune = 0.0;
        for (const auto& [score_a, prob_a] : overall_a) {
            for (const auto& [score_b, prob_b] : overall_b) {
                std::map<std::string, double> overall{{inst.algorithms[0], score_a},
                                                      {inst.algorithms[1], score_b}};
                std::vector<std::string> ranking = inst.algorithms;
                std::sort(ranking.begin(), ranking.end(),
                          [&](const std::string& x, const std::string& y) {
                              if (overall.at(x) != overall.at(y)) {
                                  return overall.at(x) > overall.at(y);
                              }
                              return x < y;
                          });
                if (ranking != result.truth_ranking) fail_given_tune += prob_a * prob_b;
            }
        }
        failure += tune_prob * fail_given_tune;

        // Next joint tuning outcome.
        std::size_t i = 0;
        while (i < cells.size()) {
            if (++pick[i] < tune_options[i].size()) break;
            pick[i] = 0;
            ++i;
        }
        if (i == cells.size()) break;
    }
    result.failure_probability = failure;
    return result;
}

// ---------------------------------------------------------------------------
// Independent Monte Carlo reference for a two-algorithm chs study over an
// arbitrary dataset snapshot, using the standard-library generator. Estimates
// the same failure probability as run_study but shares no code or randomness
// with the engine.

struct McInstance {
    std::vector<std::string> algorithms;
    std::vector<std::string> environments;
    std::vector<std::string> settings;
    std::map<std::string, std::map<std::string, std::map<std::string, std::vector<double>>>>
        scores;
};

inline double mc_failure_rate(const McInstance& inst, int n_tune, int n_eval, int n_experiments,
                              std::uint64_t seed) {
    std::mt19937_64 rng(seed);

    std::map<std::string, std::vector<double>> full_pool;
    for (const auto& [algo, envs] : inst.scores) {
        for (const auto& [env, settings] : envs) {
            for (const auto& [setting, values] : settings) {
                auto& pool = full_pool[env];
                pool.insert(pool.end(), values.begin(), values.end());
            }
        }
    }

    auto full_mean = [&](const std::string& algo, const std::string& env,
                         const std::string& setting) {
        return brute_force_cell_mean(inst.scores.at(algo).at(env).at(setting),
                                     full_pool.at(env));
    };
    std::map<std::string, double> truth_overall;
    for (const auto& algo : inst.algorithms) {
        std::string best;
        double best_score = 0.0;
        for (const auto& setting : inst.settings) {
            double sum = 0.0;
            for (const auto& env : inst.environments) sum += full_mean(algo, env, setting);
            const double score = sum / static_cast<double>(inst.environments.size());
            if (best.empty() || score > best_score) {
                best = setting;
                best_score = score;
            }
        }
        double sum = 0.0;
        for (const auto& env : inst.environments) sum += full_mean(algo, env, best);
        truth_overall[algo] = sum / static_cast<double>(inst.environments.size());
    }
    std::vector<std::string> truth_ranking = inst.algorithms;
    std::sort(truth_ranking.begin(), truth_ranking.end(),
              [&](const std::string& a, const std::string& b) {
                  if (truth_overall.at(a) != truth_overall.at(b)) {
                      return truth_overall.at(a) > truth_overall.at(b);
                  }
                  return a < b;
              });

    auto draw = [&](const std::vector<double>& cell, int n) {
        std::uniform_int_distribution<std::size_t> pick(0, cell.size() - 1);
        std::vector<double> out(static_cast<std::size_t>(n));
        for (double& v : out) v = cell[pick(rng)];
        return out;
    };

    int failures = 0;
    for (int e = 0; e < n_experiments; ++e) {
        std::map<std::string, std::map<std::string, std::map<std::string, std::vector<double>>>>
            tune;
        std::map<std::string, std::vector<double>> tune_pool;
        for (const auto& algo : inst.algorithms) {
            for (const auto& env : inst.environments) {
                for (const auto& setting : inst.settings) {
                    auto draws = draw(inst.scores.at(algo).at(env).at(setting), n_tune);
                    auto& pool = tune_pool[env];
                    pool.insert(pool.end(), draws.begin(), draws.end());
                    tune[algo][env][setting] = std::move(draws);
                }
            }
        }
        std::map<std::string, double> overall;
        for (const auto& algo : inst.algorithms) {
            std::string best;
            double best_score = 0.0;
            for (const auto& setting : inst.settings) {
                double sum = 0.0;
                for (const auto& env : inst.environments) {
                    sum += brute_force_cell_mean(tune.at(algo).at(env).at(setting),
                                                 tune_pool.at(env));
                }
                const double score = sum / static_cast<double>(inst.environments.size());
                if (best.empty() || score > best_score) {
                    best = setting;
                    best_score = score;
                }
            }
            double sum = 0.0;
            for (const auto& env : inst.environments) {
                sum += brute_force_cell_mean(draw(inst.scores.at(algo).at(env).at(best), n_eval),
                                             full_pool.at(env));
            }
            overall[algo] = sum / static_cast<double>(inst.environments.size());
        }
        std::vector<std::string> ranking = inst.algorithms;
        std::sort(ranking.begin(), ranking.end(), [&](const std::string& a, const std::string& b) {
            if (overall.at(a) != overall.at(b)) return overall.at(a) > overall.at(b);
            return a < b;
        });
        if (ranking != truth_ranking) ++failures;
    }
    return static_cast<double>(failures) / static_cast<double>(n_experiments);
}

}  // namespace oracles
