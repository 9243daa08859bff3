#include "chs/normalize.hpp"

#include <algorithm>
#include <cmath>

#include "chs/error.hpp"

namespace chs {

const char* to_string(PoolingPolicy policy) {
    return policy == PoolingPolicy::FullDataset ? "full-dataset" : "provided-subsample";
}

PoolingPolicy pooling_policy_from_string(const std::string& name) {
    if (name == "full-dataset") return PoolingPolicy::FullDataset;
    if (name == "provided-subsample") return PoolingPolicy::ProvidedSubsample;
    throw Error(Error::Kind::Config, "unknown pooling policy '" + name +
                                         "' (expected full-dataset or provided-subsample)");
}

NormalizedView::NormalizedView(const Dataset& source, PoolingPolicy policy,
                               std::vector<Pool> pools)
    : source_(&source), policy_(policy), pools_(std::move(pools)) {
    for (std::size_t i = 0; i < pools_.size(); ++i) by_env_[pools_[i].environment] = i;
}

const Pool& NormalizedView::pool(const std::string& environment) const {
    auto it = by_env_.find(environment);
    if (it == by_env_.end()) {
        throw Error(Error::Kind::Validation, "no pool for environment '" + environment + "'");
    }
    return pools_[it->second];
}

NormalizedView build_pools(const Dataset& dataset, PoolingPolicy policy,
                           const CellScores* subsample) {
    if (policy == PoolingPolicy::ProvidedSubsample && subsample == nullptr) {
        throw Error(Error::Kind::Validation,
                    "provided-subsample pooling requires a subsample map");
    }
    std::map<std::string, std::vector<double>> scores_per_env;
    for (const std::string& env : dataset.environments()) scores_per_env[env];

    for (const Dataset::Cell& cell : dataset.cells()) {
        const std::vector<double>* scores = &cell.scores;
        if (policy == PoolingPolicy::ProvidedSubsample) {
            auto it = subsample->find(cell.key);
            if (it == subsample->end()) {
                throw Error(Error::Kind::Validation,
                            "subsample missing cell " + cell.key.to_string());
            }
            scores = &it->second;
        }
        auto& pool = scores_per_env[cell.key.environment];
        pool.insert(pool.end(), scores->begin(), scores->end());
    }

    std::vector<Pool> pools;
    pools.reserve(scores_per_env.size());
    for (auto& [env, scores] : scores_per_env) {
        if (scores.empty()) {
            throw Error(Error::Kind::Validation, "empty pool for environment '" + env + "'");
        }
        std::sort(scores.begin(), scores.end());
        pools.push_back(Pool{env, std::move(scores)});
    }
    return NormalizedView(dataset, policy, std::move(pools));
}

double cdf_normalize(double x, const Pool& pool) {
    if (pool.scores.empty()) {
        throw Error(Error::Kind::Validation, "cdf_normalize over an empty pool");
    }
    if (!std::isfinite(x)) {
        throw Error(Error::Kind::Validation, "cdf_normalize of a non-finite value");
    }
    // lower_bound on the sorted pool = number of elements strictly below x.
    const auto below = std::lower_bound(pool.scores.begin(), pool.scores.end(), x) -
                       pool.scores.begin();
    return static_cast<double>(below) / static_cast<double>(pool.scores.size());
}

double normalized_cell_mean(const NormalizedView& view, const CellKey& key,
                            const std::vector<double>* scores) {
    const std::vector<double>& values = scores ? *scores : view.source().cell_scores(key);
    if (scores) view.source().cell(key);  // still validate the key
    if (values.empty()) {
        throw Error(Error::Kind::Validation, "empty score list for cell " + key.to_string());
    }
    const Pool& pool = view.pool(key.environment);
    double sum = 0.0;
    for (double v : values) sum += cdf_normalize(v, pool);
    return sum / static_cast<double>(values.size());
}

CellScores full_cell_scores(const Dataset& dataset) {
    CellScores out;
    for (const Dataset::Cell& cell : dataset.cells()) out[cell.key] = cell.scores;
    return out;
}

}  // namespace chs
