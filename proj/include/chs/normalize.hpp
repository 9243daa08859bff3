#pragma once

#include <map>
#include <string>
#include <vector>

#include "chs/dataset.hpp"

namespace chs {

// Which scores feed the per-environment pools: everything the dataset holds,
// or an explicit per-cell subsample (the data actually available at selection
// time inside a simulated experiment).
enum class PoolingPolicy { FullDataset, ProvidedSubsample };

const char* to_string(PoolingPolicy policy);
PoolingPolicy pooling_policy_from_string(const std::string& name);

// All raw scores of one environment across algorithms, settings and runs,
// sorted ascending.
struct Pool {
    std::string environment;
    std::vector<double> scores;
};

// Per-cell score lists keyed by cell; shared between pooling and selection.
using CellScores = std::map<CellKey, std::vector<double>>;

// Immutable bundle of per-environment pools over a source dataset. All
// normalized values it serves lie in [0, 1].
class NormalizedView {
public:
    NormalizedView(const Dataset& source, PoolingPolicy policy, std::vector<Pool> pools);

    const Dataset& source() const { return *source_; }
    PoolingPolicy policy() const { return policy_; }
    const Pool& pool(const std::string& environment) const;

private:
    const Dataset* source_;
    PoolingPolicy policy_;
    std::vector<Pool> pools_;                    // aligned with source environments
    std::map<std::string, std::size_t> by_env_;
};

// Builds one pool per environment. Under ProvidedSubsample the map must cover
// every cell of the dataset; under FullDataset it is ignored.
NormalizedView build_pools(const Dataset& dataset, PoolingPolicy policy,
                           const CellScores* subsample = nullptr);

// Fraction of the pool strictly below x, by binary search.
double cdf_normalize(double x, const Pool& pool);

// Mean of cdf_normalize over the given raw scores (or the cell's stored
// scores when `scores` is null) against the cell's environment pool.
double normalized_cell_mean(const NormalizedView& view, const CellKey& key,
                            const std::vector<double>* scores = nullptr);

// Copies every cell's stored scores; convenience for full-data selection.
CellScores full_cell_scores(const Dataset& dataset);

}  // namespace chs
