#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "chs/rng.hpp"

namespace chs {

// A hyperparameter value is either free text or a number. Numbers are
// canonicalized with shortest round-trip formatting, so 0.25 read from JSON
// and "0.25" read from CSV yield the same setting id.
using HyperValue = std::variant<std::string, double>;

std::string canonical_value_text(const HyperValue& value);

class HyperparameterSetting {
public:
    using Entry = std::pair<std::string, HyperValue>;

    HyperparameterSetting() = default;

    // Entries are stored sorted by name; names must be unique.
    explicit HyperparameterSetting(std::vector<Entry> entries);

    const std::vector<Entry>& entries() const { return entries_; }
    const std::string& id() const { return id_; }
    bool empty() const { return entries_.empty(); }

    bool operator==(const HyperparameterSetting& other) const { return id_ == other.id_; }

private:
    std::vector<Entry> entries_;
    std::string id_;
};

struct CellKey {
    std::string algorithm;
    std::string environment;
    std::string setting_id;

    auto operator<=>(const CellKey&) const = default;
    std::string to_string() const;
};

struct ScoreRecord {
    std::string algorithm;
    std::string environment;
    HyperparameterSetting setting;
    std::int64_t run = 0;
    double score = 0.0;
};

enum class DataFormat { Jsonl, Csv };

DataFormat data_format_from_string(const std::string& name);

// Immutable table of experiment results indexed by (algorithm, environment,
// setting). Environments must be covered identically by every algorithm;
// run counts per cell may differ. Safe for concurrent reads once built.
class Dataset {
public:
    struct Cell {
        CellKey key;
        std::vector<double> scores;       // insertion order
        std::vector<std::int64_t> runs;   // parallel to scores
    };

    static Dataset from_records(const std::vector<ScoreRecord>& records);

    const std::vector<std::string>& algorithms() const { return algorithms_; }
    const std::vector<std::string>& environments() const { return environments_; }

    // Settings observed for one algorithm, sorted by canonical id.
    const std::vector<HyperparameterSetting>& settings(const std::string& algorithm) const;
    const HyperparameterSetting& setting_by_id(const std::string& algorithm,
                                               const std::string& setting_id) const;

    const std::vector<Cell>& cells() const { return cells_; }
    bool has_cell(const CellKey& key) const;
    const Cell& cell(const CellKey& key) const;
    const std::vector<double>& cell_scores(const CellKey& key) const;

    // Stable rank of a cell in canonical (algorithm, environment, setting)
    // order; used to derive per-cell random streams.
    std::size_t cell_ordinal(const CellKey& key) const;

    std::size_t n_cells() const { return cells_.size(); }
    std::size_t n_records() const;

    // n draws i.i.d. with replacement from the cell, deterministic given rng.
    std::vector<double> subsample_cell(const CellKey& key, std::size_t n, RngStream& rng) const;

    // Materializes records in canonical cell order (per-cell insertion order
    // is preserved; the original interleaving across cells is not).
    std::vector<ScoreRecord> records() const;

private:
    friend class DatasetBuilder;

    std::vector<Cell> cells_;  // sorted by key
    std::map<CellKey, std::size_t> index_;
    std::vector<std::string> algorithms_;
    std::vector<std::string> environments_;
    std::map<std::string, std::vector<HyperparameterSetting>> settings_;
};

// Accumulates rows and validates the dataset invariants on finish().
// `line` in add() is the 1-based source line used in error messages (0 when
// the row has no file origin).
class DatasetBuilder {
public:
    void add(const std::string& algorithm, const std::string& environment,
             const HyperparameterSetting& setting, std::int64_t run, double score,
             std::size_t line = 0);

    // Bulk insert for generated data; runs are assigned 0..scores.size()-1.
    void add_cell(const std::string& algorithm, const std::string& environment,
                  const HyperparameterSetting& setting, std::vector<double> scores);

    Dataset finish();

private:
    std::map<CellKey, std::size_t> index_;
    std::vector<Dataset::Cell> cells_;
    std::map<std::string, HyperparameterSetting> settings_by_id_;
};

Dataset load_dataset(const std::string& path, DataFormat format);
void save_dataset_jsonl(const Dataset& dataset, const std::string& path);

}  // namespace chs
