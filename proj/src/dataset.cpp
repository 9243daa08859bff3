#include "chs/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "chs/error.hpp"

namespace chs {

namespace {

using nlohmann::json;

[[noreturn]] void parse_fail(const std::string& path, std::size_t line, const std::string& what) {
    throw Error(Error::Kind::Parse, path + ":" + std::to_string(line) + ": " + what);
}

std::string shortest_double_text(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

}  // namespace

std::string canonical_value_text(const HyperValue& value) {
    if (std::holds_alternative<double>(value)) return shortest_double_text(std::get<double>(value));
    return std::get<std::string>(value);
}

HyperparameterSetting::HyperparameterSetting(std::vector<Entry> entries)
    : entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end(),
              [](const Entry& a, const Entry& b) { return a.first < b.first; });
    std::string id;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (i > 0) {
            if (entries_[i].first == entries_[i - 1].first) {
                throw Error(Error::Kind::Validation,
                            "duplicate hyperparameter name '" + entries_[i].first + "' in setting");
            }
            id += ';';
        }
        id += entries_[i].first;
        id += '=';
        id += canonical_value_text(entries_[i].second);
    }
    id_ = std::move(id);
}

std::string CellKey::to_string() const {
    return "(" + algorithm + ", " + environment + ", " + setting_id + ")";
}

DataFormat data_format_from_string(const std::string& name) {
    if (name == "jsonl") return DataFormat::Jsonl;
    if (name == "csv") return DataFormat::Csv;
    throw Error(Error::Kind::Config, "unknown data format '" + name + "' (expected jsonl or csv)");
}

// ---------------------------------------------------------------------------
// DatasetBuilder

void DatasetBuilder::add(const std::string& algorithm, const std::string& environment,
                         const HyperparameterSetting& setting, std::int64_t run, double score,
                         std::size_t line) {
    auto where = [&]() -> std::string {
        return line > 0 ? " at line " + std::to_string(line) : "";
    };
    if (algorithm.empty() || environment.empty()) {
        throw Error(Error::Kind::Validation, "empty algorithm or environment id" + where());
    }
    if (run < 0) throw Error(Error::Kind::Validation, "negative run id" + where());
    if (!std::isfinite(score)) {
        throw Error(Error::Kind::Validation,
                    "non-finite score for " + algorithm + "/" + environment + where());
    }

    CellKey key{algorithm, environment, setting.id()};
    auto [it, inserted] = index_.try_emplace(key, cells_.size());
    if (inserted) cells_.push_back(Dataset::Cell{key, {}, {}});
    Dataset::Cell& cell = cells_[it->second];
    if (std::find(cell.runs.begin(), cell.runs.end(), run) != cell.runs.end()) {
        throw Error(Error::Kind::Validation,
                    "duplicate run " + std::to_string(run) + " for cell " + key.to_string() + where());
    }
    cell.scores.push_back(score);
    cell.runs.push_back(run);
    settings_by_id_.try_emplace(setting.id(), setting);
}

void DatasetBuilder::add_cell(const std::string& algorithm, const std::string& environment,
                              const HyperparameterSetting& setting, std::vector<double> scores) {
    if (scores.empty()) {
        throw Error(Error::Kind::Validation, "empty score list for cell");
    }
    for (double s : scores) {
        if (!std::isfinite(s)) {
            throw Error(Error::Kind::Validation,
                        "non-finite score for " + algorithm + "/" + environment);
        }
    }
    CellKey key{algorithm, environment, setting.id()};
    auto [it, inserted] = index_.try_emplace(key, cells_.size());
    if (!inserted) {
        throw Error(Error::Kind::Validation, "cell " + key.to_string() + " inserted twice");
    }
    Dataset::Cell cell{key, std::move(scores), {}};
    cell.runs.resize(cell.scores.size());
    for (std::size_t i = 0; i < cell.runs.size(); ++i) cell.runs[i] = static_cast<std::int64_t>(i);
    cells_.push_back(std::move(cell));
    settings_by_id_.try_emplace(setting.id(), setting);
}

Dataset DatasetBuilder::finish() {
    if (cells_.empty()) throw Error(Error::Kind::Validation, "dataset contains no records");

    std::sort(cells_.begin(), cells_.end(),
              [](const Dataset::Cell& a, const Dataset::Cell& b) { return a.key < b.key; });

    Dataset ds;
    std::set<std::string> algorithms;
    std::map<std::string, std::set<std::string>> envs_per_algorithm;
    std::map<std::string, std::set<std::string>> setting_ids_per_algorithm;
    for (std::size_t i = 0; i < cells_.size(); ++i) {
        const CellKey& key = cells_[i].key;
        ds.index_[key] = i;
        algorithms.insert(key.algorithm);
        envs_per_algorithm[key.algorithm].insert(key.environment);
        setting_ids_per_algorithm[key.algorithm].insert(key.setting_id);
    }

    // Every algorithm must cover the same environment set; the expectation
    // over environments is undefined otherwise.
    const std::set<std::string>& reference = envs_per_algorithm.begin()->second;
    for (const auto& [algo, envs] : envs_per_algorithm) {
        if (envs != reference) {
            std::string msg = "ragged environment coverage: algorithm '" + algo + "' covers {";
            bool first = true;
            for (const auto& e : envs) {
                if (!first) msg += ", ";
                msg += e;
                first = false;
            }
            msg += "} but '" + envs_per_algorithm.begin()->first + "' covers a different set";
            throw Error(Error::Kind::Validation, msg);
        }
    }

    ds.cells_ = std::move(cells_);
    ds.algorithms_.assign(algorithms.begin(), algorithms.end());
    ds.environments_.assign(reference.begin(), reference.end());
    for (const auto& [algo, ids] : setting_ids_per_algorithm) {
        std::vector<HyperparameterSetting> list;
        list.reserve(ids.size());
        for (const auto& id : ids) list.push_back(settings_by_id_.at(id));
        ds.settings_[algo] = std::move(list);
    }
    return ds;
}

// ---------------------------------------------------------------------------
// Dataset

Dataset Dataset::from_records(const std::vector<ScoreRecord>& records) {
    DatasetBuilder builder;
    for (const ScoreRecord& r : records) {
        builder.add(r.algorithm, r.environment, r.setting, r.run, r.score);
    }
    return builder.finish();
}

const std::vector<HyperparameterSetting>& Dataset::settings(const std::string& algorithm) const {
    auto it = settings_.find(algorithm);
    if (it == settings_.end()) {
        throw Error(Error::Kind::Validation, "unknown algorithm '" + algorithm + "'");
    }
    return it->second;
}

const HyperparameterSetting& Dataset::setting_by_id(const std::string& algorithm,
                                                    const std::string& setting_id) const {
    for (const auto& s : settings(algorithm)) {
        if (s.id() == setting_id) return s;
    }
    throw Error(Error::Kind::Validation,
                "unknown setting '" + setting_id + "' for algorithm '" + algorithm + "'");
}

bool Dataset::has_cell(const CellKey& key) const { return index_.count(key) > 0; }

const Dataset::Cell& Dataset::cell(const CellKey& key) const {
    auto it = index_.find(key);
    if (it == index_.end()) {
        throw Error(Error::Kind::Validation, "unknown cell " + key.to_string());
    }
    return cells_[it->second];
}

const std::vector<double>& Dataset::cell_scores(const CellKey& key) const {
    return cell(key).scores;
}

std::size_t Dataset::cell_ordinal(const CellKey& key) const {
    auto it = index_.find(key);
    if (it == index_.end()) {
        throw Error(Error::Kind::Validation, "unknown cell " + key.to_string());
    }
    return it->second;
}

std::size_t Dataset::n_records() const {
    std::size_t n = 0;
    for (const Cell& c : cells_) n += c.scores.size();
    return n;
}

std::vector<double> Dataset::subsample_cell(const CellKey& key, std::size_t n,
                                            RngStream& rng) const {
    if (n == 0) throw Error(Error::Kind::Validation, "subsample size must be positive");
    const std::vector<double>& pool = cell(key).scores;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = pool[rng.next_index(pool.size())];
    return out;
}

std::vector<ScoreRecord> Dataset::records() const {
    std::vector<ScoreRecord> out;
    out.reserve(n_records());
    for (const Cell& c : cells_) {
        const HyperparameterSetting& setting = setting_by_id(c.key.algorithm, c.key.setting_id);
        for (std::size_t i = 0; i < c.scores.size(); ++i) {
            out.push_back(ScoreRecord{c.key.algorithm, c.key.environment, setting, c.runs[i],
                                      c.scores[i]});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Loading / saving

namespace {

// Accepts a full-string double; "NaN"/"inf" parse but are flagged as
// non-finite by the caller.
bool parse_full_double(const std::string& text, double& out) {
    if (text.empty()) return false;
    char* end = nullptr;
    out = std::strtod(text.c_str(), &end);
    return end == text.c_str() + text.size();
}

double score_from_json(const json& value, const std::string& path, std::size_t line) {
    double score = 0.0;
    if (value.is_number()) {
        score = value.get<double>();
    } else if (value.is_string()) {
        if (!parse_full_double(value.get<std::string>(), score)) {
            parse_fail(path, line, "score '" + value.get<std::string>() + "' is not a number");
        }
    } else {
        parse_fail(path, line, "score must be a number");
    }
    if (!std::isfinite(score)) {
        throw Error(Error::Kind::Validation,
                    path + ":" + std::to_string(line) + ": non-finite score");
    }
    return score;
}

HyperValue hyper_value_from_json(const json& value, const std::string& path, std::size_t line,
                                 const std::string& name) {
    if (value.is_number()) return HyperValue{value.get<double>()};
    if (value.is_string()) return HyperValue{value.get<std::string>()};
    parse_fail(path, line, "hyperparameter '" + name + "' must be a string or number");
}

Dataset load_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Error::Kind::Io, "cannot open '" + path + "'");

    DatasetBuilder builder;
    std::string linebuf;
    std::size_t line = 0;
    while (std::getline(in, linebuf)) {
        ++line;
        if (linebuf.find_first_not_of(" \t\r") == std::string::npos) continue;
        json row;
        try {
            row = json::parse(linebuf);
        } catch (const json::parse_error& e) {
            parse_fail(path, line, std::string("invalid JSON: ") + e.what());
        }
        if (!row.is_object()) parse_fail(path, line, "row is not a JSON object");
        for (const char* field : {"algorithm", "environment", "hypers", "run", "score"}) {
            if (!row.contains(field)) {
                parse_fail(path, line, std::string("missing field '") + field + "'");
            }
        }
        if (!row["algorithm"].is_string() || !row["environment"].is_string()) {
            parse_fail(path, line, "algorithm and environment must be strings");
        }
        if (!row["run"].is_number_integer() && !row["run"].is_number_unsigned()) {
            parse_fail(path, line, "run must be an integer");
        }
        if (!row["hypers"].is_object()) parse_fail(path, line, "hypers must be an object");

        std::vector<HyperparameterSetting::Entry> entries;
        for (const auto& [name, value] : row["hypers"].items()) {
            entries.emplace_back(name, hyper_value_from_json(value, path, line, name));
        }
        const double score = score_from_json(row["score"], path, line);
        builder.add(row["algorithm"].get<std::string>(), row["environment"].get<std::string>(),
                    HyperparameterSetting(std::move(entries)), row["run"].get<std::int64_t>(),
                    score, line);
    }
    return builder.finish();
}

std::vector<std::string> split_csv_line(const std::string& text) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(text);
    while (std::getline(ss, field, ',')) {
        if (!field.empty() && field.back() == '\r') field.pop_back();
        fields.push_back(field);
    }
    if (!text.empty() && text.back() == ',') fields.emplace_back();
    return fields;
}

Dataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Error::Kind::Io, "cannot open '" + path + "'");

    std::string linebuf;
    if (!std::getline(in, linebuf)) throw Error(Error::Kind::Parse, path + ": empty file");
    auto header = split_csv_line(linebuf);
    const std::vector<std::string> fixed = {"algorithm", "environment", "run", "score"};
    if (header.size() < fixed.size()) parse_fail(path, 1, "header too short");
    for (std::size_t i = 0; i < fixed.size(); ++i) {
        if (header[i] != fixed[i]) {
            parse_fail(path, 1, "header column " + std::to_string(i + 1) + " must be '" +
                                    fixed[i] + "', got '" + header[i] + "'");
        }
    }
    std::vector<std::string> hyper_names;
    for (std::size_t i = fixed.size(); i < header.size(); ++i) {
        if (header[i].rfind("hp.", 0) != 0 || header[i].size() <= 3) {
            parse_fail(path, 1, "hyperparameter columns must be named 'hp.<name>', got '" +
                                    header[i] + "'");
        }
        hyper_names.push_back(header[i].substr(3));
    }

    DatasetBuilder builder;
    std::size_t line = 1;
    while (std::getline(in, linebuf)) {
        ++line;
        if (linebuf.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto fields = split_csv_line(linebuf);
        if (fields.size() != header.size()) {
            parse_fail(path, line,
                       "expected " + std::to_string(header.size()) + " fields, got " +
                           std::to_string(fields.size()));
        }
        std::int64_t run = 0;
        {
            const std::string& text = fields[2];
            auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), run);
            if (ec != std::errc{} || p != text.data() + text.size()) {
                parse_fail(path, line, "run '" + text + "' is not an integer");
            }
        }
        double score = 0.0;
        if (!parse_full_double(fields[3], score)) {
            parse_fail(path, line, "score '" + fields[3] + "' is not a number");
        }
        if (!std::isfinite(score)) {
            throw Error(Error::Kind::Validation,
                        path + ":" + std::to_string(line) + ": non-finite score");
        }
        std::vector<HyperparameterSetting::Entry> entries;
        for (std::size_t i = 0; i < hyper_names.size(); ++i) {
            const std::string& text = fields[4 + i];
            if (text.empty()) {
                parse_fail(path, line, "empty value for hp." + hyper_names[i]);
            }
            double numeric = 0.0;
            if (parse_full_double(text, numeric) && std::isfinite(numeric)) {
                entries.emplace_back(hyper_names[i], HyperValue{numeric});
            } else {
                entries.emplace_back(hyper_names[i], HyperValue{text});
            }
        }
        builder.add(fields[0], fields[1], HyperparameterSetting(std::move(entries)), run, score,
                    line);
    }
    return builder.finish();
}

}  // namespace

Dataset load_dataset(const std::string& path, DataFormat format) {
    switch (format) {
        case DataFormat::Jsonl: return load_jsonl(path);
        case DataFormat::Csv: return load_csv(path);
    }
    throw Error(Error::Kind::Internal, "unreachable data format");
}

void save_dataset_jsonl(const Dataset& dataset, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(Error::Kind::Io, "cannot write '" + path + "'");
    for (const Dataset::Cell& cell : dataset.cells()) {
        const HyperparameterSetting& setting =
            dataset.setting_by_id(cell.key.algorithm, cell.key.setting_id);
        json hypers = json::object();
        for (const auto& [name, value] : setting.entries()) {
            if (std::holds_alternative<double>(value)) {
                hypers[name] = std::get<double>(value);
            } else {
                hypers[name] = std::get<std::string>(value);
            }
        }
        for (std::size_t i = 0; i < cell.scores.size(); ++i) {
            json row = {{"algorithm", cell.key.algorithm},
                        {"environment", cell.key.environment},
                        {"hypers", hypers},
                        {"run", cell.runs[i]},
                        {"score", cell.scores[i]}};
            out << row.dump() << '\n';
        }
    }
    if (!out) throw Error(Error::Kind::Io, "short write to '" + path + "'");
}

}  // namespace chs
