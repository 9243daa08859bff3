#include "chs/cli.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "chs/charts.hpp"
#include "chs/error.hpp"
#include "chs/manifest.hpp"
#include "chs/serialize.hpp"
#include "chs/simulate.hpp"
#include "chs/synthetic.hpp"

namespace chs {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

DataFormat resolve_format(const std::string& format, const std::string& path) {
    if (format == "auto") {
        return fs::path(path).extension() == ".csv" ? DataFormat::Csv : DataFormat::Jsonl;
    }
    return data_format_from_string(format);
}

// Shared --data/--format options.
struct DataArgs {
    std::string path;
    std::string format = "auto";

    void attach(CLI::App* cmd) {
        cmd->add_option("--data", path, "input results file")->required();
        cmd->add_option("--format", format, "jsonl, csv or auto (by extension)")
            ->check(CLI::IsMember({"auto", "jsonl", "csv"}));
    }
    Dataset load() const { return load_dataset(path, resolve_format(format, path)); }
};

// Study configuration resolved from defaults, then config file, then flags,
// then the CHS_SEED environment variable.
struct StudyArgs {
    std::string config_path;
    std::optional<std::string> procedure;
    std::optional<int> n_tune, n_eval, n_experiments, subset_size, n_boot;
    std::optional<std::uint64_t> master_seed;
    std::optional<std::string> pooling_policy;
    std::optional<double> confidence_level;
    int workers = 0;

    void attach(CLI::App* cmd, bool with_procedure = true) {
        cmd->add_option("--config", config_path, "JSON config file (flat key/value)");
        if (with_procedure) {
            procedure.emplace();
            cmd->add_option("--procedure", *procedure, "chs, per-env, worst-case or subset-chs")
                ->check(CLI::IsMember({"chs", "per-env", "worst-case", "subset-chs"}));
        }
        n_tune.emplace();
        cmd->add_option("--n-tune", *n_tune, "runs per cell for selection");
        n_eval.emplace();
        cmd->add_option("--n-eval", *n_eval, "runs per cell for re-evaluation");
        n_experiments.emplace();
        cmd->add_option("--n-experiments", *n_experiments, "number of simulated experiments");
        subset_size.emplace();
        cmd->add_option("--subset-size", *subset_size, "tuning environments per experiment");
        master_seed.emplace();
        cmd->add_option("--seed", *master_seed, "master seed");
        pooling_policy.emplace();
        cmd->add_option("--pooling-policy", *pooling_policy,
                        "full-dataset or provided-subsample")
            ->check(CLI::IsMember({"full-dataset", "provided-subsample"}));
        confidence_level.emplace();
        cmd->add_option("--confidence-level", *confidence_level, "CI level in (0,1)");
        n_boot.emplace();
        cmd->add_option("--n-boot", *n_boot, "bootstrap resamples for point CIs");
        cmd->add_option("--workers", workers, "worker threads (0 = hardware)");
    }

    struct Resolved {
        ExperimentConfig exp;
        int n_boot = 1000;
        int workers = 1;
    };

    Resolved resolve(const CLI::App* cmd) const {
        Resolved r;
        if (!config_path.empty()) apply_file(r);
        auto used = [&](const char* flag) { return cmd->count(flag) > 0; };
        if (procedure && used("--procedure")) r.exp.procedure = procedure_from_string(*procedure);
        if (used("--n-tune")) r.exp.n_tune = *n_tune;
        if (used("--n-eval")) r.exp.n_eval = *n_eval;
        if (used("--n-experiments")) r.exp.n_experiments = *n_experiments;
        if (used("--subset-size")) r.exp.subset_size = *subset_size;
        if (used("--seed")) r.exp.master_seed = *master_seed;
        if (used("--pooling-policy")) {
            r.exp.pooling_policy = pooling_policy_from_string(*pooling_policy);
        }
        if (used("--confidence-level")) r.exp.confidence_level = *confidence_level;
        if (used("--n-boot")) r.n_boot = *n_boot;
        if (const char* env_seed = std::getenv("CHS_SEED")) {
            char* end = nullptr;
            const unsigned long long v = std::strtoull(env_seed, &end, 10);
            if (end == env_seed || *end != '\0') {
                throw Error(Error::Kind::Config,
                            std::string("CHS_SEED is not an integer: '") + env_seed + "'");
            }
            r.exp.master_seed = v;
        }
        r.workers = workers > 0 ? workers
                                : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
        return r;
    }

private:
    void apply_file(Resolved& r) const {
        std::ifstream in(config_path);
        if (!in) throw Error(Error::Kind::Io, "cannot open config '" + config_path + "'");
        json doc;
        try {
            doc = json::parse(in);
        } catch (const json::parse_error& e) {
            throw Error(Error::Kind::Config, config_path + ": " + e.what());
        }
        if (!doc.is_object()) {
            throw Error(Error::Kind::Config, config_path + ": config must be a JSON object");
        }
        for (const auto& [key, value] : doc.items()) {
            try {
                if (key == "procedure") {
                    r.exp.procedure = procedure_from_string(value.get<std::string>());
                } else if (key == "n_tune") {
                    r.exp.n_tune = value.get<int>();
                } else if (key == "n_eval") {
                    r.exp.n_eval = value.get<int>();
                } else if (key == "n_experiments") {
                    r.exp.n_experiments = value.get<int>();
                } else if (key == "subset_size") {
                    r.exp.subset_size = value.get<int>();
                } else if (key == "master_seed") {
                    r.exp.master_seed = value.get<std::uint64_t>();
                } else if (key == "pooling_policy") {
                    r.exp.pooling_policy = pooling_policy_from_string(value.get<std::string>());
                } else if (key == "confidence_level") {
                    r.exp.confidence_level = value.get<double>();
                } else if (key == "n_boot") {
                    r.n_boot = value.get<int>();
                } else {
                    throw Error(Error::Kind::Config,
                                config_path + ": unknown config key '" + key + "'");
                }
            } catch (const json::exception& e) {
                throw Error(Error::Kind::Config,
                            config_path + ": bad value for '" + key + "': " + e.what());
            }
        }
    }
};

RunManifest make_manifest(const std::string& command, json config, std::uint64_t seed,
                          const std::vector<std::string>& inputs) {
    RunManifest manifest;
    manifest.command = command;
    manifest.config = std::move(config);
    manifest.master_seed = seed;
    for (const std::string& path : inputs) manifest.input_digests[path] = digest_file(path);
    manifest.timestamp = utc_timestamp();
    return manifest;
}

std::string csv_num(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

void write_study_outputs(const StudyReport& report, const std::string& outdir) {
    const fs::path out(outdir);
    write_file_atomic((out / "report.json").string(), to_json(report).dump(2) + "\n");

    std::ostringstream overall;
    overall << "algorithm,mean,lower,upper\n";
    for (const auto& [algo, s] : report.overall_summary) {
        overall << algo << "," << csv_num(s.mean) << "," << csv_num(s.ci.lower) << ","
                << csv_num(s.ci.upper) << "\n";
    }
    write_file_atomic((out / "tables" / "overall.csv").string(), overall.str());

    std::ostringstream per_env;
    per_env << "algorithm,environment,mean,lower,upper\n";
    for (const auto& [algo, envs] : report.per_env_summary) {
        for (const auto& [env, s] : envs) {
            per_env << algo << "," << env << "," << csv_num(s.mean) << "," << csv_num(s.ci.lower)
                    << "," << csv_num(s.ci.upper) << "\n";
        }
    }
    write_file_atomic((out / "tables" / "per_env.csv").string(), per_env.str());

    std::ostringstream ordering;
    ordering << "ranking,frequency\n";
    for (const auto& [ranking, freq] : report.ordering_frequency) {
        ordering << ranking << "," << csv_num(freq) << "\n";
    }
    write_file_atomic((out / "tables" / "ordering_frequency.csv").string(), ordering.str());

    std::ostringstream failures;
    failures << "scope,failure_rate,mean_pairwise_inversions\n";
    failures << "overall," << csv_num(report.failure_rate_overall) << ","
             << csv_num(report.mean_inversions_overall) << "\n";
    for (const auto& [env, rate] : report.failure_rate_per_env) {
        failures << env << "," << csv_num(rate) << ","
                 << csv_num(report.mean_inversions_per_env.at(env)) << "\n";
    }
    write_file_atomic((out / "tables" / "failure_rates.csv").string(), failures.str());

    if (report.config.procedure == Procedure::SubsetChs) {
        std::ostringstream subsets;
        subsets << "experiment,environments\n";
        for (std::size_t i = 0; i < report.subsets.size(); ++i) {
            subsets << i << ",";
            for (std::size_t j = 0; j < report.subsets[i].size(); ++j) {
                if (j > 0) subsets << '|';
                subsets << report.subsets[i][j];
            }
            subsets << "\n";
        }
        write_file_atomic((out / "tables" / "subsets.csv").string(), subsets.str());
    }

    std::vector<BarGroup> groups;
    for (const auto& [algo, envs] : report.per_env_summary) {
        for (const auto& [env, s] : envs) groups.push_back(BarGroup{env, algo, s.mean, s.ci});
    }
    for (const auto& [algo, s] : report.overall_summary) {
        groups.push_back(BarGroup{"Overall", algo, s.mean, s.ci});
    }
    emit_bar_chart(std::move(groups), (out / "charts" / "scores.svg").string(),
                   (out / "tables" / "scores.csv").string());
}

int cmd_ingest_check(const DataArgs& data) {
    const Dataset ds = data.load();
    std::size_t min_runs = 0, max_runs = 0;
    for (const Dataset::Cell& cell : ds.cells()) {
        if (min_runs == 0 || cell.scores.size() < min_runs) min_runs = cell.scores.size();
        max_runs = std::max(max_runs, cell.scores.size());
    }
    json settings = json::object();
    for (const std::string& algo : ds.algorithms()) {
        settings[algo] = ds.settings(algo).size();
    }
    const json summary{{"algorithms", ds.algorithms()},   {"environments", ds.environments()},
                       {"settings_per_algorithm", settings}, {"cells", ds.n_cells()},
                       {"records", ds.n_records()},       {"runs_per_cell_min", min_runs},
                       {"runs_per_cell_max", max_runs}};
    std::cout << summary.dump(2) << "\n";
    return 0;
}

int cmd_normalize(const DataArgs& data, const std::string& out_path) {
    const Dataset ds = data.load();
    const NormalizedView view = build_pools(ds, PoolingPolicy::FullDataset);
    std::ostringstream csv;
    csv << "algorithm,environment,setting,n_runs,normalized_mean\n";
    for (const Dataset::Cell& cell : ds.cells()) {
        csv << cell.key.algorithm << "," << cell.key.environment << "," << cell.key.setting_id
            << "," << cell.scores.size() << "," << csv_num(normalized_cell_mean(view, cell.key))
            << "\n";
    }
    if (out_path.empty()) {
        std::cout << csv.str();
    } else {
        write_file_atomic(out_path, csv.str());
    }
    return 0;
}

int cmd_select(const DataArgs& data, const std::string& procedure_name,
               const std::string& algorithm, const std::string& environment,
               const std::vector<std::string>& tuning_envs) {
    const Dataset ds = data.load();
    const Procedure procedure = procedure_from_string(procedure_name);
    const NormalizedView view = build_pools(ds, PoolingPolicy::FullDataset);

    std::vector<std::string> algorithms;
    if (algorithm.empty()) {
        algorithms = ds.algorithms();
    } else {
        algorithms.push_back(algorithm);
    }

    json results = json::object();
    for (const std::string& algo : algorithms) {
        SelectionResult result;
        switch (procedure) {
            case Procedure::Chs: result = select_chs(view, algo, nullptr); break;
            case Procedure::WorstCase: result = select_worst_case(view, algo, nullptr); break;
            case Procedure::SubsetChs:
                if (tuning_envs.empty()) {
                    throw Error(Error::Kind::Config, "subset-chs requires --tuning-envs");
                }
                result = select_subset_chs(view, algo, tuning_envs, nullptr);
                break;
            case Procedure::PerEnv:
                result = environment.empty()
                             ? select_per_env_all(ds, algo, nullptr)
                             : select_per_env(ds, algo, environment, nullptr);
                break;
        }
        results[algo] = to_json(result);
    }
    std::cout << results.dump(2) << "\n";
    return 0;
}

int cmd_simulate(const DataArgs& data, const StudyArgs::Resolved& resolved,
                 const std::string& outdir, const std::string& command) {
    const Dataset ds = data.load();
    const StudyReport report = command == "subset-study"
                                   ? subset_study(ds, resolved.exp, resolved.workers)
                                   : run_study(ds, resolved.exp, resolved.workers);
    write_study_outputs(report, outdir);

    json config = to_json(resolved.exp);
    config["n_boot"] = resolved.n_boot;
    config["workers"] = resolved.workers;
    config["data"] = data.path;
    RunManifest manifest =
        make_manifest(command, config, resolved.exp.master_seed, {data.path});
    write_manifest(manifest, (fs::path(outdir) / "manifest.json").string());
    return 0;
}

int cmd_bias(const DataArgs& data, const StudyArgs::Resolved& resolved, int n_reps,
             const std::string& outdir) {
    const Dataset ds = data.load();
    const BiasReport report =
        estimate_bias(ds, resolved.exp.procedure, resolved.exp.n_tune, n_reps,
                      resolved.exp.master_seed, resolved.exp.pooling_policy, resolved.workers);
    const fs::path out(outdir);
    write_file_atomic((out / "report.json").string(), to_json(report).dump(2) + "\n");

    std::ostringstream csv;
    csv << "algorithm,scope,bias_normalized,bias_raw\n";
    for (const auto& [algo, entry] : report.algorithms) {
        for (const auto& [env, bias] : entry.per_env) {
            csv << algo << "," << env << "," << csv_num(bias) << ","
                << csv_num(entry.per_env_raw.at(env)) << "\n";
        }
        csv << algo << ",overall," << csv_num(entry.overall) << ",\n";
    }
    write_file_atomic((out / "tables" / "bias.csv").string(), csv.str());

    json config = to_json(resolved.exp);
    config["n_reps"] = n_reps;
    config["workers"] = resolved.workers;
    config["data"] = data.path;
    write_manifest(make_manifest("bias", config, resolved.exp.master_seed, {data.path}),
                   (out / "manifest.json").string());
    return 0;
}

int cmd_drop(const DataArgs& data, const StudyArgs::Resolved& resolved, int n_reps,
             const std::string& outdir) {
    const Dataset ds = data.load();
    const DropReport report =
        performance_drop(ds, resolved.exp.n_tune, n_reps, resolved.exp.master_seed,
                         resolved.exp.confidence_level, resolved.exp.pooling_policy,
                         resolved.workers);
    const fs::path out(outdir);
    write_file_atomic((out / "report.json").string(), to_json(report).dump(2) + "\n");

    std::ostringstream csv;
    csv << "algorithm,environment,mean_drop,lower,upper\n";
    std::vector<BarGroup> groups;
    for (const auto& [algo, envs] : report.drops) {
        for (const auto& [env, s] : envs) {
            csv << algo << "," << env << "," << csv_num(s.mean) << "," << csv_num(s.ci.lower)
                << "," << csv_num(s.ci.upper) << "\n";
            groups.push_back(BarGroup{env, algo, s.mean, s.ci});
        }
    }
    write_file_atomic((out / "tables" / "drop.csv").string(), csv.str());
    emit_bar_chart(std::move(groups), (out / "charts" / "drop.svg").string(),
                   (out / "tables" / "drop_chart.csv").string());

    json config = to_json(resolved.exp);
    config["n_reps"] = n_reps;
    config["workers"] = resolved.workers;
    config["data"] = data.path;
    write_manifest(make_manifest("drop", config, resolved.exp.master_seed, {data.path}),
                   (out / "manifest.json").string());
    return 0;
}

int cmd_dist(const DataArgs& data, const std::string& algorithm, const std::string& environment,
             const std::string& setting_id, std::optional<double> bandwidth,
             std::size_t grid_size, const std::string& outdir) {
    const Dataset ds = data.load();
    std::vector<double> samples;
    std::string title;
    if (!setting_id.empty()) {
        samples = ds.cell_scores(CellKey{algorithm, environment, setting_id});
        title = algorithm + " on " + environment + " (" + setting_id + ")";
    } else {
        for (const HyperparameterSetting& setting : ds.settings(algorithm)) {
            const auto& scores = ds.cell_scores(CellKey{algorithm, environment, setting.id()});
            samples.insert(samples.end(), scores.begin(), scores.end());
        }
        title = algorithm + " on " + environment + " (all settings)";
    }
    const DensityCurve curve = kde(samples, bandwidth, grid_size);

    const fs::path out(outdir);
    emit_density_chart(curve, title, (out / "charts" / "density.svg").string(),
                       (out / "tables" / "density.csv").string());
    const json meta{{"algorithm", algorithm},
                    {"environment", environment},
                    {"setting", setting_id},
                    {"bandwidth", curve.bandwidth},
                    {"grid_size", grid_size},
                    {"n_samples", samples.size()}};
    write_file_atomic((out / "report.json").string(), meta.dump(2) + "\n");
    write_manifest(make_manifest("dist", meta, 0, {data.path}),
                   (out / "manifest.json").string());
    return 0;
}

int cmd_synth(const std::string& preset_name, bool list, std::optional<int> runs,
              std::optional<std::uint64_t> seed, const std::string& out_path) {
    if (list) {
        for (const SyntheticStudySpec& spec : preset_instances()) {
            std::cout << spec.name << "\n";
        }
        return 0;
    }
    SyntheticStudySpec spec = preset_instance(preset_name);
    if (runs) spec.runs_per_cell = *runs;
    if (seed) spec.seed = *seed;
    const Dataset ds = generate_dataset(spec);
    save_dataset_jsonl(ds, out_path);

    // Oracle sidecar: closed-form means per cell.
    json raw = json::object(), normalized = json::object();
    for (const auto& [key, dist] : spec.cell_distributions) {
        raw[key.algorithm][key.environment][key.setting_id] = analytic_mean(dist);
        normalized[key.algorithm][key.environment][key.setting_id] =
            analytic_normalized_mean(spec, key);
    }
    const json oracle{{"preset", spec.name},
                      {"seed", spec.seed},
                      {"runs_per_cell", spec.runs_per_cell},
                      {"calibration", spec.calibration},
                      {"analytic_means", raw},
                      {"analytic_normalized_means", normalized}};
    const std::string oracle_path = out_path + ".oracle.json";
    write_file_atomic(oracle_path, oracle.dump(2) + "\n");

    const json config{{"preset", spec.name},
                      {"runs_per_cell", spec.runs_per_cell},
                      {"out", out_path},
                      {"oracle", oracle_path}};
    write_manifest(make_manifest("synth", config, spec.seed, {}), out_path + ".manifest.json");
    std::cerr << "wrote " << ds.n_records() << " records to " << out_path << "\n";
    return 0;
}

int cmd_report_study(const std::string& study_path, const std::string& outdir) {
    std::ifstream in(study_path);
    if (!in) throw Error(Error::Kind::Io, "cannot open '" + study_path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(Error::Kind::Parse, study_path + ": " + e.what());
    }
    if (!doc.contains("algorithms")) {
        throw Error(Error::Kind::Parse, study_path + ": not a study report");
    }
    std::vector<BarGroup> groups;
    for (const auto& [algo, entry] : doc["algorithms"].items()) {
        const auto& overall = entry.at("overall");
        groups.push_back(BarGroup{
            "Overall", algo, overall.at("mean").get<double>(),
            Interval{overall.at("ci").at("lower").get<double>(),
                     overall.at("ci").at("upper").get<double>(),
                     overall.at("ci").at("level").get<double>()}});
        for (const auto& [env, s] : entry.at("per_env").items()) {
            groups.push_back(BarGroup{
                env, algo, s.at("mean").get<double>(),
                Interval{s.at("ci").at("lower").get<double>(),
                         s.at("ci").at("upper").get<double>(),
                         s.at("ci").at("level").get<double>()}});
        }
    }
    const fs::path out(outdir);
    emit_bar_chart(std::move(groups), (out / "charts" / "scores.svg").string(),
                   (out / "tables" / "scores.csv").string());
    const json config{{"study", study_path}};
    write_manifest(make_manifest("report", config, 0, {study_path}),
                   (out / "manifest.json").string());
    return 0;
}

int cmd_report_sensitivity(const DataArgs& data, const std::string& hyper,
                           const std::string& algorithm, int n_boot, double level,
                           std::uint64_t seed, const std::string& outdir) {
    const Dataset ds = data.load();
    const NormalizedView view = build_pools(ds, PoolingPolicy::FullDataset);

    // Group the algorithm's settings by the numeric value of the named
    // hyperparameter; each (environment, value) point averages the
    // normalized run scores of all matching cells.
    std::map<std::string, std::map<double, std::vector<double>>> scores_by_env_value;
    for (const HyperparameterSetting& setting : ds.settings(algorithm)) {
        std::optional<double> value;
        for (const auto& [name, v] : setting.entries()) {
            if (name != hyper) continue;
            if (!std::holds_alternative<double>(v)) {
                throw Error(Error::Kind::Validation,
                            "hyperparameter '" + hyper + "' has non-numeric value '" +
                                canonical_value_text(v) + "'");
            }
            value = std::get<double>(v);
        }
        if (!value) {
            throw Error(Error::Kind::Validation, "setting '" + setting.id() +
                                                     "' has no hyperparameter '" + hyper + "'");
        }
        for (const std::string& env : ds.environments()) {
            const CellKey key{algorithm, env, setting.id()};
            const Pool& pool = view.pool(env);
            for (double raw : ds.cell_scores(key)) {
                scores_by_env_value[env][*value].push_back(cdf_normalize(raw, pool));
            }
        }
    }

    std::map<std::string, std::vector<SensitivityPoint>> series;
    std::uint64_t counter = 0;
    for (const auto& [env, by_value] : scores_by_env_value) {
        for (const auto& [value, scores] : by_value) {
            RngStream rng = make_stream(seed, rng_tag::kBootstrap, counter++, 0);
            SensitivityPoint point;
            point.x = value;
            point.mean = mean(scores);
            point.interval = scores.size() >= 2 ? percentile_ci(scores, level, n_boot, rng)
                                                : Interval{point.mean, point.mean, level};
            series[env].push_back(point);
        }
    }

    const fs::path out(outdir);
    emit_sensitivity_curve(series, (out / "charts" / "sensitivity.svg").string(),
                           (out / "tables" / "sensitivity.csv").string());
    const json config{{"hyper", hyper},     {"algorithm", algorithm}, {"n_boot", n_boot},
                      {"level", level},     {"seed", seed},           {"data", data.path}};
    write_manifest(make_manifest("report", config, seed, {data.path}),
                   (out / "manifest.json").string());
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& argv) {
    CLI::App app{"Cross-environment hyperparameter benchmark evaluation engine"};
    app.require_subcommand(1);

    // ingest-check
    auto* c_ingest = app.add_subcommand("ingest-check", "load a results file and print a summary");
    DataArgs ingest_data;
    ingest_data.attach(c_ingest);

    // normalize
    auto* c_normalize =
        app.add_subcommand("normalize", "dump normalized cell means as CSV");
    DataArgs normalize_data;
    normalize_data.attach(c_normalize);
    std::string normalize_out;
    c_normalize->add_option("--out", normalize_out, "output CSV path (default stdout)");

    // select
    auto* c_select = app.add_subcommand("select", "run a selection procedure on the full data");
    DataArgs select_data;
    select_data.attach(c_select);
    std::string select_procedure = "chs", select_algorithm, select_environment;
    std::vector<std::string> select_tuning_envs;
    c_select->add_option("--procedure", select_procedure, "selection procedure")
        ->check(CLI::IsMember({"chs", "per-env", "worst-case", "subset-chs"}));
    c_select->add_option("--algorithm", select_algorithm, "restrict to one algorithm");
    c_select->add_option("--environment", select_environment, "environment for per-env");
    c_select->add_option("--tuning-envs", select_tuning_envs, "environments for subset-chs")
        ->delimiter(',');

    // simulate / subset-study
    auto* c_simulate = app.add_subcommand("simulate", "run a simulated-experiment study");
    DataArgs simulate_data;
    simulate_data.attach(c_simulate);
    StudyArgs simulate_args;
    simulate_args.attach(c_simulate);
    std::string simulate_out;
    c_simulate->add_option("--out", simulate_out, "output directory")->required();

    auto* c_subset = app.add_subcommand("subset-study", "study with per-experiment env subsets");
    DataArgs subset_data;
    subset_data.attach(c_subset);
    StudyArgs subset_args;
    subset_args.attach(c_subset, /*with_procedure=*/false);
    std::string subset_out;
    c_subset->add_option("--out", subset_out, "output directory")->required();

    // bias
    auto* c_bias = app.add_subcommand("bias", "selection bias of a procedure vs full data");
    DataArgs bias_data;
    bias_data.attach(c_bias);
    StudyArgs bias_args;
    bias_args.attach(c_bias);
    int bias_reps = 1000;
    c_bias->add_option("--n-reps", bias_reps, "tuning replicates");
    std::string bias_out;
    c_bias->add_option("--out", bias_out, "output directory")->required();

    // drop
    auto* c_drop = app.add_subcommand("drop", "performance drop of chs vs per-env optima");
    DataArgs drop_data;
    drop_data.attach(c_drop);
    StudyArgs drop_args;
    drop_args.attach(c_drop, /*with_procedure=*/false);
    int drop_reps = 1000;
    c_drop->add_option("--n-reps", drop_reps, "tuning replicates");
    std::string drop_out;
    c_drop->add_option("--out", drop_out, "output directory")->required();

    // dist
    auto* c_dist = app.add_subcommand("dist", "kernel density of a cell's raw scores");
    DataArgs dist_data;
    dist_data.attach(c_dist);
    std::string dist_algorithm, dist_environment, dist_setting;
    double dist_bandwidth = 0.0;
    std::size_t dist_grid = 401;
    c_dist->add_option("--algorithm", dist_algorithm)->required();
    c_dist->add_option("--environment", dist_environment)->required();
    c_dist->add_option("--setting", dist_setting, "setting id (default: all settings pooled)");
    c_dist->add_option("--bandwidth", dist_bandwidth, "kernel bandwidth (default: Silverman)");
    c_dist->add_option("--grid-size", dist_grid, "grid points");
    std::string dist_out;
    c_dist->add_option("--out", dist_out, "output directory")->required();

    // synth
    auto* c_synth = app.add_subcommand("synth", "generate a synthetic preset dataset");
    std::string synth_preset, synth_out;
    bool synth_list = false;
    int synth_runs = 0;
    std::uint64_t synth_seed = 0;
    c_synth->add_option("--preset", synth_preset, "preset name");
    c_synth->add_flag("--list", synth_list, "list preset names");
    c_synth->add_option("--runs", synth_runs, "override runs per cell");
    c_synth->add_option("--seed", synth_seed, "override generation seed");
    c_synth->add_option("--out", synth_out, "output JSONL path");

    // report
    auto* c_report = app.add_subcommand("report", "re-emit charts from results");
    DataArgs report_data;
    report_data.attach(c_report);
    c_report->get_option("--data")->required(false);
    std::string report_study, report_sensitivity, report_algorithm, report_out;
    int report_nboot = 1000;
    double report_level = 0.95;
    std::uint64_t report_seed = 0;
    c_report->add_option("--study", report_study, "existing report.json to chart");
    c_report->add_option("--sensitivity", report_sensitivity,
                         "hyperparameter name for sensitivity curves");
    c_report->add_option("--algorithm", report_algorithm, "algorithm for sensitivity curves");
    c_report->add_option("--n-boot", report_nboot, "bootstrap resamples");
    c_report->add_option("--level", report_level, "CI level");
    c_report->add_option("--seed", report_seed, "bootstrap seed");
    c_report->add_option("--out", report_out, "output directory")->required();

    std::vector<const char*> raw;
    raw.reserve(argv.size());
    for (const std::string& a : argv) raw.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(raw.size()), raw.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            std::cout << app.help();
            return 0;
        }
        std::cerr << e.what() << "\n\n" << app.help();
        return 1;
    }

    try {
        if (c_ingest->parsed()) return cmd_ingest_check(ingest_data);
        if (c_normalize->parsed()) return cmd_normalize(normalize_data, normalize_out);
        if (c_select->parsed()) {
            return cmd_select(select_data, select_procedure, select_algorithm,
                              select_environment, select_tuning_envs);
        }
        if (c_simulate->parsed()) {
            return cmd_simulate(simulate_data, simulate_args.resolve(c_simulate), simulate_out,
                                "simulate");
        }
        if (c_subset->parsed()) {
            auto resolved = subset_args.resolve(c_subset);
            resolved.exp.procedure = Procedure::SubsetChs;
            return cmd_simulate(subset_data, resolved, subset_out, "subset-study");
        }
        if (c_bias->parsed()) {
            return cmd_bias(bias_data, bias_args.resolve(c_bias), bias_reps, bias_out);
        }
        if (c_drop->parsed()) {
            return cmd_drop(drop_data, drop_args.resolve(c_drop), drop_reps, drop_out);
        }
        if (c_dist->parsed()) {
            std::optional<double> bandwidth;
            if (c_dist->count("--bandwidth") > 0) bandwidth = dist_bandwidth;
            return cmd_dist(dist_data, dist_algorithm, dist_environment, dist_setting, bandwidth,
                            dist_grid, dist_out);
        }
        if (c_synth->parsed()) {
            if (!synth_list && (synth_preset.empty() || synth_out.empty())) {
                throw Error(Error::Kind::Config, "synth requires --preset and --out (or --list)");
            }
            std::optional<int> runs;
            if (c_synth->count("--runs") > 0) runs = synth_runs;
            std::optional<std::uint64_t> seed;
            if (c_synth->count("--seed") > 0) seed = synth_seed;
            return cmd_synth(synth_preset, synth_list, runs, seed, synth_out);
        }
        if (c_report->parsed()) {
            const bool study_mode = !report_study.empty();
            const bool sensitivity_mode = !report_sensitivity.empty();
            if (study_mode == sensitivity_mode) {
                throw Error(Error::Kind::Config,
                            "report requires exactly one of --study or --sensitivity");
            }
            if (study_mode) return cmd_report_study(report_study, report_out);
            if (report_data.path.empty() || report_algorithm.empty()) {
                throw Error(Error::Kind::Config,
                            "report --sensitivity requires --data and --algorithm");
            }
            return cmd_report_sensitivity(report_data, report_sensitivity, report_algorithm,
                                          report_nboot, report_level, report_seed, report_out);
        }
        throw Error(Error::Kind::Internal, "no subcommand dispatched");
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.kind() == Error::Kind::Internal ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace chs
