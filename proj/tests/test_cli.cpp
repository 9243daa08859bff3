#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "chs/charts.hpp"
#include "chs/cli.hpp"
#include "chs/dataset.hpp"
#include "chs/error.hpp"
#include "chs/manifest.hpp"
#include "chs/synthetic.hpp"

using namespace chs;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::size_t count_occurrences(const std::string& text, const std::string& needle) {
    std::size_t count = 0, pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        ++count;
        pos += needle.size();
    }
    return count;
}

// run_cli with captured stdout.
struct CliResult {
    int code;
    std::string out;
};

CliResult run(std::vector<std::string> args) {
    args.insert(args.begin(), "chs");
    std::ostringstream captured;
    std::streambuf* old = std::cout.rdbuf(captured.rdbuf());
    const int code = run_cli(args);
    std::cout.rdbuf(old);
    return {code, captured.str()};
}

std::string small_dataset_file(const fs::path& dir) {
    SyntheticStudySpec spec = preset_instance("bimodal-overlap");
    spec.runs_per_cell = 60;
    const Dataset ds = generate_dataset(spec);
    const std::string path = (dir / "data.jsonl").string();
    save_dataset_jsonl(ds, path);
    return path;
}

}  // namespace

TEST_CASE("select subcommand prints a JSON result and exits 0") {
    const fs::path dir = temp_dir("chs_cli_select");
    const std::string data = small_dataset_file(dir);
    const CliResult result = run({"select", "--procedure", "chs", "--data", data});
    REQUIRE(result.code == 0);
    const json parsed = json::parse(result.out);
    CHECK(parsed.contains("spiky"));
    CHECK(parsed["spiky"]["procedure"] == "chs");
    CHECK(parsed["spiky"]["chosen"].contains("env_a"));
}

TEST_CASE("unknown flags exit 1 with usage on stderr") {
    CHECK(run({"select", "--no-such-flag"}).code == 1);
    CHECK(run({"no-such-subcommand"}).code == 1);
    CHECK(run({"--help"}).code == 0);
}

TEST_CASE("user errors exit 1") {
    CHECK(run({"select", "--data", "/nonexistent/never.jsonl"}).code == 1);
    const fs::path dir = temp_dir("chs_cli_err");
    const std::string data = small_dataset_file(dir);
    CHECK(run({"select", "--data", data, "--procedure", "subset-chs"}).code == 1);
}

TEST_CASE("ingest-check summarizes a file") {
    const fs::path dir = temp_dir("chs_cli_ingest");
    const std::string data = small_dataset_file(dir);
    const CliResult result = run({"ingest-check", "--data", data});
    REQUIRE(result.code == 0);
    const json parsed = json::parse(result.out);
    CHECK(parsed["cells"] == 8);
    CHECK(parsed["records"] == 480);
}

TEST_CASE("normalize dumps one CSV row per cell") {
    const fs::path dir = temp_dir("chs_cli_norm");
    const std::string data = small_dataset_file(dir);
    const CliResult result = run({"normalize", "--data", data});
    REQUIRE(result.code == 0);
    CHECK(count_occurrences(result.out, "\n") == 9);  // header + 8 cells
    CHECK(result.out.rfind("algorithm,environment,setting,n_runs,normalized_mean", 0) == 0);
}

TEST_CASE("simulate writes a full output set and is reproducible") {
    const fs::path dir = temp_dir("chs_cli_sim");
    const std::string data = small_dataset_file(dir);
    const std::string out1 = (dir / "run1").string();
    const std::string out2 = (dir / "run2").string();

    const std::vector<std::string> base{"simulate",       "--data",   data,  "--n-tune", "3",
                                        "--n-eval",       "5",        "--n-experiments", "50",
                                        "--seed",         "99",       "--workers", "2"};
    auto with_out = [&](const std::string& out) {
        auto args = base;
        args.push_back("--out");
        args.push_back(out);
        return args;
    };
    REQUIRE(run(with_out(out1)).code == 0);
    REQUIRE(run(with_out(out2)).code == 0);

    for (const char* file :
         {"report.json", "manifest.json", "tables/overall.csv", "tables/per_env.csv",
          "tables/ordering_frequency.csv", "tables/failure_rates.csv", "tables/scores.csv",
          "charts/scores.svg"}) {
        CHECK(fs::exists(fs::path(out1) / file));
    }
    CHECK(read_file(fs::path(out1) / "report.json") ==
          read_file(fs::path(out2) / "report.json"));

    const json report = json::parse(read_file(fs::path(out1) / "report.json"));
    CHECK(report["config"]["n_experiments"] == 50);
    CHECK(report["config"].contains("master_seed"));
    CHECK_FALSE(report["config"].contains("workers"));  // execution detail, not config

    const json manifest = json::parse(read_file(fs::path(out1) / "manifest.json"));
    CHECK(manifest["command"] == "simulate");
    CHECK(manifest["tool_version"] == std::string(kToolVersion));
    CHECK(manifest["inputs"].contains(data));
    // no temp files left behind by the atomic writer
    CHECK_FALSE(fs::exists(fs::path(out1) / "report.json.tmp"));
}

TEST_CASE("config file values are overridden by flags and CHS_SEED") {
    const fs::path dir = temp_dir("chs_cli_cfg");
    const std::string data = small_dataset_file(dir);
    const std::string cfg_path = (dir / "config.json").string();
    {
        std::ofstream cfg(cfg_path);
        cfg << R"({"n_tune": 7, "n_eval": 4, "n_experiments": 20, "master_seed": 123})";
    }
    const std::string out = (dir / "out").string();
    setenv("CHS_SEED", "777", 1);
    const CliResult result = run({"simulate", "--data", data, "--config", cfg_path, "--n-tune",
                                  "2", "--out", out, "--workers", "1"});
    unsetenv("CHS_SEED");
    REQUIRE(result.code == 0);
    const json report = json::parse(read_file(fs::path(out) / "report.json"));
    CHECK(report["config"]["n_tune"] == 2);        // flag beats file
    CHECK(report["config"]["n_eval"] == 4);        // file value kept
    CHECK(report["config"]["master_seed"] == 777);  // CHS_SEED wins

    {
        std::ofstream cfg(cfg_path);
        cfg << R"({"bogus_key": 1})";
    }
    CHECK(run({"simulate", "--data", data, "--config", cfg_path, "--out", out}).code == 1);
}

TEST_CASE("bias and drop write reports and tables") {
    const fs::path dir = temp_dir("chs_cli_bias");
    const std::string data = small_dataset_file(dir);
    const std::string bias_out = (dir / "bias").string();
    REQUIRE(run({"bias", "--data", data, "--procedure", "per-env", "--n-tune", "3", "--n-reps",
                 "40", "--seed", "5", "--out", bias_out, "--workers", "2"})
                .code == 0);
    const json bias = json::parse(read_file(fs::path(bias_out) / "report.json"));
    CHECK(bias["procedure"] == "per-env");
    CHECK(bias["algorithms"].contains("spiky"));
    CHECK(fs::exists(fs::path(bias_out) / "tables" / "bias.csv"));

    const std::string drop_out = (dir / "drop").string();
    REQUIRE(run({"drop", "--data", data, "--n-tune", "3", "--n-reps", "40", "--seed", "5",
                 "--out", drop_out})
                .code == 0);
    CHECK(fs::exists(fs::path(drop_out) / "tables" / "drop.csv"));
    CHECK(fs::exists(fs::path(drop_out) / "charts" / "drop.svg"));
}

TEST_CASE("subset-study records the drawn subsets") {
    const fs::path dir = temp_dir("chs_cli_subset");
    SyntheticStudySpec spec = preset_instance("heterogeneous");
    spec.runs_per_cell = 40;
    const Dataset ds = generate_dataset(spec);
    const std::string data = (dir / "het.jsonl").string();
    save_dataset_jsonl(ds, data);

    const std::string out = (dir / "out").string();
    REQUIRE(run({"subset-study", "--data", data, "--subset-size", "2", "--n-tune", "5",
                 "--n-eval", "5", "--n-experiments", "30", "--seed", "1", "--out", out,
                 "--workers", "2"})
                .code == 0);
    const json report = json::parse(read_file(fs::path(out) / "report.json"));
    CHECK(report["subsets"].size() == 30);
    CHECK(report["subsets"][0].size() == 2);
    CHECK(fs::exists(fs::path(out) / "tables" / "subsets.csv"));
}

TEST_CASE("synth writes the dataset and its oracle sidecar") {
    const fs::path dir = temp_dir("chs_cli_synth");
    const std::string out = (dir / "gen.jsonl").string();
    REQUIRE(run({"synth", "--preset", "dominance", "--runs", "25", "--out", out}).code == 0);

    const Dataset ds = load_dataset(out, DataFormat::Jsonl);
    CHECK(ds.n_records() == 8 * 25);

    const json oracle = json::parse(read_file(out + ".oracle.json"));
    CHECK(oracle["preset"] == "dominance");
    CHECK(oracle["analytic_means"]["strong"]["env_a"]["alpha=0.1"] == 10.0);
    CHECK(oracle["analytic_normalized_means"].contains("weak"));

    CHECK(run({"synth", "--list"}).code == 0);
    CHECK(run({"synth", "--preset", "nope", "--out", out}).code == 1);
}

TEST_CASE("dist emits a density curve with CSV sidecar") {
    const fs::path dir = temp_dir("chs_cli_dist");
    const std::string data = small_dataset_file(dir);
    const std::string out = (dir / "out").string();
    REQUIRE(run({"dist", "--data", data, "--algorithm", "spiky", "--environment", "env_a",
                 "--setting", "alpha=0.01", "--grid-size", "301", "--out", out})
                .code == 0);
    const std::string csv = read_file(fs::path(out) / "tables" / "density.csv");
    CHECK(count_occurrences(csv, "\n") == 302);  // header + 301 grid points
    const std::string svg = read_file(fs::path(out) / "charts" / "density.svg");
    CHECK(count_occurrences(svg, "<polyline") == 1);
}

TEST_CASE("report re-emits charts from an existing study report") {
    const fs::path dir = temp_dir("chs_cli_report");
    const std::string data = small_dataset_file(dir);
    const std::string sim_out = (dir / "sim").string();
    REQUIRE(run({"simulate", "--data", data, "--n-tune", "2", "--n-eval", "3",
                 "--n-experiments", "20", "--seed", "4", "--out", sim_out})
                .code == 0);
    const std::string rep_out = (dir / "rep").string();
    REQUIRE(run({"report", "--study", sim_out + "/report.json", "--out", rep_out}).code == 0);
    const std::string csv = read_file(fs::path(rep_out) / "tables" / "scores.csv");
    // 2 algorithms x (2 envs + Overall) = 6 rows + header
    CHECK(count_occurrences(csv, "\n") == 7);

    CHECK(run({"report", "--out", rep_out}).code == 1);  // neither mode picked
}

TEST_CASE("sensitivity curves require a numeric hyperparameter axis") {
    const fs::path dir = temp_dir("chs_cli_sens");

    DatasetBuilder builder;
    std::vector<HyperparameterSetting> settings;
    for (int k = -12; k <= -5; ++k) {
        settings.push_back(
            HyperparameterSetting({{"alpha", HyperValue{std::pow(2.0, k)}}}));
    }
    RngStream rng = make_stream(7);
    for (const char* env : {"x", "y"}) {
        for (const auto& setting : settings) {
            for (int run = 0; run < 5; ++run) {
                builder.add("m", env, setting, run, rng.next_normal());
            }
        }
    }
    const std::string data = (dir / "sweep.jsonl").string();
    save_dataset_jsonl(builder.finish(), data);

    const std::string out = (dir / "out").string();
    REQUIRE(run({"report", "--sensitivity", "alpha", "--algorithm", "m", "--data", data,
                 "--n-boot", "200", "--out", out})
                .code == 0);
    const std::string svg = read_file(fs::path(out) / "charts" / "sensitivity.svg");
    CHECK(count_occurrences(svg, "<polyline") == 2);     // one line per environment
    CHECK(count_occurrences(svg, "2^-12") >= 1);         // power-of-two labels
    const std::string csv = read_file(fs::path(out) / "tables" / "sensitivity.csv");
    CHECK(count_occurrences(csv, "\n") == 17);  // header + 2 envs x 8 points

    // text-valued hyperparameter: user error
    DatasetBuilder bad;
    bad.add("m", "x", HyperparameterSetting({{"mode", HyperValue{std::string("fast")}}}), 0, 1.0);
    bad.add("m", "x", HyperparameterSetting({{"mode", HyperValue{std::string("slow")}}}), 0, 2.0);
    const std::string bad_data = (dir / "bad.jsonl").string();
    save_dataset_jsonl(bad.finish(), bad_data);
    CHECK(run({"report", "--sensitivity", "mode", "--algorithm", "m", "--data", bad_data,
               "--out", out})
              .code == 1);
}

TEST_CASE("bar charts order groups deterministically and mirror the CSV") {
    const fs::path dir = temp_dir("chs_charts");
    std::vector<BarGroup> groups;
    for (const char* env : {"e1", "e2", "e3", "e4", "e5", "e6", "Overall"}) {
        for (const char* algo : {"a1", "a2", "a3", "a4"}) {
            groups.push_back(BarGroup{env, algo, 0.5, Interval{0.4, 0.6, 0.95}});
        }
    }
    const std::string svg_path = (dir / "chart.svg").string();
    const std::string csv_path = (dir / "chart.csv").string();
    emit_bar_chart(groups, svg_path, csv_path);

    const std::string svg = read_file(svg_path);
    CHECK(count_occurrences(svg, "<rect class=\"bar\"") == 28);
    CHECK(count_occurrences(svg, "<line class=\"errorbar\"") == 28);

    const std::string csv = read_file(csv_path);
    CHECK(count_occurrences(csv, "\n") == 29);
    CHECK(csv.find("Overall/a1,0.5,0.4,0.6") != std::string::npos);
    // Overall sorts before e1 bytewise; algorithms ascending within a group
    CHECK(csv.find("Overall/a1") < csv.find("e1/a1"));
    CHECK(csv.find("e1/a1") < csv.find("e1/a2"));

    CHECK_THROWS_AS(emit_bar_chart({}, svg_path, csv_path), Error);
}

TEST_CASE("sensitivity charts reject single-point series") {
    const fs::path dir = temp_dir("chs_charts2");
    std::map<std::string, std::vector<SensitivityPoint>> series;
    series["x"] = {SensitivityPoint{1.0, 0.5, Interval{0.4, 0.6, 0.95}}};
    CHECK_THROWS_AS(emit_sensitivity_curve(series, (dir / "s.svg").string(),
                                           (dir / "s.csv").string()),
                    Error);
}

TEST_CASE("fnv digests are stable") {
    CHECK(fnv1a64_hex("") == "cbf29ce484222325");
    CHECK(fnv1a64_hex("a") == "af63dc4c8601ec8c");
    CHECK(fnv1a64_hex("hello") != fnv1a64_hex("hellp"));
}
