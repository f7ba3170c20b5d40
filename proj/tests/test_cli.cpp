// Copyright 2026 The FAA-Sim Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "faa/cli.hpp"
#include "faa/datagen.hpp"
#include "faa/error.hpp"
#include "faa/experiment.hpp"

using namespace faa;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "faa_test_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Small enough to run in a few seconds.
json tiny_config(const fs::path& out) {
  return json{{"experiment", "compare_methods"},
              {"seed", 7},
              {"output_dir", out.string()},
              {"population", {{"users", 6}, {"dim", 6}, {"samples_per_user", 40}, {"separation", 6.0}, {"within_scale", 1.0}}},
              {"base_population", {{"users", 6}, {"samples_per_user", 40}}},
              {"net", {{"hidden", {16, 8}}, {"cut", 1}}},
              {"base_training", {{"epochs", 5}, {"batch_size", 32}, {"learning_rate", 0.01}, {"momentum", 0.9}}},
              {"faa", {{"M", 50}, {"epochs", 5}, {"batch_size", 32}, {"learning_rate", 0.01}, {"momentum", 0.9}}},
              {"fedavg", {{"rounds", 2}, {"local_epochs", 2}, {"batch_size", 16}}},
              {"split_learning", {{"epochs", 2}, {"batch_size", 16}}},
              {"eval", {{"enrolled", 3}}},
              {"qiid_sweep", {{"values", {1.0, 0.0}}}},
              {"unknown_ablation", {{"unknown_counts", {1, 3}}}}};
}

fs::path write_config(const fs::path& dir, const json& doc) {
  const auto p = dir / "config.json";
  std::ofstream(p) << doc.dump(2);
  return p;
}

int run_binary(const std::string& args) {
  const std::string cmd = std::string(FAA_SIM_BINARY) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("validate: shipped configs are clean") {
  for (const char* name : {"compare_methods", "qiid_sweep", "unknown_ablation", "single_run"}) {
    const auto parsed = cli::load_config(fs::path(FAA_CONFIG_DIR) / (std::string(name) + ".json"));
    CHECK(parsed.ok());
    CHECK(parsed.diagnostics.empty());
  }
}

TEST_CASE("validate: M = 0 gives exactly one diagnostic naming faa.M") {
  auto doc = tiny_config("out");
  doc["faa"]["M"] = 0;
  const auto parsed = cli::parse_config(doc);
  CHECK_FALSE(parsed.ok());
  REQUIRE(parsed.diagnostics.size() == 1);
  CHECK(parsed.diagnostics[0].path == "faa.M");
  CHECK(parsed.diagnostics[0].str().find("faa.M") != std::string::npos);
}

TEST_CASE("validate: several violations are all reported") {
  auto doc = tiny_config("out");
  doc["faa"]["M"] = -1;
  doc["eval"]["enrolled"] = 6;
  doc["net"]["cut"] = 9;
  doc["fedavg"]["participation"] = 1.5;
  const auto parsed = cli::parse_config(doc);
  CHECK(parsed.error_count() >= 4);
}

TEST_CASE("validate: unknown keys warn without failing") {
  auto doc = tiny_config("out");
  doc["faa"]["temperature"] = 2;
  doc["notes"] = "x";
  const auto parsed = cli::parse_config(doc);
  CHECK(parsed.ok());
  CHECK(parsed.error_count() == 0);
  CHECK(parsed.diagnostics.size() == 2);
  for (const auto& d : parsed.diagnostics) CHECK(d.severity == cli::Diagnostic::Severity::warning);
}

TEST_CASE("validate: parse errors carry line and column") {
  const auto parsed = cli::parse_config_text("{\n  \"seed\": 1,\n  \"faa\": {\"M\": }\n}\n");
  CHECK_FALSE(parsed.ok());
  REQUIRE(parsed.diagnostics.size() == 1);
  CHECK(parsed.diagnostics[0].message.find("line 3") != std::string::npos);
  CHECK(parsed.diagnostics[0].message.find("column") != std::string::npos);
}

TEST_CASE("overrides: dotted paths replace config values") {
  auto doc = tiny_config("out");
  const std::vector<std::string> ov{"--faa.M=123", "--eval.threshold_mode=validation", "--net.hidden=[4,4]"};
  const auto parsed = cli::parse_config_text(doc.dump(), ov);
  REQUIRE(parsed.ok());
  CHECK(parsed.config->faa.samples_per_user == 123);
  CHECK(parsed.config->eval.threshold_mode == eval::ThresholdMode::validation);
  CHECK(parsed.config->net.hidden == std::vector<std::size_t>{4, 4});
  const std::vector<std::string> bad{"--faa.M"};
  CHECK_THROWS_AS(cli::apply_overrides(doc, bad), Error);
}

TEST_CASE("config echo: parse(to_json(c)) reproduces c") {
  const auto parsed = cli::parse_config(tiny_config("out"));
  REQUIRE(parsed.ok());
  const auto echoed = cli::to_json(*parsed.config);
  const auto again = cli::parse_config(echoed);
  REQUIRE(again.ok());
  CHECK(again.diagnostics.empty());
  CHECK(cli::to_json(*again.config) == echoed);
}

TEST_CASE("run: compare_methods writes every artifact, and a manifest re-run reproduces the report") {
  const auto dir = scratch("run");
  const auto out = dir / "nested" / "out";
  const auto cfg_path = write_config(dir, tiny_config(out));
  std::ostringstream log, err;
  REQUIRE(cli::run(cfg_path, {}, log, err) == cli::Exit::ok);
  const auto report = json::parse(read_file(out / "report.json"));
  for (const char* m : {"faa", "fedavg", "split_learning", "oneclass"}) {
    CHECK(report["methods"].contains(m));
    CHECK(fs::exists(out / (std::string("per_user_") + m + ".csv")));
  }
  CHECK(fs::exists(out / "transcript_faa.json"));
  const auto manifest = json::parse(read_file(out / "manifest.json"));
  CHECK(manifest["seed"] == 7);
  CHECK(manifest["version"] == std::string(cli::kVersion));
  CHECK(manifest.contains("wall_time_seconds"));

  auto echoed = manifest["config"];
  const auto out2 = dir / "rerun";
  echoed["output_dir"] = out2.string();
  const auto cfg2 = dir / "echo.json";
  std::ofstream(cfg2) << echoed.dump();
  REQUIRE(cli::run(cfg2, {}, log, err) == cli::Exit::ok);
  CHECK(read_file(out2 / "report.json") == read_file(out / "report.json"));
  CHECK(read_file(out2 / "transcript_faa.json") == read_file(out / "transcript_faa.json"));
}

TEST_CASE("run: invalid config and unwritable output exit 2") {
  const auto dir = scratch("bad");
  auto doc = tiny_config(dir / "out");
  doc["faa"]["M"] = 0;
  std::ostringstream log, err;
  CHECK(cli::run(write_config(dir, doc), {}, log, err) == cli::Exit::invalid_config);
  CHECK(err.str().find("faa.M") != std::string::npos);

  // A regular file where a parent directory should be.
  std::ofstream(dir / "blocker") << "x";
  const auto cfg = write_config(dir, tiny_config(dir / "blocker" / "out"));
  CHECK(cli::run(cfg, {}, log, err) == cli::Exit::invalid_config);
}

TEST_CASE("binary: exit codes and version") {
  const auto dir = scratch("binary");
  const auto good = write_config(dir, tiny_config(dir / "out"));
  CHECK(run_binary("--version") == 0);
  CHECK(run_binary("validate " + good.string()) == 0);
  CHECK(run_binary("validate " + good.string() + " --faa.M=0") == 2);
  CHECK(run_binary("validate " + (dir / "missing.json").string()) == 2);
  CHECK(run_binary("validate " + good.string() + " stray") == 2);
}

TEST_CASE("export-features: writes a loadable CSV for each split") {
  const auto dir = scratch("export");
  const auto cfg = write_config(dir, tiny_config(dir / "out"));
  std::ostringstream err;
  const auto pop = dir / "pop.csv";
  REQUIRE(cli::export_features(cfg, {}, pop, cli::FeatureSplit::population, err) == cli::Exit::ok);
  const auto d = data::load_features(pop);
  CHECK(d.size() == 6 * 40);
  CHECK(d.dim() == 6);
  CHECK(d == data::gen_population(experiment::population_spec(*cli::load_config(cfg).config)));

  const auto test = dir / "test.csv";
  REQUIRE(cli::export_features(cfg, {}, test, cli::FeatureSplit::test, err) == cli::Exit::ok);
  CHECK(data::load_features(test).size() == 6 * 20);
  CHECK(run_binary("export-features " + cfg.string() + " -o " + (dir / "base.csv").string() + " --split base") == 0);
  CHECK(data::load_features(dir / "base.csv").size() == 6 * 40);
  CHECK_FALSE(cli::feature_split_from_string("validation"));
}

TEST_CASE("experiment: sweep and ablation shapes") {
  auto doc = tiny_config("out");
  const auto cfg = *cli::parse_config(doc).config;
  const auto wb = experiment::prepare(cfg);
  CHECK(wb.enrolled_ids.size() == 3);
  CHECK(wb.unknown_ids.size() == 3);
  const auto curve = experiment::qiid_sweep(cfg, wb);
  CHECK(curve.size() == 2);
  CHECK(curve[0].measured_qiid == 1.0);
  CHECK(curve[1].measured_qiid == 0.0);
  const auto csv = experiment::curve_csv(curve);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);

  const auto rows = experiment::unknown_count_ablation(cfg, wb);
  CHECK(rows.size() == 2);
  CHECK(rows[0].num_unknown == 1);
  CHECK(rows[1].num_unknown == 3);

  auto bad = cfg;
  bad.ablation.unknown_counts = {0};
  CHECK_THROWS_AS(experiment::unknown_count_ablation(bad, wb), InputError);
  bad.ablation.unknown_counts = {4};
  CHECK_THROWS_AS(experiment::unknown_count_ablation(bad, wb), InputError);
}
