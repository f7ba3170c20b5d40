// Copyright 2026 The FAA-Sim Authors
// SPDX-License-Identifier: Apache-2.0

#include "faa/cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include "faa/error.hpp"

namespace faa::cli {

using nlohmann::json;
namespace fs = std::filesystem;

std::string Diagnostic::str() const {
  std::string out = severity == Severity::error ? "error: " : "warning: ";
  if (!path.empty() && message.rfind(path, 0) != 0) out += path + ": ";
  return out + message;
}

bool ParsedConfig::ok() const { return config.has_value() && error_count() == 0; }

std::size_t ParsedConfig::error_count() const {
  return static_cast<std::size_t>(std::count_if(diagnostics.begin(), diagnostics.end(), [](const Diagnostic& d) {
    return d.severity == Diagnostic::Severity::error;
  }));
}

namespace {

std::string join(const std::string& prefix, const std::string& key) { return prefix.empty() ? key : prefix + "." + key; }

// Walks one JSON object, converting known keys and remembering which were
// seen so the rest can be reported as unknown.
class Reader {
 public:
  Reader(const json* obj, std::string path, std::vector<Diagnostic>& diags)
      : obj_(obj), path_(std::move(path)), diags_(diags) {}

  Reader section(const std::string& key) {
    seen_.insert(key);
    const json* v = find(key);
    if (v && !v->is_object()) {
      error(join(path_, key), "must be an object");
      v = nullptr;
    }
    return Reader(v, join(path_, key), diags_);
  }

  bool has(const std::string& key) const { return find(key) != nullptr; }

  template <class T>
  void read(const std::string& key, T& out) {
    seen_.insert(key);
    const json* v = find(key);
    if (!v) return;
    const std::string path = join(path_, key);
    if (auto expected = convert(*v, out)) error(path, "must be " + *expected);
  }

  void finish() const {
    if (!obj_) return;
    for (const auto& [key, _] : obj_->items())
      if (!seen_.count(key))
        diags_.push_back({Diagnostic::Severity::warning, join(path_, key), "unknown key '" + join(path_, key) + "' ignored"});
  }

 private:
  const json* find(const std::string& key) const {
    if (!obj_) return nullptr;
    const auto it = obj_->find(key);
    return it == obj_->end() ? nullptr : &*it;
  }

  void error(const std::string& path, const std::string& msg) {
    diags_.push_back({Diagnostic::Severity::error, path, path + " " + msg});
  }

  static std::optional<std::string> convert(const json& v, int& out) {
    if (!v.is_number_integer()) return "an integer";
    const auto wide = v.get<std::int64_t>();
    if (wide < std::numeric_limits<int>::min() || wide > std::numeric_limits<int>::max()) return "a 32-bit integer";
    out = static_cast<int>(wide);
    return std::nullopt;
  }
  // Also covers the 64-bit seed.
  static std::optional<std::string> convert(const json& v, std::size_t& out) {
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) return "a non-negative integer";
    out = v.get<std::size_t>();
    return std::nullopt;
  }
  static std::optional<std::string> convert(const json& v, double& out) {
    if (!v.is_number()) return "a number";
    out = v.get<double>();
    return std::nullopt;
  }
  static std::optional<std::string> convert(const json& v, bool& out) {
    if (!v.is_boolean()) return "a boolean";
    out = v.get<bool>();
    return std::nullopt;
  }
  static std::optional<std::string> convert(const json& v, std::string& out) {
    if (!v.is_string()) return "a string";
    out = v.get<std::string>();
    return std::nullopt;
  }
  template <class T>
  static std::optional<std::string> convert(const json& v, std::vector<T>& out) {
    if (!v.is_array()) return "an array";
    std::vector<T> tmp(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
      if (auto e = convert(v[i], tmp[i])) return "an array whose elements are each " + *e;
    out = std::move(tmp);
    return std::nullopt;
  }

  const json* obj_;
  std::string path_;
  std::vector<Diagnostic>& diags_;
  std::set<std::string> seen_;
};

void read_population(Reader r, data::PopulationSpec& spec, bool allow_dim) {
  r.read("users", spec.num_users);
  if (allow_dim) r.read("dim", spec.dim);
  r.read("samples_per_user", spec.samples_per_user);
  r.read("separation", spec.separation);
  r.read("within_scale", spec.within_scale);
  r.finish();
}

void read_train(Reader& r, int& epochs, int& batch, double& lr, double& momentum) {
  r.read("epochs", epochs);
  r.read("batch_size", batch);
  r.read("learning_rate", lr);
  r.read("momentum", momentum);
}

}  // namespace

void apply_overrides(json& doc, std::span<const std::string> overrides) {
  for (const auto& raw : overrides) {
    std::string_view o = raw;
    if (o.rfind("--", 0) == 0) o.remove_prefix(2);
    const auto eq = o.find('=');
    if (eq == std::string_view::npos || eq == 0)
      throw InputError("override '" + raw + "' is not of the form --path=value");
    const std::string path(o.substr(0, eq));
    const std::string text(o.substr(eq + 1));
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;

    json* node = &doc;
    std::size_t start = 0;
    while (true) {
      const auto dot = path.find('.', start);
      const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
      if (key.empty()) throw InputError("override '" + raw + "' has an empty path component");
      if (!node->is_object()) throw InputError("override '" + raw + "' descends into a non-object");
      if (dot == std::string::npos) {
        (*node)[key] = value;
        break;
      }
      node = &(*node)[key];
      if (node->is_null()) *node = json::object();
      start = dot + 1;
    }
  }
}

std::vector<Diagnostic> validate_config(const experiment::ExperimentConfig& c) {
  std::vector<Diagnostic> d;
  auto fail = [&](const std::string& path, const std::string& msg) {
    d.push_back({Diagnostic::Severity::error, path, path + " " + msg});
  };
  auto positive = [&](const std::string& path, double v) {
    if (!(v > 0)) fail(path, "must be > 0");
  };
  auto momentum = [&](const std::string& path, double v) {
    if (!(v >= 0 && v < 1)) fail(path, "must lie in [0, 1)");
  };

  if (c.population.num_users < 3) fail("population.users", "must be >= 3");
  positive("population.dim", c.population.dim);
  if (c.population.samples_per_user < 2) fail("population.samples_per_user", "must be >= 2");
  if (!(c.population.separation >= 0)) fail("population.separation", "must be >= 0");
  positive("population.within_scale", c.population.within_scale);
  if (c.base_population.num_users < 2) fail("base_population.users", "must be >= 2");
  positive("base_population.samples_per_user", c.base_population.samples_per_user);
  if (!(c.base_population.separation >= 0)) fail("base_population.separation", "must be >= 0");
  positive("base_population.within_scale", c.base_population.within_scale);

  if (c.net.hidden.empty()) fail("net.hidden", "must list at least one hidden layer");
  for (std::size_t i = 0; i < c.net.hidden.size(); ++i)
    if (c.net.hidden[i] == 0) fail("net.hidden[" + std::to_string(i) + "]", "must be > 0");
  const std::size_t layers = c.net.hidden.size() + 1;
  if (c.net.cut == 0 || c.net.cut >= layers) fail("net.cut", "must lie in [1, " + std::to_string(layers - 1) + "]");

  if (c.base_training.epochs < 0) fail("base_training.epochs", "must be >= 0");
  positive("base_training.batch_size", c.base_training.batch_size);
  positive("base_training.learning_rate", c.base_training.learning_rate);
  momentum("base_training.momentum", c.base_training.momentum);

  positive("faa.M", c.faa.samples_per_user);
  positive("faa.epochs", c.faa.epochs);
  positive("faa.batch_size", c.faa.batch_size);
  positive("faa.learning_rate", c.faa.learning_rate);
  momentum("faa.momentum", c.faa.momentum);
  positive("faa.cov_reg_eps", c.faa.cov_reg_eps);

  if (c.fedavg.rounds < 0) fail("fedavg.rounds", "must be >= 0");
  positive("fedavg.local_epochs", c.fedavg.local_epochs);
  positive("fedavg.batch_size", c.fedavg.batch_size);
  positive("fedavg.learning_rate", c.fedavg.learning_rate);
  momentum("fedavg.momentum", c.fedavg.momentum);
  if (!(c.fedavg.participation > 0 && c.fedavg.participation <= 1)) fail("fedavg.participation", "must lie in (0, 1]");

  positive("split_learning.epochs", c.split.epochs);
  positive("split_learning.batch_size", c.split.batch_size);
  positive("split_learning.learning_rate", c.split.learning_rate);
  momentum("split_learning.momentum", c.split.momentum);
  if (c.split.cut == 0 || c.split.cut >= layers)
    fail("split_learning.cut", "must lie in [1, " + std::to_string(layers - 1) + "]");

  if (!(c.oneclass_reg_eps >= 0)) fail("oneclass.reg_eps", "must be >= 0");

  if (c.eval.enrolled < 2 || c.eval.enrolled >= c.population.num_users)
    fail("eval.enrolled", "must lie in [2, population.users - 1]");
  if (!(c.eval.train_fraction > 0 && c.eval.train_fraction < 1)) {
    fail("eval.train_fraction", "must lie in (0, 1)");
  } else {
    const auto n = c.population.samples_per_user;
    const auto n_train = static_cast<int>(c.eval.train_fraction * n);
    if (n_train < 1 || n - n_train < 1)
      fail("eval.train_fraction", "leaves a user without train or test samples");
  }

  if (c.sweep.values.empty()) fail("qiid_sweep.values", "must not be empty");
  for (std::size_t i = 0; i < c.sweep.values.size(); ++i)
    if (!(c.sweep.values[i] >= 0 && c.sweep.values[i] <= 1))
      fail("qiid_sweep.values[" + std::to_string(i) + "]", "must lie in [0, 1]");
  if (c.sweep.devices < 0) fail("qiid_sweep.devices", "must be >= 0");

  const int available = c.population.num_users - c.eval.enrolled;
  if (c.ablation.unknown_counts.empty()) fail("unknown_ablation.unknown_counts", "must not be empty");
  for (std::size_t i = 0; i < c.ablation.unknown_counts.size(); ++i) {
    const int n = c.ablation.unknown_counts[i];
    if (n < 1 || n > available)
      fail("unknown_ablation.unknown_counts[" + std::to_string(i) + "]",
           "must lie in [1, " + std::to_string(std::max(available, 1)) + "]");
  }
  if (c.output_dir.empty()) fail("output_dir", "must not be empty");
  return d;
}

ParsedConfig parse_config(const json& doc) {
  ParsedConfig out;
  if (!doc.is_object()) {
    out.diagnostics.push_back({Diagnostic::Severity::error, "", "config document must be a JSON object"});
    return out;
  }
  experiment::ExperimentConfig c;
  auto& diags = out.diagnostics;
  Reader root(&doc, "", diags);

  std::string kind;
  if (!root.has("experiment")) diags.push_back({Diagnostic::Severity::error, "experiment", "experiment is required"});
  root.read("experiment", kind);
  if (!kind.empty()) {
    if (auto k = experiment::kind_from_string(kind))
      c.kind = *k;
    else
      diags.push_back({Diagnostic::Severity::error, "experiment",
                       "experiment must be one of qiid_sweep, compare_methods, unknown_ablation, single_run"});
  }
  root.read("seed", c.seed);
  std::string output_dir = c.output_dir.string();
  root.read("output_dir", output_dir);
  c.output_dir = output_dir;

  read_population(root.section("population"), c.population, true);
  c.base_population.dim = c.population.dim;
  read_population(root.section("base_population"), c.base_population, false);

  {
    auto r = root.section("net");
    r.read("hidden", c.net.hidden);
    r.read("cut", c.net.cut);
    r.finish();
  }
  // Split learning cuts where the model is cut unless told otherwise.
  c.split.cut = c.net.cut;
  {
    auto r = root.section("base_training");
    read_train(r, c.base_training.epochs, c.base_training.batch_size, c.base_training.learning_rate,
               c.base_training.momentum);
    r.finish();
  }
  {
    auto r = root.section("faa");
    r.read("M", c.faa.samples_per_user);
    read_train(r, c.faa.epochs, c.faa.batch_size, c.faa.learning_rate, c.faa.momentum);
    r.read("cov_reg_eps", c.faa.cov_reg_eps);
    r.read("diagonal_covariance", c.faa.diagonal_covariance);
    r.finish();
  }
  {
    auto r = root.section("fedavg");
    r.read("rounds", c.fedavg.rounds);
    r.read("local_epochs", c.fedavg.local_epochs);
    r.read("batch_size", c.fedavg.batch_size);
    r.read("learning_rate", c.fedavg.learning_rate);
    r.read("momentum", c.fedavg.momentum);
    r.read("participation", c.fedavg.participation);
    r.finish();
  }
  {
    auto r = root.section("split_learning");
    read_train(r, c.split.epochs, c.split.batch_size, c.split.learning_rate, c.split.momentum);
    r.read("cut", c.split.cut);
    r.finish();
  }
  {
    auto r = root.section("oneclass");
    r.read("reg_eps", c.oneclass_reg_eps);
    r.finish();
  }
  {
    auto r = root.section("eval");
    r.read("enrolled", c.eval.enrolled);
    r.read("train_fraction", c.eval.train_fraction);
    std::string mode;
    r.read("threshold_mode", mode);
    if (!mode.empty()) {
      try {
        c.eval.threshold_mode = eval::threshold_mode_from_string(mode);
      } catch (const InputError&) {
        diags.push_back({Diagnostic::Severity::error, "eval.threshold_mode",
                         "eval.threshold_mode must be 'oracle' or 'validation'"});
      }
    }
    r.finish();
  }
  {
    auto r = root.section("qiid_sweep");
    r.read("values", c.sweep.values);
    r.read("devices", c.sweep.devices);
    r.finish();
  }
  {
    auto r = root.section("unknown_ablation");
    r.read("unknown_counts", c.ablation.unknown_counts);
    r.finish();
  }
  root.finish();

  if (out.error_count() == 0) {
    auto semantic = validate_config(c);
    diags.insert(diags.end(), semantic.begin(), semantic.end());
  }
  if (out.error_count() == 0) out.config = std::move(c);
  return out;
}

ParsedConfig parse_config_text(std::string_view text, std::span<const std::string> overrides) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t end = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    ParsedConfig out;
    std::string what = e.what();
    if (auto p = what.find("parse error"); p != std::string::npos) what = what.substr(p);
    out.diagnostics.push_back({Diagnostic::Severity::error, "",
                               "line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + what});
    return out;
  }
  try {
    apply_overrides(doc, overrides);
  } catch (const InputError& e) {
    ParsedConfig out;
    out.diagnostics.push_back({Diagnostic::Severity::error, "", e.what()});
    return out;
  }
  return parse_config(doc);
}

ParsedConfig load_config(const fs::path& path, std::span<const std::string> overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    ParsedConfig out;
    out.diagnostics.push_back({Diagnostic::Severity::error, "", "cannot read config file " + path.string()});
    return out;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), overrides);
}

json to_json(const experiment::ExperimentConfig& c) {
  auto pop = [](const data::PopulationSpec& s, bool with_dim) {
    json j{{"users", s.num_users},
           {"samples_per_user", s.samples_per_user},
           {"separation", s.separation},
           {"within_scale", s.within_scale}};
    if (with_dim) j["dim"] = s.dim;
    return j;
  };
  return {
      {"experiment", experiment::to_string(c.kind)},
      {"seed", c.seed},
      {"output_dir", c.output_dir.string()},
      {"population", pop(c.population, true)},
      {"base_population", pop(c.base_population, false)},
      {"net", {{"hidden", c.net.hidden}, {"cut", c.net.cut}}},
      {"base_training",
       {{"epochs", c.base_training.epochs},
        {"batch_size", c.base_training.batch_size},
        {"learning_rate", c.base_training.learning_rate},
        {"momentum", c.base_training.momentum}}},
      {"faa",
       {{"M", c.faa.samples_per_user},
        {"epochs", c.faa.epochs},
        {"batch_size", c.faa.batch_size},
        {"learning_rate", c.faa.learning_rate},
        {"momentum", c.faa.momentum},
        {"cov_reg_eps", c.faa.cov_reg_eps},
        {"diagonal_covariance", c.faa.diagonal_covariance}}},
      {"fedavg",
       {{"rounds", c.fedavg.rounds},
        {"local_epochs", c.fedavg.local_epochs},
        {"batch_size", c.fedavg.batch_size},
        {"learning_rate", c.fedavg.learning_rate},
        {"momentum", c.fedavg.momentum},
        {"participation", c.fedavg.participation}}},
      {"split_learning",
       {{"epochs", c.split.epochs},
        {"batch_size", c.split.batch_size},
        {"learning_rate", c.split.learning_rate},
        {"momentum", c.split.momentum},
        {"cut", c.split.cut}}},
      {"oneclass", {{"reg_eps", c.oneclass_reg_eps}}},
      {"eval",
       {{"enrolled", c.eval.enrolled},
        {"train_fraction", c.eval.train_fraction},
        {"threshold_mode", eval::to_string(c.eval.threshold_mode)}}},
      {"qiid_sweep", {{"values", c.sweep.values}, {"devices", c.sweep.devices}}},
      {"unknown_ablation", {{"unknown_counts", c.ablation.unknown_counts}}},
  };
}

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

// Creates `dir` if needed and checks a file can be written there.
std::optional<std::string> prepare_output_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) return "cannot create output_dir " + dir.string() + ": " + ec.message();
  const auto probe = dir / ".faa_write_probe";
  {
    std::ofstream out(probe, std::ios::trunc);
    if (!out) return "output_dir " + dir.string() + " is not writable";
  }
  fs::remove(probe, ec);
  return std::nullopt;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

json method_entry(const experiment::MethodRun& run) {
  json j = eval::to_json(run.report);
  if (run.transcript) j["transcript_totals"] = proto::to_json(*run.transcript)["totals"];
  return j;
}

void write_method(const fs::path& dir, const experiment::MethodRun& run, std::vector<std::string>& files) {
  const std::string csv = "per_user_" + run.name + ".csv";
  write_file(dir / csv, eval::per_user_csv(run.report));
  files.push_back(csv);
  if (run.transcript) {
    const std::string tr = "transcript_" + run.name + ".json";
    write_json(dir / tr, proto::to_json(*run.transcript));
    files.push_back(tr);
  }
}

}  // namespace

json run_experiment(const experiment::ExperimentConfig& cfg, std::ostream& log) {
  using experiment::Kind;
  const fs::path& dir = cfg.output_dir;
  fs::create_directories(dir);
  std::vector<std::string> files;
  json report{{"experiment", experiment::to_string(cfg.kind)},
              {"seed", cfg.seed},
              {"threshold_mode", eval::to_string(cfg.eval.threshold_mode)}};

  log << "preparing data and base model\n";
  const auto wb = experiment::prepare(cfg);

  switch (cfg.kind) {
    case Kind::compare_methods: {
      json methods = json::object();
      for (const auto& run : experiment::compare_methods(cfg, wb)) {
        log << run.name << ": mean ADA " << run.report.mean_ada << " (std " << run.report.std_ada << ")\n";
        methods[run.name] = method_entry(run);
        write_method(dir, run, files);
      }
      report["methods"] = methods;
      break;
    }
    case Kind::qiid_sweep: {
      const auto curve = experiment::qiid_sweep(cfg, wb);
      json rows = json::array();
      for (const auto& p : curve) {
        log << "qIID " << p.target_qiid << " (measured " << p.measured_qiid << "): mean ADA " << p.mean_ada << "\n";
        rows.push_back({{"target_qiid", p.target_qiid},
                        {"measured_qiid", p.measured_qiid},
                        {"mean_ada", p.mean_ada},
                        {"std_ada", p.std_ada}});
      }
      report["curve"] = rows;
      write_file(dir / "qiid_curve.csv", experiment::curve_csv(curve));
      files.push_back("qiid_curve.csv");
      break;
    }
    case Kind::unknown_ablation: {
      fedauth::AuthModel model;
      const auto run = experiment::run_faa(cfg, wb, &model);
      const auto rows = experiment::unknown_count_ablation(eval::auth_scorer(model), wb, cfg.ablation.unknown_counts,
                                                           cfg.eval.threshold_mode);
      json out = json::array();
      for (const auto& r : rows) {
        log << r.num_unknown << " unknown users: mean ADA " << r.mean_ada << "\n";
        out.push_back({{"num_unknown", r.num_unknown}, {"mean_ada", r.mean_ada}, {"std_ada", r.std_ada}});
      }
      report["ablation"] = out;
      report["methods"] = {{run.name, method_entry(run)}};
      write_method(dir, run, files);
      write_file(dir / "unknown_ablation.csv", experiment::ablation_csv(rows));
      files.push_back("unknown_ablation.csv");
      break;
    }
    case Kind::single_run: {
      fedauth::AuthModel model;
      const auto run = experiment::run_faa(cfg, wb, &model);
      log << run.name << ": mean ADA " << run.report.mean_ada << " (std " << run.report.std_ada << ")\n";
      report["methods"] = {{run.name, method_entry(run)}};
      write_method(dir, run, files);
      fedauth::save_auth_model(model, dir / "auth_model.json");
      files.push_back("auth_model.json");
      break;
    }
  }
  write_json(dir / "report.json", report);
  files.insert(files.begin(), "report.json");
  report["files"] = files;
  return report;
}

namespace {

void print_diagnostics(const ParsedConfig& parsed, std::ostream& out) {
  for (const auto& d : parsed.diagnostics) out << d.str() << "\n";
}

}  // namespace

Exit run(const fs::path& config_path, std::span<const std::string> overrides, std::ostream& out, std::ostream& err) {
  const auto parsed = load_config(config_path, overrides);
  print_diagnostics(parsed, err);
  if (!parsed.ok()) return Exit::invalid_config;
  const auto& cfg = *parsed.config;
  if (auto problem = prepare_output_dir(cfg.output_dir)) {
    err << "error: output_dir: " << *problem << "\n";
    return Exit::invalid_config;
  }

  const auto started_at = utc_timestamp();
  const auto t0 = std::chrono::steady_clock::now();
  json report;
  try {
    report = run_experiment(cfg, out);
  } catch (const std::exception& e) {
    err << "error: " << experiment::to_string(cfg.kind) << " failed: " << e.what() << "\n";
    return Exit::runtime_failure;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const json manifest{{"tool", "faa_sim"},
                      {"version", kVersion},
                      {"seed", cfg.seed},
                      {"config", to_json(cfg)},
                      {"outputs", report["files"]},
                      {"started_at", started_at},
                      {"wall_time_seconds", wall}};
  try {
    write_json(cfg.output_dir / "manifest.json", manifest);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return Exit::runtime_failure;
  }
  out << "wrote " << (cfg.output_dir / "report.json").string() << "\n";
  return Exit::ok;
}

Exit validate(const fs::path& config_path, std::span<const std::string> overrides, std::ostream& out) {
  const auto parsed = load_config(config_path, overrides);
  print_diagnostics(parsed, out);
  if (!parsed.ok()) return Exit::invalid_config;
  out << "config ok\n";
  return Exit::ok;
}

std::optional<FeatureSplit> feature_split_from_string(std::string_view s) {
  if (s == "population") return FeatureSplit::population;
  if (s == "train") return FeatureSplit::train;
  if (s == "test") return FeatureSplit::test;
  if (s == "base") return FeatureSplit::base;
  return std::nullopt;
}

Exit export_features(const fs::path& config_path, std::span<const std::string> overrides, const fs::path& out_path,
                     FeatureSplit split, std::ostream& err) {
  const auto parsed = load_config(config_path, overrides);
  print_diagnostics(parsed, err);
  if (!parsed.ok()) return Exit::invalid_config;
  const auto& cfg = *parsed.config;
  try {
    data::LabeledDataset ds;
    if (split == FeatureSplit::base) {
      ds = data::gen_base_dataset(experiment::base_population_spec(cfg));
    } else {
      ds = data::gen_population(experiment::population_spec(cfg));
      if (split != FeatureSplit::population) {
        auto [train, test] = data::split_per_class(ds, cfg.eval.train_fraction);
        ds = split == FeatureSplit::train ? std::move(train) : std::move(test);
      }
    }
    if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
    data::save_features(ds, out_path);
  } catch (const std::exception& e) {
    err << "error: export-features failed: " << e.what() << "\n";
    return Exit::runtime_failure;
  }
  return Exit::ok;
}

}  // namespace faa::cli
