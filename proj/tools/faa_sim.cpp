// Copyright 2026 The FAA-Sim Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end: run, validate, export-features.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "faa/cli.hpp"

namespace {

// Everything CLI11 did not consume must be a --dotted.path=value override.
bool collect_overrides(const CLI::App& sub, std::vector<std::string>& overrides) {
  for (const auto& extra : sub.remaining()) {
    if (extra.rfind("--", 0) != 0 || extra.find('=') == std::string::npos) {
      std::cerr << "error: unexpected argument '" << extra << "' (overrides look like --faa.M=500)\n";
      return false;
    }
    overrides.push_back(extra);
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated active authentication simulator"};
  app.set_version_flag("--version", std::string(faa::cli::kVersion));
  app.require_subcommand(1);

  std::string config;
  std::string out_path;
  std::string split = "population";

  auto* run = app.add_subcommand("run", "Run the experiment described by a JSON config");
  run->add_option("config", config, "Config file")->required();
  run->allow_extras();

  auto* validate = app.add_subcommand("validate", "Check a config and list every problem");
  validate->add_option("config", config, "Config file")->required();
  validate->allow_extras();

  auto* exp = app.add_subcommand("export-features", "Write generated samples as CSV");
  exp->add_option("config", config, "Config file")->required();
  exp->add_option("-o,--out", out_path, "Output CSV path")->required();
  exp->add_option("--split", split, "population, train, test or base")
      ->check(CLI::IsMember({"population", "train", "test", "base"}));
  exp->allow_extras();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(faa::cli::Exit::invalid_config);
  }

  std::vector<std::string> overrides;
  const CLI::App* active = app.get_subcommands().front();
  if (!collect_overrides(*active, overrides)) return static_cast<int>(faa::cli::Exit::invalid_config);

  faa::cli::Exit code = faa::cli::Exit::ok;
  if (active == run) {
    code = faa::cli::run(config, overrides, std::cout, std::cerr);
  } else if (active == validate) {
    code = faa::cli::validate(config, overrides, std::cout);
  } else {
    code = faa::cli::export_features(config, overrides, out_path, *faa::cli::feature_split_from_string(split), std::cerr);
  }
  return static_cast<int>(code);
}
