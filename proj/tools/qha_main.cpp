#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "qha/errors.hpp"

#include "config.hpp"
#include "plot.hpp"
#include "scenario.hpp"
#include "validate.hpp"
#include "version.hpp"

namespace {

struct ScenarioArgs {
  std::string config_file;
  std::vector<std::string> sets;
  std::string out_dir;
};

int run_kind(const std::string& kind, const ScenarioArgs& args) {
  try {
    std::vector<std::string> overrides = args.sets;
    overrides.push_back("run.kind=" + kind);
    if (!args.out_dir.empty()) overrides.push_back("run.out=" + args.out_dir);
    const auto config = qha::cli::load_config(args.config_file, overrides);
    const auto manifest = qha::cli::run_scenario(config);
    for (const auto& a : manifest.assertions)
      std::cout << (a.passed ? "[PASS] " : "[FAIL] ") << kind << ":" << a.name << " value "
                << a.value << " threshold " << a.threshold << "\n";
    std::cout << "outputs in " << config.out_dir.string() << "\n";
    return manifest.ok ? 0 : 1;
  } catch (const qha::ConfigError& e) {
    std::cerr << kind << ": configuration error: " << e.what() << "\n";
    return 2;
  } catch (const qha::Error& e) {
    std::cerr << kind << ": run failed: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"1-D quantum dynamics workbench: wavefunction, trajectory and "
               "phase-space representations with cross-checks"};
  app.set_version_flag("--version", qha::cli::kVersion);
  app.require_subcommand(1);

  const std::vector<std::string> kinds = {"schrodinger", "trajectories", "ensemble",
                                          "ck-oracle",   "kostin",       "deterministic-limit"};
  std::map<std::string, ScenarioArgs> args;
  for (const auto& kind : kinds) {
    auto* sub = app.add_subcommand(kind, "run the " + kind + " scenario");
    auto& a = args[kind];
    sub->add_option("--config", a.config_file, "key=value configuration file");
    sub->add_option("--set", a.sets, "override, e.g. --set time.dt=1e-3")->take_all();
    sub->add_option("--out", a.out_dir, "output directory");
  }

  std::string level = "quick";
  std::string validate_out;
  auto* validate = app.add_subcommand("validate", "run the cross-validation suite");
  validate->add_option("--level", level, "quick or full")
      ->check(CLI::IsMember({"quick", "full"}));
  validate->add_option("--out", validate_out, "directory for the report and scratch runs");

  std::string plot_dir;
  auto* plot = app.add_subcommand("plot", "emit gnuplot data for an existing run directory");
  plot->add_option("--dir", plot_dir, "run directory holding CSV outputs")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    for (const auto& kind : kinds)
      if (app.got_subcommand(kind)) return run_kind(kind, args[kind]);

    if (app.got_subcommand(validate)) {
      std::vector<std::string> overrides = {"run.kind=validate", "validate.level=" + level};
      if (!validate_out.empty()) overrides.push_back("run.out=" + validate_out);
      const auto config = qha::cli::load_config("", overrides);
      const auto manifest = qha::cli::run_scenario(config);
      std::ifstream table(config.out_dir / "validation.txt");
      std::cout << table.rdbuf();
      return manifest.ok ? 0 : 1;
    }

    if (app.got_subcommand(plot)) {
      const auto written = qha::cli::emit_plot_data(plot_dir);
      for (const auto& p : written) std::cout << p.string() << "\n";
      return 0;
    }
  } catch (const qha::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const qha::Error& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
