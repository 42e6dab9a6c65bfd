// Command-line front end for the quantum-beat spectrum library.
//
//   qbeats run <config.json> [--numeric] [--out DIR] [--format csv|json] [--threads N]
//   qbeats preset fig1b|fig2|fig3|fig4a|fig4c [--out DIR] [...]
//   qbeats beats --omega X --Delta Y --delta Z [--gamma G] [--json]
//
// Exit codes: 0 success, 2 configuration error, 3 numerical convergence
// failure, 1 anything else.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "qbeats/errors.hpp"
#include "qbeats/scenario.hpp"
#include "qbeats/version.hpp"

namespace {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw qbeats::ConfigError(path.string(), "cannot read config file");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct RunOptions {
  std::string out_dir;
  std::string format;
  bool numeric = false;
  int threads = 1;
};

void apply_run_options(qbeats::ScenarioConfig& cfg, const RunOptions& opts) {
  if (!opts.format.empty()) {
    if (opts.format == "csv") {
      cfg.format = qbeats::OutputFormat::csv;
    } else if (opts.format == "json") {
      cfg.format = qbeats::OutputFormat::json;
    } else {
      throw qbeats::ConfigError("--format", "expected csv or json");
    }
  }
  cfg.force_numeric = opts.numeric;
  if (opts.threads < 1) {
    throw qbeats::ConfigError("--threads", "must be >= 1");
  }
  cfg.threads = opts.threads;
  if (!opts.out_dir.empty()) {
    cfg.output_path =
        (fs::path(opts.out_dir) / fs::path(cfg.output_path).filename()).string();
  }
}

int execute(qbeats::ScenarioConfig cfg) {
  const qbeats::ScenarioResult result = qbeats::run_scenario(cfg);
  const auto written =
      qbeats::emit(result.grid, result.manifest, cfg.output_path, cfg.format);
  for (const auto& path : written) {
    std::cout << "wrote " << path.string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-dependent spectra of quantum beats"};
  app.set_version_flag("--version", qbeats::kVersion);
  app.require_subcommand(1);

  RunOptions opts;
  std::string config_path;
  std::string preset_name;

  CLI::App* run = app.add_subcommand("run", "run a scenario from a config file");
  run->add_option("config", config_path, "JSON scenario document")->required();
  run->add_flag("--numeric", opts.numeric,
                "force the numeric pipeline for spontaneous emission");
  run->add_option("--out", opts.out_dir, "output directory");
  run->add_option("--format", opts.format, "csv or json");
  run->add_option("--threads", opts.threads, "parallel grid evaluation");

  CLI::App* preset = app.add_subcommand("preset", "run a built-in figure preset");
  preset->add_option("name", preset_name, "fig1b, fig2, fig3, fig4a, fig4c")
      ->required();
  preset->add_flag("--numeric", opts.numeric,
                   "force the numeric pipeline for spontaneous emission");
  preset->add_option("--out", opts.out_dir, "output directory");
  preset->add_option("--format", opts.format, "csv or json");
  preset->add_option("--threads", opts.threads, "parallel grid evaluation");

  double omega = 0.0, big_delta = 0.0, small_delta = 0.0, gamma = 1.0;
  bool beats_json = false;
  CLI::App* beats = app.add_subcommand("beats", "report beat frequencies");
  beats->add_option("--omega", omega, "Rabi frequency (units of gamma)");
  beats->add_option("--Delta", big_delta, "laser detuning");
  beats->add_option("--delta", small_delta, "Zeeman difference splitting");
  beats->add_option("--gamma", gamma, "total decay rate");
  beats->add_flag("--json", beats_json, "JSON output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (run->parsed()) {
      qbeats::ScenarioConfig cfg = qbeats::parse_config(read_file(config_path));
      apply_run_options(cfg, opts);
      return execute(std::move(cfg));
    }
    if (preset->parsed()) {
      qbeats::ScenarioConfig cfg = qbeats::preset_config(preset_name);
      apply_run_options(cfg, opts);
      return execute(std::move(cfg));
    }
    if (beats->parsed()) {
      const auto params =
          qbeats::SystemParams::make(omega, big_delta, small_delta, gamma);
      if (beats_json) {
        std::cout << qbeats::report_beats(params).dump(2) << "\n";
      } else {
        std::cout << qbeats::report_beats_text(params);
      }
      return 0;
    }
  } catch (const qbeats::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const qbeats::QuadratureNotConverged& e) {
    std::cerr << "convergence failure: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
