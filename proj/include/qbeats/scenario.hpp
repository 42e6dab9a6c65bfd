#ifndef QBEATS_SCENARIO_HPP
#define QBEATS_SCENARIO_HPP

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "qbeats/spectra.hpp"

namespace qbeats {

enum class ScenarioKind { spontaneous_emission, resonance_fluorescence, custom };
enum class InitialState { excited_superposition, ground_superposition, explicit_vector };
enum class OutputFormat { csv, json };

std::string to_string(ScenarioKind k);
std::string to_string(InitialState s);
std::string to_string(OutputFormat f);

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::custom;
  SystemParams params;
  double filter_bandwidth = 0.0;
  std::vector<double> nus;
  std::vector<double> times;
  InitialState initial = InitialState::excited_superposition;
  Vec8 initial_vector = Vec8::Zero();  // used when initial == explicit_vector
  std::string output_path = "spectrum";
  OutputFormat format = OutputFormat::csv;
  bool force_numeric = false;  // spontaneous emission: bypass the closed form
  int threads = 1;

  BlochVector initial_state() const;
  nlohmann::json echo() const;  // round-trips through parse_config
};

// Parses a JSON configuration document. Recognized keys: kind, omega, Delta,
// delta, gamma, filter, nu_min, nu_max, nu_step, times, initial, output.
// Defaults: gamma = 1, branching 1/3 - 2/3, and the figure grids of the
// matching preset when a grid is not given. Unknown keys, non-increasing
// grids, and constraint violations (e.g. omega != 0 under spontaneous
// emission) raise ConfigError with the offending field.
ScenarioConfig parse_config(const std::string& text);

// Built-in presets: fig1b, fig2, fig3, fig4a, fig4c.
ScenarioConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();

// Everything needed to reproduce an output grid byte for byte.
struct RunManifest {
  nlohmann::json config_echo;
  std::string library_version;
  nlohmann::json tolerances;
  double duration_seconds = 0.0;
  std::string values_checksum;  // FNV-1a over the formatted CSV rows
  std::size_t nu_count = 0;
  std::size_t time_count = 0;

  nlohmann::json to_json() const;
};

struct ScenarioResult {
  SpectrumGrid grid;
  RunManifest manifest;
};

// Runs the scenario. Spontaneous emission uses the closed-form spectrum
// unless force_numeric is set; everything else goes through the numeric
// Eberly-Wodkiewicz pipeline.
ScenarioResult run_scenario(const ScenarioConfig& cfg,
                            const NumericsConfig& numerics = {});

// Writes the grid (CSV: header nu,t,S, row-major with nu outer, 12
// significant digits, LF endings; JSON: {meta, nus, times, values}) plus the
// manifest sidecar <path>.manifest.json. Returns the written file paths.
std::vector<std::filesystem::path> emit(const SpectrumGrid& grid,
                                        const RunManifest& manifest,
                                        const std::filesystem::path& out_path,
                                        OutputFormat format);

// Serializes the grid values exactly as the CSV writer does (used for the
// manifest checksum and the determinism tests).
std::string format_csv(const SpectrumGrid& grid);

// Beat-frequency summary with the recommended filter window
// Gamma in (omega_beat/4, omega2 - omega1).
nlohmann::json report_beats(const SystemParams& params);
std::string report_beats_text(const SystemParams& params);

}  // namespace qbeats

#endif
