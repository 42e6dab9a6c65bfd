#include "qbeats/scenario.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qbeats/errors.hpp"
#include "qbeats/version.hpp"

namespace qbeats {

namespace {

using nlohmann::json;

std::vector<double> uniform_grid(double lo, double hi, double step,
                                 const std::string& field) {
  if (!(step > 0.0)) throw ConfigError(field, "step must be > 0");
  if (!(hi >= lo)) throw ConfigError(field, "max must be >= min");
  const auto count = static_cast<std::size_t>(std::llround((hi - lo) / step)) + 1;
  std::vector<double> grid;
  grid.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double v = lo + static_cast<double>(i) * step;
    if (v > hi + 0.5 * step) break;
    grid.push_back(v);
  }
  if (grid.empty()) throw ConfigError(field, "empty grid");
  return grid;
}

void require_strictly_increasing(const std::vector<double>& v,
                                 const std::string& field) {
  if (v.empty()) throw ConfigError(field, "must be nonempty");
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) {
      throw ConfigError(field, "must be strictly increasing");
    }
  }
}

std::vector<double> fig2_times() {
  return {1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 6.0, 10.0, 15.0, 20.0};
}

std::vector<double> fig1b_times() { return uniform_grid(0.5, 14.0, 0.5, "times"); }

double get_number(const json& doc, const std::string& key, double fallback) {
  if (!doc.contains(key)) return fallback;
  if (!doc[key].is_number()) throw ConfigError(key, "expected a number");
  return doc[key].get<double>();
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

constexpr double kSqrtEps = 1e-12;

}  // namespace

std::string to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::spontaneous_emission: return "spontaneous-emission";
    case ScenarioKind::resonance_fluorescence: return "resonance-fluorescence";
    case ScenarioKind::custom: return "custom";
  }
  return "custom";
}

std::string to_string(InitialState s) {
  switch (s) {
    case InitialState::excited_superposition: return "excited-superposition";
    case InitialState::ground_superposition: return "ground-superposition";
    case InitialState::explicit_vector: return "explicit";
  }
  return "explicit";
}

std::string to_string(OutputFormat f) {
  return f == OutputFormat::csv ? "csv" : "json";
}

BlochVector ScenarioConfig::initial_state() const {
  switch (initial) {
    case InitialState::excited_superposition: return excited_superposition();
    case InitialState::ground_superposition: return ground_superposition();
    case InitialState::explicit_vector: {
      BlochVector q;
      q.q = initial_vector;
      return q;
    }
  }
  return excited_superposition();
}

json ScenarioConfig::echo() const {
  json doc;
  doc["kind"] = to_string(kind);
  doc["omega"] = params.rabi;
  doc["Delta"] = params.laser_detuning;
  doc["delta"] = params.zeeman_diff;
  doc["gamma"] = params.gamma;
  doc["filter"] = filter_bandwidth;
  doc["nu_min"] = nus.front();
  doc["nu_max"] = nus.back();
  doc["nu_step"] = nus.size() > 1 ? nus[1] - nus[0] : 1.0;
  doc["times"] = times;
  if (initial == InitialState::explicit_vector) {
    json vec = json::array();
    for (int i = 0; i < 8; ++i) {
      vec.push_back({initial_vector[i].real(), initial_vector[i].imag()});
    }
    doc["initial"] = vec;
  } else {
    doc["initial"] = to_string(initial);
  }
  doc["output"] = {{"path", output_path}, {"format", to_string(format)}};
  return doc;
}

ScenarioConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("", "document must be an object");

  static const char* allowed[] = {"kind",   "omega", "Delta",  "delta",
                                  "gamma",  "filter", "nu_min", "nu_max",
                                  "nu_step", "times", "initial", "output"};
  for (const auto& item : doc.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) throw ConfigError(item.key(), "unknown key");
  }

  ScenarioConfig cfg;

  if (!doc.contains("kind")) throw ConfigError("kind", "missing");
  if (!doc["kind"].is_string()) throw ConfigError("kind", "expected a string");
  const std::string kind = doc["kind"].get<std::string>();
  if (kind == "spontaneous-emission") {
    cfg.kind = ScenarioKind::spontaneous_emission;
  } else if (kind == "resonance-fluorescence") {
    cfg.kind = ScenarioKind::resonance_fluorescence;
  } else if (kind == "custom") {
    cfg.kind = ScenarioKind::custom;
  } else {
    throw ConfigError("kind", "expected spontaneous-emission, "
                              "resonance-fluorescence, or custom");
  }

  const double gamma = get_number(doc, "gamma", 1.0);
  const double omega = get_number(doc, "omega", 0.0);
  const double laser_detuning = get_number(doc, "Delta", 0.0);
  const double zeeman = get_number(doc, "delta", 0.0);
  if (cfg.kind == ScenarioKind::spontaneous_emission) {
    if (omega != 0.0) {
      throw ConfigError("omega", "spontaneous emission forces omega = 0");
    }
    if (laser_detuning != 0.0) {
      throw ConfigError("Delta", "spontaneous emission forces Delta = 0");
    }
  }
  try {
    cfg.params = SystemParams::make(omega, laser_detuning, zeeman, gamma);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("gamma", e.what());
  }

  if (!doc.contains("filter")) throw ConfigError("filter", "missing");
  if (!doc["filter"].is_number()) throw ConfigError("filter", "expected a number");
  cfg.filter_bandwidth = doc["filter"].get<double>();
  if (!(cfg.filter_bandwidth > 0.0)) {
    throw ConfigError("filter", "bandwidth must be > 0");
  }

  // Frequency grid: explicit bounds, or the preset grid of the scenario kind.
  const bool has_nu = doc.contains("nu_min") || doc.contains("nu_max") ||
                      doc.contains("nu_step");
  if (has_nu) {
    if (!doc.contains("nu_min") || !doc.contains("nu_max") ||
        !doc.contains("nu_step")) {
      throw ConfigError("nu_min", "nu_min, nu_max, nu_step must be given together");
    }
    cfg.nus = uniform_grid(get_number(doc, "nu_min", 0.0),
                           get_number(doc, "nu_max", 0.0),
                           get_number(doc, "nu_step", 0.0), "nu_step");
  } else if (cfg.kind == ScenarioKind::spontaneous_emission) {
    cfg.nus = uniform_grid(-6.0, 4.0, 0.025, "nu_step");
  } else if (cfg.kind == ScenarioKind::resonance_fluorescence) {
    cfg.nus = uniform_grid(-18.0, 18.0, 0.05, "nu_step");
  } else {
    throw ConfigError("nu_min", "custom scenarios must give the nu grid");
  }

  if (doc.contains("times")) {
    if (!doc["times"].is_array() || doc["times"].empty()) {
      throw ConfigError("times", "expected a nonempty array");
    }
    for (const auto& v : doc["times"]) {
      if (!v.is_number()) throw ConfigError("times", "expected numbers");
      cfg.times.push_back(v.get<double>());
    }
    require_strictly_increasing(cfg.times, "times");
    if (cfg.times.front() < 0.0) throw ConfigError("times", "must be >= 0");
  } else if (cfg.kind == ScenarioKind::spontaneous_emission) {
    cfg.times = fig1b_times();
  } else if (cfg.kind == ScenarioKind::resonance_fluorescence) {
    cfg.times = fig2_times();
  } else {
    throw ConfigError("times", "custom scenarios must give the time grid");
  }

  // Initial state.
  if (doc.contains("initial")) {
    const auto& init = doc["initial"];
    if (init.is_string()) {
      const std::string name = init.get<std::string>();
      if (name == "excited-superposition") {
        cfg.initial = InitialState::excited_superposition;
      } else if (name == "ground-superposition") {
        cfg.initial = InitialState::ground_superposition;
      } else {
        throw ConfigError("initial", "unknown initial state tag");
      }
    } else if (init.is_array() && init.size() == 8) {
      cfg.initial = InitialState::explicit_vector;
      for (int i = 0; i < 8; ++i) {
        const auto& c = init[i];
        if (c.is_number()) {
          cfg.initial_vector[i] = c.get<double>();
        } else if (c.is_array() && c.size() == 2 && c[0].is_number() &&
                   c[1].is_number()) {
          cfg.initial_vector[i] =
              Complex(c[0].get<double>(), c[1].get<double>());
        } else {
          throw ConfigError("initial", "components must be numbers or [re, im]");
        }
      }
      const double pop = (cfg.initial_vector[kA11] + cfg.initial_vector[kA22] +
                          cfg.initial_vector[kA33] + cfg.initial_vector[kA44])
                             .real();
      if (std::abs(pop - 1.0) > 1e-9) {
        throw ConfigError("initial", "population sum must be 1");
      }
    } else {
      throw ConfigError("initial", "expected a tag or an 8-vector");
    }
    if (cfg.kind == ScenarioKind::spontaneous_emission &&
        cfg.initial != InitialState::excited_superposition) {
      throw ConfigError("initial",
                        "spontaneous emission forces the excited superposition");
    }
  } else if (cfg.kind == ScenarioKind::spontaneous_emission) {
    cfg.initial = InitialState::excited_superposition;
  } else if (cfg.kind == ScenarioKind::resonance_fluorescence) {
    cfg.initial = InitialState::ground_superposition;
  } else {
    throw ConfigError("initial", "custom scenarios must give the initial state");
  }

  if (doc.contains("output")) {
    const auto& out = doc["output"];
    if (out.is_string()) {
      cfg.output_path = out.get<std::string>();
    } else if (out.is_object()) {
      for (const auto& item : out.items()) {
        if (item.key() != "path" && item.key() != "format") {
          throw ConfigError("output." + item.key(), "unknown key");
        }
      }
      if (out.contains("path")) {
        if (!out["path"].is_string()) {
          throw ConfigError("output.path", "expected a string");
        }
        cfg.output_path = out["path"].get<std::string>();
      }
      if (out.contains("format")) {
        const std::string fmt = out["format"].is_string()
                                    ? out["format"].get<std::string>()
                                    : std::string();
        if (fmt == "csv") {
          cfg.format = OutputFormat::csv;
        } else if (fmt == "json") {
          cfg.format = OutputFormat::json;
        } else {
          throw ConfigError("output.format", "expected csv or json");
        }
      }
    } else {
      throw ConfigError("output", "expected a path or {path, format}");
    }
  }

  return cfg;
}

ScenarioConfig preset_config(const std::string& name) {
  ScenarioConfig cfg;
  if (name == "fig1b") {
    cfg.kind = ScenarioKind::spontaneous_emission;
    cfg.params = SystemParams::make(0.0, 0.0, -2.0);
    cfg.filter_bandwidth = 0.5;
    cfg.nus = uniform_grid(-6.0, 4.0, 0.025, "nu_step");
    cfg.times = fig1b_times();
    cfg.initial = InitialState::excited_superposition;
  } else if (name == "fig2" || name == "fig3" || name == "fig4a" ||
             name == "fig4c") {
    cfg.kind = ScenarioKind::resonance_fluorescence;
    cfg.params = SystemParams::make(6.0, 0.0, -7.0);
    cfg.filter_bandwidth = name == "fig4a" ? 0.1 : (name == "fig4c" ? 1.0 : 0.5);
    cfg.nus = uniform_grid(-18.0, 18.0, 0.05, "nu_step");
    cfg.times = fig2_times();
    cfg.initial = InitialState::ground_superposition;
  } else {
    throw ConfigError("preset", "unknown preset '" + name +
                                "'; expected fig1b, fig2, fig3, fig4a, fig4c");
  }
  cfg.output_path = name;
  return cfg;
}

std::vector<std::string> preset_names() {
  return {"fig1b", "fig2", "fig3", "fig4a", "fig4c"};
}

json RunManifest::to_json() const {
  json doc;
  doc["config"] = config_echo;
  doc["library_version"] = library_version;
  doc["tolerances"] = tolerances;
  doc["duration_seconds"] = duration_seconds;
  doc["grid"] = {{"nu_count", nu_count},
                 {"time_count", time_count},
                 {"values_fnv1a64", values_checksum}};
  return doc;
}

std::string format_csv(const SpectrumGrid& grid) {
  std::string out = "nu,t,S\n";
  char row[128];
  for (std::size_t i = 0; i < grid.nus.size(); ++i) {
    for (std::size_t j = 0; j < grid.times.size(); ++j) {
      std::snprintf(row, sizeof(row), "%.12g,%.12g,%.12g\n", grid.nus[i],
                    grid.times[j],
                    grid.values(static_cast<Eigen::Index>(i),
                                static_cast<Eigen::Index>(j)));
      out += row;
    }
  }
  return out;
}

ScenarioResult run_scenario(const ScenarioConfig& cfg,
                            const NumericsConfig& numerics) {
  require_strictly_increasing(cfg.times, "times");
  require_strictly_increasing(cfg.nus, "nu grid");

  const auto started = std::chrono::steady_clock::now();
  const GeneratorMatrix gen = build_generator(cfg.params);
  const BlochVector q0 = cfg.initial_state();

  ScenarioResult result;
  if (cfg.kind == ScenarioKind::spontaneous_emission && !cfg.force_numeric) {
    SpectrumGrid grid;
    grid.nus = cfg.nus;
    grid.times = cfg.times;
    grid.values.resize(static_cast<Eigen::Index>(cfg.nus.size()),
                       static_cast<Eigen::Index>(cfg.times.size()));
    for (std::size_t i = 0; i < cfg.nus.size(); ++i) {
      for (std::size_t j = 0; j < cfg.times.size(); ++j) {
        FilterSettings f{cfg.filter_bandwidth, cfg.nus[i]};
        grid.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            se_spectrum_analytic(cfg.params.gamma, cfg.params.zeeman_diff, f,
                                 cfg.times[j], numerics);
      }
    }
    grid.meta.params = cfg.params;
    grid.meta.filter_bandwidth = cfg.filter_bandwidth;
    result.grid = std::move(grid);
  } else {
    result.grid = spectrum_grid(gen, q0, cfg.nus, cfg.times,
                                cfg.filter_bandwidth, numerics, cfg.threads);
  }
  result.grid.meta.initial_tag = to_string(cfg.initial);

  const auto finished = std::chrono::steady_clock::now();
  RunManifest& manifest = result.manifest;
  manifest.config_echo = cfg.echo();
  manifest.library_version = kVersion;
  manifest.tolerances = {
      {"quad_rel_tol", numerics.quad_rel_tol},
      {"quad_abs_floor", numerics.quad_abs_floor},
      {"max_quad_levels", numerics.max_quad_levels},
      {"kernel_rank_rtol", numerics.kernel_rank_rtol},
      {"resolvent_cond_max", numerics.resolvent_cond_max},
      {"narrowing_switch_rtol", numerics.narrowing_switch_rtol},
  };
  manifest.duration_seconds =
      std::chrono::duration<double>(finished - started).count();
  char checksum[32];
  std::snprintf(checksum, sizeof(checksum), "%016llx",
                static_cast<unsigned long long>(fnv1a64(format_csv(result.grid))));
  manifest.values_checksum = checksum;
  manifest.nu_count = cfg.nus.size();
  manifest.time_count = cfg.times.size();
  return result;
}

std::vector<std::filesystem::path> emit(const SpectrumGrid& grid,
                                        const RunManifest& manifest,
                                        const std::filesystem::path& out_path,
                                        OutputFormat format) {
  namespace fs = std::filesystem;
  std::vector<fs::path> written;

  fs::path data_path = out_path;
  const std::string ext = format == OutputFormat::csv ? ".csv" : ".json";
  if (data_path.extension() != ext) data_path += ext;
  if (data_path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(data_path.parent_path(), ec);
  }

  {
    std::ofstream out(data_path, std::ios::binary);
    if (!out) {
      throw std::runtime_error("emit: cannot open " + data_path.string());
    }
    if (format == OutputFormat::csv) {
      out << format_csv(grid);
    } else {
      json doc;
      doc["meta"] = {
          {"kind_params",
           {{"omega", grid.meta.params.rabi},
            {"Delta", grid.meta.params.laser_detuning},
            {"delta", grid.meta.params.zeeman_diff},
            {"gamma", grid.meta.params.gamma},
            {"gamma_pi", grid.meta.params.gamma_pi},
            {"gamma_sigma", grid.meta.params.gamma_sigma}}},
          {"filter", grid.meta.filter_bandwidth},
          {"initial", grid.meta.initial_tag},
      };
      doc["nus"] = grid.nus;
      doc["times"] = grid.times;
      json values = json::array();
      for (std::size_t i = 0; i < grid.nus.size(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < grid.times.size(); ++j) {
          row.push_back(grid.values(static_cast<Eigen::Index>(i),
                                    static_cast<Eigen::Index>(j)));
        }
        values.push_back(std::move(row));
      }
      doc["values"] = std::move(values);
      out << doc.dump(2) << "\n";
    }
    if (!out) {
      throw std::runtime_error("emit: write failed for " + data_path.string());
    }
  }
  written.push_back(data_path);

  fs::path manifest_path = out_path;
  manifest_path += ".manifest.json";
  {
    std::ofstream out(manifest_path, std::ios::binary);
    if (!out) {
      throw std::runtime_error("emit: cannot open " + manifest_path.string());
    }
    out << manifest.to_json().dump(2) << "\n";
    if (!out) {
      throw std::runtime_error("emit: write failed for " +
                               manifest_path.string());
    }
  }
  written.push_back(manifest_path);
  return written;
}

json report_beats(const SystemParams& params) {
  const BeatFrequencies b = rabi_frequencies(params);
  json doc;
  doc["omega1"] = b.omega1;
  doc["omega2"] = b.omega2;
  doc["omega_av"] = b.omega_av;
  doc["omega_beat"] = b.omega_beat;
  const double split = std::abs(b.omega2 - b.omega1);
  if (split < kSqrtEps) {
    doc["filter_window"] = nullptr;
    doc["note"] = "no doublet to resolve (omega_beat = 0)";
  } else {
    doc["filter_window"] = {{"min", std::abs(b.omega_beat) / 4.0},
                            {"max", split}};
    doc["note"] =
        "choose Gamma inside the window: narrow enough to resolve the "
        "doublet, wide enough to capture the beat";
  }
  return doc;
}

std::string report_beats_text(const SystemParams& params) {
  const json doc = report_beats(params);
  std::ostringstream out;
  out << "omega1     = " << doc["omega1"].get<double>() << "\n"
      << "omega2     = " << doc["omega2"].get<double>() << "\n"
      << "omega_av   = " << doc["omega_av"].get<double>() << "\n"
      << "omega_beat = " << doc["omega_beat"].get<double>() << "\n";
  if (doc["filter_window"].is_null()) {
    out << "filter: " << doc["note"].get<std::string>() << "\n";
  } else {
    out << "filter window: Gamma in ("
        << doc["filter_window"]["min"].get<double>() << ", "
        << doc["filter_window"]["max"].get<double>() << ")\n";
  }
  return out.str();
}

}  // namespace qbeats
