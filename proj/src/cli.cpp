// Copyright 2026 The qsdgeom Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qsdgeom/cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <set>

#include <CLI11.hpp>

#include "qsdgeom/analysis.hpp"
#include "qsdgeom/io.hpp"
#include "qsdgeom/verification.hpp"

#ifndef QSDGEOM_VERSION
#define QSDGEOM_VERSION "unknown"
#endif

namespace qsd::cli {

const char *version() { return QSDGEOM_VERSION; }

namespace {

namespace fs = std::filesystem;

// Raised for anything the user can fix by changing flags or config.
struct ValidationError : Error {
  using Error::Error;
};

enum class Type { number, integer, string, boolean };

struct Key {
  std::string name;
  Type type;
  json fallback;  // null: no default
  std::string help;
};

const std::vector<Key> &all_keys() {
  static const std::vector<Key> keys = {
      {"kind", Type::string, nullptr, "environment preset: dephasing, thermal, measurement"},
      {"mu", Type::number, nullptr, "coupling of the dephasing/measurement presets"},
      {"mu1", Type::number, nullptr, "thermal coupling of sigma_+"},
      {"mu2", Type::number, nullptr, "thermal coupling of sigma_-"},
      {"model", Type::string, "", "environment JSON file (instead of --kind)"},
      {"hx", Type::number, 0.0, "Hamiltonian sigma_x coefficient"},
      {"hy", Type::number, 0.0, "Hamiltonian sigma_y coefficient"},
      {"hz", Type::number, 0.0, "Hamiltonian sigma_z coefficient"},
      {"threads", Type::integer, 0, "worker threads (0: all available)"},
      {"metric_convention", Type::string, "closed_form", "closed_form or sde_diffusion"},
      {"out", Type::string, "", "output file"},
      {"quantity", Type::string, "curvature", "curvature, norm or both"},
      {"grid", Type::integer, 96, "grid nodes per angle"},
      {"sweep_min", Type::number, 0.1, "first coupling of the sweep"},
      {"sweep_max", Type::number, 2.0, "last coupling of the sweep"},
      {"sweep_points", Type::integer, 20, "number of sweep couplings"},
      {"lo", Type::number, nullptr, "lower bracket"},
      {"hi", Type::number, nullptr, "upper bracket"},
      {"tol", Type::number, 1e-3, "bracket width at which bisection stops"},
      {"dt", Type::number, 1e-3, "time step"},
      {"steps", Type::integer, 1000, "number of steps"},
      {"seed", Type::integer, 20260101, "random seed"},
      {"stride", Type::integer, 1, "record every this many steps"},
      {"renormalize", Type::boolean, true, "renormalize after each step"},
      {"convention", Type::string, "gisin_percival", "drift convention: gisin_percival or doubled"},
      {"theta", Type::number, std::numbers::pi / 2, "initial Bloch polar angle"},
      {"phi", Type::number, 0.0, "initial Bloch azimuth"},
      {"n_traj", Type::integer, 1, "trajectories (more than one writes the ensemble density)"},
      {"curvature", Type::boolean, false, "also write scalar curvature along the path"},
      {"delta", Type::number, 0.5, "residency radius (rad)"},
      {"threshold", Type::number, 0.8, "residency fraction required for a stable verdict"},
      {"t_final", Type::number, 100.0, "path duration"},
      {"n_paths", Type::integer, 100, "number of paths"},
      {"sample_stride", Type::integer, 10, "residency sampled every this many steps"},
  };
  return keys;
}

const Key &key_info(const std::string &name) {
  for (const auto &k : all_keys())
    if (k.name == name) return k;
  throw std::logic_error("unknown key " + name);
}

const std::map<std::string, std::vector<std::string>> &command_keys() {
  auto with = [](std::vector<std::string> base, std::initializer_list<std::string> extra) {
    base.insert(base.end(), extra);
    return base;
  };
  static const std::vector<std::string> preset = {"kind", "mu", "mu1", "mu2", "hx", "hy", "hz",
                                                  "threads", "metric_convention", "out"};
  static const std::vector<std::string> model = with(preset, {"model"});
  static const std::map<std::string, std::vector<std::string>> keys = {
      {"scan", with(model, {"quantity", "grid"})},
      {"sweep", with(preset, {"grid", "sweep_min", "sweep_max", "sweep_points"})},
      {"critical", with(preset, {"lo", "hi", "tol", "grid"})},
      {"trajectory",
       with(model, {"dt", "steps", "seed", "stride", "renormalize", "convention", "theta", "phi", "n_traj",
                    "curvature"})},
      {"stability", with(preset, {"delta", "threshold", "t_final", "dt", "n_paths", "sample_stride", "seed", "grid",
                                 "convention"})},
      {"verify", {"threads", "out"}},
  };
  return keys;
}

json parse_value(const Key &key, const std::string &text) {
  try {
    std::size_t used = 0;
    switch (key.type) {
      case Type::number: {
        const double v = std::stod(text, &used);
        if (used != text.size()) break;
        return v;
      }
      case Type::integer: {
        if (!text.empty() && text[0] == '-') break;
        const unsigned long long v = std::stoull(text, &used);
        if (used != text.size()) break;
        return v;
      }
      case Type::string:
        return text;
      case Type::boolean:
        if (text == "true" || text == "1") return true;
        if (text == "false" || text == "0") return false;
        break;
    }
  } catch (const std::exception &) {
  }
  throw ValidationError("--" + key.name + ": cannot parse '" + text + "'");
}

void check_type(const Key &key, const json &v) {
  const bool ok = v.is_null() || (key.type == Type::number && v.is_number()) ||
                  (key.type == Type::integer && v.is_number_unsigned()) ||
                  (key.type == Type::integer && v.is_number_integer() && v.get<long long>() >= 0) ||
                  (key.type == Type::string && v.is_string()) || (key.type == Type::boolean && v.is_boolean());
  if (!ok) throw ValidationError("config key '" + key.name + "' has the wrong type");
}

std::string dashed(std::string s) {
  std::replace(s.begin(), s.end(), '_', '-');
  return s;
}

// Defaults <- config file <- flags.
json resolve_config(const std::string &command, const std::string &config_path,
                    const std::map<std::string, std::string> &flags) {
  const auto &keys = command_keys().at(command);
  json cfg = json::object();
  for (const auto &k : keys) cfg[k] = key_info(k).fallback;

  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw ValidationError("cannot open config file '" + config_path + "'");
    json file;
    try {
      file = json::parse(in);
    } catch (const json::parse_error &e) {
      throw ValidationError("config file '" + config_path + "': " + e.what());
    }
    if (!file.is_object()) throw ValidationError("config file must hold a JSON object");
    if (file.contains("command") && file.contains("config")) {  // a run.json sidecar
      if (file.at("command") != command) {
        throw ValidationError("sidecar was written by '" + file.at("command").get<std::string>() + "', not '" +
                              command + "'");
      }
      file = file.at("config");
    }
    for (const auto &[k, v] : file.items()) {
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
        throw ValidationError("config key '" + k + "' is not accepted by '" + command + "'");
      }
      check_type(key_info(k), v);
      cfg[k] = v;
    }
  }
  for (const auto &[k, text] : flags) cfg[k] = parse_value(key_info(k), text);
  return cfg;
}

template <typename T>
T get(const json &cfg, const std::string &key) {
  const json &v = cfg.at(key);
  if (v.is_null()) throw ValidationError("--" + dashed(key) + " is required");
  return v.get<T>();
}

std::optional<double> get_optional(const json &cfg, const std::string &key) {
  const json &v = cfg.at(key);
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

Operator<double> hamiltonian_from(const json &cfg) {
  return Operator<double>(get<double>(cfg, "hx") * sigma_x() + get<double>(cfg, "hy") * sigma_y() +
                          get<double>(cfg, "hz") * sigma_z());
}

EnvironmentKind preset_kind(const json &cfg) {
  const auto kind = parse_environment_kind(get<std::string>(cfg, "kind"));
  if (kind == EnvironmentKind::custom) throw ValidationError("--kind custom requires --model");
  return kind;
}

Couplings<double> couplings_from(const json &cfg) {
  Couplings<double> c;
  for (const char *k : {"mu", "mu1", "mu2"})
    if (auto v = get_optional(cfg, k)) c[k] = *v;
  return c;
}

EnvironmentModel<double> model_from(const json &cfg) {
  const auto path = get<std::string>(cfg, "model");
  if (!path.empty()) {
    if (!cfg.at("kind").is_null()) throw ValidationError("--model and --kind are mutually exclusive");
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open model file '" + path + "'");
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error &e) {
      throw ValidationError("model file '" + path + "': " + e.what());
    }
    auto model = environment_from_json(j);
    const Operator<double> h = model.hamiltonian().rows() == 2
                                   ? Operator<double>(model.hamiltonian() + hamiltonian_from(cfg))
                                   : model.hamiltonian();
    return model.with_hamiltonian(h);
  }
  return make_environment<double>(preset_kind(cfg), couplings_from(cfg), hamiltonian_from(cfg));
}

AnalysisOptions analysis_options(const json &cfg) {
  AnalysisOptions opts;
  opts.threads = get<unsigned>(cfg, "threads");
  opts.geometry.metric = parse_metric_convention(get<std::string>(cfg, "metric_convention"));
  return opts;
}

std::size_t positive(const json &cfg, const std::string &key) {
  const auto v = get<std::size_t>(cfg, key);
  if (v < 1) throw ValidationError("--" + dashed(key) + " must be at least 1");
  return v;
}

fs::path output_path(const json &cfg, bool required) {
  const auto out = get<std::string>(cfg, "out");
  if (out.empty()) {
    if (required) throw ValidationError("--out is required");
    return {};
  }
  fs::path p(out);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  return p;
}

std::ofstream open_output(const fs::path &p) {
  std::ofstream os(p);
  if (!os) throw Error("cannot write '" + p.string() + "'");
  return os;
}

void write_sidecar(const fs::path &out, const std::string &command, const json &cfg, double seconds) {
  const fs::path dir = out.has_parent_path() ? out.parent_path() : fs::path(".");
  json side = {{"command", command},
               {"config", cfg},
               {"seed", cfg.contains("seed") ? cfg.at("seed") : json(nullptr)},
               {"version", version()},
               {"elapsed_seconds", seconds}};
  auto os = open_output(dir / "run.json");
  os << side.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Commands. Each returns an exit code and leaves artifacts under --out.

int cmd_scan(const json &cfg, std::ostream &out) {
  const auto model = model_from(cfg);
  const auto opts = analysis_options(cfg);
  const auto n = positive(cfg, "grid");
  const auto quantity = get<std::string>(cfg, "quantity");
  const auto path = output_path(cfg, true);
  const auto grid = ScanGrid<double>::uniform(std::max<std::size_t>(n, 2), n);
  auto os = open_output(path);
  ScalarField<double> field;
  if (quantity == "both") {
    const auto norm = scan_field(model, grid, FieldQuantity::norm, opts);
    field = scan_field(model, grid, FieldQuantity::curvature, opts);
    write_curvature_dump_csv(os, norm, field);
  } else {
    field = scan_field(model, grid, parse_field_quantity(quantity), opts);
    write_field_csv(os, field);
  }
  const auto ext = find_extrema(field);
  out.precision(10);
  out << to_string(field.quantity) << ": max " << ext.max_value << " at (theta " << ext.max_point.theta << ", phi "
      << ext.max_point.phi << "), min " << ext.min_value << " at (theta " << ext.min_point.theta << ", phi "
      << ext.min_point.phi << "), sharpness " << ext.sharpness << (ext.degenerate ? " [degenerate]" : "") << "\n";
  return kExitOk;
}

int cmd_sweep(const json &cfg, std::ostream &out) {
  const auto kind = preset_kind(cfg);
  const auto opts = analysis_options(cfg);
  const auto n = positive(cfg, "grid");
  const double lo = get<double>(cfg, "sweep_min");
  const double hi = get<double>(cfg, "sweep_max");
  const auto points = positive(cfg, "sweep_points");
  if (!(lo >= 0) || (points > 1 && !(hi > lo))) throw ValidationError("sweep range must satisfy 0 <= min < max");
  const auto path = output_path(cfg, true);
  std::vector<double> mus;
  for (std::size_t k = 0; k < points; ++k) {
    mus.push_back(points == 1 ? lo : lo + (hi - lo) * double(k) / double(points - 1));
  }
  const auto sweep = coupling_sweep(kind, mus, ScanGrid<double>::uniform(std::max<std::size_t>(n, 2), n), opts);
  auto os = open_output(path);
  write_sweep_csv(os, sweep);
  out << "wrote " << sweep.couplings.size() << " couplings to " << path.string() << "\n";
  return kExitOk;
}

int cmd_critical(const json &cfg, std::ostream &out) {
  const auto kind = preset_kind(cfg);
  const auto opts = analysis_options(cfg);
  const auto n = positive(cfg, "grid");
  const double mu = critical_coupling(kind, get<double>(cfg, "lo"), get<double>(cfg, "hi"), get<double>(cfg, "tol"),
                                      ScanGrid<double>::uniform(std::max<std::size_t>(n, 2), n), opts);
  out.precision(10);
  out << mu << "\n";
  if (const auto path = output_path(cfg, false); !path.empty()) {
    auto os = open_output(path);
    os << json{{"critical_coupling", mu}}.dump(2) << "\n";
  }
  return kExitOk;
}

int cmd_trajectory(const json &cfg, std::ostream &out) {
  const auto model = model_from(cfg);
  SdeConfig sde;
  sde.dt = get<double>(cfg, "dt");
  sde.steps = get<std::size_t>(cfg, "steps");
  sde.seed = get<std::uint64_t>(cfg, "seed");
  sde.record_stride = get<std::size_t>(cfg, "stride");
  sde.renormalize_each_step = get<bool>(cfg, "renormalize");
  sde.convention = parse_drift_convention(get<std::string>(cfg, "convention"));
  sde.validate();
  if (model.dim() != 2) throw ValidationError("trajectory: initial (theta, phi) needs a qubit model");
  const auto psi0 = bloch_to_state(BlochPoint<double>{get<double>(cfg, "theta"), get<double>(cfg, "phi")});
  const auto n_traj = positive(cfg, "n_traj");
  const auto path = output_path(cfg, true);
  const auto opts = analysis_options(cfg);

  if (n_traj > 1) {
    const auto ens = ensemble_density(psi0, model, sde, n_traj, opts.threads);
    auto os = open_output(path);
    os << ensemble_to_json(ens).dump() << "\n";
    out << "wrote ensemble of " << n_traj << " trajectories to " << path.string() << "\n";
    return kExitOk;
  }
  const auto rec = simulate_trajectory(psi0, model, sde);
  {
    auto os = open_output(path);
    write_trajectory_csv(os, rec);
  }
  if (get<bool>(cfg, "curvature")) {
    const auto values = curvature_along_path(rec, model, opts);
    fs::path cpath = path;
    cpath.replace_filename(path.stem().string() + "_curvature.csv");
    auto os = open_output(cpath);
    write_path_curvature_csv(os, rec.times, values);
  }
  const auto v = bloch_vector(rec.states.back());
  out.precision(10);
  out << "final Bloch vector (" << v[0] << ", " << v[1] << ", " << v[2] << ")\n";
  return kExitOk;
}

int cmd_stability(const json &cfg, std::ostream &out) {
  const auto kind = preset_kind(cfg);
  StabilityConfig sc;
  sc.delta = get<double>(cfg, "delta");
  sc.threshold = get<double>(cfg, "threshold");
  sc.t_final = get<double>(cfg, "t_final");
  sc.dt = get<double>(cfg, "dt");
  sc.n_paths = get<std::size_t>(cfg, "n_paths");
  sc.sample_stride = get<std::size_t>(cfg, "sample_stride");
  sc.seed = get<std::uint64_t>(cfg, "seed");
  sc.grid = get<std::size_t>(cfg, "grid");
  sc.validate();
  const auto opts = analysis_options(cfg);
  const auto path = output_path(cfg, true);
  const auto rep = stability_experiment(kind, couplings_from(cfg), hamiltonian_from(cfg), sc, opts,
                                        parse_drift_convention(get<std::string>(cfg, "convention")));
  auto os = open_output(path);
  os << stability_to_json(rep).dump(2) << "\n";
  out.precision(6);
  out << to_string(rep.verdict) << " (fraction resident " << rep.fraction_resident << ")\n";
  return kExitOk;
}

int cmd_verify(const json &cfg, std::ostream &out) {
  const auto results = run_verification(get<unsigned>(cfg, "threads"));
  bool ok = true;
  json report = json::array();
  for (const auto &r : results) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
    ok = ok && r.passed;
    report.push_back({{"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
  }
  if (const auto path = output_path(cfg, false); !path.empty()) {
    auto os = open_output(path);
    os << report.dump(2) << "\n";
  }
  return ok ? kExitOk : kExitFailure;
}

}  // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Quantum state diffusion and diffusion-metric curvature", "qsdgeom"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);

  struct Bound {
    CLI::App *app;
    std::string config_path;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option *> options;
  };
  const std::map<std::string, std::string> descriptions = {
      {"scan", "scan the metric norm or scalar curvature over the Bloch sphere"},
      {"sweep", "maximum and minimum curvature over a range of couplings"},
      {"critical", "coupling at which the curvature maximum changes sign"},
      {"trajectory", "integrate one trajectory or an ensemble"},
      {"stability", "residency of paths started at the curvature maximum"},
      {"verify", "run the built-in oracle and invariant checks"}};
  std::map<std::string, Bound> bound;
  for (const auto &[command, keys] : command_keys()) {
    Bound &b = bound[command];
    b.app = app.add_subcommand(command, descriptions.at(command));
    b.app->add_option("--config", b.config_path, "JSON config file or run.json sidecar");
    for (const auto &k : keys) {
      const Key &info = key_info(k);
      if (info.type == Type::boolean) {
        b.options[k] = b.app->add_flag("--" + dashed(k) + ",!--no-" + dashed(k), info.help);
      } else {
        b.options[k] = b.app->add_option("--" + dashed(k), b.values[k], info.help);
      }
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  for (auto &[command, b] : bound) {
    if (!b.app->parsed()) continue;
    try {
      std::map<std::string, std::string> flags;
      for (const auto &[k, opt] : b.options) {
        if (opt->count() == 0) continue;
        flags[k] = key_info(k).type == Type::boolean ? (opt->as<bool>() ? "true" : "false") : b.values[k];
      }
      const json cfg = resolve_config(command, b.config_path, flags);
      const auto start = std::chrono::steady_clock::now();
      int code = kExitOk;
      if (command == "scan") code = cmd_scan(cfg, out);
      if (command == "sweep") code = cmd_sweep(cfg, out);
      if (command == "critical") code = cmd_critical(cfg, out);
      if (command == "trajectory") code = cmd_trajectory(cfg, out);
      if (command == "stability") code = cmd_stability(cfg, out);
      if (command == "verify") code = cmd_verify(cfg, out);
      const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (const auto path = output_path(cfg, false); !path.empty()) write_sidecar(path, command, cfg, seconds);
      return code;
    } catch (const ValidationError &e) {
      err << "error: " << e.what() << "\n";
      return kExitValidation;
    } catch (const InvalidArgument &e) {
      err << "error: " << e.what() << "\n";
      return kExitValidation;
    } catch (const DimensionMismatch &e) {
      err << "error: " << e.what() << "\n";
      return kExitValidation;
    } catch (const BracketingError &e) {
      err << "error: " << e.what() << "\n";
      return kExitValidation;
    } catch (const IllPosed &e) {
      err << "error: " << e.what() << "\n";
      return kExitValidation;
    } catch (const NotApplicable &e) {
      err << "error: " << e.what() << "\n";
      return kExitValidation;
    } catch (const std::exception &e) {
      err << "error: " << e.what() << "\n";
      return kExitFailure;
    }
  }
  return kExitValidation;
}

}  // namespace qsd::cli
