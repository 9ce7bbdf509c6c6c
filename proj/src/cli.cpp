#include "qpsense/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "qpsense/error.hpp"
#include "qpsense/report.hpp"

namespace qps::cli {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Configuration parsing

class Problems {
public:
  void add(const std::string& where, const std::string& what) { list_.push_back(where + ": " + what); }
  bool empty() const { return list_.empty(); }
  std::vector<std::string> take() { return std::move(list_); }

private:
  std::vector<std::string> list_;
};

bool expect_object(const json& j, const std::string& where, std::initializer_list<std::string_view> allowed,
                   Problems& p) {
  if (!j.is_object()) {
    p.add(where, "expected an object");
    return false;
  }
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) p.add(where + "." + key, "unknown key");
  }
  return true;
}

std::optional<double> number(const json& j, const std::string& key, const std::string& where, Problems& p,
                             bool required) {
  if (!j.contains(key)) {
    if (required) p.add(where + "." + key, "missing required key");
    return std::nullopt;
  }
  const json& v = j.at(key);
  if (!v.is_number()) {
    p.add(where + "." + key, "expected a number");
    return std::nullopt;
  }
  return v.get<double>();
}

std::optional<int> integer(const json& j, const std::string& key, const std::string& where, Problems& p,
                           bool required) {
  if (!j.contains(key)) {
    if (required) p.add(where + "." + key, "missing required key");
    return std::nullopt;
  }
  const json& v = j.at(key);
  if (!v.is_number_integer()) {
    p.add(where + "." + key, "expected an integer");
    return std::nullopt;
  }
  return v.get<int>();
}

std::optional<std::string> text(const json& j, const std::string& key, const std::string& where, Problems& p,
                                bool required) {
  if (!j.contains(key)) {
    if (required) p.add(where + "." + key, "missing required key");
    return std::nullopt;
  }
  const json& v = j.at(key);
  if (!v.is_string()) {
    p.add(where + "." + key, "expected a string");
    return std::nullopt;
  }
  return v.get<std::string>();
}

std::optional<bool> boolean(const json& j, const std::string& key, const std::string& where, Problems& p) {
  if (!j.contains(key)) return std::nullopt;
  if (!j.at(key).is_boolean()) {
    p.add(where + "." + key, "expected true or false");
    return std::nullopt;
  }
  return j.at(key).get<bool>();
}

std::vector<double> number_list(const json& j, const std::string& where, Problems& p) {
  std::vector<double> out;
  if (!j.is_array()) {
    p.add(where, "expected an array of numbers");
    return out;
  }
  for (const auto& v : j) {
    if (!v.is_number()) {
      p.add(where, "expected an array of numbers");
      return {};
    }
    out.push_back(v.get<double>());
  }
  return out;
}

fs::path resolve(const fs::path& base, const std::string& file) {
  const fs::path f(file);
  return f.is_absolute() ? f : base / f;
}

std::optional<MaterialModel> parse_material(const json& j, const std::string& where, const fs::path& base,
                                            Problems& p) {
  if (!expect_object(j, where,
                     {"kind", "file", "index", "plasma_ev", "drude_strength", "damping_ev", "oscillators", "lossless"},
                     p)) {
    return std::nullopt;
  }
  const auto kind = text(j, "kind", where, p, true);
  const bool lossless = boolean(j, "lossless", where, p).value_or(false);
  std::optional<MaterialModel> model;
  try {
    if (!kind) {
      return std::nullopt;
    } else if (*kind == "builtin-silver") {
      model = builtin_silver();
    } else if (*kind == "tabulated") {
      if (const auto file = text(j, "file", where, p, true)) model = load_material_table(resolve(base, *file));
    } else if (*kind == "constant") {
      if (const auto n = number(j, "index", where, p, true)) model = MaterialModel::constant_index(*n);
    } else if (*kind == "drude-lorentz") {
      DrudeLorentzParams dl;
      dl.plasma_ev = number(j, "plasma_ev", where, p, true).value_or(0.0);
      dl.drude_strength = number(j, "drude_strength", where, p, false).value_or(1.0);
      dl.damping_ev = number(j, "damping_ev", where, p, true).value_or(0.0);
      if (j.contains("oscillators")) {
        const json& list = j.at("oscillators");
        if (!list.is_array()) p.add(where + ".oscillators", "expected an array");
        for (std::size_t i = 0; list.is_array() && i < list.size(); ++i) {
          const std::string w = where + ".oscillators[" + std::to_string(i) + "]";
          if (!expect_object(list[i], w, {"strength", "frequency_ev", "width_ev"}, p)) continue;
          LorentzOscillator osc;
          osc.strength = number(list[i], "strength", w, p, true).value_or(0.0);
          osc.frequency_ev = number(list[i], "frequency_ev", w, p, true).value_or(0.0);
          osc.width_ev = number(list[i], "width_ev", w, p, true).value_or(0.0);
          dl.oscillators.push_back(osc);
        }
      }
      if (p.empty()) model = MaterialModel::drude_lorentz(dl);
    } else {
      p.add(where + ".kind", "unknown material kind '" + *kind + "'");
    }
  } catch (const Error& e) {
    p.add(where, e.what());
    return std::nullopt;
  }
  if (model && lossless) model = model->lossless();
  return model;
}

std::optional<Transducer> parse_transducer(const json& j, const fs::path& base, Problems& p) {
  const std::string where = "transducer";
  if (!expect_object(j, where, {"kind", "core", "radius_nm", "material", "file"}, p)) return std::nullopt;
  const auto kind = text(j, "kind", where, p, true);
  if (!kind) return std::nullopt;
  if (*kind == "table") {
    const auto file = text(j, "file", where, p, true);
    for (const char* key : {"core", "radius_nm", "material"}) {
      if (j.contains(key)) p.add(where + "." + key, "not valid for a table transducer");
    }
    if (!file) return std::nullopt;
    try {
      return load_dispersion_table(resolve(base, *file).string());
    } catch (const Error& e) {
      p.add(where + ".file", e.what());
      return std::nullopt;
    }
  }
  if (*kind != "nanowire") {
    p.add(where + ".kind", "expected 'nanowire' or 'table'");
    return std::nullopt;
  }
  if (j.contains("file")) p.add(where + ".file", "not valid for a nanowire transducer");
  NanowireSpec spec;
  const auto core = text(j, "core", where, p, true);
  if (core && *core == "metal") {
    spec.core = CoreKind::metal;
  } else if (core && *core == "dielectric") {
    spec.core = CoreKind::dielectric;
  } else if (core) {
    p.add(where + ".core", "expected 'metal' or 'dielectric'");
  }
  spec.radius_nm = number(j, "radius_nm", where, p, true).value_or(0.0);
  if (j.contains("material")) {
    if (auto m = parse_material(j.at("material"), where + ".material", base, p)) spec.core_material = *m;
  } else {
    p.add(where + ".material", "missing required key");
  }
  return spec;
}

std::vector<double> parse_grid(const json& j, Problems& p) {
  const std::string where = "grid";
  if (!expect_object(j, where,
                     {"start", "stop", "points", "values", "concentration", "solvent_index", "solute_coefficient"}, p)) {
    return {};
  }
  auto range = [&](const json& r, const std::string& w) -> std::vector<double> {
    if (!expect_object(r, w, {"start", "stop", "points"}, p)) return {};
    const auto start = number(r, "start", w, p, true);
    const auto stop = number(r, "stop", w, p, true);
    const auto points = integer(r, "points", w, p, true);
    if (!start || !stop || !points) return {};
    if (*points < 1) {
      p.add(w + ".points", "must be >= 1");
      return {};
    }
    return linear_grid(*start, *stop, *points);
  };
  std::vector<double> grid;
  if (j.contains("values")) {
    grid = number_list(j.at("values"), where + ".values", p);
  } else if (j.contains("concentration")) {
    BioMedium medium;
    medium.solvent_index = number(j, "solvent_index", where, p, false).value_or(medium.solvent_index);
    medium.solute_coefficient = number(j, "solute_coefficient", where, p, false).value_or(medium.solute_coefficient);
    for (double c : range(j.at("concentration"), where + ".concentration")) {
      medium.concentration = c;
      if (c < 0.0) {
        p.add(where + ".concentration", "concentrations must be >= 0");
        return {};
      }
      grid.push_back(bio_index(medium));
    }
  } else {
    grid = range(j, where);
  }
  if (grid.empty()) {
    p.add(where, "grid is empty");
    return grid;
  }
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) {
      p.add(where, "grid must be strictly increasing");
      break;
    }
  }
  return grid;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error([&] {
        std::string msg = "invalid configuration:";
        for (const auto& s : problems) msg += "\n  " + s;
        return msg;
      }()),
      problems_(std::move(problems)) {}

RunConfig parse_run_config(const std::string& text_doc, const fs::path& base) {
  Problems p;
  json doc;
  try {
    doc = json::parse(text_doc);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("syntax: ") + e.what()});
  }
  RunConfig cfg;
  const std::string top = "config";
  if (!expect_object(doc, top,
                     {"transducer", "length_nm", "wavelength_nm", "photons", "strategies", "grid", "fd_step",
                      "optimizer_tol", "threads", "run", "output"},
                     p)) {
    throw ConfigError(p.take());
  }

  if (doc.contains("transducer")) {
    if (auto t = parse_transducer(doc.at("transducer"), base, p)) cfg.scenario.transducer = std::move(*t);
  } else {
    p.add("transducer", "missing required key");
  }
  cfg.scenario.length_nm = number(doc, "length_nm", top, p, false).value_or(cfg.scenario.length_nm);
  cfg.scenario.wavelength_nm = number(doc, "wavelength_nm", top, p, false).value_or(cfg.scenario.wavelength_nm);
  cfg.scenario.photons = integer(doc, "photons", top, p, false).value_or(cfg.scenario.photons);
  cfg.scenario.fd_step = number(doc, "fd_step", top, p, false).value_or(cfg.scenario.fd_step);
  cfg.scenario.optimizer_tol = number(doc, "optimizer_tol", top, p, false).value_or(cfg.scenario.optimizer_tol);
  cfg.scenario.threads = integer(doc, "threads", top, p, false).value_or(1);
  if (!(cfg.scenario.length_nm > 0.0)) p.add("length_nm", "must be > 0");
  if (!(cfg.scenario.wavelength_nm > 0.0)) p.add("wavelength_nm", "must be > 0");
  if (cfg.scenario.photons < 1 || cfg.scenario.photons > kMaxPhotons) {
    p.add("photons", "must lie in [1, " + std::to_string(kMaxPhotons) + "]");
  }
  if (!(cfg.scenario.fd_step > 0.0)) p.add("fd_step", "must be > 0");
  if (!(cfg.scenario.optimizer_tol > 0.0)) p.add("optimizer_tol", "must be > 0");
  if (cfg.scenario.threads < 1) p.add("threads", "must be >= 1");

  if (doc.contains("strategies")) {
    const json& list = doc.at("strategies");
    if (!list.is_array()) p.add("strategies", "expected an array of strategy names");
    for (std::size_t i = 0; list.is_array() && i < list.size(); ++i) {
      const auto s = list[i].is_string() ? parse_strategy(list[i].get<std::string>()) : std::nullopt;
      if (!s) {
        p.add("strategies[" + std::to_string(i) + "]",
              "expected one of classical, noon, optimal, sil, hl, snl");
      } else {
        cfg.scenario.strategies.push_back(*s);
      }
    }
  } else {
    cfg.scenario.strategies.assign(kAllStrategies.begin(), kAllStrategies.end());
  }

  if (doc.contains("grid")) {
    cfg.scenario.grid = parse_grid(doc.at("grid"), p);
  } else {
    p.add("grid", "missing required key");
  }

  if (doc.contains("run")) {
    const json& r = doc.at("run");
    if (expect_object(r, "run", {"kind", "state", "optimize_at", "n_bio", "photons"}, p)) {
      const auto kind = text(r, "kind", "run", p, true);
      if (kind && *kind == "sweep") {
        cfg.kind = RunKind::sweep;
      } else if (kind && *kind == "fixed_state") {
        cfg.kind = RunKind::fixed_state;
        if (r.contains("state")) cfg.state = number_list(r.at("state"), "run.state", p);
        cfg.optimize_at = number(r, "optimize_at", "run", p, false);
        if (cfg.state.empty() == !cfg.optimize_at.has_value()) {
          p.add("run", "fixed_state needs exactly one of 'state' or 'optimize_at'");
        }
        if (!cfg.state.empty() && static_cast<int>(cfg.state.size()) != cfg.scenario.photons + 1) {
          p.add("run.state", "needs photons + 1 entries");
        }
      } else if (kind && *kind == "n_scaling") {
        cfg.kind = RunKind::n_scaling;
        cfg.scaling_n_bio = number(r, "n_bio", "run", p, true).value_or(0.0);
        if (r.contains("photons") && r.at("photons").is_array()) {
          for (const auto& v : r.at("photons")) {
            if (!v.is_number_integer()) {
              p.add("run.photons", "expected an array of integers");
              break;
            }
            cfg.scaling_photons.push_back(v.get<int>());
          }
        } else {
          p.add("run.photons", "expected an array of integers");
        }
      } else if (kind) {
        p.add("run.kind", "expected 'sweep', 'fixed_state' or 'n_scaling'");
      }
    }
  }

  if (doc.contains("output")) {
    const json& o = doc.at("output");
    if (expect_object(o, "output", {"csv", "svg", "svg_log_y"}, p)) {
      if (const auto csv = text(o, "csv", "output", p, true)) cfg.csv_path = resolve(base, *csv);
      if (const auto svg = text(o, "svg", "output", p, false)) cfg.svg_path = resolve(base, *svg);
      cfg.svg_log_y = boolean(o, "svg_log_y", "output", p).value_or(true);
    }
  } else {
    p.add("output", "missing required key");
  }

  if (p.empty()) {
    try {
      validate(cfg.scenario);
    } catch (const Error& e) {
      p.add("scenario", e.what());
    }
  }
  if (!p.empty()) throw ConfigError(p.take());
  return cfg;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot open " + path.string()});
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

namespace {

// ---------------------------------------------------------------------------
// Output helpers

void ensure_parent(const fs::path& file) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
}

std::ofstream open_output(const fs::path& file) {
  ensure_parent(file);
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error("cannot write " + file.string());
  return out;
}

std::vector<double> column(const ResolutionTable& t, auto&& pick) {
  std::vector<double> v;
  for (const auto& r : t.rows) v.push_back(r.ok ? pick(r) : std::numeric_limits<double>::quiet_NaN());
  return v;
}

std::vector<double> grid_of(const ResolutionTable& t) {
  std::vector<double> v;
  for (const auto& r : t.rows) v.push_back(r.n_bio);
  return v;
}

ChartSeries strategy_series(const ResolutionTable& t, Strategy s, std::string name) {
  return {std::move(name), grid_of(t), column(t, [&](const ResolutionRow& r) {
            return r.get(s).value_or(std::numeric_limits<double>::quiet_NaN());
          })};
}

void write_resolution_chart(const fs::path& file, const ResolutionTable& t, const std::string& title, bool log_y) {
  ChartSpec chart{title, "n_bio (RIU)", "delta n_bio (RIU)", log_y, {}};
  for (Strategy s : kAllStrategies) {
    bool any = false;
    for (const auto& r : t.rows) any = any || (r.ok && r.get(s).has_value());
    if (any) chart.series.push_back(strategy_series(t, s, std::string(to_string(s))));
  }
  bool any_state = false;
  for (const auto& r : t.rows) any_state = any_state || (r.ok && r.state_delta_n.has_value());
  if (any_state) {
    chart.series.push_back({"fixed state", grid_of(t), column(t, [](const ResolutionRow& r) {
                              return r.state_delta_n.value_or(std::numeric_limits<double>::quiet_NaN());
                            })});
  }
  auto out = open_output(file);
  write_svg_chart(out, chart);
}

void report_failures(const ResolutionTable& t, std::ostream& err) {
  if (const std::size_t failed = t.failed_rows()) {
    err << "warning: " << failed << " of " << t.rows.size() << " grid points failed\n";
  }
}

// ---------------------------------------------------------------------------
// mode-solve

struct ModeSolveArgs {
  std::string kind;
  double radius = 0.0;
  double wavelength = 0.0;
  double cladding = 0.0;
  double core_index = 1.4475;
  std::string material = "builtin-silver";
  bool lossless = false;
  double length = 4000.0;
};

int cmd_mode_solve(const ModeSolveArgs& a, std::ostream& out, std::ostream& err) {
  NanowireSpec spec;
  try {
    spec.core = a.kind == "metal" ? CoreKind::metal : CoreKind::dielectric;
    spec.radius_nm = a.radius;
    spec.wavelength_nm = a.wavelength;
    spec.cladding_index = a.cladding;
    spec.length_nm = a.length;
    if (spec.core == CoreKind::metal) {
      spec.core_material = a.material == "builtin-silver" ? builtin_silver() : load_material_table(a.material);
    } else {
      spec.core_material = MaterialModel::constant_index(a.core_index);
    }
    if (a.lossless) spec.core_material = spec.core_material.lossless();
    validate(spec);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }
  try {
    const ModeSolution m = solve_mode(spec);
    out << "kind: " << a.kind << "\n";
    out << "n_eff_re: " << format_number(m.n_eff.real()) << "\n";
    out << "n_eff_im: " << format_number(m.n_eff.imag()) << "\n";
    out << "beta_rad_per_nm: " << format_number(m.beta) << "\n";
    out << "kappa_per_nm: " << format_number(m.kappa) << "\n";
    out << "length_nm: " << format_number(spec.length_nm) << "\n";
    out << "eta: " << format_number(transmissivity(m, spec.length_nm)) << "\n";
    out << "residual: " << format_number(m.residual) << "\n";
    if (spec.core == CoreKind::dielectric) {
      out << "u: " << format_number(m.core_arg.real()) << "\n";
      out << "w: " << format_number(m.clad_arg.real()) << "\n";
      out << "single_mode: " << (single_mode_check(spec, m) ? "true" : "false") << "\n";
    }
    return kSuccess;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeFailure;
  }
}

// ---------------------------------------------------------------------------
// sweep

int cmd_sweep(const std::string& config_path, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = load_run_config(config_path);
  } catch (const ConfigError& e) {
    err << e.what() << "\n";
    return kUsageError;
  }
  try {
    const std::vector<std::string> provenance = {"config: " + fs::path(config_path).filename().string()};
    if (cfg.kind == RunKind::n_scaling) {
      const ScalingTable t = n_scaling_study(cfg.scenario, cfg.scaling_n_bio, cfg.scaling_photons);
      auto csv = open_output(cfg.csv_path);
      write_scaling_csv(csv, t, provenance);
      if (cfg.svg_path) {
        ChartSpec chart{"resolution vs photon number", "N", "delta n_bio (RIU)", cfg.svg_log_y, {}};
        std::vector<double> n;
        std::vector<double> noon, opt, sil, hl;
        for (const auto& r : t.rows) {
          n.push_back(r.photons);
          noon.push_back(r.noon);
          opt.push_back(r.optimal);
          sil.push_back(r.sil);
          hl.push_back(r.hl);
        }
        chart.series = {{"noon", n, noon}, {"optimal", n, opt}, {"sil", n, sil}, {"hl", n, hl}};
        auto svg = open_output(*cfg.svg_path);
        write_svg_chart(svg, chart);
      }
      out << "wrote " << cfg.csv_path.string() << "\n";
      return kSuccess;
    }

    ResolutionTable t;
    std::vector<std::string> prov = provenance;
    if (cfg.kind == RunKind::fixed_state) {
      std::vector<double> state = cfg.state;
      if (cfg.optimize_at) {
        const TransducerPoint p = evaluate_transducer(cfg.scenario, *cfg.optimize_at);
        state = optimize_input_state(cfg.scenario.photons, p.eta, cfg.scenario.optimizer_tol).x;
        prov.push_back("state optimised at n_bio=" + format_number(*cfg.optimize_at) +
                       " eta=" + format_number(p.eta));
      }
      t = fixed_state_sweep(cfg.scenario, state);
    } else {
      t = sweep(cfg.scenario);
    }
    auto csv = open_output(cfg.csv_path);
    write_resolution_csv(csv, t, prov);
    if (cfg.svg_path) write_resolution_chart(*cfg.svg_path, t, "resolution sweep", cfg.svg_log_y);
    report_failures(t, err);
    out << "wrote " << cfg.csv_path.string() << "\n";
    return kSuccess;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeFailure;
  }
}

// ---------------------------------------------------------------------------
// reproduce

constexpr double kRefRadius = 50.0;
constexpr double kRefLength = 4000.0;
constexpr double kRefWavelength = 810.0;
constexpr double kSilicaIndex = 1.4475;
constexpr int kRefPhotons = 4;

struct ReproduceArgs {
  std::string figure;
  std::string out_dir;
  std::string wedge_data;
  int points = 201;
  int threads = 1;
};

const char* kWedgeFormatHint =
    "external FEM data required: pass --wedge-data <file>, a dispersion table with header lines "
    "'# lambda0_nm=810' and '# geometry=<description>' followed by rows 'n_bio Re(n_eff) Im(n_eff)' "
    "covering n_bio in [1.333, 1.4422]";

NanowireSpec reference_wire(CoreKind core, bool lossless) {
  NanowireSpec s;
  s.core = core;
  s.radius_nm = kRefRadius;
  s.wavelength_nm = kRefWavelength;
  s.length_nm = kRefLength;
  s.core_material = core == CoreKind::metal ? builtin_silver() : MaterialModel::constant_index(kSilicaIndex);
  if (lossless) s.core_material = s.core_material.lossless();
  return s;
}

SensingScenario base_scenario(Transducer t, std::vector<double> grid, int threads) {
  SensingScenario s;
  s.transducer = std::move(t);
  s.length_nm = kRefLength;
  s.wavelength_nm = kRefWavelength;
  s.photons = kRefPhotons;
  s.grid = std::move(grid);
  s.threads = threads;
  return s;
}

std::vector<double> bsa_grid(int points) {
  std::vector<double> grid;
  for (double c : linear_grid(0.0, 60.0, points)) grid.push_back(bio_index(BioMedium{1.333, 0.00182, c}));
  return grid;
}

class Manifest {
public:
  Manifest(fs::path dir, std::string figure) : dir_(std::move(dir)) {
    doc_["figure"] = figure;
    doc_["version"] = kVersion;
    doc_["parameters"] = {{"radius_nm", kRefRadius},     {"length_nm", kRefLength},
                          {"wavelength_nm", kRefWavelength}, {"silica_index", kSilicaIndex},
                          {"photons", kRefPhotons},      {"silver", "builtin-silver"}};
    doc_["files"] = json::array();
  }
  json& parameters() { return doc_["parameters"]; }
  std::ofstream open(const std::string& name) {
    doc_["files"].push_back(name);
    return open_output(dir_ / name);
  }
  void write() {
    auto out = open_output(dir_ / "manifest.json");
    out << doc_.dump(2) << "\n";
  }

private:
  fs::path dir_;
  json doc_;
};

void reproduce_fig2(const ReproduceArgs& a, Manifest& m) {
  const auto grid = linear_grid(1.1, 1.4, a.points);
  auto metal = base_scenario(reference_wire(CoreKind::metal, true), grid, a.threads);
  auto dielectric = base_scenario(reference_wire(CoreKind::dielectric, true), grid, a.threads);
  metal.strategies = dielectric.strategies = {Strategy::classical, Strategy::noon};
  const ResolutionTable tm = sweep(metal);
  const ResolutionTable td = sweep(dielectric);
  m.parameters()["lossless"] = true;
  m.parameters()["n_bio_range"] = {1.1, 1.4};

  NumericTable b{{"n_bio", "phi_dielectric", "phi_metal", "M_over_M0_dielectric", "M_over_M0_metal",
                  "A_over_A0_dielectric", "A_over_A0_metal"},
                 {}};
  NumericTable c{{"n_bio", "dn_classical_dielectric", "dn_quantum_dielectric", "dn_classical_plasmonic",
                  "dn_quantum_plasmonic", "dn_classical_dielectric_envelope", "dn_classical_plasmonic_envelope"},
                 {}};
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& d = td.rows[i];
    const auto& r = tm.rows[i];
    auto val = [&](const ResolutionRow& row, double v) { return row.ok ? v : nan; };
    b.rows.push_back({grid[i], val(d, d.phi), val(r, r.phi), val(d, std::cos(d.phi)), val(r, std::cos(r.phi)),
                      val(d, expectation_a(kRefPhotons, Phase{d.phi})),
                      val(r, expectation_a(kRefPhotons, Phase{r.phi}))});
    c.rows.push_back({grid[i], d.get(Strategy::classical).value_or(nan), d.get(Strategy::noon).value_or(nan),
                      r.get(Strategy::classical).value_or(nan), r.get(Strategy::noon).value_or(nan),
                      d.classical_envelope.value_or(nan), r.classical_envelope.value_or(nan)});
  }
  {
    auto out = m.open("fig2b_signals.csv");
    write_numeric_csv(out, b, {"lossless nanowires, r=50 nm, l=4 um, lambda0=810 nm, N=4"});
  }
  {
    auto out = m.open("fig2c_resolution.csv");
    write_numeric_csv(out, c, {"lossless nanowires, r=50 nm, l=4 um, lambda0=810 nm, N=4; inf marks fringe extrema"});
  }
  std::vector<double> cd, qd, cp, qp;
  for (const auto& row : c.rows) {
    cd.push_back(row[1]);
    qd.push_back(row[2]);
    cp.push_back(row[3]);
    qp.push_back(row[4]);
  }
  auto svg = m.open("fig2c_resolution.svg");
  write_svg_chart(svg, {"resolution, lossless nanowires (N=4)",
                        "n_bio (RIU)",
                        "delta n_bio (RIU)",
                        true,
                        {{"classical dielectric", grid, cd},
                         {"quantum dielectric", grid, qd},
                         {"classical plasmonic", grid, cp},
                         {"quantum plasmonic", grid, qp}}});
}

void reproduce_fig3(const ReproduceArgs& a, Manifest& m) {
  const int n = kRefPhotons;
  const auto probe = CoherentProbe::with_mean_photons(n);
  NumericTable ab{{"phi", "M_over_N", "A", "dphi_classical", "dphi_noon", "dphi_snl", "dphi_hl"}, {}};
  for (double phi : linear_grid(0.0, 2.0 * std::numbers::pi, a.points)) {
    const Phase ph{phi};
    const double noon = slope_a(n, ph) == 0.0 ? kDivergent
                                                : error_propagation({expectation_a(n, ph), second_moment_a(n, ph),
                                                                     slope_a(n, ph)});
    ab.rows.push_back({phi, expectation_m(probe, ph) / n, expectation_a(n, ph), delta_phi_coherent(probe, ph), noon,
                       1.0 / std::sqrt(double(n)), delta_phi_noon(n)});
  }
  {
    auto out = m.open("fig3ab_phase.csv");
    write_numeric_csv(out, ab, {"N=4 coherent (M) and NOON (A) probes, lossless"});
  }

  const auto grid = linear_grid(1.1, 1.4, a.points);
  const NanowireSpec metal = reference_wire(CoreKind::metal, true);
  const NanowireSpec dielectric = reference_wire(CoreKind::dielectric, true);
  NumericTable cd{{"n_bio", "beta_dielectric", "beta_metal", "dbeta_dn_dielectric", "dbeta_dn_metal"}, {}};
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (double nb : grid) {
    auto safe = [&](auto&& f) {
      try {
        return f();
      } catch (const Error&) {
        return nan;
      }
    };
    cd.rows.push_back({nb, safe([&] { return solve_mode(dielectric.with_cladding(nb)).beta; }),
                       safe([&] { return solve_mode(metal.with_cladding(nb)).beta; }),
                       safe([&] { return dbeta_dn(dielectric, nb); }), safe([&] { return dbeta_dn(metal, nb); })});
  }
  {
    auto out = m.open("fig3cd_beta.csv");
    write_numeric_csv(out, cd, {"lossless nanowires, r=50 nm, lambda0=810 nm; beta in rad/nm"});
  }
  std::vector<double> sd, sm;
  for (const auto& row : cd.rows) {
    sd.push_back(row[3]);
    sm.push_back(row[4]);
  }
  auto svg = m.open("fig3d_slope.svg");
  write_svg_chart(svg, {"d beta / d n_bio", "n_bio (RIU)", "rad/nm per RIU", false,
                        {{"dielectric", grid, sd}, {"metal", grid, sm}}});
}

const std::vector<Strategy> kLossyStrategies = {Strategy::noon, Strategy::optimal, Strategy::sil, Strategy::hl};

void reproduce_fig4(const ReproduceArgs& a, const DispersionTable& wedge, Manifest& m) {
  auto wire = base_scenario(reference_wire(CoreKind::metal, false), linear_grid(1.1, 1.4, a.points), a.threads);
  auto wedge_s = base_scenario(wedge, bsa_grid(a.points), a.threads);
  wire.strategies = wedge_s.strategies = kLossyStrategies;
  m.parameters()["wedge_geometry"] = wedge.geometry;
  for (const auto& [name, scenario] : {std::pair{"nanowire", &wire}, std::pair{"wedge", &wedge_s}}) {
    const ResolutionTable t = sweep(*scenario);
    {
      auto out = m.open(std::string("fig4_") + name + ".csv");
      write_resolution_csv(out, t);
    }
    auto svg = m.open(std::string("fig4_") + name + ".svg");
    ChartSpec chart{std::string("optimal resolution, ") + name, "n_bio (RIU)", "delta n_bio (RIU)", true, {}};
    for (Strategy s : kLossyStrategies) chart.series.push_back(strategy_series(t, s, std::string(to_string(s))));
    write_svg_chart(svg, chart);
  }
}

void reproduce_fig5(const ReproduceArgs& a, const DispersionTable& wedge, Manifest& m) {
  struct Panel {
    const char* tag;
    SensingScenario scenario;
    std::vector<double> points;
    double scaling_point;
  };
  std::vector<Panel> panels;
  panels.push_back({"nanowire",
                    base_scenario(reference_wire(CoreKind::metal, false), linear_grid(1.1, 1.4, a.points), a.threads),
                    {1.13, 1.19, 1.37},
                    1.19});
  panels.push_back({"wedge", base_scenario(wedge, bsa_grid(a.points), a.threads), {1.34392, 1.36576, 1.43128}, 1.36576});
  m.parameters()["wedge_geometry"] = wedge.geometry;

  const char* fixed_names[] = {"fig5a_nanowire.csv", "fig5b_wedge.csv"};
  const char* scaling_names[] = {"fig5c_nanowire_scaling.csv", "fig5d_wedge_scaling.csv"};
  std::vector<int> photon_numbers;
  for (int n = 1; n <= 20; ++n) photon_numbers.push_back(n);
  m.parameters()["scaling_photons"] = photon_numbers;

  for (std::size_t k = 0; k < panels.size(); ++k) {
    Panel& panel = panels[k];
    panel.scenario.strategies = {Strategy::sil, Strategy::hl};
    NumericTable t{{"n_bio", "eta", "dn_sil", "dn_hl"}, {}};
    std::vector<ResolutionTable> fixed;
    std::vector<std::string> provenance;
    for (double at : panel.points) {
      const TransducerPoint p = evaluate_transducer(panel.scenario, at);
      const FisherResult best = optimize_input_state(kRefPhotons, p.eta, panel.scenario.optimizer_tol);
      std::string xs;
      for (double v : best.x) xs += " " + format_number(v);
      provenance.push_back("state optimised at n_bio=" + format_number(at) + " eta=" + format_number(p.eta) +
                           " x=" + xs);
      t.columns.push_back("dn_state_" + format_number(at));
      fixed.push_back(fixed_state_sweep(panel.scenario, best.x));
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < panel.scenario.grid.size(); ++i) {
      const auto& base = fixed.front().rows[i];
      std::vector<double> row = {base.n_bio, base.ok ? base.eta : nan,
                                 base.get(Strategy::sil).value_or(nan), base.get(Strategy::hl).value_or(nan)};
      for (const auto& f : fixed) row.push_back(f.rows[i].state_delta_n.value_or(nan));
      t.rows.push_back(std::move(row));
    }
    {
      auto out = m.open(fixed_names[k]);
      write_numeric_csv(out, t, provenance);
    }
    const ScalingTable s = n_scaling_study(panel.scenario, panel.scaling_point, photon_numbers);
    auto out = m.open(scaling_names[k]);
    write_scaling_csv(out, s);
  }
}

int cmd_reproduce(const ReproduceArgs& a, std::ostream& out, std::ostream& err) {
  static const std::vector<std::string> known = {"fig2", "fig3", "fig4", "fig5"};
  if (std::find(known.begin(), known.end(), a.figure) == known.end()) {
    err << "error: unknown figure '" << a.figure << "' (expected fig2, fig3, fig4 or fig5)\n";
    return kUsageError;
  }
  if (a.points < 2) {
    err << "error: --points must be >= 2\n";
    return kUsageError;
  }
  std::optional<DispersionTable> wedge;
  if (a.figure == "fig4" || a.figure == "fig5") {
    if (a.wedge_data.empty()) {
      err << "error: " << kWedgeFormatHint << "\n";
      return kUsageError;
    }
    try {
      wedge = load_dispersion_table(a.wedge_data);
    } catch (const Error& e) {
      err << "error: " << e.what() << "\n" << kWedgeFormatHint << "\n";
      return kUsageError;
    }
  }
  const fs::path dir = a.out_dir.empty() ? fs::path("reproduce") / a.figure : fs::path(a.out_dir);
  try {
    Manifest m(dir, a.figure);
    m.parameters()["points"] = a.points;
    if (a.figure == "fig2") reproduce_fig2(a, m);
    if (a.figure == "fig3") reproduce_fig3(a, m);
    if (a.figure == "fig4") reproduce_fig4(a, *wedge, m);
    if (a.figure == "fig5") reproduce_fig5(a, *wedge, m);
    m.write();
    out << "wrote " << dir.string() << "\n";
    return kSuccess;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeFailure;
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Resolution of interferometric plasmonic refractive-index sensors", "qpsense"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  ModeSolveArgs ms;
  auto* mode = app.add_subcommand("mode-solve", "Solve the guided mode of a nanowire");
  mode->add_option("--kind", ms.kind, "Core kind")->required()->check(CLI::IsMember({"metal", "dielectric"}));
  mode->add_option("--r", ms.radius, "Core radius in nm")->required();
  mode->add_option("--lambda0", ms.wavelength, "Free-space wavelength in nm")->required();
  mode->add_option("--nclad", ms.cladding, "Cladding (sensing medium) index")->required();
  mode->add_option("--ncore", ms.core_index, "Dielectric core index")->capture_default_str();
  mode->add_option("--material", ms.material, "Metal data: 'builtin-silver' or a permittivity file")
      ->capture_default_str();
  mode->add_flag("--lossless", ms.lossless, "Drop the imaginary part of the core permittivity");
  mode->add_option("--length", ms.length, "Waveguide length in nm (for eta)")->capture_default_str();

  std::string config_path;
  auto* sw = app.add_subcommand("sweep", "Run a configured resolution sweep");
  sw->add_option("config", config_path, "JSON configuration file")->required();

  ReproduceArgs rp;
  auto* re = app.add_subcommand("reproduce", "Regenerate the datasets of one figure");
  re->add_option("figure", rp.figure, "fig2, fig3, fig4 or fig5")->required();
  re->add_option("--out", rp.out_dir, "Output directory (default reproduce/<figure>)");
  re->add_option("--wedge-data", rp.wedge_data, "Wedge dispersion table (fig4, fig5)");
  re->add_option("--points", rp.points, "Grid points per sweep")->capture_default_str();
  re->add_option("--threads", rp.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
      app.exit(e, out, err);
      return kSuccess;
    }
    err << "usage error: " << e.what() << "\n" << app.help();
    return kUsageError;
  }

  if (mode->parsed()) return cmd_mode_solve(ms, out, err);
  if (sw->parsed()) return cmd_sweep(config_path, out, err);
  return cmd_reproduce(rp, out, err);
}

}  // namespace qps::cli
