#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "qpsense/cli.hpp"
#include "qpsense/report.hpp"

namespace fs = std::filesystem;
using qps::cli::ConfigError;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "qpsense");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = qps::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("qpsense_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

std::vector<std::string> cells(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

const char* kSmallConfig = R"({
  "transducer": {"kind": "nanowire", "core": "metal", "radius_nm": 50, "material": {"kind": "builtin-silver"}},
  "length_nm": 4000,
  "wavelength_nm": 810,
  "photons": 4,
  "grid": {"start": 1.1, "stop": 1.4, "points": 5},
  "run": {"kind": "sweep"},
  "output": {"csv": "sweep_small.csv", "svg": "sweep_small.svg"}
})";

void write_wedge(const fs::path& p) {
  std::ofstream out(p);
  out << "# lambda0_nm=810\n# geometry=synthetic wedge for tests\n";
  for (int i = 0; i <= 12; ++i) {
    const double n = 1.333 + (1.4422 - 1.333) * i / 12.0;
    out << qps::format_number(n) << " " << qps::format_number(1.1 * n + 0.09) << " 0.0035\n";
  }
}

}  // namespace

TEST_CASE("config: every violation is reported") {
  const std::string doc = R"({
    "transducer": {"kind": "nanowire", "core": "copper", "radius_nm": -5, "material": {"kind": "builtin-silver"}, "colour": 1},
    "photons": 0,
    "strategies": ["noon", "magic"],
    "grid": {"start": 1.2, "stop": 1.1, "points": 3},
    "threads": 0,
    "typo_key": true,
    "output": {"csv": "x.csv"}
  })";
  try {
    qps::cli::parse_run_config(doc);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string all = e.what();
    CHECK(all.find("transducer.colour: unknown key") != std::string::npos);
    CHECK(all.find("config.typo_key: unknown key") != std::string::npos);
    CHECK(all.find("transducer.core") != std::string::npos);
    CHECK(all.find("photons") != std::string::npos);
    CHECK(all.find("strategies[1]") != std::string::npos);
    CHECK(all.find("strictly increasing") != std::string::npos);
    CHECK(all.find("threads") != std::string::npos);
    CHECK(e.problems().size() >= 7);
  }
}

TEST_CASE("config: syntax, empty grid and missing sections") {
  CHECK_THROWS_AS(qps::cli::parse_run_config("{ not json"), ConfigError);
  try {
    qps::cli::parse_run_config(R"({"transducer": {"kind": "table", "file": "/nonexistent.txt"},
                                   "grid": {"values": []}})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string all = e.what();
    CHECK(all.find("grid is empty") != std::string::npos);
    CHECK(all.find("output: missing required key") != std::string::npos);
    CHECK(all.find("transducer.file") != std::string::npos);
  }
}

TEST_CASE("config: grammar round trip") {
  const auto cfg = qps::cli::parse_run_config(R"({
    "transducer": {"kind": "nanowire", "core": "dielectric", "radius_nm": 50,
                   "material": {"kind": "constant", "index": 1.4475}},
    "photons": 3,
    "strategies": ["classical", "noon"],
    "grid": {"concentration": {"start": 0, "stop": 60, "points": 3}},
    "threads": 2,
    "run": {"kind": "fixed_state", "state": [0.5, 0, 0, 0.5]},
    "output": {"csv": "out/a.csv", "svg_log_y": false}
  })", "/base");
  CHECK(cfg.scenario.photons == 3);
  CHECK(cfg.scenario.grid == std::vector<double>{1.333, 1.3876, 1.4422});
  CHECK(cfg.scenario.strategies.size() == 2);
  CHECK(cfg.kind == qps::cli::RunKind::fixed_state);
  CHECK(cfg.state.size() == 4);
  CHECK(cfg.csv_path == fs::path("/base/out/a.csv"));
  CHECK_FALSE(cfg.svg_path.has_value());
  CHECK_FALSE(cfg.svg_log_y);
  const auto& spec = std::get<qps::NanowireSpec>(cfg.scenario.transducer);
  CHECK(spec.core == qps::CoreKind::dielectric);

  const auto dl = qps::cli::parse_run_config(R"({
    "transducer": {"kind": "nanowire", "core": "metal", "radius_nm": 50,
                   "material": {"kind": "drude-lorentz", "plasma_ev": 9.01, "drude_strength": 0.845, "damping_ev": 0.048,
                                "oscillators": [{"strength": 0.065, "frequency_ev": 0.816, "width_ev": 3.886}],
                                "lossless": true}},
    "grid": {"values": [1.2, 1.3]},
    "run": {"kind": "n_scaling", "n_bio": 1.2, "photons": [1, 2, 3]},
    "output": {"csv": "s.csv"}
  })");
  CHECK(dl.kind == qps::cli::RunKind::n_scaling);
  CHECK(dl.scaling_photons == std::vector<int>{1, 2, 3});
  CHECK(std::get<qps::NanowireSpec>(dl.scenario.transducer).core_material.is_lossless());
}

TEST_CASE("mode-solve") {
  const auto lossless = invoke({"mode-solve", "--kind", "metal", "--r", "50", "--lambda0", "810", "--nclad", "1.25", "--lossless"});
  CHECK(lossless.code == 0);
  CHECK(lossless.out.find("kappa_per_nm: 0\n") != std::string::npos);
  CHECK(lossless.out.find("eta: 1\n") != std::string::npos);

  const auto glass = invoke({"mode-solve", "--kind", "dielectric", "--ncore", "1.4475", "--r", "50", "--lambda0", "810", "--nclad", "1.3"});
  CHECK(glass.code == 0);
  CHECK(glass.out.find("single_mode: true") != std::string::npos);

  CHECK(invoke({"mode-solve", "--kind", "metal", "--r", "50", "--lambda0", "810"}).code == 2);
  CHECK(invoke({"mode-solve", "--kind", "gold", "--r", "50", "--lambda0", "810", "--nclad", "1.25"}).code == 2);
  CHECK(invoke({"mode-solve", "--kind", "metal", "--r", "-50", "--lambda0", "810", "--nclad", "1.25"}).code == 2);
  const auto cutoff = invoke({"mode-solve", "--kind", "dielectric", "--r", "50", "--lambda0", "810", "--nclad", "1.5"});
  CHECK(cutoff.code == 1);
  CHECK_FALSE(cutoff.err.empty());
  CHECK(invoke({}).code == 2);
  CHECK(invoke({"--help"}).code == 0);
}

TEST_CASE("sweep against the golden CSV") {
  const fs::path dir = scratch("golden");
  write_file(dir / "sweep_small.json", kSmallConfig);
  const auto r = invoke({"sweep", (dir / "sweep_small.json").string()});
  REQUIRE(r.code == 0);
  const auto got = lines(read_file(dir / "sweep_small.csv"));
  const auto want = lines(read_file(fs::path(QPSENSE_GOLDEN_DIR) / "sweep_small.csv"));
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    if (got[i].starts_with("#") || i < 4) {
      CHECK(got[i] == want[i]);
      continue;
    }
    const auto g = cells(got[i]);
    const auto w = cells(want[i]);
    REQUIRE(g.size() == w.size());
    for (std::size_t c = 0; c < g.size(); ++c) {
      if (g[c] == w[c]) continue;
      // Tolerate last-digit differences from other compilers.
      const double a = std::stod(g[c]);
      const double b = std::stod(w[c]);
      CHECK(std::abs(a - b) <= 1e-12 * std::abs(b));
    }
  }
  CHECK(read_file(dir / "sweep_small.svg").find("<svg") != std::string::npos);
  CHECK(qps::resolution_columns(4) == cells(want[3]));

  // Identical configuration, identical bytes.
  const std::string first = read_file(dir / "sweep_small.csv");
  REQUIRE(invoke({"sweep", (dir / "sweep_small.json").string()}).code == 0);
  CHECK(read_file(dir / "sweep_small.csv") == first);
}

TEST_CASE("sweep exit codes") {
  const fs::path dir = scratch("codes");
  write_file(dir / "bad.json", R"({"transducer": {"kind": "nanowire"}, "grid": {"values": []}, "output": {"csv": "x.csv"}})");
  const auto bad = invoke({"sweep", (dir / "bad.json").string()});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("grid is empty") != std::string::npos);
  CHECK(invoke({"sweep", (dir / "missing.json").string()}).code == 2);
  CHECK(invoke({"sweep"}).code == 2);
}

TEST_CASE("reproduce") {
  const fs::path dir = scratch("reproduce");
  const auto fig3 = invoke({"reproduce", "fig3", "--out", (dir / "fig3").string(), "--points", "11"});
  CHECK(fig3.code == 0);
  CHECK(fs::exists(dir / "fig3" / "fig3cd_beta.csv"));
  CHECK(fs::exists(dir / "fig3" / "manifest.json"));

  const auto fig2 = invoke({"reproduce", "fig2", "--out", (dir / "fig2").string(), "--points", "11"});
  CHECK(fig2.code == 0);
  const auto c = lines(read_file(dir / "fig2" / "fig2c_resolution.csv"));
  CHECK(std::find(c.begin(), c.end(),
                  "n_bio,dn_classical_dielectric,dn_quantum_dielectric,dn_classical_plasmonic,dn_quantum_plasmonic,"
                  "dn_classical_dielectric_envelope,dn_classical_plasmonic_envelope") != c.end());

  const auto fig4 = invoke({"reproduce", "fig4"});
  CHECK(fig4.code == 2);
  CHECK(fig4.err.find("external FEM data required") != std::string::npos);
  CHECK(fig4.err.find("lambda0_nm") != std::string::npos);
  CHECK(invoke({"reproduce", "fig9"}).code == 2);

  write_wedge(dir / "wedge.txt");
  const auto fig5 = invoke({"reproduce", "fig5", "--wedge-data", (dir / "wedge.txt").string(), "--out",
                            (dir / "fig5").string(), "--points", "7", "--threads", "2"});
  CHECK(fig5.code == 0);
  for (const char* f : {"fig5a_nanowire.csv", "fig5b_wedge.csv", "fig5c_nanowire_scaling.csv",
                        "fig5d_wedge_scaling.csv", "manifest.json"}) {
    CHECK(fs::exists(dir / "fig5" / f));
  }
  const auto fig4w = invoke({"reproduce", "fig4", "--wedge-data", (dir / "wedge.txt").string(), "--out",
                             (dir / "fig4").string(), "--points", "7"});
  CHECK(fig4w.code == 0);
  CHECK(fs::exists(dir / "fig4" / "fig4_wedge.csv"));
}
