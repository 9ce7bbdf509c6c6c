#include "qpsense/modesolver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "qpsense/error.hpp"
#include "qpsense/specfun.hpp"

namespace qps {
namespace {

using complex = std::complex<double>;

constexpr double kScanUpper = 4.0;
constexpr double kScanOffset = 1e-6;
constexpr int kScanPoints = 400;
constexpr int kNewtonMaxIter = 100;
constexpr double kNewtonTol = 1e-12;
constexpr double kNewtonStep = 1e-8;
constexpr double kResidualTol = 1e-10;
// First zero of J0: the LP01 core parameter u stays below it.
constexpr double kJ0FirstZero = 2.404825557695773;
constexpr double kSingleModeLimit = 2.405;

// Square root on the Re >= 0 branch, Im >= 0 on the Re = 0 ray.
complex principal_sqrt(complex w) {
  if (w.imag() == 0.0) w.imag(0.0);  // drop a -0.0 that would select -i
  return std::sqrt(w);
}

struct Tm0Terms {
  complex value;
  complex metal_scale;  // eps_m / k_m
  complex core_arg;
  complex clad_arg;
};

Tm0Terms tm0_terms(complex k, const NanowireSpec& spec, complex eps_m) {
  const double k0 = free_space_wavenumber(spec.wavelength_nm);
  const complex n = k / k0;
  const double eps_c = spec.cladding_index * spec.cladding_index;
  const complex k_m = k0 * principal_sqrt(n * n - eps_m);
  const complex k_c = k0 * principal_sqrt(n * n - eps_c);
  const double r = spec.radius_nm;
  const complex metal_scale = eps_m / k_m;
  const complex value = metal_scale * specfun::bessel_i_ratio(k_m * r) +
                        (eps_c / k_c) * specfun::bessel_k_ratio(k_c * r);
  return {value, metal_scale, k_m * r, k_c * r};
}

double normalized_residual(const Tm0Terms& t) { return std::abs(t.value) / std::abs(t.metal_scale); }

// Bisection to adjacent doubles on a sign change of f over [lo, hi].
template <class F>
double bisect(F&& f, double lo, double hi, double f_lo) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double f_mid = f(mid);
    if (f_mid == 0.0) return mid;
    if ((f_mid > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

struct Bracket {
  double lo;
  double hi;
  double f_lo;
};

std::vector<Bracket> scan_tm0(const NanowireSpec& spec, double eps_real) {
  const double k0 = free_space_wavenumber(spec.wavelength_nm);
  const double lo = spec.cladding_index + kScanOffset;
  const double hi = kScanUpper;
  std::vector<Bracket> brackets;
  if (!(hi > lo)) return brackets;
  double prev_n = 0.0;
  double prev_f = std::numeric_limits<double>::quiet_NaN();
  for (int i = 0; i < kScanPoints; ++i) {
    const double n = lo + (hi - lo) * i / (kScanPoints - 1);
    double f = std::numeric_limits<double>::quiet_NaN();
    try {
      f = tm0_terms(complex(n * k0, 0.0), spec, eps_real).value.real();
    } catch (const Error&) {
    }
    if (std::isfinite(f) && std::isfinite(prev_f) && (f > 0.0) != (prev_f > 0.0)) {
      brackets.push_back({prev_n, n, prev_f});
    }
    prev_n = n;
    prev_f = f;
  }
  return brackets;
}

// Complex Newton on n_eff with a central-difference derivative.
std::optional<complex> newton_tm0(const NanowireSpec& spec, complex eps_m, complex start) {
  const double k0 = free_space_wavenumber(spec.wavelength_nm);
  auto g = [&](complex n) { return tm0_terms(n * k0, spec, eps_m).value; };
  complex n = start;
  try {
    for (int it = 0; it < kNewtonMaxIter; ++it) {
      const complex dg = (g(n + kNewtonStep) - g(n - kNewtonStep)) / (2.0 * kNewtonStep);
      if (dg == 0.0) return std::nullopt;
      const complex step = g(n) / dg;
      n -= step;
      if (!std::isfinite(n.real()) || !std::isfinite(n.imag())) return std::nullopt;
      if (std::abs(step) < kNewtonTol) return n;
    }
  } catch (const Error&) {
  }
  return std::nullopt;
}

ModeSolution make_solution(complex n_eff, double k0, double residual, complex core_arg, complex clad_arg) {
  ModeSolution m;
  m.n_eff = n_eff;
  m.k = n_eff * k0;
  m.beta = m.k.real();
  m.kappa = m.k.imag();
  m.residual = residual;
  m.core_arg = core_arg;
  m.clad_arg = clad_arg;
  return m;
}

// Fritsch-Carlson derivative estimates for a monotone piecewise cubic.
std::vector<double> pchip_slopes(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> h(n - 1);
  std::vector<double> delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x[i + 1] - x[i];
    delta[i] = (y[i + 1] - y[i]) / h[i];
  }
  std::vector<double> d(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] * delta[i] <= 0.0) continue;
    const double w1 = 2.0 * h[i] + h[i - 1];
    const double w2 = h[i] + 2.0 * h[i - 1];
    d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
  }
  auto end_slope = [](double h0, double h1, double d0, double d1) {
    double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (s * d0 <= 0.0) return 0.0;
    if (d0 * d1 <= 0.0 && std::abs(s) > 3.0 * std::abs(d0)) return 3.0 * d0;
    return s;
  };
  if (n == 2) {
    d[0] = d[1] = delta[0];
  } else {
    d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
  }
  return d;
}

struct Hermite {
  double value;
  double derivative;
};

Hermite pchip_eval(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& d,
                   std::size_t i, double q) {
  const double h = x[i + 1] - x[i];
  const double t = (q - x[i]) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double value = (2 * t3 - 3 * t2 + 1) * y[i] + (t3 - 2 * t2 + t) * h * d[i] + (-2 * t3 + 3 * t2) * y[i + 1] +
                       (t3 - t2) * h * d[i + 1];
  const double derivative = ((6 * t2 - 6 * t) * y[i] + (-6 * t2 + 6 * t) * y[i + 1]) / h +
                            (3 * t2 - 4 * t + 1) * d[i] + (3 * t2 - 2 * t) * d[i + 1];
  return {value, derivative};
}

struct TableInterpolation {
  complex n_eff;
  complex slope;
};

TableInterpolation interpolate(const DispersionTable& table, double n_bio) {
  validate(table);
  const auto& rows = table.rows;
  if (!(n_bio >= rows.front().n_bio && n_bio <= rows.back().n_bio)) {
    std::ostringstream msg;
    msg << "n_bio " << n_bio << " outside dispersion table range [" << rows.front().n_bio << ", "
        << rows.back().n_bio << "]";
    throw ExtrapolationError(msg.str());
  }
  std::vector<double> x;
  std::vector<double> re;
  std::vector<double> im;
  for (const auto& r : rows) {
    x.push_back(r.n_bio);
    re.push_back(r.n_eff.real());
    im.push_back(r.n_eff.imag());
  }
  const auto d_re = pchip_slopes(x, re);
  const auto d_im = pchip_slopes(x, im);
  auto it = std::upper_bound(x.begin(), x.end(), n_bio);
  std::size_t i = (it == x.begin()) ? 0 : static_cast<std::size_t>(it - x.begin()) - 1;
  if (i + 1 >= x.size()) i = x.size() - 2;
  const Hermite hr = pchip_eval(x, re, d_re, i, n_bio);
  const Hermite hi = pchip_eval(x, im, d_im, i, n_bio);
  complex n_eff(hr.value, hi.value);
  // Nodes are reproduced bit-exactly.
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (x[j] == n_bio) n_eff = rows[j].n_eff;
  }
  return {n_eff, complex(hr.derivative, hi.derivative)};
}

}  // namespace

double free_space_wavenumber(double wavelength_nm) { return 2.0 * std::numbers::pi / wavelength_nm; }

void validate(const NanowireSpec& spec) {
  if (!(spec.radius_nm > 0.0) || !std::isfinite(spec.radius_nm)) throw DomainError("nanowire radius must be > 0");
  if (!(spec.length_nm > 0.0) || !std::isfinite(spec.length_nm)) throw DomainError("nanowire length must be > 0");
  if (!(spec.wavelength_nm > 0.0) || !std::isfinite(spec.wavelength_nm)) {
    throw DomainError("wavelength must be > 0");
  }
  if (!(spec.cladding_index > 0.0) || !std::isfinite(spec.cladding_index)) {
    throw DomainError("cladding index must be > 0");
  }
}

complex tm0_residual(complex k, const NanowireSpec& spec, complex eps_metal) {
  return tm0_terms(k, spec, eps_metal).value;
}

complex tm0_residual(complex k, const NanowireSpec& spec) {
  if (spec.core != CoreKind::metal) throw DomainError("tm0_residual requires a metal core");
  return tm0_residual(k, spec, spec.core_material.permittivity(spec.wavelength_nm));
}

ModeSolution solve_tm0(const NanowireSpec& spec, std::optional<complex> seed) {
  validate(spec);
  if (spec.core != CoreKind::metal) throw DomainError("solve_tm0 requires a metal core");
  const complex eps_m = spec.core_material.permittivity(spec.wavelength_nm);
  const double k0 = free_space_wavenumber(spec.wavelength_nm);

  const auto brackets = scan_tm0(spec, eps_m.real());
  if (brackets.empty()) {
    throw NoRootError("solve_tm0: no sign change of the TM0 equation in the scan window");
  }

  // Seeds only choose between brackets; the refined root never depends on
  // the seed value itself, so sweep results are independent of chunking.
  std::vector<std::size_t> order(brackets.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = order.size() - 1 - i;
  if (seed) {
    const double target = seed->real();
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double da = std::abs(0.5 * (brackets[a].lo + brackets[a].hi) - target);
      const double db = std::abs(0.5 * (brackets[b].lo + brackets[b].hi) - target);
      return da < db;
    });
  }

  auto real_equation = [&](double n) { return tm0_terms(complex(n * k0, 0.0), spec, eps_m.real()).value.real(); };

  for (const std::size_t idx : order) {
    const Bracket& b = brackets[idx];
    const double n_real = bisect(real_equation, b.lo, b.hi, b.f_lo);
    const Tm0Terms lossless = tm0_terms(complex(n_real * k0, 0.0), spec, eps_m.real());
    // A sign change across a pole leaves a large residual; skip it.
    if (normalized_residual(lossless) > kResidualTol) continue;

    if (eps_m.imag() == 0.0) {
      return make_solution(complex(n_real, 0.0), k0, normalized_residual(lossless), lossless.core_arg,
                           lossless.clad_arg);
    }

    std::optional<complex> root = newton_tm0(spec, eps_m, complex(n_real, 0.0));
    if (!root) {
      // Homotopy in Im(eps_m) when the direct step from the lossless root
      // is too large.
      complex current(n_real, 0.0);
      constexpr int kRampSteps = 16;
      for (int s = 1; s <= kRampSteps && current != complex(); ++s) {
        const complex eps_s(eps_m.real(), eps_m.imag() * s / kRampSteps);
        auto next = newton_tm0(spec, eps_s, current);
        current = next ? *next : complex();
      }
      if (current != complex()) root = current;
    }
    if (!root) continue;

    const Tm0Terms lossy = tm0_terms(*root * k0, spec, eps_m);
    if (!(lossy.clad_arg.real() > 0.0)) continue;
    if (!(root->real() > 0.0) || root->imag() < 0.0) continue;
    if (normalized_residual(lossy) > kResidualTol) {
      throw ConvergenceError("solve_tm0: Newton iterate does not satisfy the residual tolerance");
    }
    return make_solution(*root, k0, normalized_residual(lossy), lossy.core_arg, lossy.clad_arg);
  }
  throw ConvergenceError("solve_tm0: no bracket converged to an admissible root");
}

namespace {

struct Lp01Geometry {
  double k0;
  double n_core;
  double v;
};

Lp01Geometry lp01_geometry(const NanowireSpec& spec) {
  validate(spec);
  if (spec.core != CoreKind::dielectric) throw DomainError("LP01 requires a dielectric core");
  const complex eps_d = spec.core_material.permittivity(spec.wavelength_nm);
  if (eps_d.imag() != 0.0 || !(eps_d.real() > 0.0)) {
    throw DomainError("LP01 solver requires a real positive core permittivity");
  }
  const double k0 = free_space_wavenumber(spec.wavelength_nm);
  const double n_core = std::sqrt(eps_d.real());
  const double n_clad = spec.cladding_index;
  const double v = (n_core > n_clad) ? k0 * spec.radius_nm * std::sqrt((n_core - n_clad) * (n_core + n_clad)) : 0.0;
  return {k0, n_core, v};
}

// u J1(u)/J0(u) - w K1(w)/K0(w) with u^2 + w^2 = V^2.
double lp01_function(double u, double w) {
  return u * specfun::bessel_j_ratio(u) - w * specfun::bessel_k_ratio(complex(w, 0.0)).real();
}

double core_parameter(double v, double w) { return std::sqrt((v - w) * (v + w)); }

}  // namespace

double lp01_residual(double n_eff, const NanowireSpec& spec) {
  const Lp01Geometry g = lp01_geometry(spec);
  const double n_clad = spec.cladding_index;
  if (!(n_eff > n_clad && n_eff < g.n_core)) throw DomainError("lp01_residual: n_eff outside (n_clad, n_core)");
  const double kr = g.k0 * spec.radius_nm;
  const double u = kr * std::sqrt((g.n_core - n_eff) * (g.n_core + n_eff));
  const double w = kr * std::sqrt((n_eff - n_clad) * (n_eff + n_clad));
  return lp01_function(u, w);
}

ModeSolution solve_lp01(const NanowireSpec& spec) {
  const Lp01Geometry g = lp01_geometry(spec);
  if (!(g.v > 0.0)) throw NoRootError("solve_lp01: no guided mode (n_clad >= n_core)");

  // Work in t = ln w: near cutoff w is exponentially small in 1/V^2.
  auto f = [&](double t) {
    const double w = std::exp(t);
    return lp01_function(core_parameter(g.v, w), w);
  };
  const double w_hi = g.v * (1.0 - 1e-14);
  const double w_lo = (g.v > kJ0FirstZero) ? core_parameter(g.v, kJ0FirstZero) * (1.0 + 1e-14)
                                           : std::numeric_limits<double>::min() * 1e8;
  const double t_lo = std::log(w_lo);
  const double t_hi = std::log(w_hi);
  const double f_lo = f(t_lo);
  const double f_hi = f(t_hi);
  if (!(f_lo > 0.0 && f_hi < 0.0)) {
    throw NoRootError("solve_lp01: LP01 root not resolvable (mode at or beyond cutoff)");
  }
  const double t = bisect(f, t_lo, t_hi, f_lo);
  const double w = std::exp(t);
  const double u = core_parameter(g.v, w);

  const double kr = g.k0 * spec.radius_nm;
  const double n_clad = spec.cladding_index;
  const double n_eff = (w < u) ? n_clad * std::sqrt(1.0 + (w / (kr * n_clad)) * (w / (kr * n_clad)))
                               : g.n_core * std::sqrt(1.0 - (u / (kr * g.n_core)) * (u / (kr * g.n_core)));
  const double scale = std::max(std::abs(u * specfun::bessel_j_ratio(u)), 1e-300);
  const double residual = std::abs(lp01_function(u, w)) / scale;
  if (residual > kResidualTol) throw ConvergenceError("solve_lp01: residual tolerance not met");
  return make_solution(complex(n_eff, 0.0), g.k0, residual, complex(u, 0.0), complex(w, 0.0));
}

ModeSolution solve_mode(const NanowireSpec& spec, std::optional<complex> seed) {
  return spec.core == CoreKind::metal ? solve_tm0(spec, seed) : solve_lp01(spec);
}

bool single_mode_check(const NanowireSpec& spec, const ModeSolution& mode) {
  if (spec.core != CoreKind::dielectric) return false;
  const complex eps_d = spec.core_material.permittivity(spec.wavelength_nm);
  if (!(std::sqrt(eps_d.real()) > spec.cladding_index)) return false;
  const double u = mode.core_arg.real();
  const double w = mode.clad_arg.real();
  if (!(w > 0.0)) return false;
  return std::hypot(u, w) < kSingleModeLimit;
}

double transmissivity(const ModeSolution& mode, double length_nm) {
  if (!(length_nm > 0.0)) throw DomainError("transmissivity: length must be > 0");
  return std::exp(-2.0 * mode.kappa * length_nm);
}

double central_slope(const std::function<double(double)>& beta_of_n, double n, double step) {
  if (!(step > 0.0)) throw DomainError("central_slope: step must be > 0");
  const double full = (beta_of_n(n + step) - beta_of_n(n - step)) / (2.0 * step);
  const double half_step = 0.5 * step;
  const double half = (beta_of_n(n + half_step) - beta_of_n(n - half_step)) / (2.0 * half_step);
  if (std::abs(full - half) > 1e-4 * std::abs(full)) {
    std::ostringstream msg;
    msg << "slope not converged at n=" << n << ": " << full << " vs " << half << " on step halving";
    throw ConvergenceError(msg.str());
  }
  return full;
}

double dbeta_dn(const NanowireSpec& spec, double n_bio, double step) {
  const auto seed = (spec.core == CoreKind::metal)
                        ? std::optional<complex>(solve_tm0(spec.with_cladding(n_bio)).n_eff)
                        : std::nullopt;
  return central_slope([&](double n) { return solve_mode(spec.with_cladding(n), seed).beta; }, n_bio, step);
}

// ---------------------------------------------------------------------------

void validate(const DispersionTable& table) {
  if (!(table.wavelength_nm > 0.0)) throw DomainError("dispersion table needs lambda0 > 0");
  if (table.rows.size() < 4) throw DomainError("dispersion table needs at least 4 rows");
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    if (!std::isfinite(r.n_bio) || !std::isfinite(r.n_eff.real()) || !std::isfinite(r.n_eff.imag())) {
      throw DomainError("dispersion table has a non-finite entry");
    }
    if (r.n_eff.imag() < 0.0) throw DomainError("dispersion table has Im n_eff < 0");
    if (i > 0 && !(r.n_bio > table.rows[i - 1].n_bio)) {
      throw DomainError("dispersion table n_bio must be strictly increasing");
    }
  }
}

DispersionTable parse_dispersion_table(std::istream& in, const std::string& name) {
  DispersionTable table;
  bool have_wavelength = false;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    const std::string where = name + ":" + std::to_string(line_no);
    if (line[first] == '#') {
      std::string body = line.substr(first + 1);
      body.erase(0, body.find_first_not_of(" \t"));
      if (body.rfind("lambda0_nm=", 0) == 0) {
        try {
          std::size_t used = 0;
          table.wavelength_nm = std::stod(body.substr(11), &used);
        } catch (const std::exception&) {
          throw ParseError(where + ": bad lambda0_nm value");
        }
        have_wavelength = true;
      } else if (body.rfind("geometry=", 0) == 0) {
        table.geometry = body.substr(9);
      }
      continue;
    }
    std::istringstream fields(line);
    double n = 0.0;
    double re = 0.0;
    double im = 0.0;
    std::string extra;
    if (!(fields >> n >> re >> im) || (fields >> extra)) {
      throw ParseError(where + ": expected 3 numeric columns (n_bio Re(n_eff) Im(n_eff))");
    }
    table.rows.push_back({n, {re, im}});
  }
  if (!have_wavelength) throw ParseError(name + ": missing '# lambda0_nm=' header");
  try {
    validate(table);
  } catch (const DomainError& e) {
    throw ParseError(name + ": " + e.what());
  }
  return table;
}

DispersionTable load_dispersion_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dispersion table " + path);
  return parse_dispersion_table(in, path);
}

void write_dispersion_table(std::ostream& out, const DispersionTable& table) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "# lambda0_nm=%.17g\n", table.wavelength_nm);
  out << buf;
  out << "# geometry=" << table.geometry << "\n";
  out << "# columns: n_bio Re(n_eff) Im(n_eff)\n";
  for (const auto& r : table.rows) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", r.n_bio, r.n_eff.real(), r.n_eff.imag());
    out << buf;
  }
}

ModeSolution interpolate_dispersion(const DispersionTable& table, double n_bio) {
  const TableInterpolation t = interpolate(table, n_bio);
  return make_solution(t.n_eff, free_space_wavenumber(table.wavelength_nm), 0.0, {}, {});
}

double dispersion_slope(const DispersionTable& table, double n_bio) {
  return free_space_wavenumber(table.wavelength_nm) * interpolate(table, n_bio).slope.real();
}

}  // namespace qps
