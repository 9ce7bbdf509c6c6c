#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "oracles/bessel_quadrature.hpp"
#include "qpsense/error.hpp"
#include "qpsense/materials.hpp"
#include "qpsense/modesolver.hpp"
#include "qpsense/scenario.hpp"

using namespace qps;

namespace {

NanowireSpec metal_wire(double n_clad, bool lossless) {
  NanowireSpec s;
  s.core = CoreKind::metal;
  s.core_material = lossless ? builtin_silver().lossless() : builtin_silver();
  s.cladding_index = n_clad;
  return s;
}

NanowireSpec glass_wire(double n_clad) {
  NanowireSpec s;
  s.core = CoreKind::dielectric;
  s.core_material = MaterialModel::constant_index(1.4475);
  s.cladding_index = n_clad;
  return s;
}

}  // namespace

TEST_CASE("lossless TM0 residual changes sign on the coarse scan") {
  const auto spec = metal_wire(1.25, true);
  const double k0 = free_space_wavenumber(spec.wavelength_nm);
  int changes = 0;
  double prev = 0.0;
  for (int i = 0; i < 400; ++i) {
    const double n = 1.25 + 1e-6 + (4.0 - 1.25 - 1e-6) * i / 399.0;
    const double r = tm0_residual({k0 * n, 0.0}, spec).real();
    if (i > 0 && std::signbit(r) != std::signbit(prev)) ++changes;
    prev = r;
  }
  CHECK(changes >= 1);
}

TEST_CASE("TM0 roots satisfy the characteristic equation") {
  for (bool lossless : {true, false}) {
    for (double n : linear_grid(1.1, 1.4, 31)) {
      const auto spec = metal_wire(n, lossless);
      const ModeSolution m = solve_tm0(spec);
      CHECK(m.residual <= 1e-10);
      CHECK(m.n_eff.real() > n);
      CHECK(m.beta == doctest::Approx(m.n_eff.real() * free_space_wavenumber(810.0)).epsilon(1e-14));
      if (lossless) {
        CHECK(m.kappa == 0.0);
      } else {
        CHECK(m.kappa > 0.0);
      }
      // Independent residual: rebuild the equation from the quadrature
      // Bessel oracle at the returned root.
      const std::complex<double> eps_m = spec.core_material.permittivity(810.0);
      const double eps_c = n * n;
      const std::complex<double> k = m.k;
      const double k0 = free_space_wavenumber(810.0);
      const auto km = std::sqrt(k * k - eps_m * k0 * k0);
      const auto kc = std::sqrt(k * k - eps_c * k0 * k0);
      const double r = spec.radius_nm;
      const auto lhs = eps_m / km * oracle::bessel_i(1, km * r) / oracle::bessel_i(0, km * r) +
                       eps_c / kc * oracle::bessel_k(1, kc * r) / oracle::bessel_k(0, kc * r);
      CHECK(std::abs(lhs) / std::abs(eps_m / km) <= 1e-9);
    }
  }
}

TEST_CASE("thick wire approaches the flat-interface plasmon") {
  auto spec = metal_wire(1.25, true);
  spec.radius_nm = 50000.0;
  const ModeSolution m = solve_tm0(spec);
  const double em = builtin_silver().lossless().permittivity(810.0).real();
  const double ec = 1.25 * 1.25;
  const double flat = std::sqrt(em * ec / (em + ec));
  CHECK(std::abs(m.n_eff.real() - flat) <= 1e-3 * flat);
}

TEST_CASE("seeded and unseeded solves agree exactly") {
  const auto spec = metal_wire(1.2, false);
  const ModeSolution a = solve_tm0(spec);
  const ModeSolution b = solve_tm0(spec, a.n_eff);
  const ModeSolution c = solve_tm0(spec, std::complex<double>(1.3, 0.0));
  CHECK(a.n_eff == b.n_eff);
  CHECK(a.n_eff == c.n_eff);
}

TEST_CASE("LP01 fundamental mode") {
  for (double n : linear_grid(1.1, 1.4, 31)) {
    const auto spec = glass_wire(n);
    const ModeSolution m = solve_lp01(spec);
    const double u = m.core_arg.real();
    const double w = m.clad_arg.real();
    const double k0 = free_space_wavenumber(810.0);
    const double v = k0 * spec.radius_nm * std::sqrt(1.4475 * 1.4475 - n * n);
    CHECK(w > 0.0);
    CHECK(u > 0.0);
    CHECK(u < 2.405);
    CHECK(std::hypot(u, w) == doctest::Approx(v).epsilon(1e-12));
    CHECK(m.n_eff.real() >= n);
    CHECK(m.n_eff.real() < 1.4475);
    CHECK(m.kappa == 0.0);
    // u J1(u)/J0(u) = w K1(w)/K0(w) with the quadrature oracle.
    const double lhs = u * oracle::bessel_j(1, u) / oracle::bessel_j(0, u);
    const double rhs = (w * oracle::bessel_k(1, {w, 0.0}) / oracle::bessel_k(0, {w, 0.0})).real();
    CHECK(std::abs(lhs - rhs) <= 1e-9 * std::abs(lhs));
  }
}

TEST_CASE("LP01 approaches cutoff as the contrast vanishes") {
  double last_u = 10.0;
  for (double n : {1.3, 1.4, 1.44}) {
    const ModeSolution m = solve_lp01(glass_wire(n));
    CHECK(m.core_arg.real() < last_u);
    last_u = m.core_arg.real();
    CHECK(m.n_eff.real() - n >= 0.0);
    CHECK(m.n_eff.real() - n < 1e-6);
  }
  // Closer still, w = 2 exp(-gamma - 2/V^2) underflows a double.
  CHECK_THROWS_AS(solve_lp01(glass_wire(1.447)), NoRootError);
  CHECK_THROWS_AS(solve_lp01(glass_wire(1.4475)), NoRootError);
  CHECK_THROWS(solve_lp01(glass_wire(1.5)));
}

TEST_CASE("single-mode condition") {
  for (double n : linear_grid(1.1, 1.4, 61)) {
    const auto spec = glass_wire(n);
    CHECK(single_mode_check(spec, solve_lp01(spec)));
  }
  auto thick = glass_wire(1.1);
  thick.radius_nm = 500.0;
  CHECK_FALSE(single_mode_check(thick, solve_lp01(thick)));
  const auto at_core = glass_wire(1.4475);
  CHECK_FALSE(single_mode_check(at_core, ModeSolution{}));
  const auto metal = metal_wire(1.25, true);
  CHECK_FALSE(single_mode_check(metal, solve_tm0(metal)));
}

TEST_CASE("transmissivity") {
  ModeSolution m;
  CHECK(transmissivity(m, 4000.0) == 1.0);
  m.kappa = std::log(2.0) / (2.0 * 4000.0);
  CHECK(transmissivity(m, 4000.0) == doctest::Approx(0.5).epsilon(1e-15));
  double last = 1.0;
  for (double n : linear_grid(1.1, 1.4, 31)) {
    const double eta = transmissivity(solve_tm0(metal_wire(n, false)), 4000.0);
    CHECK(eta < last);
    CHECK(eta > 0.0);
    last = eta;
  }
}

TEST_CASE("phase slope") {
  CHECK(central_slope([](double) { return 0.0123; }, 1.25, 1e-5) == 0.0);
  CHECK(central_slope([](double n) { return 3.0 * n; }, 1.25, 1e-5) == doctest::Approx(3.0).epsilon(1e-9));
  CHECK_THROWS_AS(central_slope([](double n) { return n + 1e-6 * std::sin(1e7 * n); }, 1.25, 1e-5), ConvergenceError);

  // Five-point polynomial fit oracle for the lossless metal wire.
  const auto spec = metal_wire(1.25, true);
  const double h = 1e-3;
  auto beta = [&](double n) { return solve_tm0(spec.with_cladding(n)).beta; };
  const double fit = (beta(1.25 - 2 * h) - 8 * beta(1.25 - h) + 8 * beta(1.25 + h) - beta(1.25 + 2 * h)) / (12 * h);
  CHECK(dbeta_dn(spec, 1.25) == doctest::Approx(fit).epsilon(1e-6));

  for (double n : linear_grid(1.1, 1.4, 31)) {
    const double d = dbeta_dn(glass_wire(n), n);
    const double m = dbeta_dn(metal_wire(n, true), n);
    CHECK(d > 0.0);
    CHECK(m > d);
  }
}

TEST_CASE("geometry validation") {
  auto s = metal_wire(1.25, true);
  s.radius_nm = 0.0;
  CHECK_THROWS_AS(validate(s), DomainError);
  s = metal_wire(1.25, true);
  s.wavelength_nm = -1.0;
  CHECK_THROWS_AS(validate(s), DomainError);
  s = metal_wire(0.0, true);
  CHECK_THROWS_AS(validate(s), DomainError);
  s = metal_wire(1.25, true);
  s.length_nm = 0.0;
  CHECK_THROWS_AS(validate(s), DomainError);
}

TEST_CASE("dispersion tables") {
  DispersionTable lin;
  lin.wavelength_nm = 810.0;
  lin.geometry = "synthetic";
  for (double n : {1.3, 1.35, 1.4, 1.45}) lin.rows.push_back({n, {2.0 * n + 0.1, 0.01 * n}});
  for (double n : {1.3, 1.31, 1.333, 1.377, 1.41, 1.45}) {
    const ModeSolution m = interpolate_dispersion(lin, n);
    CHECK(m.n_eff.real() == doctest::Approx(2.0 * n + 0.1).epsilon(1e-14));
    CHECK(m.n_eff.imag() == doctest::Approx(0.01 * n).epsilon(1e-13));
    CHECK(dispersion_slope(lin, n) == doctest::Approx(2.0 * free_space_wavenumber(810.0)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(interpolate_dispersion(lin, 1.29), ExtrapolationError);
  CHECK_THROWS_AS(interpolate_dispersion(lin, 1.46), ExtrapolationError);

  // Round trip through the solver: nodes exact, mid-points close.
  DispersionTable solved;
  solved.wavelength_nm = 810.0;
  solved.geometry = "silver nanowire r=50";
  for (double n : linear_grid(1.1, 1.4, 31)) solved.rows.push_back({n, solve_tm0(metal_wire(n, false)).n_eff});
  for (const auto& row : solved.rows) CHECK(interpolate_dispersion(solved, row.n_bio).n_eff == row.n_eff);
  for (std::size_t i = 0; i + 1 < solved.rows.size(); ++i) {
    const double mid = 0.5 * (solved.rows[i].n_bio + solved.rows[i + 1].n_bio);
    const auto direct = solve_tm0(metal_wire(mid, false)).n_eff;
    CHECK(std::abs(interpolate_dispersion(solved, mid).n_eff - direct) <= 1e-4 * std::abs(direct));
  }

  std::stringstream io;
  write_dispersion_table(io, solved);
  const DispersionTable back = parse_dispersion_table(io);
  CHECK(back.wavelength_nm == 810.0);
  CHECK(back.geometry == solved.geometry);
  REQUIRE(back.rows.size() == solved.rows.size());
  for (std::size_t i = 0; i < back.rows.size(); ++i) CHECK(back.rows[i].n_eff == solved.rows[i].n_eff);

  std::istringstream missing("1.3 1.5 0.01\n1.4 1.6 0.02\n");
  CHECK_THROWS(parse_dispersion_table(missing));
  std::istringstream bad("# lambda0_nm=810\n# geometry=w\n1.3 1.5\n1.4 1.6 0.02\n");
  CHECK_THROWS_AS(parse_dispersion_table(bad), ParseError);
}
