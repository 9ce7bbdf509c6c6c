#include <doctest.h>

#include <random>

#include "oracles/bessel_quadrature.hpp"
#include "qpsense/error.hpp"
#include "qpsense/specfun.hpp"

using qps::specfun::complex;
namespace sf = qps::specfun;

namespace {

double rel(complex a, complex b) { return std::abs(a - b) / std::abs(b); }

std::vector<complex> wronskian_points(int count, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> re(0.1, 50.0);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<complex> z;
  for (int i = 0; i < count; ++i) {
    const double x = re(rng);
    z.emplace_back(x, x * unit(rng));
  }
  return z;
}

}  // namespace

TEST_CASE("J at the origin and against the power series") {
  CHECK(sf::bessel_j(0, 0.0) == 1.0);
  CHECK(sf::bessel_j(1, 0.0) == 0.0);
  const double pinned = 0.76519768655796655;
  CHECK(sf::bessel_j(0, 1.0) == doctest::Approx(oracle::j0_series(1.0)).epsilon(1e-14));
  CHECK(sf::bessel_j(0, 1.0) == doctest::Approx(pinned).epsilon(1e-15));
}

TEST_CASE("J against the integral representation") {
  for (double x = 0.0; x <= 100.0; x += 0.37) {
    for (int n : {0, 1}) {
      const double want = oracle::bessel_j(n, x);
      const double got = sf::bessel_j(n, x);
      if (std::abs(want) > 1e-2) {
        CHECK(std::abs(got - want) <= 1e-12 * std::abs(want));
      } else {
        CHECK(std::abs(got - want) <= 1e-13);
      }
    }
  }
}

TEST_CASE("I at the origin and against the power series") {
  CHECK(sf::bessel_i(0, {0.0, 0.0}) == complex(1.0, 0.0));
  CHECK(sf::bessel_i(1, {0.0, 0.0}) == complex(0.0, 0.0));
  const double pinned = 1.2660658777520082;
  CHECK(sf::bessel_i(0, {1.0, 0.0}).real() == doctest::Approx(oracle::i0_series(1.0)).epsilon(1e-14));
  CHECK(sf::bessel_i(0, {1.0, 0.0}).real() == doctest::Approx(pinned).epsilon(1e-15));
}

TEST_CASE("K pinned values against the integral representation") {
  // Pinned from the quadrature oracle and cross-checked to 16 digits.
  const complex k0_1 = sf::bessel_k(0, {1.0, 0.0});
  const complex k1_5 = sf::bessel_k(1, {5.0, 0.0});
  CHECK(rel(k0_1, oracle::bessel_k(0, {1.0, 0.0})) < 1e-12);
  CHECK(rel(k1_5, oracle::bessel_k(1, {5.0, 0.0})) < 1e-12);
  CHECK(k0_1.real() == doctest::Approx(0.42102443824070834).epsilon(1e-14));
  CHECK(k1_5.real() == doctest::Approx(0.0040446134454521655).epsilon(1e-14));
  CHECK(k0_1.imag() == 0.0);
}

TEST_CASE("Wronskian at z = 2") {
  const complex z(2.0, 0.0);
  const complex w = sf::bessel_i(0, z) * sf::bessel_k(1, z) + sf::bessel_i(1, z) * sf::bessel_k(0, z);
  CHECK(std::abs(w - 0.5) < 1e-14);
}

TEST_CASE("I and K against quadrature over random arguments") {
  for (const complex z : wronskian_points(300, 7)) {
    for (int n : {0, 1}) {
      CHECK(rel(sf::bessel_i(n, z), oracle::bessel_i(n, z)) <= 1e-10);
      CHECK(rel(sf::bessel_k(n, z), oracle::bessel_k(n, z)) <= 1e-10);
    }
  }
}

TEST_CASE("Wronskian and conjugate symmetry over random arguments") {
  for (const complex z : wronskian_points(1000, 11)) {
    const complex w = sf::bessel_i(0, z) * sf::bessel_k(1, z) + sf::bessel_i(1, z) * sf::bessel_k(0, z);
    CHECK(std::abs(w * z - 1.0) <= 1e-9);
    for (int n : {0, 1}) {
      CHECK(rel(sf::bessel_i(n, std::conj(z)), std::conj(sf::bessel_i(n, z))) <= 1e-14);
      CHECK(rel(sf::bessel_k(n, std::conj(z)), std::conj(sf::bessel_k(n, z))) <= 1e-14);
    }
  }
}

TEST_CASE("I parity in the left half-plane") {
  for (const complex z : wronskian_points(100, 3)) {
    CHECK(rel(sf::bessel_i(0, -z), sf::bessel_i(0, z)) <= 1e-14);
    CHECK(rel(sf::bessel_i(1, -z), -sf::bessel_i(1, z)) <= 1e-14);
  }
}

TEST_CASE("K1 = -dK0/dz by central differences") {
  for (const complex z : wronskian_points(200, 5)) {
    const double h = 1e-6 * std::abs(z);
    const complex d = (sf::bessel_k(0, z + h) - sf::bessel_k(0, z - h)) / (2.0 * h);
    CHECK(rel(-d, sf::bessel_k(1, z)) <= 1e-6);
  }
}

TEST_CASE("series and asymptotic regimes agree at the crossover") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> angle(-1.2, 1.2);
  for (int i = 0; i < 200; ++i) {
    const double a = angle(rng);
    const complex inside = std::polar(sf::kSeriesRadius * (1.0 - 1e-12), a);
    const complex outside = std::polar(sf::kSeriesRadius, a);
    for (int n : {0, 1}) {
      const complex lo = sf::bessel_i(n, inside);
      const complex hi = sf::bessel_i(n, outside);
      // The 1e-12 radial offset moves the value by about 1.2e-11 relative.
      CHECK(rel(lo, hi) <= 1e-10);
    }
  }
}

TEST_CASE("ratios match quotients and survive overflow") {
  for (const complex z : wronskian_points(100, 23)) {
    CHECK(rel(sf::bessel_i_ratio(z), sf::bessel_i(1, z) / sf::bessel_i(0, z)) <= 1e-12);
    CHECK(rel(sf::bessel_k_ratio(z), sf::bessel_k(1, z) / sf::bessel_k(0, z)) <= 1e-12);
  }
  const complex big(2000.0, 300.0);
  CHECK_THROWS_AS(sf::bessel_i(0, big), qps::RangeError);
  const complex r = sf::bessel_i_ratio(big);
  CHECK(std::abs(r - (1.0 - 0.5 / big)) < 1e-6);
  CHECK(std::abs(sf::bessel_k_ratio(big) - (1.0 + 0.5 / big)) < 1e-6);
  CHECK(sf::bessel_j_ratio(1.0) == doctest::Approx(sf::bessel_j(1, 1.0) / sf::bessel_j(0, 1.0)));
}

TEST_CASE("error contract") {
  CHECK_THROWS_AS(sf::bessel_j(2, 1.0), qps::DomainError);
  CHECK_THROWS_AS(sf::bessel_i(-1, {1.0, 0.0}), qps::DomainError);
  CHECK_THROWS_AS(sf::bessel_j(0, -1.0), qps::DomainError);
  CHECK_THROWS_AS(sf::bessel_k(0, {0.0, 1.0}), qps::BranchError);
  CHECK_THROWS_AS(sf::bessel_k(1, {-1.0, 0.0}), qps::BranchError);
  CHECK_THROWS_AS(sf::bessel_i(0, {2e4, 0.0}), qps::DomainError);
  CHECK_THROWS_AS(sf::bessel_i(0, {800.0, 0.0}), qps::RangeError);
}
