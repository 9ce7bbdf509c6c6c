#include "qpsense/interferometer.hpp"

#include <cmath>
#include <numeric>

#include "qpsense/error.hpp"

namespace qps {
namespace {

void check_photons(int photons) {
  if (photons < 1) throw DomainError("photon number must be >= 1");
}

constexpr double kNormTol = 1e-12;

}  // namespace

CoherentProbe CoherentProbe::with_mean_photons(double n) {
  if (!(n >= 0.0)) throw DomainError("mean photon number must be >= 0");
  return CoherentProbe{std::complex<double>(std::sqrt(n), 0.0)};
}

DefiniteNState DefiniteNState::noon(int photons) {
  check_photons(photons);
  std::vector<double> x(photons + 1, 0.0);
  x.front() = 0.5;
  x.back() = 0.5;
  return DefiniteNState(std::move(x));
}

DefiniteNState DefiniteNState::from_probabilities(std::vector<double> x) {
  if (x.size() < 2) throw DomainError("definite-N state needs N >= 1");
  double total = 0.0;
  for (double v : x) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("state populations must be finite and >= 0");
    total += v;
  }
  if (std::abs(total - 1.0) > kNormTol) throw DomainError("state populations must sum to 1");
  return DefiniteNState(std::move(x));
}

DefiniteNState DefiniteNState::from_amplitudes(std::span<const std::complex<double>> c) {
  std::vector<double> x;
  x.reserve(c.size());
  for (const auto& a : c) x.push_back(std::norm(a));
  return from_probabilities(std::move(x));
}

std::pair<std::complex<double>, std::complex<double>> mz_coherent_output(const CoherentProbe& probe, Phase phase) {
  const std::complex<double> i(0.0, 1.0);
  const std::complex<double> e = std::polar(1.0, phase.radians);
  return {0.5 * probe.alpha * (e - 1.0), 0.5 * i * probe.alpha * (e + 1.0)};
}

Moments coherent_difference_moments(std::complex<double> out1, std::complex<double> out2) {
  // Independent Poissonian ports: Var(n2 - n1) = <n1> + <n2>.
  const double n1 = std::norm(out1);
  const double n2 = std::norm(out2);
  const double mean = n2 - n1;
  return {mean, n1 + n2 + mean * mean};
}

double expectation_m(const CoherentProbe& probe, Phase phase) {
  return probe.mean_photons() * std::cos(phase.radians);
}

double second_moment_m(const CoherentProbe& probe, Phase phase) {
  const double n = probe.mean_photons();
  const double c = std::cos(phase.radians);
  return n + n * n * c * c;
}

double slope_m(const CoherentProbe& probe, Phase phase) { return -probe.mean_photons() * std::sin(phase.radians); }

double expectation_a(int photons, Phase phase) {
  check_photons(photons);
  return std::cos(photons * phase.radians);
}

double second_moment_a(int photons, Phase) {
  check_photons(photons);
  return 1.0;
}

double slope_a(int photons, Phase phase) {
  check_photons(photons);
  return -photons * std::sin(photons * phase.radians);
}

double delta_phi_coherent(const CoherentProbe& probe, Phase phase) {
  const double s = std::abs(std::sin(phase.radians));
  const double a = std::abs(probe.alpha);
  if (s == 0.0 || a == 0.0) return kDivergent;
  return 1.0 / (a * s);
}

double delta_phi_noon(int photons) {
  check_photons(photons);
  return 1.0 / photons;
}

}  // namespace qps
