#pragma once

// Balanced Mach-Zehnder algebra for coherent and definite-photon-number
// probes. Coherent states are handled through closed forms only.

#include <complex>
#include <limits>
#include <span>
#include <utility>
#include <vector>

namespace qps {

/// Returned wherever a resolution diverges (fringe extremum, zero slope).
inline constexpr double kDivergent = std::numeric_limits<double>::infinity();

/// Relative phase picked up by the sensing arm, radians.
struct Phase {
  double radians = 0.0;
};

struct CoherentProbe {
  std::complex<double> alpha;

  static CoherentProbe with_mean_photons(double n);
  double mean_photons() const { return std::norm(alpha); }
};

/// sum_n c_n |n, N-n>, stored as populations x_n = |c_n|^2. Relative phases
/// of the c_n do not affect any quantity computed here and are dropped.
class DefiniteNState {
public:
  static DefiniteNState noon(int photons);
  static DefiniteNState from_probabilities(std::vector<double> x);
  static DefiniteNState from_amplitudes(std::span<const std::complex<double>> c);

  int photons() const noexcept { return static_cast<int>(x_.size()) - 1; }
  const std::vector<double>& probabilities() const noexcept { return x_; }

private:
  explicit DefiniteNState(std::vector<double> x) : x_(std::move(x)) {}
  std::vector<double> x_;
};

/// Output amplitudes (1/2 a (e^{i phi} - 1), 1/2 i a (e^{i phi} + 1)).
std::pair<std::complex<double>, std::complex<double>> mz_coherent_output(const CoherentProbe& probe, Phase phase);

/// First and second moments of M = n2 - n1 for a product of two coherent
/// states with the given amplitudes.
struct Moments {
  double mean = 0.0;
  double second = 0.0;
};
Moments coherent_difference_moments(std::complex<double> out1, std::complex<double> out2);

/// <M> = |a|^2 cos(phi).
double expectation_m(const CoherentProbe& probe, Phase phase);
/// <M^2> = |a|^2 + |a|^4 cos^2(phi).
double second_moment_m(const CoherentProbe& probe, Phase phase);
/// d<M>/d phi.
double slope_m(const CoherentProbe& probe, Phase phase);

/// <A> = cos(N phi) for A = |0,N><N,0| + h.c. on a NOON input; <A^2> = 1.
double expectation_a(int photons, Phase phase);
double second_moment_a(int photons, Phase phase);
double slope_a(int photons, Phase phase);

/// 1 / (|a| |sin phi|); kDivergent when sin phi == 0.
double delta_phi_coherent(const CoherentProbe& probe, Phase phase);
/// 1 / N.
double delta_phi_noon(int photons);

}  // namespace qps
