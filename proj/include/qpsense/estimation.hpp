#pragma once

// Phase and refractive-index resolution: linear error propagation, the
// quantum Fisher information of definite-photon-number probes under loss in
// the sensing arm, its maximisation over input states, and the SNL/SIL/HL
// reference limits.

#include <span>
#include <vector>

#include "qpsense/interferometer.hpp"

namespace qps {

/// Largest photon number accepted by the Fisher-information routines.
inline constexpr int kMaxPhotons = 60;

/// Fictitious beamsplitter of transmissivity eta in the sensing arm.
class LossChannel {
public:
  explicit LossChannel(double eta);
  double eta() const noexcept { return eta_; }

private:
  double eta_;
};

/// Mean, second moment and n_bio-derivative of the mean of an observable.
struct ObservableStats {
  double mean = 0.0;
  double second_moment = 0.0;
  double slope = 0.0;
};

/// delta n = sqrt(<O^2> - <O>^2) / |d<O>/dn|; kDivergent for zero slope.
double error_propagation(const ObservableStats& stats);

/// S = (d<O>/d phi)(d phi/d n).
double chain_sensitivity(double d_mean_d_phi, double d_phi_d_n);

/// delta n = delta phi / |d phi/d n|; kDivergent for zero slope.
double delta_n_from_phi(double delta_phi, double d_phi_d_n);

/// B_l^n = C(n,l) eta^n (1/eta - 1)^l = C(n,l) eta^(n-l) (1-eta)^l, the
/// probability that l of the n photons in the sensing arm are lost.
double b_coefficient(int n, int l, int photons, double eta);

/// Quantum Fisher information (per rad^2) of sum_n c_n |n, N-n> after loss
/// eta in the first arm, as a function of x_n = |c_n|^2.
double qfi_definite_n(std::span<const double> x, double eta);

/// Gradient of qfi_definite_n with respect to x. Since F is homogeneous of
/// degree one, F = x . grad.
std::vector<double> qfi_gradient(std::span<const double> x, double eta);

struct FisherResult {
  double fisher = 0.0;
  double delta_phi = kDivergent;
  std::vector<double> x;
  int iterations = 0;
  /// Certified bound on (max F) - fisher from concavity.
  double optimality_gap = 0.0;
};

/// Maximises F_Q over the probability simplex with a log-barrier Newton
/// method. Converged when the concavity gap max_n g_n - F falls below tol.
/// Throws OptimizationError (carrying the best iterate) at the iteration
/// cap or when the gap stalls.
FisherResult optimize_input_state(int photons, double eta, double tol = 1e-10, int max_iterations = 10000);

/// Cramer-Rao bound delta phi = F^{-1/2}; kDivergent for F = 0.
double crb_delta_phi(double fisher);

/// delta n_SIL = (1 + sqrt eta) / (2 sqrt(N eta)) |d phi/d n|^{-1}.
double sil_delta_n(int photons, double eta, double d_phi_d_n);
/// delta n_SNL = N^{-1/2} |d phi/d n|^{-1}.
double snl_delta_n(int photons, double d_phi_d_n);
/// delta n_HL = N^{-1} |d phi/d n|^{-1}.
double hl_delta_n(int photons, double d_phi_d_n);

}  // namespace qps
