#include "qpsense/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "qpsense/error.hpp"

namespace qps {
namespace {

void check_eta(double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw DomainError("transmissivity must lie in (0, 1]");
}

void check_photons(int photons) {
  if (photons < 1 || photons > kMaxPhotons) {
    throw DomainError("photon number must lie in [1, " + std::to_string(kMaxPhotons) + "]");
  }
}

void check_state(std::span<const double> x) {
  if (x.size() < 2) throw DomainError("state needs N >= 1");
  check_photons(static_cast<int>(x.size()) - 1);
  double total = 0.0;
  for (double v : x) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("state populations must be finite and >= 0");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-12) throw DomainError("state populations must sum to 1");
}

// Loss table B[l][n], l <= n <= N.
std::vector<std::vector<double>> loss_table(int photons, double eta) {
  std::vector<std::vector<double>> b(photons + 1, std::vector<double>(photons + 1, 0.0));
  for (int l = 0; l <= photons; ++l) {
    for (int n = l; n <= photons; ++n) b[l][n] = b_coefficient(n, l, photons, eta);
  }
  return b;
}

// Conditional mean photon number of block l (l photons lost), or nullopt
// when the block has no weight.
struct Block {
  double weight;
  double mean;
};

std::vector<Block> blocks(std::span<const double> x, const std::vector<std::vector<double>>& b) {
  const int photons = static_cast<int>(x.size()) - 1;
  std::vector<Block> out(photons + 1);
  for (int l = 0; l <= photons; ++l) {
    double s0 = 0.0;
    double s1 = 0.0;
    for (int n = l; n <= photons; ++n) {
      s0 += x[n] * b[l][n];
      s1 += n * x[n] * b[l][n];
    }
    out[l] = {s0, s0 > 0.0 ? s1 / s0 : 0.0};
  }
  return out;
}

// g_n = 4 sum_l B_l^n (n - m_l)^2. Written as a sum of squares around each
// block mean, which avoids the cancellation in <n^2> - sum_l S1_l^2/S0_l.
std::vector<double> gradient(std::span<const double> x, const std::vector<std::vector<double>>& b) {
  const int photons = static_cast<int>(x.size()) - 1;
  const auto blk = blocks(x, b);
  std::vector<double> g(photons + 1, 0.0);
  for (int n = 0; n <= photons; ++n) {
    double acc = 0.0;
    for (int l = 0; l <= n; ++l) {
      if (blk[l].weight <= 0.0) continue;
      const double d = n - blk[l].mean;
      acc += b[l][n] * d * d;
    }
    g[n] = 4.0 * acc;
  }
  return g;
}

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

// H_ab = -8 sum_l B_l^a B_l^b (a - m_l)(b - m_l) / S0_l, negative semidefinite.
std::vector<std::vector<double>> hessian(std::span<const double> x, const std::vector<std::vector<double>>& b) {
  const int photons = static_cast<int>(x.size()) - 1;
  const auto blk = blocks(x, b);
  std::vector<std::vector<double>> h(photons + 1, std::vector<double>(photons + 1, 0.0));
  for (int l = 0; l <= photons; ++l) {
    if (blk[l].weight <= 0.0) continue;
    for (int a = l; a <= photons; ++a) {
      const double ua = b[l][a] * (a - blk[l].mean);
      for (int c = l; c <= photons; ++c) h[a][c] -= 8.0 * ua * b[l][c] * (c - blk[l].mean) / blk[l].weight;
    }
  }
  return h;
}

// Dense solve with partial pivoting; false when the matrix is singular.
bool solve_linear(std::vector<std::vector<double>> a, std::vector<double>& rhs) {
  const std::size_t n = rhs.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (std::abs(a[pivot][col]) < 1e-300) return false;
    std::swap(a[pivot], a[col]);
    std::swap(rhs[pivot], rhs[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      rhs[r] -= f * rhs[col];
    }
  }
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t c = i + 1; c < n; ++c) rhs[i] -= a[i][c] * rhs[c];
    rhs[i] /= a[i][i];
  }
  return true;
}

double max_of(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }

}  // namespace

LossChannel::LossChannel(double eta) : eta_(eta) { check_eta(eta); }

double error_propagation(const ObservableStats& stats) {
  if (stats.slope == 0.0) return kDivergent;
  const double variance = std::max(0.0, stats.second_moment - stats.mean * stats.mean);
  return std::sqrt(variance) / std::abs(stats.slope);
}

double chain_sensitivity(double d_mean_d_phi, double d_phi_d_n) { return d_mean_d_phi * d_phi_d_n; }

double delta_n_from_phi(double delta_phi, double d_phi_d_n) {
  if (d_phi_d_n == 0.0) return kDivergent;
  return delta_phi / std::abs(d_phi_d_n);
}

double b_coefficient(int n, int l, int photons, double eta) {
  check_photons(photons);
  check_eta(eta);
  if (l < 0 || l > n || n > photons) throw DomainError("b_coefficient needs 0 <= l <= n <= N");
  // The C(N-n, 0) factor is identically one.
  if (l == 0) return std::pow(eta, n);
  if (eta == 1.0) return 0.0;
  const double log_binom = std::lgamma(n + 1.0) - std::lgamma(l + 1.0) - std::lgamma(n - l + 1.0);
  return std::exp(log_binom + (n - l) * std::log(eta) + l * std::log1p(-eta));
}

double qfi_definite_n(std::span<const double> x, double eta) {
  check_state(x);
  check_eta(eta);
  const auto b = loss_table(static_cast<int>(x.size()) - 1, eta);
  return dot(x, gradient(x, b));
}

std::vector<double> qfi_gradient(std::span<const double> x, double eta) {
  check_state(x);
  check_eta(eta);
  return gradient(x, loss_table(static_cast<int>(x.size()) - 1, eta));
}

FisherResult optimize_input_state(int photons, double eta, double tol, int max_iterations) {
  check_photons(photons);
  check_eta(eta);
  if (!(tol > 0.0)) throw DomainError("optimizer tolerance must be > 0");
  if (max_iterations < 1) throw DomainError("optimizer iteration cap must be >= 1");
  const auto b = loss_table(photons, eta);
  const std::size_t dim = photons + 1;

  // Log-barrier path following: maximise F(x) + mu sum log x_n on the
  // simplex for decreasing mu. Newton steps are taken in the scaled
  // variable e = d / x, which keeps the system well conditioned when some
  // populations become tiny.
  std::vector<double> x(dim, 1.0 / dim);
  std::vector<double> g = gradient(x, b);
  double fisher = dot(x, g);
  double mu = std::max(fisher, 1.0) / dim;
  int iterations = 0;

  auto barrier = [&](const std::vector<double>& y, double f) {
    double acc = 0.0;
    for (double v : y) acc += std::log(v);
    return f + mu * acc;
  };
  auto gap_of = [&] { return max_of(g) - fisher; };
  auto target = [&] { return tol; };

  while (true) {
    for (int newton = 0; newton < 200; ++newton) {
      if (++iterations > max_iterations) {
        throw OptimizationError("optimize_input_state: iteration cap reached", x, fisher);
      }
      const auto h = hessian(x, b);
      std::vector<std::vector<double>> m(dim + 1, std::vector<double>(dim + 1, 0.0));
      std::vector<double> rhs(dim + 1, 0.0);
      for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = 0; j < dim; ++j) m[i][j] = x[i] * h[i][j] * x[j];
        m[i][i] -= mu;
        m[i][dim] = m[dim][i] = x[i];
        rhs[i] = -(x[i] * g[i] + mu);
      }
      if (!solve_linear(m, rhs)) throw OptimizationError("optimize_input_state: singular Newton system", x, fisher);
      double decrement = 0.0;
      double largest = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        decrement += (x[i] * g[i] + mu) * rhs[i];
        largest = std::max(largest, std::abs(rhs[i]));
      }
      if (largest < 1e-13) break;

      // Stay strictly inside the simplex.
      double t = 1.0;
      for (std::size_t i = 0; i < dim; ++i) {
        if (rhs[i] < 0.0) t = std::min(t, 0.99 / -rhs[i]);
      }
      // Close to the central point the barrier objective no longer
      // resolves the gain, so plain Newton steps are taken there.
      const bool local = decrement <= 1e-9 * std::max(1.0, fisher);
      const double phi = barrier(x, fisher);
      bool accepted = false;
      for (int backtrack = 0; backtrack < 60; ++backtrack, t *= 0.5) {
        std::vector<double> trial(dim);
        for (std::size_t i = 0; i < dim; ++i) trial[i] = x[i] * (1.0 + t * rhs[i]);
        const double total = std::accumulate(trial.begin(), trial.end(), 0.0);
        for (double& v : trial) v /= total;
        const std::vector<double> trial_g = gradient(trial, b);
        const double trial_f = dot(trial, trial_g);
        if (local || barrier(trial, trial_f) >= phi + 1e-4 * t * decrement) {
          x = std::move(trial);
          g = trial_g;
          fisher = trial_f;
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
    }
    if (gap_of() <= target()) break;
    if (mu * dim < 1e-3 * target()) {
      throw OptimizationError("optimize_input_state: stalled with gap " + std::to_string(gap_of()), x, fisher);
    }
    mu *= 0.1;
  }

  // The barrier leaves O(mu) weight on populations that are zero at the
  // optimum; removing it recovers that share of F.
  std::vector<double> pure = x;
  for (std::size_t i = 0; i < dim; ++i) {
    if (pure[i] < 1e-6 && g[i] < fisher - 1e-8 * std::max(1.0, fisher)) pure[i] = 0.0;
  }
  const double kept = std::accumulate(pure.begin(), pure.end(), 0.0);
  for (double& v : pure) v /= kept;
  const std::vector<double> pure_g = gradient(pure, b);
  // The barrier iterate's gap still bounds the distance to the optimum.
  double certified = gap_of();
  if (const double pure_f = dot(pure, pure_g); pure_f >= fisher) {
    certified = std::min(max_of(pure_g) - pure_f, certified - (pure_f - fisher));
    x = std::move(pure);
    g = pure_g;
    fisher = pure_f;
  }

  FisherResult result;
  result.fisher = fisher;
  result.delta_phi = crb_delta_phi(fisher);
  result.x = x;
  result.iterations = iterations;
  result.optimality_gap = std::max(certified, 0.0);
  return result;
}

double crb_delta_phi(double fisher) {
  if (!(fisher >= 0.0)) throw DomainError("Fisher information must be >= 0");
  if (fisher == 0.0) return kDivergent;
  return 1.0 / std::sqrt(fisher);
}

double sil_delta_n(int photons, double eta, double d_phi_d_n) {
  if (photons < 1) throw DomainError("photon number must be >= 1");
  check_eta(eta);
  if (d_phi_d_n == 0.0) return kDivergent;
  return (1.0 + std::sqrt(eta)) / (2.0 * std::sqrt(photons * eta)) / std::abs(d_phi_d_n);
}

double snl_delta_n(int photons, double d_phi_d_n) {
  if (photons < 1) throw DomainError("photon number must be >= 1");
  if (d_phi_d_n == 0.0) return kDivergent;
  return 1.0 / std::sqrt(double(photons)) / std::abs(d_phi_d_n);
}

double hl_delta_n(int photons, double d_phi_d_n) {
  if (photons < 1) throw DomainError("photon number must be >= 1");
  if (d_phi_d_n == 0.0) return kDivergent;
  return 1.0 / photons / std::abs(d_phi_d_n);
}

}  // namespace qps
