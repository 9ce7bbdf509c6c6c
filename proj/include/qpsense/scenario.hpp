#pragma once

// End-to-end resolution sweeps: transducer mode -> phase, loss and phase
// slope -> per-strategy refractive-index resolution.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qpsense/estimation.hpp"
#include "qpsense/modesolver.hpp"

namespace qps {

enum class Strategy { classical, noon, optimal, sil, hl, snl };
inline constexpr std::size_t kStrategyCount = 6;
inline constexpr std::array<Strategy, kStrategyCount> kAllStrategies = {
    Strategy::classical, Strategy::noon, Strategy::optimal, Strategy::sil, Strategy::hl, Strategy::snl};

std::string_view to_string(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view name);

using Transducer = std::variant<NanowireSpec, DispersionTable>;

struct SensingScenario {
  Transducer transducer;
  double length_nm = 4000.0;
  double wavelength_nm = 810.0;
  int photons = 4;
  std::vector<Strategy> strategies;
  std::vector<double> grid;
  double fd_step = kDefaultSlopeStep;
  double optimizer_tol = 1e-10;
  /// Worker threads for grid-parallel evaluation; results do not depend on it.
  int threads = 1;
};

/// Throws DomainError on a violated scenario invariant.
void validate(const SensingScenario& scenario);

/// Evenly spaced grid including both end points.
std::vector<double> linear_grid(double start, double stop, int points);

struct ResolutionRow {
  double n_bio = 0.0;
  bool ok = false;
  std::string error;

  std::complex<double> n_eff;
  double beta = 0.0;
  double kappa = 0.0;
  double phi = 0.0;
  double eta = 1.0;
  double dphi_dn = 0.0;

  /// Raw per-strategy resolution in RIU; nullopt for unselected strategies.
  std::array<std::optional<double>, kStrategyCount> delta_n;
  /// Classical resolution at optimal phase bias (|sin phi| = 1).
  std::optional<double> classical_envelope;
  /// Resolution of a caller-supplied fixed state (fixed_state_sweep only).
  std::optional<double> state_delta_n;
  /// Fisher information of the optimised (or fixed) state and its x_n.
  std::optional<double> fisher;
  std::vector<double> state;

  std::optional<double> get(Strategy s) const { return delta_n[static_cast<std::size_t>(s)]; }
};

struct ResolutionTable {
  std::vector<ResolutionRow> rows;
  int photons = 0;
  std::string description;  ///< scenario echo for the provenance header

  std::size_t failed_rows() const;
};

/// Solve or interpolate the mode at every grid point and evaluate each
/// selected strategy. A failing grid point is marked and skipped.
ResolutionTable sweep(const SensingScenario& scenario);

/// Like sweep, but additionally evaluates the fixed state x at every row
/// without re-optimising.
ResolutionTable fixed_state_sweep(const SensingScenario& scenario, std::span<const double> x);

/// Transducer quantities at one n_bio.
struct TransducerPoint {
  ModeSolution mode;
  double phi = 0.0;
  double eta = 1.0;
  double dphi_dn = 0.0;
};
TransducerPoint evaluate_transducer(const SensingScenario& scenario, double n_bio,
                                    std::optional<std::complex<double>> seed = std::nullopt);

struct ScalingRow {
  int photons = 0;
  double noon = 0.0;
  double optimal = 0.0;
  double sil = 0.0;
  double hl = 0.0;
  double snl = 0.0;
  std::vector<double> state;
  double gap() const { return sil - hl; }
  double relative_to_sil() const { return (sil - hl) / sil; }
  double relative_to_hl() const { return (sil - hl) / hl; }
};

struct ScalingTable {
  double n_bio = 0.0;
  double eta = 1.0;
  double dphi_dn = 0.0;
  std::vector<ScalingRow> rows;
};

/// Resolution versus photon number at a single n_bio; the optimal state is
/// recomputed for every N.
ScalingTable n_scaling_study(const SensingScenario& scenario, double n_bio, std::span<const int> photon_numbers);

/// Rows (ok, eta < 1) that violate HL <= optimal <= SIL; empty when the
/// table satisfies the ordering.
std::vector<std::size_t> ordering_violations(const ResolutionTable& table);

}  // namespace qps
