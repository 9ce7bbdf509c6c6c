#pragma once

// Guided modes of a circular nanowire embedded in the sensing medium.
//
// Lengths are in nm and wavenumbers in rad/nm throughout. The metal core
// supports the TM0 surface-plasmon mode, the dielectric core the LP01 mode.

#include <complex>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qpsense/materials.hpp"

namespace qps {

enum class CoreKind { metal, dielectric };

struct NanowireSpec {
  CoreKind core = CoreKind::metal;
  double radius_nm = 50.0;
  MaterialModel core_material = MaterialModel::constant_index(1.4475);
  double cladding_index = 1.25;
  double wavelength_nm = 810.0;
  double length_nm = 4000.0;

  NanowireSpec with_cladding(double n) const {
    NanowireSpec s = *this;
    s.cladding_index = n;
    return s;
  }
};

/// Throws DomainError when a geometric invariant is violated.
void validate(const NanowireSpec& spec);

/// Free-space wavenumber 2 pi / lambda0 in rad/nm.
double free_space_wavenumber(double wavelength_nm);

struct ModeSolution {
  std::complex<double> k;      ///< rad/nm
  double beta = 0.0;           ///< Re k
  double kappa = 0.0;          ///< Im k
  std::complex<double> n_eff;  ///< k / k0
  double residual = 0.0;       ///< normalised |characteristic equation|
  // Transverse arguments at the root: k_core r and k_clad r. For the
  // dielectric mode these are the real fibre parameters u and w, which stay
  // resolvable even when n_eff - n_clad is below double resolution. Zero
  // for interpolated modes.
  std::complex<double> core_arg;
  std::complex<double> clad_arg;
};

/// Left-hand side of the TM0 characteristic equation at wavenumber k, in nm:
/// (eps_m/k_m) I1(k_m r)/I0(k_m r) + (eps_c/k_c) K1(k_c r)/K0(k_c r).
std::complex<double> tm0_residual(std::complex<double> k, const NanowireSpec& spec);

/// Same with an explicit metal permittivity (used by the root finder).
std::complex<double> tm0_residual(std::complex<double> k, const NanowireSpec& spec,
                                  std::complex<double> eps_metal);

/// LP01 characteristic function u J1(u)/J0(u) - w K1(w)/K0(w) for a trial
/// n_eff in (n_clad, n_core).
double lp01_residual(double n_eff, const NanowireSpec& spec);

/// Lowest-order TM0 root. Without a seed the largest-Re(n_eff) bracket of the
/// lossless scan is refined; with a seed, the bracket nearest the seed.
ModeSolution solve_tm0(const NanowireSpec& spec, std::optional<std::complex<double>> seed = std::nullopt);

/// Fundamental LP01 root of the dielectric nanowire.
ModeSolution solve_lp01(const NanowireSpec& spec);

/// Dispatches on the core kind.
ModeSolution solve_mode(const NanowireSpec& spec, std::optional<std::complex<double>> seed = std::nullopt);

/// V-number test sqrt((k_d r)^2 + (k_c r)^2) < 2.405. False for metal cores
/// and for non-guiding (n_clad >= n_core) configurations.
bool single_mode_check(const NanowireSpec& spec, const ModeSolution& mode);

/// eta = exp(-2 kappa l).
double transmissivity(const ModeSolution& mode, double length_nm);

/// Central-difference slope of beta(n) with a step-halving consistency check
/// (relative change < 1e-4, otherwise ConvergenceError).
double central_slope(const std::function<double(double)>& beta_of_n, double n, double step);

/// d beta / d n_bio of the nanowire mode, rad/nm per RIU.
double dbeta_dn(const NanowireSpec& spec, double n_bio, double step = 1e-5);

inline constexpr double kDefaultSlopeStep = 1e-5;

// ---------------------------------------------------------------------------
// Externally computed dispersion (e.g. a wedge waveguide solved by FEM).

struct DispersionRow {
  double n_bio = 0.0;
  std::complex<double> n_eff;
};

struct DispersionTable {
  std::vector<DispersionRow> rows;
  double wavelength_nm = 0.0;
  std::string geometry;
};

void validate(const DispersionTable& table);

/// Format: '# lambda0_nm=<value>' and '# geometry=<text>' header lines (other
/// '#' lines are comments), then rows "n_bio Re(n_eff) Im(n_eff)".
DispersionTable parse_dispersion_table(std::istream& in, const std::string& name = "<stream>");
DispersionTable load_dispersion_table(const std::string& path);
void write_dispersion_table(std::ostream& out, const DispersionTable& table);

/// Monotone cubic (Fritsch-Carlson) interpolation of Re and Im n_eff.
ModeSolution interpolate_dispersion(const DispersionTable& table, double n_bio);

/// d beta / d n_bio from the derivative of the interpolant.
double dispersion_slope(const DispersionTable& table, double n_bio);

}  // namespace qps
