#pragma once

#include <complex>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace qps {

/// Vacuum photon energy-wavelength product, eV nm.
inline constexpr double kHcEvNm = 1239.841984;

enum class MaterialKind { constant_index, tabulated, drude_lorentz };

struct PermittivityRow {
  double wavelength_nm = 0.0;
  std::complex<double> permittivity;
};

struct LorentzOscillator {
  double strength = 0.0;
  double frequency_ev = 0.0;
  double width_ev = 0.0;
};

/// eps(w) = 1 - f0 wp^2 / (w (w + i G0)) + sum_j f_j wp^2 / (w_j^2 - w^2 - i w G_j)
struct DrudeLorentzParams {
  double plasma_ev = 0.0;
  double drude_strength = 1.0;
  double damping_ev = 0.0;
  std::vector<LorentzOscillator> oscillators;
};

/// Frequency-dependent relative permittivity of one medium. Immutable once
/// built; the named constructors validate their input.
class MaterialModel {
public:
  static MaterialModel constant_index(double n);
  static MaterialModel tabulated(std::vector<PermittivityRow> rows, std::string source = {});
  static MaterialModel drude_lorentz(DrudeLorentzParams params);

  /// Copy of this model that reports a real permittivity.
  MaterialModel lossless() const;

  /// Complex permittivity at a vacuum wavelength in nm. Tabulated data is
  /// linearly interpolated; queries outside the table throw
  /// ExtrapolationError.
  std::complex<double> permittivity(double wavelength_nm) const;

  MaterialKind kind() const noexcept { return kind_; }
  bool is_lossless() const noexcept { return lossless_; }
  double index() const noexcept { return index_; }
  const std::vector<PermittivityRow>& rows() const noexcept { return rows_; }
  const std::string& source() const noexcept { return source_; }

private:
  MaterialModel() = default;

  MaterialKind kind_ = MaterialKind::constant_index;
  double index_ = 1.0;
  std::vector<PermittivityRow> rows_;
  std::string source_;
  DrudeLorentzParams dl_;
  bool lossless_ = false;
};

/// Parses the plain-text permittivity format: '#' header lines, then rows of
/// "lambda0_nm Re(eps) Im(eps)". Malformed rows are errors.
MaterialModel parse_material_table(std::istream& in, const std::string& name = "<stream>");
MaterialModel load_material_table(const std::filesystem::path& path);

/// Silver data shipped with the library (data/silver.txt).
const MaterialModel& builtin_silver();
/// Raw text of the shipped silver file.
std::string_view builtin_silver_text();

/// Solvent plus solute at concentration C (g per 100 ml).
struct BioMedium {
  double solvent_index = 1.333;
  double solute_coefficient = 0.00182;
  double concentration = 0.0;
};

/// n_bio = n_s + A C.
double bio_index(const BioMedium& medium);

}  // namespace qps
