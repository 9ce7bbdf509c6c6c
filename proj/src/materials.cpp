#include "qpsense/materials.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>

#include "qpsense/error.hpp"

namespace qps {

// Defined in the generated silver_data.cpp.
extern const char* const kBuiltinSilverText;

MaterialModel MaterialModel::constant_index(double n) {
  if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("constant-index material needs n > 0");
  MaterialModel m;
  m.kind_ = MaterialKind::constant_index;
  m.index_ = n;
  m.lossless_ = true;
  return m;
}

MaterialModel MaterialModel::tabulated(std::vector<PermittivityRow> rows, std::string source) {
  if (rows.size() < 2) throw DomainError("tabulated material needs at least two rows");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (!std::isfinite(r.wavelength_nm) || !std::isfinite(r.permittivity.real()) ||
        !std::isfinite(r.permittivity.imag())) {
      throw DomainError("tabulated material has a non-finite entry");
    }
    if (r.permittivity.imag() < 0.0) {
      throw DomainError("tabulated material has Im eps < 0 at " + std::to_string(r.wavelength_nm) + " nm");
    }
    if (i > 0 && !(r.wavelength_nm > rows[i - 1].wavelength_nm)) {
      throw DomainError("tabulated wavelengths must be strictly increasing");
    }
  }
  MaterialModel m;
  m.kind_ = MaterialKind::tabulated;
  m.rows_ = std::move(rows);
  m.source_ = std::move(source);
  return m;
}

MaterialModel MaterialModel::drude_lorentz(DrudeLorentzParams params) {
  if (!(params.plasma_ev > 0.0) || params.damping_ev < 0.0) {
    throw DomainError("Drude-Lorentz model needs plasma frequency > 0 and damping >= 0");
  }
  for (const auto& osc : params.oscillators) {
    if (osc.width_ev < 0.0 || osc.frequency_ev < 0.0) {
      throw DomainError("Drude-Lorentz oscillator needs frequency >= 0 and width >= 0");
    }
  }
  MaterialModel m;
  m.kind_ = MaterialKind::drude_lorentz;
  m.dl_ = std::move(params);
  return m;
}

MaterialModel MaterialModel::lossless() const {
  MaterialModel copy = *this;
  copy.lossless_ = true;
  return copy;
}

std::complex<double> MaterialModel::permittivity(double wavelength_nm) const {
  if (!(wavelength_nm > 0.0) || !std::isfinite(wavelength_nm)) {
    throw DomainError("wavelength must be positive");
  }
  std::complex<double> eps;
  switch (kind_) {
    case MaterialKind::constant_index:
      eps = index_ * index_;
      break;
    case MaterialKind::tabulated: {
      if (wavelength_nm < rows_.front().wavelength_nm || wavelength_nm > rows_.back().wavelength_nm) {
        std::ostringstream msg;
        msg << "wavelength " << wavelength_nm << " nm outside table range [" << rows_.front().wavelength_nm
            << ", " << rows_.back().wavelength_nm << "]";
        throw ExtrapolationError(msg.str());
      }
      const auto hi = std::lower_bound(rows_.begin(), rows_.end(), wavelength_nm,
                                       [](const PermittivityRow& r, double w) { return r.wavelength_nm < w; });
      if (hi->wavelength_nm == wavelength_nm) {
        eps = hi->permittivity;
      } else {
        const auto lo = hi - 1;
        const double t = (wavelength_nm - lo->wavelength_nm) / (hi->wavelength_nm - lo->wavelength_nm);
        eps = lo->permittivity + t * (hi->permittivity - lo->permittivity);
      }
      break;
    }
    case MaterialKind::drude_lorentz: {
      const double w = kHcEvNm / wavelength_nm;
      const std::complex<double> i(0.0, 1.0);
      const double wp2 = dl_.plasma_ev * dl_.plasma_ev;
      eps = 1.0 - dl_.drude_strength * wp2 / (w * (w + i * dl_.damping_ev));
      for (const auto& osc : dl_.oscillators) {
        eps += osc.strength * wp2 / (osc.frequency_ev * osc.frequency_ev - w * w - i * w * osc.width_ev);
      }
      break;
    }
  }
  if (lossless_) eps.imag(0.0);
  return eps;
}

MaterialModel parse_material_table(std::istream& in, const std::string& name) {
  std::vector<PermittivityRow> rows;
  std::string header;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      header += line.substr(first + 1);
      header += '\n';
      continue;
    }
    std::istringstream fields(line);
    double w = 0.0;
    double re = 0.0;
    double im = 0.0;
    std::string extra;
    if (!(fields >> w >> re >> im) || (fields >> extra)) {
      throw ParseError(name + ":" + std::to_string(line_no) + ": expected 3 numeric columns");
    }
    rows.push_back({w, {re, im}});
  }
  if (rows.empty()) throw ParseError(name + ": no data rows");
  try {
    return MaterialModel::tabulated(std::move(rows), header);
  } catch (const DomainError& e) {
    throw ParseError(name + ": " + e.what());
  }
}

MaterialModel load_material_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open material file " + path.string());
  return parse_material_table(in, path.string());
}

std::string_view builtin_silver_text() { return kBuiltinSilverText; }

const MaterialModel& builtin_silver() {
  static const MaterialModel silver = [] {
    std::istringstream in{std::string(kBuiltinSilverText)};
    return parse_material_table(in, "builtin:silver");
  }();
  return silver;
}

double bio_index(const BioMedium& medium) {
  if (medium.concentration < 0.0) throw DomainError("concentration must be >= 0");
  return medium.solvent_index + medium.solute_coefficient * medium.concentration;
}

}  // namespace qps
