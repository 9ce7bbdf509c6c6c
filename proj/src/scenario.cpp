#include "qpsense/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "qpsense/error.hpp"

namespace qps {
namespace {

constexpr std::array<std::string_view, kStrategyCount> kStrategyNames = {"classical", "noon", "optimal",
                                                                         "sil",       "hl",   "snl"};

bool selected(const SensingScenario& s, Strategy which) {
  return std::find(s.strategies.begin(), s.strategies.end(), which) != s.strategies.end();
}

NanowireSpec bind(const NanowireSpec& spec, const SensingScenario& s, double n_bio) {
  NanowireSpec out = spec.with_cladding(n_bio);
  out.wavelength_nm = s.wavelength_nm;
  out.length_nm = s.length_nm;
  return out;
}

std::string describe(const SensingScenario& s) {
  std::ostringstream out;
  out.precision(17);
  if (const auto* spec = std::get_if<NanowireSpec>(&s.transducer)) {
    out << "nanowire core=" << (spec->core == CoreKind::metal ? "metal" : "dielectric")
        << " radius_nm=" << spec->radius_nm << " lossless=" << (spec->core_material.is_lossless() ? 1 : 0);
  } else {
    out << "dispersion-table geometry=" << std::get<DispersionTable>(s.transducer).geometry;
  }
  out << " length_nm=" << s.length_nm << " lambda0_nm=" << s.wavelength_nm << " photons=" << s.photons
      << " points=" << s.grid.size() << " fd_step=" << s.fd_step;
  return out.str();
}

ResolutionRow evaluate_row(const SensingScenario& s, double n_bio, std::optional<std::complex<double>> seed,
                           std::span<const double> fixed_state) {
  ResolutionRow row;
  row.n_bio = n_bio;
  try {
    const TransducerPoint p = evaluate_transducer(s, n_bio, seed);
    row.n_eff = p.mode.n_eff;
    row.beta = p.mode.beta;
    row.kappa = p.mode.kappa;
    row.phi = p.phi;
    row.eta = p.eta;
    row.dphi_dn = p.dphi_dn;

    const int n = s.photons;
    auto set = [&](Strategy which, double value) { row.delta_n[static_cast<std::size_t>(which)] = value; };
    if (selected(s, Strategy::classical)) {
      const auto probe = CoherentProbe::with_mean_photons(n);
      set(Strategy::classical, delta_n_from_phi(delta_phi_coherent(probe, Phase{p.phi}), p.dphi_dn));
      row.classical_envelope = snl_delta_n(n, p.dphi_dn);
    }
    if (selected(s, Strategy::noon)) {
      const auto noon = DefiniteNState::noon(n);
      set(Strategy::noon, delta_n_from_phi(crb_delta_phi(qfi_definite_n(noon.probabilities(), p.eta)), p.dphi_dn));
    }
    if (selected(s, Strategy::optimal)) {
      const FisherResult best = optimize_input_state(n, p.eta, s.optimizer_tol);
      set(Strategy::optimal, delta_n_from_phi(best.delta_phi, p.dphi_dn));
      row.fisher = best.fisher;
      row.state = best.x;
    }
    if (selected(s, Strategy::sil)) set(Strategy::sil, sil_delta_n(n, p.eta, p.dphi_dn));
    if (selected(s, Strategy::hl)) set(Strategy::hl, hl_delta_n(n, p.dphi_dn));
    if (selected(s, Strategy::snl)) set(Strategy::snl, snl_delta_n(n, p.dphi_dn));
    if (!fixed_state.empty()) {
      const double f = qfi_definite_n(fixed_state, p.eta);
      row.state_delta_n = delta_n_from_phi(crb_delta_phi(f), p.dphi_dn);
      row.fisher = f;
      row.state.assign(fixed_state.begin(), fixed_state.end());
    }
    row.ok = true;
  } catch (const std::exception& e) {
    row = ResolutionRow{};
    row.n_bio = n_bio;
    row.ok = false;
    row.error = e.what();
  }
  return row;
}

ResolutionTable run_sweep(const SensingScenario& s, std::span<const double> fixed_state) {
  validate(s);
  if (!fixed_state.empty()) {
    if (static_cast<int>(fixed_state.size()) != s.photons + 1) {
      throw DomainError("fixed state length must be photons + 1");
    }
    (void)DefiniteNState::from_probabilities({fixed_state.begin(), fixed_state.end()});
  }
  const std::size_t points = s.grid.size();
  std::vector<ResolutionRow> rows(points);
  const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(s.threads, 1)), 1, points);

  // Contiguous chunks; inside a chunk each solve is seeded by the previous
  // converged mode.
  auto run_chunk = [&](std::size_t begin, std::size_t end) {
    std::optional<std::complex<double>> seed;
    for (std::size_t i = begin; i < end; ++i) {
      rows[i] = evaluate_row(s, s.grid[i], seed, fixed_state);
      if (rows[i].ok) seed = rows[i].n_eff;
    }
  };
  if (workers == 1) {
    run_chunk(0, points);
  } else {
    std::vector<std::thread> pool;
    const std::size_t per = (points + workers - 1) / workers;
    for (std::size_t begin = 0; begin < points; begin += per) {
      pool.emplace_back(run_chunk, begin, std::min(points, begin + per));
    }
    for (auto& t : pool) t.join();
  }

  ResolutionTable table;
  table.rows = std::move(rows);
  table.photons = s.photons;
  table.description = describe(s);
  return table;
}

}  // namespace

std::string_view to_string(Strategy s) { return kStrategyNames[static_cast<std::size_t>(s)]; }

std::optional<Strategy> parse_strategy(std::string_view name) {
  for (std::size_t i = 0; i < kStrategyCount; ++i) {
    if (kStrategyNames[i] == name) return kAllStrategies[i];
  }
  return std::nullopt;
}

void validate(const SensingScenario& s) {
  if (!(s.length_nm > 0.0)) throw DomainError("scenario length must be > 0");
  if (!(s.wavelength_nm > 0.0)) throw DomainError("scenario wavelength must be > 0");
  if (s.photons < 1 || s.photons > kMaxPhotons) throw DomainError("scenario photon number out of range");
  if (s.grid.empty()) throw DomainError("scenario grid is empty");
  if (!(s.fd_step > 0.0)) throw DomainError("finite-difference step must be > 0");
  for (std::size_t i = 0; i < s.grid.size(); ++i) {
    if (!std::isfinite(s.grid[i])) throw DomainError("grid values must be finite");
    if (i > 0 && !(s.grid[i] > s.grid[i - 1])) throw DomainError("grid must be strictly increasing");
  }
  if (const auto* table = std::get_if<DispersionTable>(&s.transducer)) {
    validate(*table);
    if (std::abs(table->wavelength_nm - s.wavelength_nm) > 1e-9 * s.wavelength_nm) {
      throw DomainError("scenario wavelength does not match the dispersion table");
    }
    if (s.grid.front() < table->rows.front().n_bio || s.grid.back() > table->rows.back().n_bio) {
      throw DomainError("grid extends beyond the dispersion table range");
    }
  } else {
    validate(bind(std::get<NanowireSpec>(s.transducer), s, s.grid.front()));
  }
}

std::vector<double> linear_grid(double start, double stop, int points) {
  if (points < 1) throw DomainError("grid needs at least one point");
  if (points == 1) return {start};
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i) g[i] = start + (stop - start) * i / (points - 1);
  g.back() = stop;
  return g;
}

std::size_t ResolutionTable::failed_rows() const {
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const auto& r) { return !r.ok; }));
}

TransducerPoint evaluate_transducer(const SensingScenario& s, double n_bio, std::optional<std::complex<double>> seed) {
  TransducerPoint p;
  double slope = 0.0;
  if (const auto* spec = std::get_if<NanowireSpec>(&s.transducer)) {
    const NanowireSpec bound = bind(*spec, s, n_bio);
    p.mode = solve_mode(bound, seed);
    const auto local_seed = std::optional<std::complex<double>>(p.mode.n_eff);
    slope = central_slope([&](double n) { return solve_mode(bound.with_cladding(n), local_seed).beta; }, n_bio,
                          s.fd_step);
  } else {
    const auto& table = std::get<DispersionTable>(s.transducer);
    p.mode = interpolate_dispersion(table, n_bio);
    slope = dispersion_slope(table, n_bio);
  }
  p.phi = p.mode.beta * s.length_nm;
  p.eta = transmissivity(p.mode, s.length_nm);
  p.dphi_dn = s.length_nm * slope;
  if (!(p.eta > 0.0)) throw RangeError("transmissivity underflows to zero");
  return p;
}

ResolutionTable sweep(const SensingScenario& scenario) { return run_sweep(scenario, {}); }

ResolutionTable fixed_state_sweep(const SensingScenario& scenario, std::span<const double> x) {
  if (x.empty()) throw DomainError("fixed_state_sweep needs a state");
  return run_sweep(scenario, x);
}

ScalingTable n_scaling_study(const SensingScenario& scenario, double n_bio, std::span<const int> photon_numbers) {
  if (photon_numbers.empty()) throw DomainError("photon-number list is empty");
  for (std::size_t i = 1; i < photon_numbers.size(); ++i) {
    if (!(photon_numbers[i] > photon_numbers[i - 1])) throw DomainError("photon-number list must be increasing");
  }
  SensingScenario probe = scenario;
  probe.grid = {n_bio};
  probe.photons = photon_numbers.front();
  validate(probe);

  const TransducerPoint p = evaluate_transducer(probe, n_bio);
  ScalingTable table;
  table.n_bio = n_bio;
  table.eta = p.eta;
  table.dphi_dn = p.dphi_dn;
  for (const int n : photon_numbers) {
    ScalingRow row;
    row.photons = n;
    const auto noon = DefiniteNState::noon(n);
    row.noon = delta_n_from_phi(crb_delta_phi(qfi_definite_n(noon.probabilities(), p.eta)), p.dphi_dn);
    const FisherResult best = optimize_input_state(n, p.eta, scenario.optimizer_tol);
    row.optimal = delta_n_from_phi(best.delta_phi, p.dphi_dn);
    row.state = best.x;
    row.sil = sil_delta_n(n, p.eta, p.dphi_dn);
    row.hl = hl_delta_n(n, p.dphi_dn);
    row.snl = snl_delta_n(n, p.dphi_dn);
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::vector<std::size_t> ordering_violations(const ResolutionTable& table) {
  std::vector<std::size_t> bad;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    if (!r.ok || !(r.eta < 1.0)) continue;
    const auto hl = r.get(Strategy::hl);
    const auto opt = r.get(Strategy::optimal);
    const auto sil = r.get(Strategy::sil);
    if (!hl || !opt || !sil) continue;
    // At N = 1 the optimum coincides with the SIL; allow for rounding.
    const double slack = 1e-12 * *sil;
    if (!(*hl <= *opt + slack && *opt <= *sil + slack)) bad.push_back(i);
  }
  return bad;
}

}  // namespace qps
