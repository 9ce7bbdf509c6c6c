#include "qpsense/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace qps {
namespace {

void write_header(std::ostream& out, const std::vector<std::string>& provenance) {
  out << "# qpsense " << kVersion << "\n";
  for (const auto& line : provenance) out << "# " << line << "\n";
}

void write_columns(std::ostream& out, const std::vector<std::string>& columns) {
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
  out << "\n";
}

std::string quote(const std::string& text) {
  std::string q = "\"";
  for (char c : text) {
    if (c == '"') q += '"';
    q += (c == '\n' || c == '\r') ? ' ' : c;
  }
  return q + "\"";
}

std::string xml_escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string svg_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string format_optional(const std::optional<double>& value) { return value ? format_number(*value) : ""; }

std::vector<std::string> resolution_columns(int photons) {
  std::vector<std::string> cols = {"n_bio",         "status",    "n_eff_re",  "n_eff_im",
                                   "beta_rad_per_nm", "kappa_per_nm", "phi_rad", "eta",
                                   "dphi_dn",       "dn_classical", "dn_classical_envelope",
                                   "dn_noon",       "dn_optimal", "dn_state",  "dn_sil",
                                   "dn_hl",         "dn_snl",    "fisher"};
  for (int n = 0; n <= photons; ++n) cols.push_back("x_" + std::to_string(n));
  cols.push_back("note");
  return cols;
}

void write_resolution_csv(std::ostream& out, const ResolutionTable& table,
                          const std::vector<std::string>& provenance) {
  std::vector<std::string> header = {"scenario: " + table.description};
  header.insert(header.end(), provenance.begin(), provenance.end());
  write_header(out, header);
  write_columns(out, resolution_columns(table.photons));
  for (const auto& r : table.rows) {
    std::vector<std::string> cells;
    cells.push_back(format_number(r.n_bio));
    cells.push_back(r.ok ? "ok" : "failed");
    if (r.ok) {
      for (double v : {r.n_eff.real(), r.n_eff.imag(), r.beta, r.kappa, r.phi, r.eta, r.dphi_dn}) {
        cells.push_back(format_number(v));
      }
      cells.push_back(format_optional(r.get(Strategy::classical)));
      cells.push_back(format_optional(r.classical_envelope));
      cells.push_back(format_optional(r.get(Strategy::noon)));
      cells.push_back(format_optional(r.get(Strategy::optimal)));
      cells.push_back(format_optional(r.state_delta_n));
      cells.push_back(format_optional(r.get(Strategy::sil)));
      cells.push_back(format_optional(r.get(Strategy::hl)));
      cells.push_back(format_optional(r.get(Strategy::snl)));
      cells.push_back(format_optional(r.fisher));
      for (int n = 0; n <= table.photons; ++n) {
        cells.push_back(n < static_cast<int>(r.state.size()) ? format_number(r.state[n]) : "");
      }
      cells.push_back("");
    } else {
      cells.resize(resolution_columns(table.photons).size() - 1);
      cells.push_back(quote(r.error));
    }
    write_columns(out, cells);
  }
}

std::vector<std::string> scaling_columns() {
  return {"photons", "dn_noon", "dn_optimal", "dn_sil", "dn_hl", "dn_snl", "gap_sil_hl", "rel_gap_sil", "rel_gap_hl"};
}

void write_scaling_csv(std::ostream& out, const ScalingTable& table, const std::vector<std::string>& provenance) {
  std::vector<std::string> header = {"n_bio=" + format_number(table.n_bio) + " eta=" + format_number(table.eta) +
                                     " dphi_dn=" + format_number(table.dphi_dn)};
  header.insert(header.end(), provenance.begin(), provenance.end());
  write_header(out, header);
  write_columns(out, scaling_columns());
  for (const auto& r : table.rows) {
    write_columns(out, {std::to_string(r.photons), format_number(r.noon), format_number(r.optimal),
                        format_number(r.sil), format_number(r.hl), format_number(r.snl), format_number(r.gap()),
                        format_number(r.relative_to_sil()), format_number(r.relative_to_hl())});
  }
}

void write_numeric_csv(std::ostream& out, const NumericTable& table, const std::vector<std::string>& provenance) {
  write_header(out, provenance);
  write_columns(out, table.columns);
  for (const auto& row : table.rows) {
    std::vector<std::string> cells;
    for (double v : row) cells.push_back(format_number(v));
    write_columns(out, cells);
  }
}

void write_svg_chart(std::ostream& out, const ChartSpec& chart) {
  constexpr double width = 720;
  constexpr double height = 440;
  constexpr double left = 80;
  constexpr double right = 180;
  constexpr double top = 40;
  constexpr double bottom = 60;
  constexpr const char* palette[] = {"#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};

  auto usable = [&](double x, double y) { return std::isfinite(x) && std::isfinite(y) && (!chart.log_y || y > 0); };
  auto ty = [&](double y) { return chart.log_y ? std::log10(y) : y; };

  double x_min = std::numeric_limits<double>::infinity();
  double x_max = -x_min;
  double y_min = x_min;
  double y_max = -x_min;
  for (const auto& s : chart.series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!usable(s.x[i], s.y[i])) continue;
      x_min = std::min(x_min, s.x[i]);
      x_max = std::max(x_max, s.x[i]);
      y_min = std::min(y_min, ty(s.y[i]));
      y_max = std::max(y_max, ty(s.y[i]));
    }
  }
  if (!(x_max >= x_min)) {
    x_min = 0;
    x_max = 1;
    y_min = 0;
    y_max = 1;
  }
  if (x_max == x_min) x_max = x_min + 1;
  if (y_max == y_min) y_max = y_min + 1;
  const double pad = 0.05 * (y_max - y_min);
  y_min -= pad;
  y_max += pad;

  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  auto px = [&](double x) { return left + (x - x_min) / (x_max - x_min) * plot_w; };
  auto py = [&](double y) { return top + (1.0 - (ty(y) - y_min) / (y_max - y_min)) * plot_h; };

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << svg_number(left + plot_w / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
      << xml_escape(chart.title) << "</text>\n";
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\"" << plot_h
      << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int i = 0; i <= 4; ++i) {
    const double xv = x_min + (x_max - x_min) * i / 4.0;
    const double yv = y_min + (y_max - y_min) * i / 4.0;
    const double xp = px(xv);
    const double yp = top + (1.0 - i / 4.0) * plot_h;
    out << "<line x1=\"" << svg_number(xp) << "\" y1=\"" << top + plot_h << "\" x2=\"" << svg_number(xp)
        << "\" y2=\"" << top + plot_h + 5 << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << svg_number(xp) << "\" y=\"" << top + plot_h + 18 << "\" text-anchor=\"middle\">"
        << tick_label(xv) << "</text>\n";
    out << "<line x1=\"" << left - 5 << "\" y1=\"" << svg_number(yp) << "\" x2=\"" << left << "\" y2=\""
        << svg_number(yp) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << left - 8 << "\" y=\"" << svg_number(yp + 4) << "\" text-anchor=\"end\">"
        << tick_label(chart.log_y ? std::pow(10.0, yv) : yv) << "</text>\n";
  }
  out << "<text x=\"" << svg_number(left + plot_w / 2) << "\" y=\"" << height - 15 << "\" text-anchor=\"middle\">"
      << xml_escape(chart.x_label) << "</text>\n";
  out << "<text transform=\"translate(20," << svg_number(top + plot_h / 2)
      << ") rotate(-90)\" text-anchor=\"middle\">" << xml_escape(chart.y_label) << "</text>\n";

  for (std::size_t k = 0; k < chart.series.size(); ++k) {
    const auto& s = chart.series[k];
    const char* color = palette[k % std::size(palette)];
    std::string points;
    auto flush = [&] {
      if (!points.empty()) {
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << points
            << "\"/>\n";
      }
      points.clear();
    };
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!usable(s.x[i], s.y[i])) {
        flush();
        continue;
      }
      points += svg_number(px(s.x[i])) + "," + svg_number(py(s.y[i])) + " ";
    }
    flush();
    const double ly = top + 14 + 18.0 * k;
    out << "<line x1=\"" << width - right + 12 << "\" y1=\"" << svg_number(ly) << "\" x2=\"" << width - right + 36
        << "\" y2=\"" << svg_number(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << width - right + 42 << "\" y=\"" << svg_number(ly + 4) << "\">" << xml_escape(s.name)
        << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace qps
