#pragma once

// CSV and SVG emission. CSV: '#'-prefixed provenance header, comma
// separated, LF endings, doubles with 17 significant digits, divergent
// values as the literal "inf", empty cells for quantities not computed.

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "qpsense/scenario.hpp"

namespace qps {

inline constexpr const char* kVersion = "0.1.0";

/// "%.17g", or "inf"/"-inf"/"nan" for non-finite values.
std::string format_number(double value);
std::string format_optional(const std::optional<double>& value);

/// Column names of write_resolution_csv for a state of photons+1 entries.
std::vector<std::string> resolution_columns(int photons);

void write_resolution_csv(std::ostream& out, const ResolutionTable& table,
                          const std::vector<std::string>& provenance = {});

std::vector<std::string> scaling_columns();
void write_scaling_csv(std::ostream& out, const ScalingTable& table, const std::vector<std::string>& provenance = {});

/// Plain numeric table for ad hoc panels.
struct NumericTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};
void write_numeric_csv(std::ostream& out, const NumericTable& table, const std::vector<std::string>& provenance = {});

struct ChartSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct ChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  std::vector<ChartSeries> series;
};

/// Static line chart. Non-finite points (and non-positive ones on a log
/// axis) break the line.
void write_svg_chart(std::ostream& out, const ChartSpec& chart);

}  // namespace qps
