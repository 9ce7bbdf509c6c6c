#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "qpsense/scenario.hpp"

namespace qps::cli {

enum ExitCode : int { kSuccess = 0, kRuntimeFailure = 1, kUsageError = 2 };

enum class RunKind { sweep, fixed_state, n_scaling };

/// Parsed sweep configuration document (grammar in README.md).
struct RunConfig {
  SensingScenario scenario;
  RunKind kind = RunKind::sweep;
  std::vector<double> state;              ///< fixed_state: explicit x
  std::optional<double> optimize_at;      ///< fixed_state: optimise x at this n_bio
  double scaling_n_bio = 0.0;             ///< n_scaling
  std::vector<int> scaling_photons;       ///< n_scaling
  std::filesystem::path csv_path;
  std::optional<std::filesystem::path> svg_path;
  bool svg_log_y = true;
};

/// Every violation found in the document, so all can be reported at once.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
  std::vector<std::string> problems_;
};

/// Parses a JSON configuration. Relative paths resolve against base_dir.
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir = ".");
RunConfig load_run_config(const std::filesystem::path& path);

/// Full command-line entry point; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qps::cli
