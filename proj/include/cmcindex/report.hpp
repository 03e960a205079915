#pragma once

#include "cmcindex/surfaces.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace cmcindex {

inline constexpr int kSchemaVersion = 1;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Command { Identity, Spectrum, Bounds, Gallery };

std::string_view to_string(Command c);
Command parse_command(const std::string& name);

struct Tolerances {
  double identity = 1e-6;         // relative comparison-identity residual
  double refinement_ratio = 4.0;  // required decrease per refinement
  /// Residuals below this are at rounding level and exempt from the
  /// refinement-ratio test.
  double roundoff_floor = 1e-12;
  double inequality = 1e-6;  // slack for heat-trace and counting margins
};

struct RunConfig {
  std::vector<SurfaceDescriptor> surfaces;  // empty: command default
  std::optional<int> resolution;
  int refinement_levels = 1;
  std::uint64_t seed = 1;
  int variations = 20;
  Tolerances tolerances;
  std::vector<double> deltas{1.0, 2.3, 5.0};
  int r_table_genus = 10;
  int r_table_branch = 40;
  std::string out = "cmcindex-out";
  bool svg = false;

  /// Throws ConfigError on unknown keys or values out of range.
  static RunConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Surfaces used when the configuration names none.
std::vector<SurfaceDescriptor> default_surfaces(Command c);

struct CommandOutput {
  nlohmann::json report;
  /// Extra files relative to the output directory, in write order.
  std::vector<std::pair<std::string, std::string>> files;
  bool pass = true;
  /// Raised when a surface could not be evaluated because of bad input.
  bool config_error = false;

  int exit_code() const { return config_error ? 2 : (pass ? 0 : 1); }
};

CommandOutput run_identity(const RunConfig& config);
CommandOutput run_spectrum(const RunConfig& config);
CommandOutput run_bounds(const RunConfig& config);
CommandOutput run_gallery(const RunConfig& config);
CommandOutput run_command(Command c, const RunConfig& config);

/// report.json followed by the extra files; creates the directory.
void write_outputs(const CommandOutput& output,
                   const std::filesystem::path& dir);

/// Worker count: CMCINDEX_THREADS if set and positive, otherwise the
/// hardware concurrency, never more than `tasks`.
int thread_count(int tasks);

/// Runs body(0..n-1) on thread_count(n) workers. The first exception is
/// rethrown after all workers finish.
void parallel_for(int n, const std::function<void(int)>& body);

/// File-name friendly form of a surface id.
std::string slug(const std::string& id);

}  // namespace cmcindex
