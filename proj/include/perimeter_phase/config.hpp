#pragma once

// Experiment configuration: a JSON document validated in one pass that
// reports every violation it finds.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "perimeter_phase/errors.hpp"
#include "perimeter_phase/geometry.hpp"

namespace perimeter_phase {

enum class ExperimentKind {
  profile,
  energy,
  recovery,
  glue,
  barrier,
  minimize,
  sweep,
  oracle1d,
  harmonic_check,
};

std::string_view experiment_name(ExperimentKind kind);
std::optional<ExperimentKind> parse_experiment(std::string_view name);
/// "profile, energy, ..., harmonic-check".
std::string experiment_names();

struct ConfigIssue {
  std::string field;
  std::string message;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<ConfigIssue> issues);
  const std::vector<ConfigIssue>& issues() const noexcept { return issues_; }

 private:
  std::vector<ConfigIssue> issues_;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::profile;
  /// Domain description without n, e.g. {"type": "interval", "a": -1, "b": 1}.
  nlohmann::json domain = {{"type", "interval"}, {"a", -1.0}, {"b", 1.0}};
  /// 4096, except 64 for harmonic-check.
  int n = 4096;
  std::optional<Region> region;
  std::vector<double> epsilons;
  double kappa = 0.1;
  double bound_m = 1.0;
  std::uint64_t seed = 0;
  std::string out = ".";
  /// Directory that relative field paths are resolved against.
  std::filesystem::path base_dir = ".";
  /// The whole document, for the experiment-specific keys.
  nlohmann::json raw;

  DomainPtr make_domain() const;
};

/// Parses and validates. `forced_kind` (from the command line) fills in a
/// missing "experiment" key and must agree with a present one. Throws
/// ConfigError listing all issues.
ExperimentConfig parse_config(std::string_view text,
                              std::optional<ExperimentKind> forced_kind = std::nullopt);

}  // namespace perimeter_phase
