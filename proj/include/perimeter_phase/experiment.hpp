#pragma once

// Experiment dispatch: builds inputs from a validated config, runs the
// module operations and writes CSV tables, field dumps and summary.json
// into the output directory.
//
// Exit codes: 0 success, 2 contract or budget violations (budget_exceeded,
// infeasible, divergence, numeric_error, or a checked bound that fails),
// 1 input errors (everything else).

#include <cstdint>
#include <filesystem>
#include <optional>

#include <nlohmann/json.hpp>

#include "perimeter_phase/config.hpp"
#include "perimeter_phase/energy.hpp"

namespace perimeter_phase {

struct RunOptions {
  std::filesystem::path out_dir = ".";
  bool quiet = true;
  std::optional<std::uint64_t> seed;
};

struct RunOutcome {
  int exit_code = 0;
  nlohmann::json summary;
};

int exit_code_for(ErrorCode code);

/// Machine-readable form of an exception: {"code", "message", ...extras}.
nlohmann::json error_json(const std::exception& e);

/// Field from a description: {"file": path} or {"type": constant | affine |
/// radial | bump | sum | recovery, ...}. Recovery fields are built at eps.
ScalarField make_field(const nlohmann::json& spec, DomainPtr domain, double epsilon, double kappa,
                       double bound_m, const std::filesystem::path& base_dir);

/// Runs the experiment. Module errors are caught and serialized into the
/// summary; the summary is written to out_dir/summary.json in every case.
RunOutcome run_experiment(const ExperimentConfig& config, const RunOptions& options);

}  // namespace perimeter_phase
