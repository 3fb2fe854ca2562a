#pragma once

// Recovery states for a sharp pair (u, Omega):
//   u_eps = max{phi_eps(s), (u - d_hi)_+}   where s >= 0
//   u_eps = min{phi_eps(s), -(u - d_lo)_-}  where s <  0
// with s the signed distance to the part of the boundary of Omega inside the
// domain, d_hi = max u on {0 <= s <= t_eps}, d_lo = min u on {-t_eps <= s <= 0}.

#include <vector>

#include <nlohmann/json.hpp>

#include "perimeter_phase/energy.hpp"

namespace perimeter_phase {

struct RecoveryReport {
  double epsilon = 0.0;
  double kappa = 0.0;
  double t_eps = 0.0;
  double delta_bar = 0.0;
  double delta_under = 0.0;
  EnergyBreakdown energy;
  EnergyBreakdown sharp;
  double l2_gap = 0.0;
  double h_tilde_l1_gap = 0.0;
  /// Lumped measure of the band {|s| <= t_eps}.
  double band_measure = 0.0;

  nlohmann::json to_json() const;
};

struct RecoveryResult {
  PhaseState state;
  RecoveryReport report;
};

/// Throws unsupported_region for mask phases and resolution_error when the
/// boundary meets the domain but a band holds no grid node.
RecoveryResult build_recovery(const SharpPair& pair, double epsilon, double kappa = 0.1);

/// One report per epsilon; epsilons must be positive and strictly decreasing.
std::vector<RecoveryReport> recovery_curve(const SharpPair& pair, const std::vector<double>& epsilons,
                                           double kappa = 0.1);

}  // namespace perimeter_phase
