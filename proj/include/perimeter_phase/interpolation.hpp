#pragma once

// Gluing two phase states across an annulus, and the barrier competitor.

#include <nlohmann/json.hpp>

#include "perimeter_phase/energy.hpp"
#include "perimeter_phase/profiles1d.hpp"

namespace perimeter_phase {

/// Annulus B_{rho+delta} \ B_rho around the ball center, theta = 16 M / delta.
struct AnnulusSpec {
  double rho = 0.0;
  double delta = 0.0;
  double theta_delta = 0.0;

  static AnnulusSpec make(double rho, double delta, double bound_m);
  nlohmann::json to_json() const;
};

struct GlueStage {
  double inner = 0.0;  // annulus inner radius
  double width = 0.0;
  double theta = 0.0;
  double r_star = 0.0;
  double annulus_energy = 0.0;  // E_eps on cells touching nodes where the profile is selected
  double scan_min = 0.0;        // min over the r-scan of E_eps on the band cells
  double scan_mean = 0.0;
};

struct GlueReport {
  double r_star = 0.0;
  double annulus_energy = 0.0;
  double budget_gamma = 0.0;
  double reference_energy = 0.0;  // E(v, B_rho) + E(u, outside B_{rho+delta})
  double excess = 0.0;            // E(output) - reference_energy
  bool ordered = true;
  std::vector<GlueStage> stages;
  EnergyBreakdown total_energy;

  nlohmann::json to_json() const;
};

struct GlueResult {
  PhaseState state;
  GlueReport report;
};

inline constexpr int kGlueScanPoints = 32;

/// Output equals v on B_rho and u outside B_{rho+delta}, node for node.
/// Throws InfeasibleGlue when phi_theta does not saturate at M within the
/// band, BudgetExceeded when the excess over the two parts exceeds gamma.
GlueResult glue(const PhaseState& u_state, const PhaseState& v_state, const AnnulusSpec& spec,
                double gamma, SlopeConvention convention = SlopeConvention::first_integral_squared);

/// Smallest band width delta <= delta_max for which phi_{16M/w, eps}(w/8) >= M
/// with w = delta (ordered) or delta / 2 (unordered); NaN when none exists.
double minimal_glue_delta(double epsilon, double bound_m, double delta_max, bool ordered,
                          SlopeConvention convention);

struct BarrierReport {
  double radius_r = 0.0;
  double bound_m = 0.0;
  double epsilon = 0.0;
  double transition_radius = 0.0;  // (R + 1) / 2, zero set of v~
  double t_eps = 0.0;
  EnergyBreakdown energy;
  double gradient_term = 0.0;   // int |grad v~|^2
  double perimeter_term = 0.0;  // c0 H^{n-1}(boundary of B_R)
  double bound = 0.0;           // perimeter_term + gradient_term + 1
  /// Same with the perimeter of the transition sphere.
  double transition_bound = 0.0;
  double tolerance = 0.02;

  bool within_bound() const { return energy.total <= bound * (1.0 + tolerance); }
  bool within_transition_bound() const { return energy.total <= transition_bound * (1.0 + tolerance); }
  nlohmann::json to_json() const;
};

struct BarrierResult {
  PhaseState state;
  BarrierReport report;
};

/// Barrier competitor on a ball domain (unit radius expected). Throws
/// domain_error for R outside (0, 1) and infeasible when sqrt(eps) >= M or
/// the transition t_eps does not fit in a quarter of the cone width.
BarrierResult build_barrier(DomainPtr domain, double radius_r, double bound_m, double epsilon,
                            double kappa = 0.1);

}  // namespace perimeter_phase
