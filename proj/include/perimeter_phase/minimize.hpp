#pragma once

// Local minimization of E_eps under |u| <= M with pinned boundary nodes,
// harmonic replacement, the brute-force 1D sharp oracle and extraction of
// the sharp limit of a phase state.

#include <Eigen/SparseCore>

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "perimeter_phase/energy.hpp"

namespace perimeter_phase {

enum class DescentMethod {
  /// Direction -P^{-1} g with P the Hessian of E_eps on the free nodes when
  /// it is positive definite, else the Hessian shifted by lambda m / eps^2 for the first
  /// lambda in {1e-3, 1e-2, 1e-1, 1} that makes it positive definite, else
  /// 2K + diag(m W''_+ / eps^2).
  preconditioned,
  /// Direction -g / m with a CFL-limited step.
  explicit_gradient,
};

struct MinimizeConfig {
  int max_iters = 5000;
  /// Explicit step; 0 selects 0.9 h^2 / (4 dim). Ignored by the preconditioned method.
  double step = 0.0;
  /// Stop when the sup over free nodes of |projected gradient| / m_i is below this.
  double tol_grad = 1e-6;
  double bound_m = 1.0;
  DescentMethod method = DescentMethod::preconditioned;
  /// Values imposed on boundary nodes; when empty the initial values are kept.
  std::optional<Eigen::ArrayXd> boundary;
  int max_halvings = 30;
};

struct IterationRecord {
  int iteration = 0;
  double energy = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;
  bool hessian = false;  // preconditioned by the exact Hessian
};

struct MinimizeResult {
  PhaseState state;
  std::vector<IterationRecord> log;
  int iterations = 0;
  bool converged = false;
  /// "tolerance", "max_iters" or "stagnation" (line search limited by rounding).
  std::string stop_reason;
  double grad_norm = 0.0;
};

/// Throws divergence when max_halvings halvings cannot produce a decrease
/// that exceeds the rounding level of the energy.
MinimizeResult minimize_e_eps(const PhaseState& initial, const MinimizeConfig& config);

/// Gradient of E_eps with respect to the node values.
Eigen::ArrayXd energy_gradient(const PhaseState& state);

/// Sup over interior nodes of |projected gradient| / m_i.
double projected_gradient_norm(const PhaseState& state, const Eigen::ArrayXd& gradient);

/// Stiffness matrix K with dirichlet_energy(u) = u^T K u.
Eigen::SparseMatrix<double> stiffness_matrix(const Domain& domain);

/// Discrete harmonic function with the boundary values of `field` (CG to
/// relative residual 1e-10). Throws numeric_error when CG fails.
ScalarField harmonic_replacement(const ScalarField& field);

struct OracleResult1D {
  double a = 0.0;
  double b = 0.0;
  double x0 = 0.0;
  double energy = 0.0;
  /// Breakpoints (x, u) of the piecewise-affine minimizer.
  std::vector<std::pair<double, double>> profile;
  double closed_form_x0 = 0.0;
  double closed_form_energy = 0.0;
  /// Best candidate with a flat zero interval [x1, x2], x2 - x1 >= one grid step.
  double flat_energy = 0.0;
  double flat_x1 = 0.0;
  double flat_x2 = 0.0;

  /// Value of the minimizer at x.
  double value(double x) const;
  nlohmann::json to_json() const;
};

/// Brute-force minimizer of the 1D sharp energy on (-1, 1) with u(-1) = -a,
/// u(1) = b. `samples` interface locations, a sqrt(samples)^2 flat grid.
OracleResult1D sharp_oracle_1d(double a, double b, int samples = 100000);

struct SharpLimit {
  SharpPair pair;
  /// Lumped measure of {|u| < sqrt(eps)}.
  double band_measure = 0.0;
  /// Linear-interpolated zero crossings (1D only).
  std::vector<double> interfaces;
};

/// Mask {H~(u / sqrt(eps)) >= 0} with the field values kept as they are.
SharpLimit extract_sharp_limit(const PhaseState& state);

}  // namespace perimeter_phase
