#pragma once

// Discrete energies on the node grid of a Domain.
//
// Per cell with weight w (fraction inside the domain) and volume |Q|:
//   Dirichlet  1D: w (du)^2 / h
//              2D: w * (1/2) * sum of the four squared edge differences
//   well       w |Q| * mean over corners of W(u / sqrt(eps)) / eps
// The well quadrature equals the node-lumped sum  sum_i m_i W(u_i/sqrt(eps))/eps.

#include <Eigen/Core>

#include <cmath>
#include <optional>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "perimeter_phase/geometry.hpp"

namespace perimeter_phase {

/// Node values on a domain grid. Boundary markers come from the domain.
struct ScalarField {
  DomainPtr domain;
  Eigen::ArrayXd values;

  ScalarField(DomainPtr domain, Eigen::ArrayXd values);

  template <typename F>
  static ScalarField from_function(DomainPtr domain, F&& f) {
    Eigen::ArrayXd v(domain->node_count());
    for (Index k = 0; k < v.size(); ++k) v[k] = f(domain->node(k));
    return ScalarField(std::move(domain), std::move(v));
  }
  static ScalarField constant(DomainPtr domain, double value);

  Index size() const { return values.size(); }
};

/// Field tagged with eps and the box bound M: |values| <= M.
struct PhaseState {
  ScalarField field;
  double epsilon;
  double bound_m;

  PhaseState(ScalarField field, double epsilon, double bound_m);

  const Domain& domain() const { return *field.domain; }
  const Eigen::ArrayXd& values() const { return field.values; }
};

struct EnergyBreakdown {
  double dirichlet = 0.0;
  double well = 0.0;
  double perimeter_weighted = 0.0;
  double total = 0.0;

  nlohmann::json to_json() const;
};

inline constexpr double kSignTolerance = 1e-12;

/// Neumaier-compensated running sum.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) carry += (sum - t) + x;
    else carry += (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + carry; }
};

/// Field with a phase set, either an exact region or a node mask, satisfying
/// u >= -tol on the phase and u <= tol off it.
struct SharpPair {
  ScalarField field;
  std::variant<Region, Mask> phase;
  double bound_m;

  SharpPair(ScalarField field, Region region, double bound_m);
  SharpPair(ScalarField field, Mask mask, double bound_m);

  bool phase_contains_node(Index k) const;
  const Region* region() const { return std::get_if<Region>(&phase); }
  const Mask* mask() const { return std::get_if<Mask>(&phase); }

 private:
  void validate() const;
};

/// Cells used for a restricted evaluation; empty means every cell.
using CellSelection = std::vector<std::uint8_t>;

/// Cells whose center lies in the subdomain. Throws domain_error when a
/// bounded subdomain leaves the domain; unbounded ones are intersected.
CellSelection subdomain_cells(const Domain& domain, const Region& subdomain);

double dirichlet_energy(const ScalarField& field, const CellSelection& cells = {});
double well_energy(const ScalarField& field, double epsilon, const CellSelection& cells = {});

/// Dirichlet and well contribution of a single cell.
std::pair<double, double> cell_energy(const Domain& domain, const Eigen::ArrayXd& values,
                                      double epsilon, Index cell);

EnergyBreakdown e_eps(const PhaseState& state, const std::optional<Region>& subdomain = {});
EnergyBreakdown e_eps_on(const PhaseState& state, const CellSelection& cells);

EnergyBreakdown sharp_energy(const SharpPair& pair, const std::optional<Region>& subdomain = {});

/// Total variation of H~(u / sqrt(eps)): sum of w |dg| in 1D, of
/// w |Q| |grad g| with edge-averaged differences in 2D.
double tv_phase(const PhaseState& state, const CellSelection& cells = {});

struct YoungSplit {
  double lhs;  // E_eps total
  double rhs;  // (c0/2) tv_phase + Dirichlet energy of sign(u) (|u| - sqrt(eps))_+
};
YoungSplit modica_mortola_split(const PhaseState& state);

struct PhaseMeasure {
  double measure;   // lumped volume where |H~(u/sqrt(eps))| <= 1 - 2 delta
  double bound;     // C(delta) * eps * well energy
  double constant;  // C(delta) = 1 / W(H~^{-1}(1 - delta))
};
PhaseMeasure intermediate_phase_measure(const PhaseState& state, double delta);

/// Lumped L2 / L1 norms with node weights.
double l2_distance(const ScalarField& a, const ScalarField& b);
double l2_distance(const Domain& domain, const Eigen::ArrayXd& a, const Eigen::ArrayXd& b);
double l1_distance(const Domain& domain, const Eigen::ArrayXd& a, const Eigen::ArrayXd& b);

/// H~(u / sqrt(eps)) node-wise.
Eigen::ArrayXd phase_variable(const Eigen::ArrayXd& values, double epsilon);

/// +1 on phase nodes, -1 elsewhere.
Eigen::ArrayXd phase_indicator(const Region& region, const Domain& domain);
Eigen::ArrayXd phase_indicator(const Mask& mask);

}  // namespace perimeter_phase
