#include "perimeter_phase/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "perimeter_phase/errors.hpp"
#include "perimeter_phase/profiles1d.hpp"

namespace perimeter_phase {

nlohmann::json RecoveryReport::to_json() const {
  return {{"epsilon", epsilon},
          {"kappa", kappa},
          {"t_eps", t_eps},
          {"delta_bar", delta_bar},
          {"delta_under", delta_under},
          {"energy", energy.to_json()},
          {"sharp", sharp.to_json()},
          {"l2_gap", l2_gap},
          {"h_tilde_l1_gap", h_tilde_l1_gap},
          {"band_measure", band_measure}};
}

RecoveryResult build_recovery(const SharpPair& pair, double epsilon, double kappa) {
  const Region* region = pair.region();
  if (!region) {
    fail(ErrorCode::unsupported_region, "recovery needs an exact region, not a mask");
  }
  if (!(epsilon > 0.0)) fail(ErrorCode::domain, "recovery requires epsilon > 0");
  const double root = std::sqrt(epsilon);
  if (root > pair.bound_m) {
    fail(ErrorCode::domain, "recovery requires sqrt(eps) <= M");
  }
  const double t = t_eps(epsilon, kappa);
  const DomainPtr& dp = pair.field.domain;
  const Domain& d = *dp;
  const Eigen::ArrayXd& u = pair.field.values;
  const InteriorBoundary boundary(*region, d);

  const Index nodes = d.node_count();
  Eigen::ArrayXd s(nodes);
  for (Index k = 0; k < nodes; ++k) s[k] = boundary.signed_distance(d.node(k));

  double hi = -std::numeric_limits<double>::infinity();
  double lo = std::numeric_limits<double>::infinity();
  double band = 0.0;
  for (Index k = 0; k < nodes; ++k) {
    if (!d.is_active(k)) continue;
    if (s[k] >= 0.0 && s[k] <= t) hi = std::max(hi, u[k]);
    if (s[k] <= 0.0 && s[k] >= -t) lo = std::min(lo, u[k]);
    if (std::abs(s[k]) <= t) band += d.node_weight(k);
  }
  if (boundary.pieces().empty()) {
    hi = 0.0;
    lo = 0.0;
  } else if (!std::isfinite(hi) || !std::isfinite(lo)) {
    fail(ErrorCode::resolution,
         "recovery band holds no grid node at eps = " + std::to_string(epsilon) +
             "; refine the grid to h <= t_eps / 4 = " + std::to_string(t / 4.0) +
             " (h = " + std::to_string(d.h()) + ")");
  }

  Eigen::ArrayXd out(nodes);
  for (Index k = 0; k < nodes; ++k) {
    const double p = phi(epsilon, s[k]);
    out[k] = s[k] >= 0.0 ? std::max(p, std::max(u[k] - hi, 0.0))
                         : std::min(p, std::min(u[k] - lo, 0.0));
  }

  PhaseState state(ScalarField(dp, std::move(out)), epsilon, pair.bound_m);
  RecoveryReport r;
  r.epsilon = epsilon;
  r.kappa = kappa;
  r.t_eps = t;
  r.delta_bar = hi;
  r.delta_under = lo;
  r.energy = e_eps(state);
  r.sharp = sharp_energy(pair);
  r.l2_gap = l2_distance(d, state.values(), u);
  Eigen::ArrayXd g(nodes);
  for (Index k = 0; k < nodes; ++k) g[k] = s[k] >= 0.0 ? 1.0 : -1.0;
  r.h_tilde_l1_gap = l1_distance(d, phase_variable(state.values(), epsilon), g);
  r.band_measure = band;
  return {std::move(state), r};
}

std::vector<RecoveryReport> recovery_curve(const SharpPair& pair, const std::vector<double>& epsilons,
                                           double kappa) {
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] > 0.0)) fail(ErrorCode::domain, "recovery curve: epsilons must be positive");
    if (i > 0 && !(epsilons[i] < epsilons[i - 1])) {
      fail(ErrorCode::domain, "recovery curve: epsilons must be strictly decreasing");
    }
  }
  std::vector<RecoveryReport> out;
  out.reserve(epsilons.size());
  for (double eps : epsilons) out.push_back(build_recovery(pair, eps, kappa).report);
  return out;
}

}  // namespace perimeter_phase
