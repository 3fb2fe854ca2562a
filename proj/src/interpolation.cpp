#include "perimeter_phase/interpolation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "perimeter_phase/errors.hpp"
#include "perimeter_phase/potential.hpp"

namespace perimeter_phase {

AnnulusSpec AnnulusSpec::make(double rho, double delta, double bound_m) {
  if (!(delta > 0.0)) fail(ErrorCode::domain, "annulus width delta must be positive");
  if (!(bound_m > 0.0)) fail(ErrorCode::domain, "annulus requires M > 0");
  return {rho, delta, 16.0 * bound_m / delta};
}

nlohmann::json AnnulusSpec::to_json() const {
  return {{"rho", rho}, {"delta", delta}, {"theta_delta", theta_delta}};
}

nlohmann::json GlueReport::to_json() const {
  nlohmann::json st = nlohmann::json::array();
  for (const auto& s : stages) {
    st.push_back({{"inner", s.inner},
                  {"width", s.width},
                  {"theta", s.theta},
                  {"r_star", s.r_star},
                  {"annulus_energy", s.annulus_energy},
                  {"scan_min", s.scan_min},
                  {"scan_mean", s.scan_mean}});
  }
  return {{"r_star", r_star},
          {"annulus_energy", annulus_energy},
          {"budget_gamma", budget_gamma},
          {"reference_energy", reference_energy},
          {"excess", excess},
          {"ordered", ordered},
          {"stages", st},
          {"total_energy", total_energy.to_json()}};
}

nlohmann::json BarrierReport::to_json() const {
  return {{"R", radius_r},
          {"M", bound_m},
          {"epsilon", epsilon},
          {"transition_radius", transition_radius},
          {"t_eps", t_eps},
          {"energy", energy.to_json()},
          {"gradient_term", gradient_term},
          {"perimeter_term", perimeter_term},
          {"bound", bound},
          {"transition_bound", transition_bound},
          {"tolerance", tolerance},
          {"within_bound", within_bound()},
          {"within_transition_bound", within_transition_bound()}};
}

namespace {

struct StageResult {
  Eigen::ArrayXd values;
  GlueStage info;
};

bool saturates(double epsilon, double bound_m, double width, SlopeConvention convention) {
  const ThetaProfile p(epsilon, 16.0 * bound_m / width, convention);
  return p.value(width / 8.0) >= bound_m;
}

// Glue `inner` (kept on B_a) to `outer` (kept outside B_{a+w}). With
// reversed = false the inputs satisfy outer >= inner and
// out = min{outer, max{inner, psi}}; otherwise outer <= inner and
// out = max{outer, min{inner, -psi}}.
StageResult glue_stage(const Domain& d, const Eigen::ArrayXd& radius, const Eigen::ArrayXd& outer,
                       const Eigen::ArrayXd& inner, double a, double w, double bound_m,
                       double epsilon, bool reversed, SlopeConvention convention) {
  const double theta = 16.0 * bound_m / w;
  const ThetaProfile profile(epsilon, theta, convention);

  const Index nodes = d.node_count();
  std::vector<Index> band_nodes;
  Eigen::ArrayXd base(nodes);
  for (Index k = 0; k < nodes; ++k) {
    if (radius[k] < a) base[k] = inner[k];
    else if (radius[k] > a + w) base[k] = outer[k];
    else {
      base[k] = inner[k];
      band_nodes.push_back(k);
    }
  }
  std::vector<Index> band_cells;
  for (Index c = 0; c < d.cell_count(); ++c) {
    if (d.cell_weight(c) <= 0.0) continue;
    const auto k = d.cell_corners(c);
    bool touches = false;
    for (int i = 0; i < d.corners_per_cell(); ++i) {
      const double r = radius[k[i]];
      touches = touches || (r >= a && r <= a + w);
    }
    // Cells straddling the band edges between two nodes also change.
    double rmin = radius[k[0]], rmax = radius[k[0]];
    for (int i = 1; i < d.corners_per_cell(); ++i) {
      rmin = std::min(rmin, radius[k[i]]);
      rmax = std::max(rmax, radius[k[i]]);
    }
    if (touches || (rmin < a && rmax > a + w)) band_cells.push_back(c);
  }

  auto evaluate = [&](double r, Eigen::ArrayXd& out) {
    out = base;
    for (Index k : band_nodes) {
      const double psi = profile.value(radius[k] - r);
      out[k] = reversed ? std::max(outer[k], std::min(inner[k], -psi))
                        : std::min(outer[k], std::max(inner[k], psi));
    }
  };
  auto band_energy = [&](const Eigen::ArrayXd& out) {
    CompensatedSum sum;
    for (Index c : band_cells) {
      const auto [dir, well] = cell_energy(d, out, epsilon, c);
      sum.add(dir + well);
    }
    return sum.value();
  };

  const double r_lo = a + w / 8.0;
  const double r_hi = a + w / 4.0;
  Eigen::ArrayXd trial;
  double best = std::numeric_limits<double>::infinity();
  double best_r = r_lo;
  double mean = 0.0;
  for (int j = 0; j < kGlueScanPoints; ++j) {
    const double r = r_lo + (r_hi - r_lo) * j / (kGlueScanPoints - 1);
    evaluate(r, trial);
    const double e = band_energy(trial);
    mean += e / kGlueScanPoints;
    if (e < best) {
      best = e;
      best_r = r;
    }
  }

  StageResult res;
  evaluate(best_r, res.values);
  res.info.inner = a;
  res.info.width = w;
  res.info.theta = theta;
  res.info.r_star = best_r;
  res.info.scan_min = best;
  res.info.scan_mean = mean;

  // Energy on the cells touching a node where the profile is selected.
  std::vector<std::uint8_t> selected(std::size_t(nodes), 0);
  for (Index k : band_nodes) {
    const double lo = reversed ? outer[k] : inner[k];
    const double hi = reversed ? inner[k] : outer[k];
    selected[std::size_t(k)] = (res.values[k] > lo && res.values[k] < hi) ? 1 : 0;
  }
  CompensatedSum ann;
  for (Index c : band_cells) {
    const auto k = d.cell_corners(c);
    bool any = false;
    for (int i = 0; i < d.corners_per_cell(); ++i) any = any || selected[std::size_t(k[i])];
    if (!any) continue;
    const auto [dir, well] = cell_energy(d, res.values, epsilon, c);
    ann.add(dir + well);
  }
  res.info.annulus_energy = ann.value();
  return res;
}

}  // namespace

double minimal_glue_delta(double epsilon, double bound_m, double delta_max, bool ordered,
                          SlopeConvention convention) {
  const double split = ordered ? 1.0 : 0.5;
  auto ok = [&](double delta) { return saturates(epsilon, bound_m, split * delta, convention); };
  if (!ok(delta_max)) return std::numeric_limits<double>::quiet_NaN();
  double lo = delta_max * 1e-9;
  if (ok(lo)) return lo;
  double hi = delta_max;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (ok(mid)) hi = mid;
    else lo = mid;
  }
  return hi;
}

GlueResult glue(const PhaseState& u_state, const PhaseState& v_state, const AnnulusSpec& spec,
                double gamma, SlopeConvention convention) {
  const Domain& d = u_state.domain();
  if (u_state.field.domain != v_state.field.domain &&
      (v_state.domain().node_count() != d.node_count() || v_state.domain().h() != d.h())) {
    fail(ErrorCode::domain, "glue: states live on different grids");
  }
  if (u_state.epsilon != v_state.epsilon) fail(ErrorCode::domain, "glue: states have different eps");
  if (u_state.bound_m != v_state.bound_m) fail(ErrorCode::domain, "glue: states have different M");
  if (!d.is_ball()) fail(ErrorCode::domain, "glue: domain must be a ball or an interval");
  if (!(gamma > 0.0)) fail(ErrorCode::domain, "glue: gamma must be positive");
  const double big_r = d.ball_radius();
  const double m = u_state.bound_m;
  const double eps = u_state.epsilon;
  if (!(spec.rho > 0.5 * big_r && spec.rho < big_r)) {
    fail(ErrorCode::domain, "glue: rho must lie in (R/2, R) for the ball radius R");
  }
  if (!(spec.delta > 0.0 && spec.rho + spec.delta < big_r)) {
    fail(ErrorCode::domain, "glue: requires delta > 0 and rho + delta < R");
  }
  if (std::abs(spec.theta_delta - 16.0 * m / spec.delta) > 1e-12 * spec.theta_delta) {
    fail(ErrorCode::domain, "glue: theta_delta must equal 16 M / delta");
  }

  const Eigen::ArrayXd& u = u_state.values();
  const Eigen::ArrayXd& v = v_state.values();
  const bool ordered = (u >= v).all();
  const double width = ordered ? spec.delta : 0.5 * spec.delta;
  if (!saturates(eps, m, width, convention)) {
    const double dmin = minimal_glue_delta(eps, m, big_r - spec.rho, ordered, convention);
    throw InfeasibleGlue("glue: phi_theta does not reach M within delta/8 (eps = " +
                             std::to_string(eps) + ", delta = " + std::to_string(spec.delta) +
                             "); minimal feasible delta = " + std::to_string(dmin),
                         dmin);
  }

  const Point c = d.ball_center();
  Eigen::ArrayXd radius(d.node_count());
  for (Index k = 0; k < radius.size(); ++k) radius[k] = (d.node(k) - c).norm();

  GlueReport report;
  report.budget_gamma = gamma;
  report.ordered = ordered;
  Eigen::ArrayXd out;
  if (ordered) {
    StageResult s = glue_stage(d, radius, u, v, spec.rho, spec.delta, m, eps, false, convention);
    out = std::move(s.values);
    report.stages.push_back(s.info);
  } else {
    const Eigen::ArrayXd lower = u.min(v);
    const double half = 0.5 * spec.delta;
    StageResult s1 = glue_stage(d, radius, u, lower, spec.rho + half, half, m, eps, false, convention);
    StageResult s2 = glue_stage(d, radius, s1.values, v, spec.rho, half, m, eps, true, convention);
    out = std::move(s2.values);
    report.stages.push_back(s1.info);
    report.stages.push_back(s2.info);
  }
  report.r_star = report.stages.back().r_star;
  for (const auto& s : report.stages) report.annulus_energy += s.annulus_energy;

  PhaseState state(ScalarField(u_state.field.domain, std::move(out)), eps, m);
  report.total_energy = e_eps(state);
  const double inner = e_eps(v_state, Region::disc(c, spec.rho)).total;
  const double outer = e_eps(u_state, Region::disc(c, spec.rho + spec.delta).complement()).total;
  report.reference_energy = inner + outer;
  report.excess = report.total_energy.total - report.reference_energy;
  if (report.excess > gamma) {
    throw BudgetExceeded("glue: energy excess " + std::to_string(report.excess) +
                             " exceeds gamma = " + std::to_string(gamma),
                         report.excess);
  }
  return {std::move(state), report};
}

BarrierResult build_barrier(DomainPtr domain, double radius_r, double bound_m, double epsilon,
                            double kappa) {
  const Domain& d = *domain;
  if (!(radius_r > 0.0 && radius_r < 1.0)) fail(ErrorCode::domain, "barrier: R must lie in (0, 1)");
  if (!(bound_m > 0.0)) fail(ErrorCode::domain, "barrier: M must be positive");
  if (!d.is_ball() || std::abs(d.ball_radius() - 1.0) > 1e-12) {
    fail(ErrorCode::domain, "barrier: domain must be the unit ball");
  }
  const double t = t_eps(epsilon, kappa);
  if (std::sqrt(epsilon) >= bound_m) {
    fail(ErrorCode::infeasible, "barrier: sqrt(eps) >= M, the profile cannot saturate");
  }
  if (t > 0.25 * (1.0 - radius_r)) {
    fail(ErrorCode::infeasible, "barrier: t_eps = " + std::to_string(t) +
                                    " exceeds (1 - R) / 4; eps is too large");
  }

  const double rho0 = 0.5 * (radius_r + 1.0);
  const double slope = 2.0 / (1.0 - radius_r);
  const double shift = bound_m * slope * t;
  const Point c = d.ball_center();
  Eigen::ArrayXd v(d.node_count());
  for (Index k = 0; k < v.size(); ++k) {
    const double s = rho0 - (d.node(k) - c).norm();
    const double cone = bound_m * std::clamp(slope * s, -1.0, 1.0);
    const double p = phi(epsilon, s);
    v[k] = s >= 0.0 ? std::max(p, std::max(cone - shift, 0.0))
                    : std::min(p, std::min(cone + shift, 0.0));
  }

  PhaseState state(ScalarField(domain, std::move(v)), epsilon, bound_m);
  BarrierReport r;
  r.radius_r = radius_r;
  r.bound_m = bound_m;
  r.epsilon = epsilon;
  r.transition_radius = rho0;
  r.t_eps = t;
  r.energy = e_eps(state);
  const double g2 = (bound_m * slope) * (bound_m * slope);
  const double pi = std::numbers::pi;
  if (d.dim() == 1) {
    r.gradient_term = g2 * 2.0 * (1.0 - radius_r);
    r.perimeter_term = kSurfaceTension * 2.0;
    r.transition_bound = kSurfaceTension * 2.0 + r.gradient_term + 1.0;
  } else {
    r.gradient_term = g2 * pi * (1.0 - radius_r * radius_r);
    r.perimeter_term = kSurfaceTension * 2.0 * pi * radius_r;
    r.transition_bound = kSurfaceTension * 2.0 * pi * rho0 + r.gradient_term + 1.0;
  }
  r.bound = r.perimeter_term + r.gradient_term + 1.0;
  return {std::move(state), r};
}

}  // namespace perimeter_phase
