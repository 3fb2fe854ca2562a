#include "perimeter_phase/energy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "perimeter_phase/errors.hpp"
#include "perimeter_phase/potential.hpp"

namespace perimeter_phase {

namespace {

bool selected(const CellSelection& cells, Index c) { return cells.empty() || cells[c] != 0; }

bool region_within(const Region& r, const Domain& d, double tol) {
  switch (r.kind()) {
    case Region::Kind::interval: {
      const auto& iv = r.as_interval();
      return iv.a >= d.lo().x() - tol && iv.b <= d.hi().x() + tol;
    }
    case Region::Kind::disc: {
      const auto& disc = r.as_disc();
      if (d.dim() == 1) {
        return disc.center.x() - disc.radius >= d.lo().x() - tol &&
               disc.center.x() + disc.radius <= d.hi().x() + tol;
      }
      if (d.shape() == Domain::Shape::ball) {
        return (disc.center - d.ball_center()).norm() + disc.radius <= d.ball_radius() + tol;
      }
      return disc.center.x() - disc.radius >= d.lo().x() - tol &&
             disc.center.x() + disc.radius <= d.hi().x() + tol &&
             disc.center.y() - disc.radius >= d.lo().y() - tol &&
             disc.center.y() + disc.radius <= d.hi().y() + tol;
    }
    case Region::Kind::unite:
      return std::all_of(r.children().begin(), r.children().end(),
                         [&](const Region& c) { return region_within(c, d, tol); });
    case Region::Kind::intersect: {
      bool any_bounded = false;
      for (const auto& c : r.children()) {
        if (!c.bounded_extent()) continue;
        any_bounded = true;
        if (region_within(c, d, tol)) return true;
      }
      return !any_bounded;
    }
    default:
      return true;
  }
}

double cell_dirichlet(const Domain& d, const Eigen::ArrayXd& u, Index c) {
  const double w = d.cell_weight(c);
  if (w <= 0.0) return 0.0;
  const auto k = d.cell_corners(c);
  if (d.dim() == 1) {
    const double du = u[k[1]] - u[k[0]];
    return w * du * du / d.h();
  }
  const double a = u[k[1]] - u[k[0]];
  const double b = u[k[3]] - u[k[2]];
  const double e = u[k[2]] - u[k[0]];
  const double f = u[k[3]] - u[k[1]];
  return w * 0.5 * (a * a + b * b + e * e + f * f);
}

double cell_well(const Domain& d, const Eigen::ArrayXd& u, double epsilon, Index c) {
  const double w = d.cell_weight(c);
  if (w <= 0.0) return 0.0;
  const auto k = d.cell_corners(c);
  const double inv = 1.0 / std::sqrt(epsilon);
  double s = 0.0;
  for (int i = 0; i < d.corners_per_cell(); ++i) s += DoubleWell::w(u[k[i]] * inv);
  return w * d.cell_volume() * s / (d.corners_per_cell() * epsilon);
}

}  // namespace

ScalarField::ScalarField(DomainPtr d, Eigen::ArrayXd v) : domain(std::move(d)), values(std::move(v)) {
  if (!domain) fail(ErrorCode::domain, "field requires a domain");
  if (values.size() != domain->node_count()) {
    fail(ErrorCode::domain, "field has " + std::to_string(values.size()) + " values, domain has " +
                                std::to_string(domain->node_count()) + " nodes");
  }
  if (!values.allFinite()) fail(ErrorCode::domain, "field values must be finite");
}

ScalarField ScalarField::constant(DomainPtr domain, double value) {
  const Index n = domain->node_count();
  return ScalarField(std::move(domain), Eigen::ArrayXd::Constant(n, value));
}

PhaseState::PhaseState(ScalarField f, double eps, double m)
    : field(std::move(f)), epsilon(eps), bound_m(m) {
  if (!(epsilon > 0.0)) fail(ErrorCode::domain, "phase state requires epsilon > 0");
  if (!(bound_m > 0.0)) fail(ErrorCode::domain, "phase state requires M > 0");
  const double peak = field.values.abs().maxCoeff();
  if (peak > bound_m * (1.0 + 1e-12)) {
    fail(ErrorCode::domain, "phase state violates |u| <= M: max |u| = " + std::to_string(peak) +
                                ", M = " + std::to_string(bound_m));
  }
}

nlohmann::json EnergyBreakdown::to_json() const {
  return {{"dirichlet", dirichlet},
          {"well", well},
          {"perimeter_weighted", perimeter_weighted},
          {"total", total}};
}

SharpPair::SharpPair(ScalarField f, Region region, double m)
    : field(std::move(f)), phase(std::move(region)), bound_m(m) {
  validate();
}

SharpPair::SharpPair(ScalarField f, Mask mask, double m)
    : field(std::move(f)), phase(std::move(mask)), bound_m(m) {
  if (Index(std::get<Mask>(phase).inside.size()) != field.size()) {
    fail(ErrorCode::invalid_pair, "mask and field live on different grids");
  }
  validate();
}

bool SharpPair::phase_contains_node(Index k) const {
  if (const auto* r = region()) return r->contains(field.domain->node(k));
  return mask()->inside[std::size_t(k)] != 0;
}

void SharpPair::validate() const {
  if (!(bound_m > 0.0)) fail(ErrorCode::domain, "sharp pair requires M > 0");
  const Domain& d = *field.domain;
  for (Index k = 0; k < field.size(); ++k) {
    if (!d.is_active(k)) continue;
    const double v = field.values[k];
    const bool in = phase_contains_node(k);
    if ((in && v < -kSignTolerance) || (!in && v > kSignTolerance)) {
      fail(ErrorCode::invalid_pair, "sign constraint violated at node " + std::to_string(k) +
                                        ": u = " + std::to_string(v) +
                                        (in ? " inside the phase" : " outside the phase"));
    }
    if (std::abs(v) > bound_m * (1.0 + 1e-12)) {
      fail(ErrorCode::invalid_pair, "sharp pair violates |u| <= M at node " + std::to_string(k));
    }
  }
}

CellSelection subdomain_cells(const Domain& domain, const Region& subdomain) {
  if (!region_within(subdomain, domain, 1e-12)) {
    fail(ErrorCode::domain, "subdomain is not contained in the domain");
  }
  return cells_in(subdomain, domain);
}

double dirichlet_energy(const ScalarField& field, const CellSelection& cells) {
  const Domain& d = *field.domain;
  CompensatedSum sum;
  for (Index c = 0; c < d.cell_count(); ++c) {
    if (selected(cells, c)) sum.add(cell_dirichlet(d, field.values, c));
  }
  return sum.value();
}

double well_energy(const ScalarField& field, double epsilon, const CellSelection& cells) {
  if (!(epsilon > 0.0)) fail(ErrorCode::domain, "well energy requires epsilon > 0");
  const Domain& d = *field.domain;
  CompensatedSum sum;
  for (Index c = 0; c < d.cell_count(); ++c) {
    if (selected(cells, c)) sum.add(cell_well(d, field.values, epsilon, c));
  }
  return sum.value();
}

std::pair<double, double> cell_energy(const Domain& domain, const Eigen::ArrayXd& values,
                                      double epsilon, Index cell) {
  return {cell_dirichlet(domain, values, cell), cell_well(domain, values, epsilon, cell)};
}

EnergyBreakdown e_eps_on(const PhaseState& state, const CellSelection& cells) {
  EnergyBreakdown e;
  e.dirichlet = dirichlet_energy(state.field, cells);
  e.well = well_energy(state.field, state.epsilon, cells);
  e.total = e.dirichlet + e.well;
  return e;
}

EnergyBreakdown e_eps(const PhaseState& state, const std::optional<Region>& subdomain) {
  if (!subdomain) return e_eps_on(state, {});
  return e_eps_on(state, subdomain_cells(state.domain(), *subdomain));
}

EnergyBreakdown sharp_energy(const SharpPair& pair, const std::optional<Region>& subdomain) {
  const Domain& d = *pair.field.domain;
  CellSelection cells;
  if (subdomain) cells = subdomain_cells(d, *subdomain);

  double perimeter = 0.0;
  if (const Region* r = pair.region()) {
    if (!subdomain) {
      perimeter = exact_perimeter(*r, d);
    } else if (d.dim() == 1) {
      for (const auto& piece : InteriorBoundary(*r, d).pieces()) {
        if (subdomain->contains(piece.a)) perimeter += 1.0;
      }
    } else {
      perimeter = mask_perimeter(rasterize(*r, pair.field.domain), &cells);
    }
  } else {
    perimeter = mask_perimeter(*pair.mask(), cells.empty() ? nullptr : &cells);
  }

  EnergyBreakdown e;
  e.dirichlet = dirichlet_energy(pair.field, cells);
  e.perimeter_weighted = kSurfaceTension * perimeter;
  e.total = e.dirichlet + e.perimeter_weighted;
  return e;
}

Eigen::ArrayXd phase_variable(const Eigen::ArrayXd& values, double epsilon) {
  return DoubleWell::h_tilde((values / std::sqrt(epsilon)).eval());
}

double tv_phase(const PhaseState& state, const CellSelection& cells) {
  const Domain& d = state.domain();
  const Eigen::ArrayXd g = phase_variable(state.values(), state.epsilon);
  CompensatedSum sum;
  for (Index c = 0; c < d.cell_count(); ++c) {
    const double w = d.cell_weight(c);
    if (w <= 0.0 || !selected(cells, c)) continue;
    const auto k = d.cell_corners(c);
    if (d.dim() == 1) {
      sum.add(w * std::abs(g[k[1]] - g[k[0]]));
    } else {
      const double gx = 0.5 * ((g[k[1]] - g[k[0]]) + (g[k[3]] - g[k[2]]));
      const double gy = 0.5 * ((g[k[2]] - g[k[0]]) + (g[k[3]] - g[k[1]]));
      sum.add(w * d.h() * std::hypot(gx, gy));
    }
  }
  return sum.value();
}

YoungSplit modica_mortola_split(const PhaseState& state) {
  const double root = std::sqrt(state.epsilon);
  const Eigen::ArrayXd& u = state.values();
  Eigen::ArrayXd excess = ((u.abs() - root).max(0.0)) * u.sign();
  const ScalarField ex(state.field.domain, std::move(excess));
  YoungSplit s;
  s.lhs = e_eps(state).total;
  s.rhs = 0.5 * kSurfaceTension * tv_phase(state) + dirichlet_energy(ex);
  return s;
}

PhaseMeasure intermediate_phase_measure(const PhaseState& state, double delta) {
  if (!(delta > 0.0 && delta < 0.5)) {
    fail(ErrorCode::domain, "intermediate phase measure requires delta in (0, 1/2)");
  }
  // W is even and decreasing in |t|, so the band minimum sits at the endpoints.
  const double t = DoubleWell::h_tilde_inverse(1.0 - delta);
  const double constant = 1.0 / DoubleWell::w(t);
  const Domain& d = state.domain();
  const Eigen::ArrayXd g = phase_variable(state.values(), state.epsilon);
  CompensatedSum measure;
  for (Index k = 0; k < g.size(); ++k) {
    if (std::abs(g[k]) <= 1.0 - 2.0 * delta) measure.add(d.node_weight(k));
  }
  PhaseMeasure out;
  out.measure = measure.value();
  out.constant = constant;
  out.bound = constant * state.epsilon * well_energy(state.field, state.epsilon);
  return out;
}

double l2_distance(const Domain& domain, const Eigen::ArrayXd& a, const Eigen::ArrayXd& b) {
  return std::sqrt((domain.node_weights() * (a - b).square()).sum());
}

double l2_distance(const ScalarField& a, const ScalarField& b) {
  if (a.size() != b.size()) fail(ErrorCode::domain, "fields live on different grids");
  return l2_distance(*a.domain, a.values, b.values);
}

double l1_distance(const Domain& domain, const Eigen::ArrayXd& a, const Eigen::ArrayXd& b) {
  return (domain.node_weights() * (a - b).abs()).sum();
}

Eigen::ArrayXd phase_indicator(const Region& region, const Domain& domain) {
  Eigen::ArrayXd g(domain.node_count());
  for (Index k = 0; k < g.size(); ++k) g[k] = region.contains(domain.node(k)) ? 1.0 : -1.0;
  return g;
}

Eigen::ArrayXd phase_indicator(const Mask& mask) {
  Eigen::ArrayXd g(Index(mask.inside.size()));
  for (Index k = 0; k < g.size(); ++k) g[k] = mask.inside[std::size_t(k)] ? 1.0 : -1.0;
  return g;
}

}  // namespace perimeter_phase
