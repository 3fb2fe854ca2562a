#include "perimeter_phase/minimize.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <string>

#include "perimeter_phase/errors.hpp"
#include "perimeter_phase/potential.hpp"

namespace perimeter_phase {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// Cell edges as corner pairs and their weight in the Dirichlet form
// (coefficient of (u_j - u_i)^2 per unit cell weight).
struct Edge {
  int i, j;
  double coef;
};

std::vector<Edge> cell_edges(const Domain& d) {
  if (d.dim() == 1) return {{0, 1, 1.0 / d.h()}};
  return {{0, 1, 0.5}, {2, 3, 0.5}, {0, 2, 0.5}, {1, 3, 0.5}};
}

double well_q(double t) { return std::abs(t) < 1.0 ? 1.0 - t * t : 0.0; }

// E(v) - E(u) summed cell by cell from differences of nearby quantities, so
// the result is accurate far below the rounding level of E itself.
double energy_delta(const Domain& d, const Eigen::ArrayXd& u, const Eigen::ArrayXd& v,
                    double epsilon) {
  const auto edges = cell_edges(d);
  const double inv = 1.0 / std::sqrt(epsilon);
  const double well_scale = d.cell_volume() / (d.corners_per_cell() * epsilon);
  CompensatedSum sum;
  for (Index c = 0; c < d.cell_count(); ++c) {
    const double w = d.cell_weight(c);
    if (w <= 0.0) continue;
    const auto k = d.cell_corners(c);
    bool changed = false;
    for (int i = 0; i < d.corners_per_cell(); ++i) changed = changed || u[k[i]] != v[k[i]];
    if (!changed) continue;
    double dir = 0.0;
    for (const auto& e : edges) {
      const double a = u[k[e.j]] - u[k[e.i]];
      const double b = v[k[e.j]] - v[k[e.i]];
      dir += e.coef * (b - a) * (b + a);
    }
    double well = 0.0;
    for (int i = 0; i < d.corners_per_cell(); ++i) {
      const double t = u[k[i]] * inv;
      const double s = v[k[i]] * inv;
      if (t == s) continue;
      const double q = well_q(t);
      const double p = well_q(s);
      const double dq = (std::abs(t) < 1.0 && std::abs(s) < 1.0) ? (t - s) * (t + s) : p - q;
      well += dq * (p + q);
    }
    sum.add(w * (dir + well_scale * well));
  }
  return sum.value();
}

struct Workspace {
  const Domain& d;
  double epsilon;
  double bound_m;
  SpMat stiffness;
  std::vector<Index> interior;
};

Eigen::ArrayXd gradient_of(const Domain& d, const Eigen::ArrayXd& u, double epsilon) {
  const auto edges = cell_edges(d);
  Eigen::ArrayXd g = Eigen::ArrayXd::Zero(u.size());
  for (Index c = 0; c < d.cell_count(); ++c) {
    const double w = d.cell_weight(c);
    if (w <= 0.0) continue;
    const auto k = d.cell_corners(c);
    for (const auto& e : edges) {
      const double diff = 2.0 * w * e.coef * (u[k[e.j]] - u[k[e.i]]);
      g[k[e.j]] += diff;
      g[k[e.i]] -= diff;
    }
  }
  const double root = std::sqrt(epsilon);
  const double scale = 1.0 / (epsilon * root);
  for (Index k = 0; k < u.size(); ++k) {
    const double m = d.node_weight(k);
    if (m > 0.0) g[k] += m * DoubleWell::w_prime(u[k] / root) * scale;
  }
  return g;
}

bool blocked(double u, double g, double bound_m) {
  return (u >= bound_m && g < 0.0) || (u <= -bound_m && g > 0.0);
}

double projected_norm(const Domain& d, const Eigen::ArrayXd& u, const Eigen::ArrayXd& g,
                      double bound_m) {
  double best = 0.0;
  for (Index k = 0; k < u.size(); ++k) {
    if (!d.is_interior(k)) continue;
    if (blocked(u[k], g[k], bound_m)) continue;
    best = std::max(best, std::abs(g[k]) / d.node_weight(k));
  }
  return best;
}

// Solve P_FF d_F = -g_F with P = Hessian + shift * diag(m) / eps^2, rejected
// unless positive definite. With exact = false the negative well curvature is
// clipped instead.
std::optional<Eigen::ArrayXd> preconditioned_direction(const Workspace& ws, const Eigen::ArrayXd& u,
                                                       const Eigen::ArrayXd& g,
                                                       const std::vector<Index>& free,
                                                       bool exact, double shift = 0.0) {
  const Domain& d = ws.d;
  std::vector<Index> local(std::size_t(u.size()), -1);
  for (std::size_t i = 0; i < free.size(); ++i) local[std::size_t(free[i])] = Index(i);
  const Index nf = Index(free.size());
  if (nf == 0) return std::nullopt;

  const double root = std::sqrt(ws.epsilon);
  const double curv = 1.0 / (ws.epsilon * ws.epsilon);
  std::vector<Triplet> trip;
  trip.reserve(std::size_t(ws.stiffness.nonZeros()));
  for (int col = 0; col < ws.stiffness.outerSize(); ++col) {
    const Index lc = local[std::size_t(col)];
    if (lc < 0) continue;
    for (SpMat::InnerIterator it(ws.stiffness, col); it; ++it) {
      const Index lr = local[std::size_t(it.row())];
      if (lr >= 0) trip.emplace_back(lr, lc, 2.0 * it.value());
    }
  }
  Eigen::VectorXd rhs(nf);
  double mass_scale = 0.0;
  for (Index i = 0; i < nf; ++i) mass_scale = std::max(mass_scale, d.node_weight(free[i]));
  for (Index i = 0; i < nf; ++i) {
    const Index k = free[std::size_t(i)];
    double w2 = DoubleWell::w_second(u[k] / root);
    if (!exact) w2 = std::max(w2, 0.0);
    double diag = d.node_weight(k) * (w2 + shift) * curv;
    if (!exact) diag += 1e-12 * mass_scale * curv;
    trip.emplace_back(i, i, diag);
    rhs[i] = -g[k];
  }
  SpMat p(nf, nf);
  p.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<SpMat> solver(p);
  if (solver.info() != Eigen::Success) return std::nullopt;
  const Eigen::VectorXd sol = solver.solve(rhs);
  if (solver.info() != Eigen::Success || !sol.allFinite()) return std::nullopt;
  if (exact && !(solver.vectorD().array() > 0.0).all()) return std::nullopt;
  Eigen::ArrayXd dir = Eigen::ArrayXd::Zero(u.size());
  for (Index i = 0; i < nf; ++i) dir[free[std::size_t(i)]] = sol[i];
  return dir;
}

}  // namespace

Eigen::SparseMatrix<double> stiffness_matrix(const Domain& d) {
  const auto edges = cell_edges(d);
  std::vector<Triplet> trip;
  trip.reserve(std::size_t(d.cell_count()) * edges.size() * 4);
  for (Index c = 0; c < d.cell_count(); ++c) {
    const double w = d.cell_weight(c);
    if (w <= 0.0) continue;
    const auto k = d.cell_corners(c);
    for (const auto& e : edges) {
      const double a = w * e.coef;
      trip.emplace_back(k[e.i], k[e.i], a);
      trip.emplace_back(k[e.j], k[e.j], a);
      trip.emplace_back(k[e.i], k[e.j], -a);
      trip.emplace_back(k[e.j], k[e.i], -a);
    }
  }
  SpMat m(d.node_count(), d.node_count());
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

Eigen::ArrayXd energy_gradient(const PhaseState& state) {
  return gradient_of(state.domain(), state.values(), state.epsilon);
}

double projected_gradient_norm(const PhaseState& state, const Eigen::ArrayXd& gradient) {
  return projected_norm(state.domain(), state.values(), gradient, state.bound_m);
}

MinimizeResult minimize_e_eps(const PhaseState& initial, const MinimizeConfig& config) {
  const Domain& d = initial.domain();
  const double eps = initial.epsilon;
  const double m = config.bound_m;
  if (!(config.tol_grad > 0.0)) fail(ErrorCode::domain, "minimize: tol_grad must be positive");
  if (config.max_iters < 0) fail(ErrorCode::domain, "minimize: max_iters must be nonnegative");
  if (!(m > 0.0)) fail(ErrorCode::domain, "minimize: M must be positive");

  Eigen::ArrayXd u = initial.values();
  if (config.boundary) {
    if (config.boundary->size() != u.size()) fail(ErrorCode::domain, "minimize: boundary size mismatch");
    for (Index k = 0; k < u.size(); ++k) {
      if (d.is_boundary(k)) u[k] = (*config.boundary)[k];
    }
  }
  if ((u.abs() > m * (1.0 + 1e-12)).any()) {
    fail(ErrorCode::domain, "minimize: initial state violates |u| <= M");
  }

  double cfl = 0.9 * d.h() * d.h() / (4.0 * d.dim());
  double tau = config.step > 0.0 ? config.step : cfl;
  if (config.method == DescentMethod::explicit_gradient && tau > cfl * (1.0 + 1e-12)) {
    fail(ErrorCode::domain, "minimize: step exceeds the explicit stability limit h^2 / (4 dim)");
  }

  Workspace ws{d, eps, m, {}, {}};
  if (config.method == DescentMethod::preconditioned) ws.stiffness = stiffness_matrix(d);

  const PhaseState first(ScalarField(initial.field.domain, u), eps, m);
  double energy = e_eps(first).total;

  MinimizeResult res{first, {}, 0, false, "max_iters", 0.0};
  Eigen::ArrayXd g = gradient_of(d, u, eps);
  double gn = projected_norm(d, u, g, m);
  res.log.push_back({0, energy, gn, 0.0, false});

  Eigen::ArrayXd trial(u.size());
  int it = 0;
  for (; it < config.max_iters; ++it) {
    if (gn <= config.tol_grad) {
      res.converged = true;
      res.stop_reason = "tolerance";
      break;
    }
    std::vector<Index> free;
    for (Index k = 0; k < u.size(); ++k) {
      if (d.is_interior(k) && !blocked(u[k], g[k], m)) free.push_back(k);
    }

    struct Candidate {
      Eigen::ArrayXd dir;
      double scale;
      bool hessian;
    };
    std::vector<Candidate> candidates;
    if (config.method == DescentMethod::preconditioned) {
      if (auto dir = preconditioned_direction(ws, u, g, free, true)) candidates.push_back({*dir, 1.0, true});
      for (double shift : {1e-3, 1e-2, 1e-1, 1.0}) {
        if (auto dir = preconditioned_direction(ws, u, g, free, true, shift)) {
          candidates.push_back({*dir, 1.0, false});
          break;
        }
      }
      if (auto dir = preconditioned_direction(ws, u, g, free, false)) candidates.push_back({*dir, 1.0, false});
    }
    Eigen::ArrayXd steepest = Eigen::ArrayXd::Zero(u.size());
    for (Index k : free) steepest[k] = -g[k] / d.node_weight(k);
    candidates.push_back({steepest, tau, false});

    bool accepted = false;
    double predicted_floor = 0.0;
    for (const auto& cand : candidates) {
      double alpha = cand.scale;
      for (int halving = 0; halving <= config.max_halvings; ++halving, alpha *= 0.5) {
        trial = u;
        for (Index k : free) trial[k] = std::clamp(u[k] + alpha * cand.dir[k], -m, m);
        const double pred = (g * (trial - u)).sum();
        if (halving == 0) predicted_floor = std::max(predicted_floor, -pred);
        const double dE = energy_delta(d, u, trial, eps);
        const bool armijo = pred < 0.0 ? dE <= 1e-4 * pred : dE < 0.0;
        if (armijo) {
          u.swap(trial);
          energy += dE;
          g = gradient_of(d, u, eps);
          gn = projected_norm(d, u, g, m);
          res.log.push_back({it + 1, energy, gn, alpha, cand.hessian});
          accepted = true;
          break;
        }
      }
      if (accepted) break;
    }
    if (!accepted) {
      if (predicted_floor <= 1e-13 * std::max(1.0, std::abs(energy))) {
        res.stop_reason = "stagnation";
        break;
      }
      fail(ErrorCode::divergence, "minimize: no energy decrease after " +
                                      std::to_string(config.max_halvings) +
                                      " step halvings at iteration " + std::to_string(it));
    }
  }
  if (it == config.max_iters && gn <= config.tol_grad) {
    res.converged = true;
    res.stop_reason = "tolerance";
  }
  res.iterations = int(res.log.size()) - 1;
  res.grad_norm = gn;
  res.state = PhaseState(ScalarField(initial.field.domain, std::move(u)), eps, m);
  return res;
}

ScalarField harmonic_replacement(const ScalarField& field) {
  const Domain& d = *field.domain;
  const SpMat k = stiffness_matrix(d);
  const Eigen::ArrayXd& u = field.values;
  std::vector<Index> local(std::size_t(u.size()), -1);
  std::vector<Index> free;
  for (Index i = 0; i < u.size(); ++i) {
    if (d.is_interior(i)) {
      local[std::size_t(i)] = Index(free.size());
      free.push_back(i);
    }
  }
  Eigen::ArrayXd out = u;
  if (free.empty()) return ScalarField(field.domain, out);

  const Index nf = Index(free.size());
  std::vector<Triplet> trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nf);
  for (int col = 0; col < k.outerSize(); ++col) {
    const Index lc = local[std::size_t(col)];
    for (SpMat::InnerIterator it(k, col); it; ++it) {
      const Index lr = local[std::size_t(it.row())];
      if (lr < 0) continue;
      if (lc >= 0) trip.emplace_back(lr, lc, it.value());
      else rhs[lr] -= it.value() * u[col];
    }
  }
  SpMat a(nf, nf);
  a.setFromTriplets(trip.begin(), trip.end());
  Eigen::VectorXd guess(nf);
  for (Index i = 0; i < nf; ++i) guess[i] = u[free[std::size_t(i)]];

  Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(1e-10);
  cg.setMaxIterations(std::max<Index>(1000, 20 * nf));
  cg.compute(a);
  const Eigen::VectorXd sol = cg.solveWithGuess(rhs, guess);
  if (cg.info() != Eigen::Success) {
    fail(ErrorCode::numeric, "harmonic replacement: CG did not reach residual 1e-10 (estimated error " +
                                 std::to_string(cg.error()) + ")");
  }
  for (Index i = 0; i < nf; ++i) out[free[std::size_t(i)]] = sol[i];
  return ScalarField(field.domain, std::move(out));
}

double OracleResult1D::value(double x) const {
  for (std::size_t i = 0; i + 1 < profile.size(); ++i) {
    const auto& [x1, u1] = profile[i];
    const auto& [x2, u2] = profile[i + 1];
    if (x <= x2 || i + 2 == profile.size()) {
      if (x2 == x1) return u2;
      return u1 + (u2 - u1) * (x - x1) / (x2 - x1);
    }
  }
  return profile.empty() ? 0.0 : profile.back().second;
}

nlohmann::json OracleResult1D::to_json() const {
  nlohmann::json prof = nlohmann::json::array();
  for (const auto& [x, u] : profile) prof.push_back({x, u});
  return {{"a", a},
          {"b", b},
          {"x0", x0},
          {"energy", energy},
          {"profile", prof},
          {"closed_form_x0", closed_form_x0},
          {"closed_form_energy", closed_form_energy},
          {"flat_energy", flat_energy},
          {"flat_x1", flat_x1},
          {"flat_x2", flat_x2}};
}

OracleResult1D sharp_oracle_1d(double a, double b, int samples) {
  if (!(a > 0.0 && b > 0.0)) fail(ErrorCode::domain, "sharp oracle requires a, b > 0");
  if (samples < 16) fail(ErrorCode::domain, "sharp oracle requires at least 16 samples");
  auto energy = [&](double x1, double x2) {
    return a * a / (1.0 + x1) + b * b / (1.0 - x2) + kSurfaceTension;
  };
  OracleResult1D r;
  r.a = a;
  r.b = b;
  r.energy = INFINITY;
  for (int i = 1; i < samples; ++i) {
    const double x = -1.0 + 2.0 * i / samples;
    const double e = energy(x, x);
    if (e < r.energy) {
      r.energy = e;
      r.x0 = x;
    }
  }
  const int side = std::max(8, int(std::sqrt(double(samples))));
  r.flat_energy = INFINITY;
  for (int i = 1; i < side; ++i) {
    for (int j = i + 1; j < side; ++j) {
      const double x1 = -1.0 + 2.0 * i / side;
      const double x2 = -1.0 + 2.0 * j / side;
      const double e = energy(x1, x2);
      if (e < r.flat_energy) {
        r.flat_energy = e;
        r.flat_x1 = x1;
        r.flat_x2 = x2;
      }
    }
  }
  r.closed_form_x0 = (a - b) / (a + b);
  r.closed_form_energy = 0.5 * (a + b) * (a + b) + kSurfaceTension;
  r.profile = {{-1.0, -a}, {r.x0, 0.0}, {1.0, b}};
  return r;
}

SharpLimit extract_sharp_limit(const PhaseState& state) {
  const Domain& d = state.domain();
  const Eigen::ArrayXd& u = state.values();
  Mask mask = Mask::from_level(state.field.domain, u);
  SharpLimit out{SharpPair(state.field, std::move(mask), state.bound_m), 0.0, {}};
  const double root = std::sqrt(state.epsilon);
  for (Index k = 0; k < u.size(); ++k) {
    if (std::abs(u[k]) < root) out.band_measure += d.node_weight(k);
  }
  if (d.dim() == 1) {
    for (Index k = 0; k + 1 < u.size(); ++k) {
      if ((u[k] >= 0.0) == (u[k + 1] >= 0.0)) continue;
      const double x0 = d.node(k).x();
      const double t = u[k] / (u[k] - u[k + 1]);
      out.interfaces.push_back(x0 + t * d.h());
    }
  }
  return out;
}

}  // namespace perimeter_phase
