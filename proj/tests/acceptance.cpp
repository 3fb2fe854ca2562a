// Acceptance suite: one PASS/FAIL line per criterion, exit 1 if any fails.
// Criterion 6 checks the states recorded by criteria 4-7, so it runs last.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "perimeter_phase/energy.hpp"
#include "perimeter_phase/interpolation.hpp"
#include "perimeter_phase/minimize.hpp"
#include "perimeter_phase/potential.hpp"
#include "perimeter_phase/profiles1d.hpp"
#include "perimeter_phase/random.hpp"
#include "perimeter_phase/recovery.hpp"

using namespace perimeter_phase;
using std::numbers::pi;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "!") + what;
  }
};

std::string fmt(const char* spec, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, x);
  return buf;
}

std::string sci(double x) { return fmt("%.3e", x); }

int failures = 0;
std::map<int, std::string> lines;

void criterion(int id, const char* title, double budget_s, const std::function<Verdict()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v.pass = false;
    v.detail = std::string("threw: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  v.require(secs < budget_s, fmt("%.2f s", secs) + " < " + fmt("%g s", budget_s));
  if (!v.pass) ++failures;
  lines[id] = std::string(v.pass ? "PASS" : "FAIL") + " C" + std::to_string(id) + " " + title + ": " + v.detail;
}

// States from criteria 4-7 for the compactness bound.
struct Recorded {
  std::string origin;
  double tv, total, h;
};
std::vector<Recorded> recorded;

void record(const std::string& origin, const PhaseState& s) {
  recorded.push_back({origin, tv_phase(s), e_eps(s).total, s.domain().h()});
}

struct SweepRow {
  double eps;
  PhaseState state;
  double total, x0, l2, l1;
};

std::vector<SweepRow> sweep(double a, double b, double m) {
  const auto d = Domain::interval(-1, 1, 4096);
  const auto oracle = sharp_oracle_1d(a, b);
  Eigen::ArrayXd ov(d->node_count()), ophase(d->node_count());
  for (Index k = 0; k < d->node_count(); ++k) {
    ov[k] = oracle.value(d->node(k).x());
    ophase[k] = d->node(k).x() >= oracle.x0 ? 1.0 : -1.0;
  }
  MinimizeConfig mc;
  mc.bound_m = m;
  mc.tol_grad = 1e-6;
  Eigen::ArrayXd boundary = Eigen::ArrayXd::Zero(d->node_count());
  boundary[0] = -a;
  boundary[boundary.size() - 1] = b;
  mc.boundary = boundary;
  ScalarField current = ScalarField::from_function(d, [&](const Point& x) { return -a + (a + b) * (x.x() + 1) / 2; });
  std::vector<SweepRow> rows;
  for (double eps : {1e-1, 3e-2, 1e-2, 3e-3, 1e-3}) {
    const auto r = minimize_e_eps(PhaseState(current, eps, m), mc);
    if (!r.converged) fail(ErrorCode::divergence, "sweep at eps " + sci(eps) + " stopped by " + r.stop_reason);
    current = r.state.field;
    const auto lim = extract_sharp_limit(r.state);
    rows.push_back({eps, r.state, e_eps(r.state).total, lim.interfaces.empty() ? NAN : lim.interfaces.front(),
                    l2_distance(*d, r.state.values(), ov),
                    l1_distance(*d, phase_variable(r.state.values(), eps), ophase)});
  }
  return rows;
}

std::vector<SweepRow> symmetric_rows, asymmetric_rows;

}  // namespace

int main() {
  criterion(1, "surface tension", 1.0, [] {
    Verdict v;
    const double quad = 2.0 * oracle::integrate([](double t) { return 2.0 * std::sqrt(oracle::well(t)); }, 0.0, 1.0);
    v.require(kSurfaceTension == 8.0 / 3.0, "c0 = " + fmt("%.17g", kSurfaceTension));
    v.require(std::abs(quad - kSurfaceTension) <= 1e-9, "|quadrature - c0| = " + sci(std::abs(quad - kSurfaceTension)));
    return v;
  });

  criterion(2, "profile fidelity", 5.0, [] {
    Verdict v;
    double worst = 0.0, worst_scale = 0.0;
    for (double eps : {1.0, 0.1, 0.01}) {
      const double root = std::sqrt(eps);
      auto rhs = [&](double p) { return std::sqrt(oracle::well(p / root)) / root; };
      for (int k = -200; k <= 200; ++k) {
        const double s = 10.0 * eps * k / 200;
        worst = std::max(worst, std::abs(phi(eps, s) - oracle::rk4(rhs, 0.0, s, 1e-3 * eps)));
        worst_scale = std::max(worst_scale, std::abs(phi(eps, s) - root * phi(1.0, s / eps)));
      }
    }
    v.require(worst <= 1e-8, "max |phi - rk4| = " + sci(worst));
    v.require(worst_scale <= 1e-12, "max scaling defect = " + sci(worst_scale));
    return v;
  });

  criterion(3, "tail estimate", 1.0, [] {
    Verdict v;
    double prev = INFINITY;
    bool monotone = true;
    std::string values;
    for (double eps : {1e-2, 1e-3, 1e-4}) {
      const double cur = tail_well_sup(eps, t_eps(eps, 0.5), 1.0);
      monotone = monotone && cur < prev;
      values += (values.empty() ? "" : ", ") + sci(cur);
      prev = cur;
    }
    v.require(monotone, "decreasing [" + values + "]");
    v.require(prev <= 1e-3, "final " + sci(prev) + " <= 1e-3");
    return v;
  });

  criterion(4, "discrete liminf", 30.0, [] {
    Verdict v;
    const double eps = 0.03;
    std::vector<double> defect;
    double worst_margin = INFINITY;
    for (int p : {8, 10, 12}) {
      const auto d = Domain::interval(-1, 1, 2 << p);
      double worst = 0.0;
      for (std::uint64_t t = 0; t < 100; ++t) {
        CounterRng rng(4, t);
        const PhaseState s(band_limited_field_1d(d, rng, 8, 0.5, 1.0), eps, 1.0);
        const auto split = modica_mortola_split(s);
        worst = std::max(worst, split.rhs - split.lhs);
        if (p == 10) {
          worst_margin = std::min(worst_margin, split.lhs - split.rhs + d->h());
          record("liminf", s);
        }
        const double c = rng.next_uniform(-0.5, 0.5);
        const PhaseState tight(ScalarField::from_function(d, [&](const Point& x) { return phi(eps, x.x() - c); }),
                               eps, 1.0);
        const auto ts = modica_mortola_split(tight);
        worst = std::max(worst, ts.rhs - ts.lhs);
      }
      defect.push_back(worst);
    }
    v.require(worst_margin >= 0.0, "min (lhs - rhs + h) at h = 2^-10: " + sci(worst_margin));
    v.require(defect[1] <= defect[0] / 4 && defect[2] <= defect[1] / 4,
              "defect " + sci(defect[0]) + ", " + sci(defect[1]) + ", " + sci(defect[2]));
    return v;
  });

  criterion(5, "limsup recovery", 120.0, [] {
    Verdict v;
    const auto line = Domain::interval(-1, 1, 20000);
    const SharpPair ramp(ScalarField::from_function(line, [](const Point& x) { return x.x(); }),
                         Region::interval(0, 2), 1.0);
    const std::vector<double> eps{1e-1, 1e-2, 1e-3};
    const auto curve = recovery_curve(ramp, eps);
    const double sharp = 14.0 / 3.0;
    bool monotone = true;
    for (std::size_t i = 1; i < curve.size(); ++i) {
      monotone = monotone && std::abs(curve[i].energy.total - sharp) < std::abs(curve[i - 1].energy.total - sharp);
    }
    for (double e : eps) record("recovery 1d", build_recovery(ramp, e).state);
    const double rel = std::abs(curve.back().energy.total - sharp) / sharp;
    v.require(monotone, "monotone approach to 14/3");
    v.require(rel <= 0.05, "1d final " + fmt("%.5f", curve.back().energy.total) + " (" + fmt("%.2f%%", 100 * rel) + ")");

    const auto ball = Domain::ball(Point(0, 0), 1.0, 512, 2);
    const SharpPair disc(ScalarField::constant(ball, 0.0), Region::disc(Point(0, 0), 0.5), 1.0);
    const auto r = build_recovery(disc, 1e-2);
    record("recovery 2d", r.state);
    const double target = 8.0 * pi / 3.0;
    const double rel2 = std::abs(r.report.energy.total - target) / target;
    v.require(rel2 <= 0.05, "2d " + fmt("%.5f", r.report.energy.total) + " (" + fmt("%.2f%%", 100 * rel2) + ")");
    return v;
  });

  criterion(7, "minimizer convergence", 120.0, [] {
    Verdict v;
    symmetric_rows = sweep(1.0, 1.0, 2.0);
    asymmetric_rows = sweep(1.0, 3.0, 4.0);
    for (const auto& r : symmetric_rows) record("sweep symmetric", r.state);
    for (const auto& r : asymmetric_rows) record("sweep asymmetric", r.state);
    const auto& s = symmetric_rows.back();
    const double rel = std::abs(s.total - 14.0 / 3.0) / (14.0 / 3.0);
    v.require(rel <= 0.05, "symmetric energy " + fmt("%.5f", s.total) + " (" + fmt("%.2f%%", 100 * rel) + ")");
    v.require(std::abs(s.x0) <= 0.02, "|x0| = " + sci(std::abs(s.x0)));
    v.require(s.l2 <= 0.05, "l2 gap " + sci(s.l2));
    v.require(s.l1 <= 0.05, "phase l1 gap " + sci(s.l1));
    const auto& a = asymmetric_rows.back();
    const double rela = std::abs(a.total - 32.0 / 3.0) / (32.0 / 3.0);
    v.require(rela <= 0.05, "asymmetric energy " + fmt("%.5f", a.total) + " (" + fmt("%.2f%%", 100 * rela) + ")");
    v.require(std::abs(a.x0 + 0.5) <= 0.03, "interface " + fmt("%.5f", a.x0));
    return v;
  });

  criterion(8, "one-phase non-existence", 60.0, [] {
    Verdict v;
    const auto ball = Domain::ball(Point(0, 0), 1.0, 64, 2);
    int passed = 0;
    double min_margin = INFINITY, min_value = INFINITY;
    for (std::uint64_t t = 0; t < 100; ++t) {
      CounterRng rng(8, t);
      Eigen::ArrayXd level;
      const ScalarField u = nonnegative_field_2d(ball, rng, 0.1, &level);
      const double bound = u.values.maxCoeff() + 1.0;
      const ScalarField h = harmonic_replacement(u);
      double lowest = INFINITY;
      for (Index k = 0; k < h.size(); ++k) {
        if (ball->is_active(k)) lowest = std::min(lowest, h.values[k]);
      }
      const double margin = sharp_energy(SharpPair(u, Mask::from_level(ball, level), bound)).total -
                            sharp_energy(SharpPair(h, Region::full(), bound)).total;
      passed += lowest > 0.0 && margin > 1e-8;
      min_margin = std::min(min_margin, margin);
      min_value = std::min(min_value, lowest);
    }
    v.require(passed == 100, std::to_string(passed) + "/100, min margin " + sci(min_margin) + ", min value " +
                                 sci(min_value));
    return v;
  });

  criterion(9, "gluing contract", 30.0, [] {
    Verdict v;
    const auto ball = Domain::ball(Point(0, 0), 1.0, 256, 2);
    const double eps = 1e-2;
    const Region disc = Region::disc(Point(0, 0), 0.5);
    auto base = [](const Point& x) { return 0.25 * (0.25 - x.squaredNorm()); };
    auto bumped = [&](const Point& x) { return base(x) + 2.0 * std::max(0.0, 0.09 - x.squaredNorm()); };
    const PhaseState u = build_recovery(SharpPair(ScalarField::from_function(ball, bumped), disc, 1.0), eps).state;
    const PhaseState w = build_recovery(SharpPair(ScalarField::from_function(ball, base), disc, 1.0), eps).state;
    const auto spec = AnnulusSpec::make(0.6, 0.2, 1.0);
    for (bool ordered : {true, false}) {
      const PhaseState& outer = ordered ? u : w;
      const PhaseState& inner = ordered ? w : u;
      const auto [out, rep] = glue(outer, inner, spec, 0.1);
      int mismatches = 0;
      for (Index k = 0; k < out.values().size(); ++k) {
        const double r = (ball->node(k) - ball->ball_center()).norm();
        if (r < spec.rho && out.values()[k] != inner.values()[k]) ++mismatches;
        if (r > spec.rho + spec.delta && out.values()[k] != outer.values()[k]) ++mismatches;
      }
      const std::string tag = ordered ? "ordered" : "unordered";
      v.require(mismatches == 0, tag + " zone mismatches " + std::to_string(mismatches));
      v.require(rep.excess <= 0.1, tag + " excess " + sci(rep.excess));
    }
    return v;
  });

  criterion(10, "uniform bound", 120.0, [] {
    Verdict v;
    for (int dim : {1, 2}) {
      const auto ball = Domain::ball(Point(0, 0), 1.0, dim == 1 ? 1 << 14 : 4096, dim);
      for (double eps : {1e-2, 1e-3}) {
        const auto r = build_barrier(ball, 0.5, 1.0, eps).report;
        v.require(r.within_bound(), std::to_string(dim) + "d eps " + sci(eps) + " " + fmt("%.4f", r.energy.total) +
                                        " <= 1.02 * " + fmt("%.4f", r.bound));
      }
    }
    for (const auto* rows : {&symmetric_rows, &asymmetric_rows}) {
      if (rows->empty()) {
        v.require(false, "criterion 7 states missing");
        continue;
      }
      const double m = rows->front().state.bound_m;
      const auto ball = Domain::ball(Point(0, 0), 1.0, 4096, 1);
      const double c = build_barrier(ball, 0.5, m, 1e-3).report.bound;
      double worst = 0.0;
      for (const auto& row : *rows) worst = std::max(worst, e_eps(row.state, Region::interval(-0.5, 0.5)).total);
      v.require(worst <= c, "M = " + fmt("%g", m) + " sweep max E(B_0.5) " + fmt("%.4f", worst) + " <= " +
                                fmt("%.4f", c));
    }
    return v;
  });

  criterion(6, "compactness bound", 10.0, [] {
    Verdict v;
    double worst = INFINITY;
    std::string where;
    for (const auto& r : recorded) {
      const double slack = 2.0 / kSurfaceTension * r.total + r.h - r.tv;
      if (slack < worst) {
        worst = slack;
        where = r.origin;
      }
    }
    v.require(!recorded.empty() && worst >= 0.0,
              std::to_string(recorded.size()) + " states, min slack " + sci(worst) + " (" + where + ")");
    return v;
  });

  for (const auto& [id, line] : lines) std::printf("%s\n", line.c_str());
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
