#include "perimeter_phase/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <numbers>
#include <string>

#include "perimeter_phase/field_io.hpp"
#include "perimeter_phase/interpolation.hpp"
#include "perimeter_phase/minimize.hpp"
#include "perimeter_phase/parallel.hpp"
#include "perimeter_phase/profiles1d.hpp"
#include "perimeter_phase/random.hpp"
#include "perimeter_phase/recovery.hpp"

namespace perimeter_phase {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json num_json(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

class Csv {
 public:
  Csv(const fs::path& path, std::initializer_list<const char*> columns) : out_(path), path_(path) {
    if (!out_) fail(ErrorCode::io, "cannot write " + path.string());
    bool first = true;
    for (const char* c : columns) {
      out_ << (first ? "" : ",") << c;
      first = false;
    }
    out_ << '\n';
  }
  template <typename... T>
  void row(const T&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
    out_ << '\n';
    if (!out_) fail(ErrorCode::io, "write failed for " + path_.string());
  }

 private:
  static std::string cell(double x) { return num(x); }
  static std::string cell(int x) { return std::to_string(x); }
  static std::string cell(std::size_t x) { return std::to_string(x); }
  static std::string cell(bool x) { return x ? "1" : "0"; }
  static std::string cell(const std::string& x) { return x; }
  static std::string cell(const char* x) { return x; }

  std::ofstream out_;
  fs::path path_;
};

Point read_point(const json& j, const Point& fallback) {
  if (j.is_null()) return fallback;
  Point p = Point::Zero();
  p.x() = j.at(0).get<double>();
  if (j.size() > 1) p.y() = j.at(1).get<double>();
  return p;
}

struct Context {
  const ExperimentConfig& cfg;
  const RunOptions& opt;
  std::uint64_t seed;
  json summary;
  int exit_code = 0;
  std::mutex log_mutex;

  void log(const std::string& line) {
    if (opt.quiet) return;
    std::lock_guard lock(log_mutex);
    std::cerr << '[' << experiment_name(cfg.kind) << "] " << line << '\n';
  }
  fs::path path(const std::string& name) const { return opt.out_dir / name; }
  bool dump(bool fallback) const { return cfg.raw.value("dump_fields", fallback); }
  double get(const char* key, double fallback) const { return cfg.raw.value(key, fallback); }
};

std::string eps_tag(std::size_t i) { return "eps" + std::to_string(i); }

SlopeConvention convention_of(const ExperimentConfig& cfg) {
  return parse_slope_convention(cfg.raw.value("convention", std::string("first_integral_squared")));
}

// Initial state for minimize and sweep: the "initial" description, or the
// linear interpolation of the 1D boundary data {a, b}.
ScalarField initial_field(Context& ctx, DomainPtr d, double eps) {
  const auto& raw = ctx.cfg.raw;
  if (raw.contains("initial")) {
    return make_field(raw.at("initial"), d, eps, ctx.cfg.kappa, ctx.cfg.bound_m, ctx.cfg.base_dir);
  }
  const double a = raw.at("boundary").at("a").get<double>();
  const double b = raw.at("boundary").at("b").get<double>();
  const double lo = d->lo().x(), hi = d->hi().x();
  return ScalarField::from_function(d, [&](const Point& x) { return -a + (a + b) * (x.x() - lo) / (hi - lo); });
}

MinimizeConfig solver_config(Context& ctx, const Domain& d) {
  const auto& raw = ctx.cfg.raw;
  MinimizeConfig mc;
  mc.bound_m = ctx.cfg.bound_m;
  mc.tol_grad = raw.value("tol_grad", mc.tol_grad);
  mc.max_iters = raw.value("max_iters", mc.max_iters);
  mc.step = raw.value("step", 0.0);
  if (raw.value("method", std::string("preconditioned")) == "explicit_gradient") {
    mc.method = DescentMethod::explicit_gradient;
  }
  if (raw.contains("boundary")) {
    Eigen::ArrayXd b = Eigen::ArrayXd::Zero(d.node_count());
    b[0] = -raw.at("boundary").at("a").get<double>();
    b[b.size() - 1] = raw.at("boundary").at("b").get<double>();
    mc.boundary = b;
  }
  return mc;
}

json breakdown_with_extras(const PhaseState& s) {
  json j = e_eps(s).to_json();
  j["tv_phase"] = tv_phase(s);
  return j;
}

void run_profile(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const bool tail = cfg.raw.value("profile", std::string("standard")) == "linear_tail";
  const int samples = cfg.raw.value("samples", 1001);
  std::vector<Profile> profiles;
  for (double eps : cfg.epsilons) {
    profiles.push_back(tail ? Profile::linear_tail(eps, cfg.raw.at("theta").get<double>(), convention_of(cfg))
                            : Profile::standard(eps, cfg.kappa));
  }
  Csv csv(ctx.path("profile.csv"), {"epsilon", "s", "value", "derivative", "well_density"});
  json rows = json::array();
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    const Profile& p = profiles[i];
    const double eps = p.epsilon();
    const double s_max = ctx.get("s_max", 10.0 * eps);
    for (int k = 0; k < samples; ++k) {
      const double s = -s_max + 2.0 * s_max * k / (samples - 1);
      csv.row(eps, s, p.value(s), p.derivative(s), p.well_density(s));
    }
    json r = {{"epsilon", eps}, {"transition_half_width", p.transition_half_width()}};
    if (tail) r["theta"] = p.theta();
    else if (p.transition_half_width() < 1.0) r["tail_well_sup"] = tail_well_sup(eps, p.transition_half_width(), 1.0);
    rows.push_back(r);
    ctx.log("eps " + num(eps) + " half-width " + num(p.transition_half_width()));
  }
  ctx.summary["profile"] = tail ? "linear_tail" : "standard";
  if (tail) ctx.summary["convention"] = slope_convention_name(convention_of(cfg));
  ctx.summary["results"] = rows;
}

void run_energy(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto d = cfg.make_domain();
  const double delta = ctx.get("delta", 0.1);
  json rows = json::array();
  for (double eps : cfg.epsilons) {
    const ScalarField f = make_field(cfg.raw.at("field"), d, eps, cfg.kappa, cfg.bound_m, cfg.base_dir);
    const PhaseState s(f, eps, cfg.bound_m);
    json r = {{"epsilon", eps}, {"energy", breakdown_with_extras(s)}};
    const auto split = modica_mortola_split(s);
    r["modica_mortola"] = {{"lhs", split.lhs}, {"rhs", split.rhs}};
    const auto pm = intermediate_phase_measure(s, delta);
    r["phase_measure"] = {{"delta", delta}, {"measure", pm.measure}, {"bound", pm.bound}, {"constant", pm.constant}};
    if (cfg.region) {
      r["sharp"] = sharp_energy(SharpPair(f, *cfg.region, cfg.bound_m)).to_json();
    }
    rows.push_back(r);
    ctx.log("eps " + num(eps) + " total " + num(r["energy"]["total"].get<double>()));
  }
  ctx.summary["results"] = rows;
}

void run_recovery(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto d = cfg.make_domain();
  const ScalarField f = make_field(cfg.raw.at("field"), d, cfg.epsilons.front(), cfg.kappa, cfg.bound_m, cfg.base_dir);
  const SharpPair pair(f, *cfg.region, cfg.bound_m);
  std::vector<std::optional<RecoveryResult>> results(cfg.epsilons.size());
  parallel_for(results.size(), [&](std::size_t i) {
    results[i] = build_recovery(pair, cfg.epsilons[i], cfg.kappa);
    ctx.log("eps " + num(cfg.epsilons[i]) + " total " + num(results[i]->report.energy.total));
  });
  Csv csv(ctx.path("recovery.csv"), {"epsilon", "dirichlet", "well", "total", "sharp_total", "l2_gap", "h_l1_gap"});
  json rows = json::array();
  const bool dump = ctx.dump(false);
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i]->report;
    csv.row(r.epsilon, r.energy.dirichlet, r.energy.well, r.energy.total, r.sharp.total, r.l2_gap, r.h_tilde_l1_gap);
    rows.push_back(r.to_json());
    if (dump) write_field(results[i]->state.field, ctx.path("recovery_" + eps_tag(i) + ".bin"));
  }
  ctx.summary["results"] = rows;
}

void run_glue(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto d = cfg.make_domain();
  const double eps = cfg.epsilons.front();
  const PhaseState u(make_field(cfg.raw.at("u"), d, eps, cfg.kappa, cfg.bound_m, cfg.base_dir), eps, cfg.bound_m);
  const PhaseState v(make_field(cfg.raw.at("v"), d, eps, cfg.kappa, cfg.bound_m, cfg.base_dir), eps, cfg.bound_m);
  const auto spec = AnnulusSpec::make(cfg.raw.at("rho").get<double>(), cfg.raw.at("delta").get<double>(), cfg.bound_m);
  ctx.summary["annulus"] = spec.to_json();
  const auto [state, report] = glue(u, v, spec, cfg.raw.at("gamma").get<double>(), convention_of(cfg));
  ctx.summary["report"] = report.to_json();
  int mismatched = 0;
  const Point c = d->ball_center();
  for (Index k = 0; k < d->node_count(); ++k) {
    const double r = (d->node(k) - c).norm();
    if (r < spec.rho && state.values()[k] != v.values()[k]) ++mismatched;
    if (r > spec.rho + spec.delta && state.values()[k] != u.values()[k]) ++mismatched;
  }
  ctx.summary["zone_mismatches"] = mismatched;
  if (mismatched) ctx.exit_code = 2;
  if (ctx.dump(true)) write_field(state.field, ctx.path("glued.bin"));
  ctx.log("excess " + num(report.excess) + " (gamma " + num(report.budget_gamma) + ")");
}

void run_barrier(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto d = cfg.make_domain();
  const double big_r = cfg.raw.at("R").get<double>();
  std::vector<std::optional<BarrierResult>> results(cfg.epsilons.size());
  parallel_for(results.size(), [&](std::size_t i) {
    results[i] = build_barrier(d, big_r, cfg.bound_m, cfg.epsilons[i], cfg.kappa);
    ctx.log("eps " + num(cfg.epsilons[i]) + " total " + num(results[i]->report.energy.total) + " bound " +
            num(results[i]->report.bound));
  });
  Csv csv(ctx.path("barrier.csv"), {"epsilon", "dirichlet", "well", "total", "bound", "transition_bound",
                                    "within_bound", "within_transition_bound"});
  json rows = json::array();
  bool all = true;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i]->report;
    csv.row(r.epsilon, r.energy.dirichlet, r.energy.well, r.energy.total, r.bound, r.transition_bound,
            r.within_bound(), r.within_transition_bound());
    rows.push_back(r.to_json());
    all = all && r.within_bound();
    if (ctx.dump(false)) write_field(results[i]->state.field, ctx.path("barrier_" + eps_tag(i) + ".bin"));
  }
  ctx.summary["results"] = rows;
  ctx.summary["all_within_bound"] = all;
  if (!all) ctx.exit_code = 2;
}

json minimize_json(const MinimizeResult& r) {
  return {{"iterations", r.iterations},
          {"converged", r.converged},
          {"stop_reason", r.stop_reason},
          {"grad_norm", r.grad_norm}};
}

void run_minimize(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto d = cfg.make_domain();
  const double eps = cfg.epsilons.front();
  const PhaseState init(initial_field(ctx, d, eps), eps, cfg.bound_m);
  const MinimizeConfig mc = solver_config(ctx, *d);
  const auto r = minimize_e_eps(init, mc);
  Csv csv(ctx.path("iterations.csv"), {"iteration", "energy", "grad_norm", "step", "hessian"});
  for (const auto& l : r.log) csv.row(l.iteration, l.energy, l.grad_norm, l.step, l.hessian);
  json j = minimize_json(r);
  j["energy"] = breakdown_with_extras(r.state);
  const auto lim = extract_sharp_limit(r.state);
  j["interfaces"] = lim.interfaces;
  j["band_measure"] = lim.band_measure;
  ctx.summary["result"] = j;
  if (ctx.dump(true)) write_field(r.state.field, ctx.path("minimized.bin"));
  if (!r.converged) ctx.exit_code = 2;
  ctx.log(std::to_string(r.iterations) + " iterations, " + r.stop_reason + ", E = " + num(e_eps(r.state).total));
}

void run_sweep(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto d = cfg.make_domain();
  const MinimizeConfig mc = solver_config(ctx, *d);
  std::optional<OracleResult1D> oracle;
  const auto& raw = cfg.raw;
  if (raw.contains("boundary") && d->dim() == 1 && d->lo().x() == -1.0 && d->hi().x() == 1.0) {
    oracle = sharp_oracle_1d(raw.at("boundary").at("a").get<double>(), raw.at("boundary").at("b").get<double>());
    ctx.summary["oracle"] = oracle->to_json();
  }
  Eigen::ArrayXd oracle_values, oracle_phase;
  if (oracle) {
    oracle_values.resize(d->node_count());
    oracle_phase.resize(d->node_count());
    for (Index k = 0; k < d->node_count(); ++k) {
      oracle_values[k] = oracle->value(d->node(k).x());
      oracle_phase[k] = d->node(k).x() >= oracle->x0 ? 1.0 : -1.0;
    }
  }
  Csv csv(ctx.path("sweep.csv"), {"epsilon", "total", "dirichlet", "well", "tv_phase", "interface_x",
                                  "l2_gap_to_oracle", "phase_l1_gap_to_oracle", "iterations", "stop_reason"});
  ScalarField current = initial_field(ctx, d, cfg.epsilons.front());
  json rows = json::array();
  bool all_converged = true;
  for (std::size_t i = 0; i < cfg.epsilons.size(); ++i) {
    const double eps = cfg.epsilons[i];
    const auto r = minimize_e_eps(PhaseState(current, eps, cfg.bound_m), mc);
    current = r.state.field;
    const auto e = e_eps(r.state);
    const double tv = tv_phase(r.state);
    const auto lim = extract_sharp_limit(r.state);
    const double x0 = lim.interfaces.empty() ? NAN : lim.interfaces.front();
    const double l2 = oracle ? l2_distance(*d, r.state.values(), oracle_values) : NAN;
    const double l1 = oracle ? l1_distance(*d, phase_variable(r.state.values(), eps), oracle_phase) : NAN;
    csv.row(eps, e.total, e.dirichlet, e.well, tv, x0, l2, l1, r.iterations, r.stop_reason);
    json j = minimize_json(r);
    j["epsilon"] = eps;
    j["energy"] = e.to_json();
    j["tv_phase"] = tv;
    j["interfaces"] = lim.interfaces;
    j["l2_gap_to_oracle"] = num_json(l2);
    j["phase_l1_gap_to_oracle"] = num_json(l1);
    if (d->is_ball()) {
      const Point c = d->ball_center();
      j["energy_half_ball"] = e_eps(r.state, Region::disc(c, 0.5 * d->ball_radius())).total;
    }
    rows.push_back(j);
    all_converged = all_converged && r.converged;
    if (ctx.dump(false)) write_field(r.state.field, ctx.path("sweep_" + eps_tag(i) + ".bin"));
    ctx.log("eps " + num(eps) + " total " + num(e.total) + " iterations " + std::to_string(r.iterations) + " " +
            r.stop_reason);
  }
  ctx.summary["results"] = rows;
  if (!all_converged) ctx.exit_code = 2;
}

void run_oracle1d(Context& ctx) {
  const auto& raw = ctx.cfg.raw;
  const auto r = sharp_oracle_1d(raw.at("a").get<double>(), raw.at("b").get<double>(), raw.value("samples", 100000));
  ctx.summary["oracle"] = r.to_json();
  ctx.log("x0 " + num(r.x0) + " energy " + num(r.energy));
}

void run_harmonic_check(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const int trials = cfg.raw.value("trials", 100);
  const double floor = ctx.get("floor", 0.1);
  const auto d = cfg.make_domain();
  struct Row {
    double dir_before, dir_after, sharp_before, sharp_after, min_after;
  };
  std::vector<Row> rows(static_cast<std::size_t>(trials));
  const CounterRng root(ctx.seed);
  parallel_for(rows.size(), [&](std::size_t t) {
    CounterRng rng = root.substream(t);
    Eigen::ArrayXd level;
    const ScalarField u = nonnegative_field_2d(d, rng, floor, &level);
    const double bound = u.values.maxCoeff() + 1.0;
    const SharpPair before(u, Mask::from_level(d, level), bound);
    const ScalarField v = harmonic_replacement(u);
    double lowest = INFINITY;
    for (Index k = 0; k < v.size(); ++k) {
      if (d->is_active(k)) lowest = std::min(lowest, v.values[k]);
    }
    const SharpPair after(v, Region::full(), bound);
    rows[t] = {dirichlet_energy(u), dirichlet_energy(v), sharp_energy(before).total, sharp_energy(after).total, lowest};
  });
  Csv csv(ctx.path("harmonic.csv"), {"trial", "dirichlet_before", "dirichlet_after", "sharp_before", "sharp_after",
                                     "margin", "min_after", "pass"});
  int passed = 0;
  for (std::size_t t = 0; t < rows.size(); ++t) {
    const Row& r = rows[t];
    const double margin = r.sharp_before - r.sharp_after;
    const bool pass = r.min_after > 0.0 && margin > 1e-8;
    passed += pass;
    csv.row(t, r.dir_before, r.dir_after, r.sharp_before, r.sharp_after, margin, r.min_after, pass);
  }
  ctx.summary["trials"] = trials;
  ctx.summary["passed"] = passed;
  ctx.log(std::to_string(passed) + "/" + std::to_string(trials) + " trials passed");
  if (passed != trials) ctx.exit_code = 2;
}

void write_summary(const fs::path& path, const json& summary) {
  std::ofstream out(path);
  out << summary.dump(2) << '\n';
}

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::budget_exceeded:
    case ErrorCode::infeasible:
    case ErrorCode::divergence:
    case ErrorCode::numeric:
      return 2;
    default:
      return 1;
  }
}

json error_json(const std::exception& e) {
  json j;
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    j["code"] = err->code_name();
    if (const auto* c = dynamic_cast<const ConfigError*>(&e)) {
      json issues = json::array();
      for (const auto& i : c->issues()) issues.push_back({{"field", i.field}, {"message", i.message}});
      j["issues"] = issues;
    }
    if (const auto* b = dynamic_cast<const BudgetExceeded*>(&e)) j["excess"] = b->excess();
    if (const auto* g = dynamic_cast<const InfeasibleGlue*>(&e)) j["minimal_delta"] = num_json(g->minimal_delta());
  } else {
    j["code"] = error_code_name(ErrorCode::internal);
  }
  j["message"] = e.what();
  return j;
}

ScalarField make_field(const json& spec, DomainPtr domain, double epsilon, double kappa, double bound_m,
                       const fs::path& base_dir) {
  try {
    if (spec.contains("file")) {
      fs::path p = spec.at("file").get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      return read_field(p, domain);
    }
    const std::string type = spec.at("type").get<std::string>();
    if (type == "constant") return ScalarField::constant(domain, spec.at("value").get<double>());
    if (type == "affine") {
      const Point g = read_point(spec.at("gradient"), Point::Zero());
      const double c = spec.value("offset", 0.0);
      return ScalarField::from_function(domain, [&](const Point& x) { return g.dot(x) + c; });
    }
    if (type == "radial") {
      const Point c = read_point(spec.value("center", json()), Point::Zero());
      const auto coef = spec.at("coefficients").get<std::vector<double>>();
      return ScalarField::from_function(domain, [&](const Point& x) {
        const double r = (x - c).norm();
        double v = 0.0;
        for (auto it = coef.rbegin(); it != coef.rend(); ++it) v = v * r + *it;
        return v;
      });
    }
    if (type == "bump") {
      const Point c = read_point(spec.value("center", json()), Point::Zero());
      const double radius = spec.at("radius").get<double>();
      const double height = spec.at("height").get<double>();
      return ScalarField::from_function(domain, [&](const Point& x) {
        return height * std::max(0.0, 1.0 - (x - c).squaredNorm() / (radius * radius));
      });
    }
    if (type == "sum") {
      Eigen::ArrayXd v = Eigen::ArrayXd::Zero(domain->node_count());
      for (const auto& part : spec.at("of")) v += make_field(part, domain, epsilon, kappa, bound_m, base_dir).values;
      return ScalarField(domain, std::move(v));
    }
    if (type == "recovery") {
      const ScalarField inner = make_field(spec.at("field"), domain, epsilon, kappa, bound_m, base_dir);
      const SharpPair pair(inner, Region::from_json(spec.at("region")), bound_m);
      return build_recovery(pair, epsilon, spec.value("kappa", kappa)).state.field;
    }
    fail(ErrorCode::config, "unknown field type '" + type + "'");
  } catch (const json::exception& e) {
    fail(ErrorCode::config, std::string("field description: ") + e.what());
  }
}

RunOutcome run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  Context ctx{config, options, options.seed.value_or(config.seed), json::object(), 0, {}};
  ctx.summary["experiment"] = experiment_name(config.kind);
  ctx.summary["seed"] = ctx.seed;
  ctx.summary["config"] = config.raw;
  try {
    fs::create_directories(options.out_dir);
  } catch (const fs::filesystem_error& e) {
    ctx.summary["status"] = "error";
    ctx.summary["error"] = {{"code", error_code_name(ErrorCode::io)}, {"message", e.what()}};
    return {1, ctx.summary};
  }
  try {
    switch (config.kind) {
      case ExperimentKind::profile: run_profile(ctx); break;
      case ExperimentKind::energy: run_energy(ctx); break;
      case ExperimentKind::recovery: run_recovery(ctx); break;
      case ExperimentKind::glue: run_glue(ctx); break;
      case ExperimentKind::barrier: run_barrier(ctx); break;
      case ExperimentKind::minimize: run_minimize(ctx); break;
      case ExperimentKind::sweep: run_sweep(ctx); break;
      case ExperimentKind::oracle1d: run_oracle1d(ctx); break;
      case ExperimentKind::harmonic_check: run_harmonic_check(ctx); break;
    }
    ctx.summary["status"] = ctx.exit_code == 0 ? "ok" : "contract_violation";
  } catch (const std::exception& e) {
    ctx.summary["status"] = "error";
    ctx.summary["error"] = error_json(e);
    const auto* err = dynamic_cast<const Error*>(&e);
    ctx.exit_code = err ? exit_code_for(err->code()) : 1;
  }
  ctx.summary["exit_code"] = ctx.exit_code;
  write_summary(options.out_dir / "summary.json", ctx.summary);
  return {ctx.exit_code, ctx.summary};
}

}  // namespace perimeter_phase
