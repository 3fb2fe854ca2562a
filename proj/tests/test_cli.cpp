#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "perimeter_phase/config.hpp"
#include "perimeter_phase/experiment.hpp"
#include "perimeter_phase/field_io.hpp"
#include "perimeter_phase/parallel.hpp"
#include "perimeter_phase/random.hpp"

using namespace perimeter_phase;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("perimeter_phase_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<ConfigIssue> issues_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.issues();
  }
  return {};
}

bool names_field(const std::vector<ConfigIssue>& issues, const std::string& field) {
  for (const auto& i : issues) {
    if (i.field == field) return true;
  }
  return false;
}

RunOutcome run(const json& doc, const fs::path& out) {
  ExperimentConfig cfg = parse_config(doc.dump());
  cfg.base_dir = out;
  RunOptions opt;
  opt.out_dir = out;
  return run_experiment(cfg, opt);
}

std::size_t count_lines(const std::string& s) { return std::size_t(std::count(s.begin(), s.end(), '\n')); }

ScalarField wavy(DomainPtr d) {
  return ScalarField::from_function(d, [](const Point& x) { return 0.3 * std::sin(7.1 * x.x() + 2.3 * x.y()) + 0.01; });
}

}  // namespace

TEST_CASE("field round trip through the binary format is exact") {
  const fs::path dir = scratch("binary");
  for (auto d : {Domain::interval(-1, 1, 300), Domain::ball(Point(0.1, 0), 0.9, 64, 2)}) {
    const ScalarField f = wavy(d);
    write_field(f, dir / "f.bin");
    CHECK(fs::file_size(dir / "f.bin") == std::uintmax_t(8 * f.size()));
    const ScalarField g = read_field(dir / "f.bin");
    CHECK((g.values == f.values).all());
    const PhaseState a(f, 0.01, 1.0), b(g, 0.01, 1.0);
    CHECK(e_eps(a).total == e_eps(b).total);
    CHECK(read_field(dir / "f.bin", d).domain == d);
    const json side = json::parse(slurp(dir / "f.bin.json"));
    CHECK(side.at("n") == d->n());
    CHECK(side.at("dim") == d->dim());
  }
}

TEST_CASE("field round trip through CSV agrees to 1e-12") {
  const fs::path dir = scratch("csv");
  for (auto d : {Domain::interval(-1, 1, 300), Domain::ball(Point(0, 0), 1.0, 64, 2)}) {
    const ScalarField f = wavy(d);
    write_field(f, dir / "f.csv");
    const ScalarField g = read_field(dir / "f.csv", d);
    const double ea = e_eps(PhaseState(f, 0.01, 1.0)).total;
    const double eb = e_eps(PhaseState(g, 0.01, 1.0)).total;
    CHECK(std::abs(ea - eb) <= 1e-12 * std::abs(ea));
    CHECK((g.values - f.values).abs().maxCoeff() <= 1e-15);
  }
}

TEST_CASE("field files are validated") {
  const fs::path dir = scratch("invalid");
  const auto d = Domain::interval(-1, 1, 100);
  const ScalarField f = wavy(d);
  write_field(f, dir / "f.bin");
  write_field(f, dir / "f.csv");
  auto code = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::internal;
  };
  CHECK(code([&] { read_field(dir / "f.bin", Domain::interval(-1, 1, 128)); }) == ErrorCode::io);
  CHECK(code([&] { read_field(dir / "f.csv", Domain::interval(-1, 1, 128)); }) == ErrorCode::io);
  CHECK(code([&] { read_field(dir / "f.csv"); }) == ErrorCode::config);
  CHECK(code([&] { read_field(dir / "missing.bin"); }) == ErrorCode::io);
  CHECK(code([&] { field_format_for("f.txt"); }) == ErrorCode::config);
  fs::resize_file(dir / "f.bin", 8 * 50);
  CHECK(code([&] { read_field(dir / "f.bin"); }) == ErrorCode::io);
  fs::remove(dir / "f.csv.json");
  write_field(f, dir / "g.bin");
  fs::remove(dir / "g.bin.json");
  CHECK(code([&] { read_field(dir / "g.bin"); }) == ErrorCode::io);
}

TEST_CASE("parse_config defaults") {
  const auto cfg = parse_config(R"({"experiment": "profile", "epsilon": 0.1})");
  CHECK(cfg.kind == ExperimentKind::profile);
  CHECK(cfg.kappa == 0.1);
  CHECK(cfg.n == 4096);
  CHECK(cfg.bound_m == 1.0);
  CHECK(cfg.epsilons == std::vector<double>{0.1});
  CHECK(cfg.seed == 0);
  const auto h = parse_config(R"({"experiment": "harmonic-check"})");
  CHECK(h.n == 64);
  CHECK(h.make_domain()->is_ball());
  CHECK(parse_config(R"({"epsilon": 0.1})", ExperimentKind::profile).kind == ExperimentKind::profile);
}

TEST_CASE("parse_config reports every violation") {
  const auto ascending = issues_of(R"({"experiment": "profile", "epsilon": [0.01, 0.1]})");
  REQUIRE(ascending.size() == 1);
  CHECK(ascending[0].field == "epsilon");

  const auto unknown = issues_of(R"({"experiment": "anneal", "epsilon": 0.1})");
  REQUIRE(names_field(unknown, "experiment"));
  for (const auto& i : unknown) {
    if (i.field == "experiment") CHECK(i.message.find(experiment_names()) != std::string::npos);
  }
  CHECK(experiment_names().find("harmonic-check") != std::string::npos);

  const auto many = issues_of(R"({"experiment": "sweep", "n": 1000, "epsilon": [0.1, -1], "kappa": 1.5,
                                  "M": 0, "colour": 3, "boundary": {"a": 1, "b": 1}})");
  CHECK(names_field(many, "n"));
  CHECK(names_field(many, "epsilon"));
  CHECK(names_field(many, "kappa"));
  CHECK(names_field(many, "M"));
  CHECK(names_field(many, "colour"));

  CHECK(names_field(issues_of("{not json"), "<document>"));
  CHECK(names_field(issues_of(R"({"experiment": "recovery", "epsilon": 0.1, "field": {"type": "constant", "value": 0}})"),
                    "region"));
  CHECK(names_field(issues_of(R"({"experiment": "glue", "epsilon": [0.1, 0.01]})"), "epsilon"));
  CHECK_THROWS_AS(parse_config(R"({"experiment": "profile", "epsilon": 0.1})", ExperimentKind::sweep), ConfigError);
}

TEST_CASE("counter rng is a pure function of seed, stream and counter") {
  const CounterRng a(5), b(5), c(6);
  CHECK(a.bits(17) == b.bits(17));
  CHECK(a.bits(17) != c.bits(17));
  CHECK(a.substream(1).bits(0) != a.substream(2).bits(0));
  CHECK(a.substream(3).bits(9) == b.substream(3).bits(9));
  CounterRng seq(5);
  CHECK(seq.next_bits() == a.bits(0));
  CHECK(seq.next_bits() == a.bits(1));
  std::set<std::uint64_t> seen;
  double lo = 1.0, hi = 0.0, mean = 0.0;
  for (std::uint64_t k = 0; k < 10000; ++k) {
    seen.insert(a.bits(k));
    const double u = a.uniform(k);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    mean += u / 10000;
  }
  CHECK(seen.size() == 10000);
  CHECK(lo >= 0.0);
  CHECK(hi < 1.0);
  CHECK(std::abs(mean - 0.5) < 0.01);
}

TEST_CASE("random field families") {
  const auto line = Domain::interval(-1, 1, 512);
  CounterRng r1(3), r2(3);
  const auto f = band_limited_field_1d(line, r1, 8, 0.5, 0.4);
  const auto g = band_limited_field_1d(line, r2, 8, 0.5, 0.4);
  CHECK((f.values == g.values).all());
  CHECK(f.values.abs().maxCoeff() <= 0.4);

  const auto ball = Domain::ball(Point(0, 0), 1.0, 64, 2);
  CounterRng r3(9);
  Eigen::ArrayXd level;
  const auto u = nonnegative_field_2d(ball, r3, 0.1, &level);
  CHECK(u.values.minCoeff() >= 0.0);
  CHECK(level.minCoeff() < 0.0);
  for (Index k = 0; k < u.size(); ++k) {
    if (ball->is_active(k) && !ball->is_interior(k)) CHECK(u.values[k] >= 0.1);
  }
}

TEST_CASE("parallel_for runs each index once and rethrows the lowest failure") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  try {
    parallel_for(100, [](std::size_t i) {
      if (i % 10 == 7) throw std::runtime_error(std::to_string(i));
    });
    FAIL("no exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "7");
  }
  setenv("PERIMETER_PHASE_THREADS", "1", 1);
  CHECK(worker_count() == 1);
  setenv("PERIMETER_PHASE_THREADS", "zero", 1);
  CHECK_THROWS_AS(worker_count(), Error);
  unsetenv("PERIMETER_PHASE_THREADS");
  CHECK(worker_count() >= 1);
}

TEST_CASE("exit codes") {
  CHECK(exit_code_for(ErrorCode::budget_exceeded) == 2);
  CHECK(exit_code_for(ErrorCode::infeasible) == 2);
  CHECK(exit_code_for(ErrorCode::divergence) == 2);
  CHECK(exit_code_for(ErrorCode::numeric) == 2);
  CHECK(exit_code_for(ErrorCode::config) == 1);
  CHECK(exit_code_for(ErrorCode::io) == 1);
  CHECK(exit_code_for(ErrorCode::domain) == 1);
}

TEST_CASE("harmonic-check output is byte-identical for one seed") {
  const json doc = {{"experiment", "harmonic-check"}, {"trials", 12}, {"seed", 77}};
  const fs::path a = scratch("harm_a"), b = scratch("harm_b"), c = scratch("harm_c");
  setenv("PERIMETER_PHASE_THREADS", "3", 1);
  CHECK(run(doc, a).exit_code == 0);
  setenv("PERIMETER_PHASE_THREADS", "1", 1);
  CHECK(run(doc, b).exit_code == 0);
  unsetenv("PERIMETER_PHASE_THREADS");
  const std::string csv = slurp(a / "harmonic.csv");
  CHECK(count_lines(csv) == 13);
  CHECK(csv == slurp(b / "harmonic.csv"));
  CHECK(slurp(a / "summary.json") == slurp(b / "summary.json"));
  json other = doc;
  other["seed"] = 78;
  run(other, c);
  CHECK(csv != slurp(c / "harmonic.csv"));
}

TEST_CASE("sweep writes one row per epsilon") {
  const json doc = {{"experiment", "sweep"}, {"n", 1024}, {"M", 2},           {"epsilon", {0.1, 0.03}},
                    {"boundary", {{"a", 1}, {"b", 1}}}};
  const fs::path out = scratch("sweep");
  const auto r = run(doc, out);
  CHECK(r.exit_code == 0);
  std::istringstream csv(slurp(out / "sweep.csv"));
  std::string header;
  std::getline(csv, header);
  CHECK(header.rfind("epsilon,total,dirichlet,well,tv_phase,interface_x,l2_gap_to_oracle", 0) == 0);
  CHECK(count_lines(csv.str()) == 3);
  CHECK(r.summary.at("results").size() == 2);
  CHECK(json::parse(slurp(out / "summary.json")).at("status") == "ok");
}

TEST_CASE("recovery writes the curve table") {
  const json doc = {{"experiment", "recovery"}, {"n", 8192}, {"epsilon", {0.1, 0.01}},
                    {"field", {{"type", "affine"}, {"gradient", {1.0}}}},
                    {"region", {{"type", "interval"}, {"a", 0}, {"b", 2}}}};
  const fs::path out = scratch("recovery");
  CHECK(run(doc, out).exit_code == 0);
  const std::string csv = slurp(out / "recovery.csv");
  CHECK(csv.rfind("epsilon,dirichlet,well,total,sharp_total,l2_gap,h_l1_gap\n", 0) == 0);
  CHECK(count_lines(csv) == 3);
}

TEST_CASE("module errors are serialized into the summary") {
  const json ball = {{"type", "ball"}, {"center", {0.0}}, {"radius", 1.0}};
  json glue_doc = {{"experiment", "glue"}, {"domain", ball}, {"n", 4096}, {"epsilon", 1e-3}, {"rho", 0.6},
                   {"delta", 0.2},        {"gamma", 1.0},   {"u", {{"type", "constant"}, {"value", 1.0}}},
                   {"v", {{"type", "constant"}, {"value", -1.0}}}};
  const fs::path out = scratch("errors");
  const auto budget = run(glue_doc, out);
  CHECK(budget.exit_code == 2);
  CHECK(budget.summary.at("status") == "error");
  CHECK(budget.summary.at("error").at("code") == "budget_exceeded");
  CHECK(budget.summary.at("error").at("excess").get<double>() > 1.0);
  CHECK(json::parse(slurp(out / "summary.json")) == budget.summary);

  glue_doc["epsilon"] = 0.2;
  glue_doc["convention"] = "first_integral_linear";
  const auto infeasible = run(glue_doc, out);
  CHECK(infeasible.exit_code == 2);
  CHECK(infeasible.summary.at("error").at("code") == "infeasible");
  CHECK(infeasible.summary.at("error").contains("minimal_delta"));

  const json missing = {{"experiment", "energy"}, {"epsilon", 0.1}, {"field", {{"file", "nowhere.bin"}}}};
  const auto io = run(missing, out);
  CHECK(io.exit_code == 1);
  CHECK(io.summary.at("error").at("code") == "io_error");
}

TEST_CASE("field files feed experiments") {
  const fs::path out = scratch("file_field");
  const auto d = Domain::interval(-1, 1, 1024);
  write_field(ScalarField::from_function(d, [](const Point& x) { return 0.5 * x.x(); }), out / "u.bin");
  const json doc = {{"experiment", "energy"}, {"n", 1024}, {"epsilon", 0.1}, {"field", {{"file", "u.bin"}}}};
  const auto r = run(doc, out);
  CHECK(r.exit_code == 0);
  CHECK(r.summary.at("results").at(0).at("energy").at("dirichlet").get<double>() == doctest::Approx(0.5));
  const json wrong = {{"experiment", "energy"}, {"n", 2048}, {"epsilon", 0.1}, {"field", {{"file", "u.bin"}}}};
  CHECK(run(wrong, out).exit_code == 1);
}
