#include "perimeter_phase/config.hpp"

#include <array>
#include <cmath>
#include <set>

#include "perimeter_phase/profiles1d.hpp"

namespace perimeter_phase {

namespace {

constexpr std::array<std::pair<ExperimentKind, std::string_view>, 9> kNames{{
    {ExperimentKind::profile, "profile"},
    {ExperimentKind::energy, "energy"},
    {ExperimentKind::recovery, "recovery"},
    {ExperimentKind::glue, "glue"},
    {ExperimentKind::barrier, "barrier"},
    {ExperimentKind::minimize, "minimize"},
    {ExperimentKind::sweep, "sweep"},
    {ExperimentKind::oracle1d, "oracle1d"},
    {ExperimentKind::harmonic_check, "harmonic-check"},
}};

std::string summarize(const std::vector<ConfigIssue>& issues) {
  std::string msg = "invalid configuration:";
  for (const auto& i : issues) msg += " [" + i.field + "] " + i.message + ";";
  msg.pop_back();
  return msg;
}

class Checker {
 public:
  explicit Checker(const nlohmann::json& doc) : doc_(doc) {}

  std::vector<ConfigIssue> issues;

  void add(std::string field, std::string message) { issues.push_back({std::move(field), std::move(message)}); }
  bool has(const char* key) const { return doc_.contains(key); }
  const nlohmann::json& at(const char* key) const { return doc_.at(key); }

  std::optional<double> number(const char* key, bool required, double lo, double hi, bool open_lo,
                               bool open_hi) {
    if (!has(key)) {
      if (required) add(key, "required");
      return std::nullopt;
    }
    const auto& v = at(key);
    if (!v.is_number()) {
      add(key, "must be a number");
      return std::nullopt;
    }
    const double x = v.get<double>();
    const bool lo_ok = open_lo ? x > lo : x >= lo;
    const bool hi_ok = open_hi ? x < hi : x <= hi;
    if (!std::isfinite(x) || !lo_ok || !hi_ok) {
      add(key, "must lie in " + std::string(open_lo ? "(" : "[") + fmt(lo) + ", " + fmt(hi) +
                   (open_hi ? ")" : "]"));
      return std::nullopt;
    }
    return x;
  }
  std::optional<double> positive(const char* key, bool required) {
    return number(key, required, 0.0, INFINITY, true, true);
  }
  std::optional<long long> integer(const char* key, long long lo, long long hi) {
    if (!has(key)) return std::nullopt;
    const auto& v = at(key);
    if (!v.is_number_integer()) {
      add(key, "must be an integer");
      return std::nullopt;
    }
    const long long x = v.get<long long>();
    if (x < lo || x > hi) {
      add(key, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
      return std::nullopt;
    }
    return x;
  }
  void boolean(const char* key) {
    if (has(key) && !at(key).is_boolean()) add(key, "must be true or false");
  }
  void choice(const char* key, std::initializer_list<std::string_view> allowed) {
    if (!has(key)) return;
    std::string list;
    for (auto a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
    if (!at(key).is_string()) {
      add(key, "must be one of: " + list);
      return;
    }
    const std::string v = at(key).get<std::string>();
    for (auto a : allowed) {
      if (v == a) return;
    }
    add(key, "unknown value '" + v + "' (allowed: " + list + ")");
  }

  static std::string fmt(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    nlohmann::json j = x;
    return j.dump();
  }

 private:
  const nlohmann::json& doc_;
};

void check_field_spec(Checker& c, const nlohmann::json& spec, const std::string& where, int depth = 0) {
  if (depth > 16) {
    c.add(where, "field description nested too deeply");
    return;
  }
  if (!spec.is_object()) {
    c.add(where, "field description must be an object");
    return;
  }
  if (spec.contains("file")) {
    if (!spec.at("file").is_string()) c.add(where + ".file", "must be a path string");
    return;
  }
  if (!spec.contains("type") || !spec.at("type").is_string()) {
    c.add(where, "needs \"file\" or \"type\" (allowed types: constant, affine, radial, bump, sum, recovery)");
    return;
  }
  const std::string type = spec.at("type").get<std::string>();
  auto need_number = [&](const char* key) {
    if (!spec.contains(key) || !spec.at(key).is_number()) c.add(where + "." + key, "required number");
  };
  auto point_ok = [&](const char* key, bool required) {
    if (!spec.contains(key)) {
      if (required) c.add(where + "." + key, "required coordinate array");
      return;
    }
    const auto& p = spec.at(key);
    if (!p.is_array() || p.empty() || p.size() > 2) {
      c.add(where + "." + key, "must be an array of 1 or 2 numbers");
      return;
    }
    for (const auto& x : p) {
      if (!x.is_number()) c.add(where + "." + key, "must contain numbers");
    }
  };
  if (type == "constant") need_number("value");
  else if (type == "affine") {
    point_ok("gradient", true);
    if (spec.contains("offset") && !spec.at("offset").is_number()) c.add(where + ".offset", "must be a number");
  } else if (type == "radial") {
    point_ok("center", false);
    if (!spec.contains("coefficients") || !spec.at("coefficients").is_array() ||
        spec.at("coefficients").empty()) {
      c.add(where + ".coefficients", "required non-empty array (value = sum c_k r^k)");
    } else {
      for (const auto& x : spec.at("coefficients")) {
        if (!x.is_number()) c.add(where + ".coefficients", "must contain numbers");
      }
    }
  } else if (type == "bump") {
    point_ok("center", false);
    need_number("radius");
    need_number("height");
  } else if (type == "sum") {
    if (!spec.contains("of") || !spec.at("of").is_array() || spec.at("of").empty()) {
      c.add(where + ".of", "required non-empty array of field descriptions");
    } else {
      for (std::size_t i = 0; i < spec.at("of").size(); ++i) {
        check_field_spec(c, spec.at("of")[i], where + ".of[" + std::to_string(i) + "]", depth + 1);
      }
    }
  } else if (type == "recovery") {
    if (!spec.contains("field")) c.add(where + ".field", "required");
    else check_field_spec(c, spec.at("field"), where + ".field", depth + 1);
    if (!spec.contains("region")) c.add(where + ".region", "required");
    else {
      try {
        Region::from_json(spec.at("region"));
      } catch (const Error& e) {
        c.add(where + ".region", e.what());
      }
    }
  } else {
    c.add(where + ".type",
          "unknown field type '" + type + "' (allowed: constant, affine, radial, bump, sum, recovery)");
  }
}

std::set<std::string> allowed_keys(ExperimentKind kind) {
  std::set<std::string> keys{"experiment", "domain", "n", "epsilon", "kappa", "M", "seed", "out", "region"};
  auto add = [&](std::initializer_list<const char*> more) { keys.insert(more.begin(), more.end()); };
  switch (kind) {
    case ExperimentKind::profile: add({"profile", "theta", "convention", "s_max", "samples"}); break;
    case ExperimentKind::energy: add({"field", "delta"}); break;
    case ExperimentKind::recovery: add({"field", "dump_fields"}); break;
    case ExperimentKind::glue: add({"u", "v", "rho", "delta", "gamma", "convention", "dump_fields"}); break;
    case ExperimentKind::barrier: add({"R", "dump_fields"}); break;
    case ExperimentKind::minimize:
      add({"initial", "boundary", "tol_grad", "max_iters", "method", "step", "dump_fields"});
      break;
    case ExperimentKind::sweep:
      add({"initial", "boundary", "tol_grad", "max_iters", "method", "step", "dump_fields"});
      break;
    case ExperimentKind::oracle1d: add({"a", "b", "samples"}); break;
    case ExperimentKind::harmonic_check: add({"trials", "floor"}); break;
  }
  return keys;
}

void check_solver_keys(Checker& c) {
  c.positive("tol_grad", false);
  c.integer("max_iters", 0, 100000000);
  c.number("step", false, 0.0, INFINITY, false, true);
  c.choice("method", {"preconditioned", "explicit_gradient"});
  c.boolean("dump_fields");
}

}  // namespace

std::string_view experiment_name(ExperimentKind kind) {
  for (const auto& [k, name] : kNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<ExperimentKind> parse_experiment(std::string_view name) {
  for (const auto& [k, n] : kNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

std::string experiment_names() {
  std::string s;
  for (const auto& [k, n] : kNames) s += (s.empty() ? "" : ", ") + std::string(n);
  return s;
}

ConfigError::ConfigError(std::vector<ConfigIssue> issues)
    : Error(ErrorCode::config, summarize(issues)), issues_(std::move(issues)) {}

DomainPtr ExperimentConfig::make_domain() const {
  nlohmann::json j = domain;
  j["n"] = n;
  return Domain::from_json(j);
}

ExperimentConfig parse_config(std::string_view text, std::optional<ExperimentKind> forced_kind) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::vector<ConfigIssue>{{"<document>", std::string("malformed JSON: ") + e.what()}});
  }
  if (!doc.is_object()) throw ConfigError(std::vector<ConfigIssue>{{"<document>", "configuration must be a JSON object"}});

  Checker c(doc);
  ExperimentConfig cfg;
  cfg.raw = doc;

  std::optional<ExperimentKind> kind = forced_kind;
  if (c.has("experiment")) {
    const auto& e = c.at("experiment");
    const auto parsed = e.is_string() ? parse_experiment(e.get<std::string>()) : std::nullopt;
    if (!parsed) {
      c.add("experiment", "unknown experiment kind " + e.dump() + " (allowed: " + experiment_names() + ")");
    } else if (forced_kind && *parsed != *forced_kind) {
      c.add("experiment", "config is for '" + std::string(experiment_name(*parsed)) +
                              "' but the command asks for '" + std::string(experiment_name(*forced_kind)) + "'");
    } else {
      kind = parsed;
    }
  } else if (!forced_kind) {
    c.add("experiment", "required (allowed: " + experiment_names() + ")");
  }
  if (kind) cfg.kind = *kind;

  if (kind) {
    const auto keys = allowed_keys(*kind);
    for (const auto& [key, value] : doc.items()) {
      if (!keys.contains(key)) c.add(key, "unknown key for experiment '" + std::string(experiment_name(*kind)) + "'");
    }
  }

  if (kind == ExperimentKind::harmonic_check) cfg.n = 64;
  if (c.has("n")) {
    const auto& v = c.at("n");
    if (!v.is_number_integer() || v.get<long long>() < 64 || v.get<long long>() > (1 << 20) ||
        (v.get<long long>() & (v.get<long long>() - 1)) != 0) {
      c.add("n", "must be a power of two between 2^6 and 2^20");
    } else {
      cfg.n = int(v.get<long long>());
    }
  }
  if (c.has("domain")) cfg.domain = c.at("domain");
  else if (kind == ExperimentKind::harmonic_check) {
    cfg.domain = {{"type", "ball"}, {"center", {0.0, 0.0}}, {"radius", 1.0}};
  }
  int dim = 1;
  try {
    nlohmann::json probe = cfg.domain;
    if (!probe.is_object()) fail(ErrorCode::config, "must be an object");
    probe["n"] = 64;
    const auto d = Domain::from_json(probe);
    dim = d->dim();
    if (dim == 2 && cfg.n > 4096) c.add("n", "two-dimensional grids are limited to n <= 4096");
    if (kind == ExperimentKind::harmonic_check && !(dim == 2 && d->is_ball())) {
      c.add("domain", "harmonic-check needs a two-dimensional ball");
    }
    if ((kind == ExperimentKind::glue || kind == ExperimentKind::barrier) && !d->is_ball()) {
      c.add("domain", "needs a ball or an interval");
    }
  } catch (const Error& e) {
    c.add("domain", e.what());
  }

  if (c.has("epsilon")) {
    const auto& e = c.at("epsilon");
    std::vector<double> list;
    bool ok = true;
    if (e.is_number()) list.push_back(e.get<double>());
    else if (e.is_array() && !e.empty()) {
      for (const auto& x : e) {
        if (!x.is_number()) ok = false;
        else list.push_back(x.get<double>());
      }
    } else ok = false;
    if (!ok) c.add("epsilon", "must be a number or a non-empty array of numbers");
    else {
      for (std::size_t i = 0; i < list.size(); ++i) {
        if (!(list[i] > 0.0) || !std::isfinite(list[i])) {
          ok = false;
          c.add("epsilon", "values must be positive and finite");
          break;
        }
        if (i > 0 && !(list[i] < list[i - 1])) {
          ok = false;
          c.add("epsilon", "values must be strictly decreasing");
          break;
        }
      }
      if (ok) cfg.epsilons = list;
    }
  } else if (kind && *kind != ExperimentKind::oracle1d && *kind != ExperimentKind::harmonic_check) {
    c.add("epsilon", "required");
  }
  if ((kind == ExperimentKind::glue || kind == ExperimentKind::minimize) && cfg.epsilons.size() > 1) {
    c.add("epsilon", "this experiment takes a single epsilon");
  }

  if (auto k = c.number("kappa", false, 0.0, 1.0, true, true)) cfg.kappa = *k;
  if (auto m = c.positive("M", false)) cfg.bound_m = *m;
  if (c.has("seed")) {
    const auto& s = c.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
      c.add("seed", "must be a nonnegative integer");
    } else {
      cfg.seed = s.get<std::uint64_t>();
    }
  }
  if (c.has("out")) {
    if (!c.at("out").is_string()) c.add("out", "must be a path string");
    else cfg.out = c.at("out").get<std::string>();
  }
  if (c.has("region")) {
    try {
      cfg.region = Region::from_json(c.at("region"));
    } catch (const Error& e) {
      c.add("region", e.what());
    }
  }

  auto field = [&](const char* key, bool required) {
    if (c.has(key)) check_field_spec(c, c.at(key), key);
    else if (required) c.add(key, "required field description");
  };

  if (kind) {
    switch (*kind) {
      case ExperimentKind::profile:
        c.choice("profile", {"standard", "linear_tail"});
        if (c.has("profile") && c.at("profile") == "linear_tail") c.positive("theta", true);
        else c.positive("theta", false);
        c.choice("convention", {"first_integral_squared", "first_integral_linear"});
        c.positive("s_max", false);
        c.integer("samples", 2, 10000000);
        break;
      case ExperimentKind::energy:
        field("field", true);
        c.number("delta", false, 0.0, 0.5, true, true);
        break;
      case ExperimentKind::recovery:
        field("field", true);
        if (!c.has("region")) c.add("region", "required");
        c.boolean("dump_fields");
        break;
      case ExperimentKind::glue:
        field("u", true);
        field("v", true);
        c.positive("rho", true);
        c.positive("delta", true);
        c.positive("gamma", true);
        c.choice("convention", {"first_integral_squared", "first_integral_linear"});
        c.boolean("dump_fields");
        break;
      case ExperimentKind::barrier:
        c.number("R", true, 0.0, 1.0, true, true);
        c.boolean("dump_fields");
        break;
      case ExperimentKind::minimize:
      case ExperimentKind::sweep:
        if (c.has("initial")) field("initial", true);
        if (c.has("boundary")) {
          const auto& b = c.at("boundary");
          if (!b.is_object() || !b.contains("a") || !b.contains("b") || !b.at("a").is_number() ||
              !b.at("b").is_number() || !(b.at("a").get<double>() > 0) || !(b.at("b").get<double>() > 0)) {
            c.add("boundary", "must be {\"a\": > 0, \"b\": > 0} (u(-1) = -a, u(1) = b)");
          } else if (dim != 1) {
            c.add("boundary", "boundary data {a, b} needs a one-dimensional domain");
          }
        }
        if (!c.has("initial") && !c.has("boundary")) c.add("initial", "give \"initial\" or \"boundary\"");
        check_solver_keys(c);
        break;
      case ExperimentKind::oracle1d:
        c.positive("a", true);
        c.positive("b", true);
        c.integer("samples", 16, 100000000);
        break;
      case ExperimentKind::harmonic_check:
        c.integer("trials", 1, 1000000);
        c.positive("floor", false);
        break;
    }
  }

  if (!c.issues.empty()) throw ConfigError(std::move(c.issues));
  return cfg;
}

}  // namespace perimeter_phase
