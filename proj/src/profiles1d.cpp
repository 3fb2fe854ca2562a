#include "perimeter_phase/profiles1d.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace perimeter_phase {

double t_eps(double epsilon, double kappa) {
  if (!(epsilon > 0.0)) fail(ErrorCode::domain, "t_eps: epsilon must be positive");
  if (!(kappa > 0.0 && kappa < 1.0)) fail(ErrorCode::domain, "t_eps: kappa must lie in (0, 1)");
  return std::max(epsilon * std::atanh(1.0 - kappa), std::pow(epsilon, 0.75));
}

double tail_well_sup(double epsilon, double t_lo, double L) {
  if (!(epsilon > 0.0)) fail(ErrorCode::domain, "tail_well_sup: epsilon must be positive");
  if (!(t_lo >= 0.0)) fail(ErrorCode::domain, "tail_well_sup: t_lo must be nonnegative");
  if (!(t_lo < L)) fail(ErrorCode::domain, "tail_well_sup: requires t_lo < L");
  const double x = t_lo / epsilon;
  // sech(x) = 2 e^{-x} / (1 + e^{-2x}), stable for large x.
  const double e = std::exp(-x);
  const double sech = 2.0 * e / (1.0 + e * e);
  const double s2 = sech * sech;
  return s2 * s2 / epsilon;
}

std::string_view slope_convention_name(SlopeConvention convention) {
  switch (convention) {
    case SlopeConvention::first_integral_squared: return "first_integral_squared";
    case SlopeConvention::first_integral_linear: return "first_integral_linear";
  }
  return "first_integral_squared";
}

SlopeConvention parse_slope_convention(std::string_view name) {
  if (name == "first_integral_squared") return SlopeConvention::first_integral_squared;
  if (name == "first_integral_linear") return SlopeConvention::first_integral_linear;
  fail(ErrorCode::config, "unknown slope convention '" + std::string(name) +
                              "' (allowed: first_integral_squared, first_integral_linear)");
}

ThetaProfile::ThetaProfile(double epsilon, double theta, SlopeConvention convention)
    : epsilon_(epsilon), theta_(theta), convention_(convention) {
  if (!(epsilon > 0.0)) fail(ErrorCode::domain, "phi_theta: epsilon must be positive");
  if (!(theta > 0.0)) fail(ErrorCode::domain, "phi_theta: theta must be positive");
  slope_term_ = convention == SlopeConvention::first_integral_squared ? theta * theta : theta;
  tail_slope_ = std::sqrt(slope_term_);
  step_ = epsilon / 64.0;

  const double target = std::sqrt(epsilon);
  const double max_steps = 64.0 * target / (epsilon * tail_slope_) + 2.0;
  if (max_steps > 5e7) {
    fail(ErrorCode::domain, "phi_theta: theta too small for the requested epsilon");
  }

  nodes_.reserve(static_cast<std::size_t>(max_steps) + 1);
  nodes_.push_back(0.0);
  for (;;) {
    const double p = nodes_.back();
    const double next = advance(p, step_);
    if (!(next > p)) fail(ErrorCode::internal, "phi_theta: RK4 step lost monotonicity");
    if (next >= target) {
      double lo = 0.0;
      double hi = step_;
      for (int it = 0; it < 64 && hi - lo > 1e-12 * step_; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (advance(p, mid) < target) lo = mid;
        else hi = mid;
      }
      crossing_ = static_cast<double>(nodes_.size() - 1) * step_ + 0.5 * (lo + hi);
      break;
    }
    nodes_.push_back(next);
  }
}

double ThetaProfile::rhs(double p) const {
  const double t = p / std::sqrt(epsilon_);
  return std::sqrt(DoubleWell::w(t) / epsilon_ + slope_term_);
}

double ThetaProfile::advance(double p, double dt) const {
  const double k1 = rhs(p);
  const double k2 = rhs(p + 0.5 * dt * k1);
  const double k3 = rhs(p + 0.5 * dt * k2);
  const double k4 = rhs(p + dt * k3);
  return p + dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
}

double ThetaProfile::value(double s) const {
  const double a = std::abs(s);
  const double sign = s < 0.0 ? -1.0 : 1.0;
  if (a >= crossing_) return sign * (std::sqrt(epsilon_) + tail_slope_ * (a - crossing_));
  const auto k = std::min(static_cast<std::size_t>(a / step_), nodes_.size() - 1);
  const double base = static_cast<double>(k) * step_;
  return sign * advance(nodes_[k], a - base);
}

double ThetaProfile::derivative(double s) const {
  if (std::abs(s) >= crossing_) return tail_slope_;
  return rhs(value(s));
}

double phi_theta(double epsilon, double theta, double s, SlopeConvention convention) {
  return ThetaProfile(epsilon, theta, convention).value(s);
}

double t_eps_theta(double epsilon, double theta, SlopeConvention convention) {
  return ThetaProfile(epsilon, theta, convention).crossing_time();
}

Profile::Profile(Kind kind, double epsilon, double theta, double t_eps)
    : kind_(kind), epsilon_(epsilon), theta_(theta), t_eps_(t_eps) {}

Profile Profile::standard(double epsilon, double kappa) {
  return Profile(Kind::standard, epsilon, 0.0, t_eps(epsilon, kappa));
}

Profile Profile::linear_tail(double epsilon, double theta, SlopeConvention convention) {
  ThetaProfile tp(epsilon, theta, convention);
  Profile p(Kind::linear_tail, epsilon, theta, tp.crossing_time());
  p.theta_profile_.emplace(std::move(tp));
  return p;
}

double Profile::value(double s) const {
  return kind_ == Kind::standard ? phi(epsilon_, s) : theta_profile_->value(s);
}

double Profile::derivative(double s) const {
  return kind_ == Kind::standard ? phi_derivative(epsilon_, s) : theta_profile_->derivative(s);
}

double Profile::well_density(double s) const {
  return DoubleWell::w(value(s) / std::sqrt(epsilon_)) / epsilon_;
}

}  // namespace perimeter_phase
