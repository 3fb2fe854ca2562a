#pragma once

// One-dimensional optimal transition profiles.
//
// The standard profile solves 2 phi'' = eps^{-3/2} W'(phi / sqrt(eps)) with
// phi(0) = 0, phi'(0) = eps^{-1/2}; its first integral
// phi' = eps^{-1/2} sqrt(W(phi / sqrt(eps))) integrates to sqrt(eps) tanh(s / eps).
//
// The linear-tail profile solves the same equation with an added slope term in
// the first integral. It crosses sqrt(eps) in finite time and continues as a
// straight line afterwards.

#include <cmath>
#include <optional>
#include <string_view>
#include <vector>

#include "perimeter_phase/errors.hpp"
#include "perimeter_phase/potential.hpp"

namespace perimeter_phase {

template <typename Scalar>
Scalar phi(Scalar epsilon, Scalar s) {
  using std::sqrt;
  using std::tanh;
  if (!(epsilon > Scalar(0))) fail(ErrorCode::domain, "phi: epsilon must be positive");
  return sqrt(epsilon) * tanh(s / epsilon);
}

template <typename Scalar>
Scalar phi_derivative(Scalar epsilon, Scalar s) {
  using std::cosh;
  using std::sqrt;
  if (!(epsilon > Scalar(0))) fail(ErrorCode::domain, "phi: epsilon must be positive");
  const Scalar c = cosh(s / epsilon);
  if (!std::isfinite(double(c))) return Scalar(0);
  return Scalar(1) / (sqrt(epsilon) * c * c);
}

/// Transition half-width: max(eps * artanh(1 - kappa), eps^{3/4}).
/// Beyond it |phi| >= sqrt(eps) (1 - kappa) and the well density decays to
/// zero as eps -> 0.
double t_eps(double epsilon, double kappa);

/// sup of (1/eps) W(phi(eps, s) / sqrt(eps)) over t_lo <= |s| <= L, which is
/// attained at t_lo and equals sech^4(t_lo / eps) / eps.
double tail_well_sup(double epsilon, double t_lo, double L);

/// How the slope parameter theta enters the first integral of the
/// linear-tail profile.
enum class SlopeConvention {
  /// phi' = sqrt(W/eps + theta^2): tail slope exactly theta.
  first_integral_squared,
  /// phi' = sqrt(W/eps + theta): tail slope sqrt(theta).
  first_integral_linear,
};

std::string_view slope_convention_name(SlopeConvention convention);
SlopeConvention parse_slope_convention(std::string_view name);

/// Linear-tail profile integrated once by RK4 (step eps/64) up to the
/// crossing |phi| = sqrt(eps), located by bisection on the last partial step.
/// Odd extension to s < 0. Immutable after construction.
class ThetaProfile {
 public:
  ThetaProfile(double epsilon, double theta,
               SlopeConvention convention = SlopeConvention::first_integral_squared);

  double epsilon() const { return epsilon_; }
  double theta() const { return theta_; }
  SlopeConvention convention() const { return convention_; }

  /// Time at which the profile reaches sqrt(eps).
  double crossing_time() const { return crossing_; }
  /// Slope for |s| >= crossing_time().
  double tail_slope() const { return tail_slope_; }

  double value(double s) const;
  double derivative(double s) const;

 private:
  double rhs(double p) const;
  double advance(double p, double dt) const;

  double epsilon_;
  double theta_;
  SlopeConvention convention_;
  double slope_term_;
  double tail_slope_;
  double step_;
  double crossing_;
  std::vector<double> nodes_;  // values at s = k * step_, k < nodes_.size()
};

double phi_theta(double epsilon, double theta, double s,
                 SlopeConvention convention = SlopeConvention::first_integral_squared);
double t_eps_theta(double epsilon, double theta,
                   SlopeConvention convention = SlopeConvention::first_integral_squared);

/// Either profile kind behind one evaluation surface, used by the CLI.
class Profile {
 public:
  enum class Kind { standard, linear_tail };

  static Profile standard(double epsilon, double kappa = 0.1);
  static Profile linear_tail(double epsilon, double theta,
                             SlopeConvention convention = SlopeConvention::first_integral_squared);

  Kind kind() const { return kind_; }
  double epsilon() const { return epsilon_; }
  double theta() const { return theta_; }
  /// Transition half-width: t_eps(eps, kappa) for the standard kind, the
  /// crossing time for the linear-tail kind.
  double transition_half_width() const { return t_eps_; }

  double value(double s) const;
  double derivative(double s) const;
  /// (1/eps) W(value / sqrt(eps)).
  double well_density(double s) const;

 private:
  Profile(Kind kind, double epsilon, double theta, double t_eps);

  Kind kind_;
  double epsilon_;
  double theta_;
  double t_eps_;
  std::optional<ThetaProfile> theta_profile_;
};

}  // namespace perimeter_phase
