#pragma once

// The quartic double well W(t) = (1 - t^2)^2 on [-1, 1], extended by zero,
// together with its primitive H(t) = int_0^t 2 sqrt(W), the normalized
// primitive H~ = (2 / c0) H and the surface tension c0 = 2 H(1).

#include <Eigen/Core>

#include <cmath>
#include <type_traits>

#include "perimeter_phase/errors.hpp"

namespace perimeter_phase {

/// Anything but an Eigen expression; keeps the scalar overloads away from arrays.
template <typename T>
concept PointwiseScalar = !std::is_base_of_v<Eigen::DenseBase<T>, T>;

struct DoubleWell {
  template <PointwiseScalar Scalar>
  static constexpr Scalar w(Scalar t) {
    const Scalar a = t < Scalar(0) ? -t : t;
    if (a >= Scalar(1)) return Scalar(0);
    const Scalar q = Scalar(1) - t * t;
    return q * q;
  }

  template <PointwiseScalar Scalar>
  static constexpr Scalar w_prime(Scalar t) {
    const Scalar a = t < Scalar(0) ? -t : t;
    if (a >= Scalar(1)) return Scalar(0);
    return Scalar(-4) * t * (Scalar(1) - t * t);
  }

  /// Second derivative; one-sided from inside at |t| = 1 is 8, outside it is 0.
  template <PointwiseScalar Scalar>
  static constexpr Scalar w_second(Scalar t) {
    const Scalar a = t < Scalar(0) ? -t : t;
    if (a > Scalar(1)) return Scalar(0);
    return Scalar(12) * t * t - Scalar(4);
  }

  template <PointwiseScalar Scalar>
  static constexpr Scalar h(Scalar t) {
    if (t >= Scalar(1)) return Scalar(4) / Scalar(3);
    if (t <= Scalar(-1)) return Scalar(-4) / Scalar(3);
    return Scalar(2) * t - Scalar(2) * t * t * t / Scalar(3);
  }

  template <PointwiseScalar Scalar = double>
  static constexpr Scalar c0() {
    return Scalar(2) * h(Scalar(1));
  }

  template <PointwiseScalar Scalar>
  static constexpr Scalar h_tilde(Scalar t) {
    if (t >= Scalar(1)) return Scalar(1);
    if (t <= Scalar(-1)) return Scalar(-1);
    return t * (Scalar(3) - t * t) / Scalar(2);
  }

  /// Unique t in [-1, 1] with h_tilde(t) = y. Bisection on the monotone cubic,
  /// then Newton polish while the bracket is kept.
  template <PointwiseScalar Scalar>
  static Scalar h_tilde_inverse(Scalar y) {
    using std::abs;
    if (!(abs(y) <= Scalar(1))) {
      fail(ErrorCode::domain, "h_tilde_inverse: argument outside [-1, 1]");
    }
    if (y == Scalar(1) || y == Scalar(-1)) return y;
    Scalar lo = Scalar(-1);
    Scalar hi = Scalar(1);
    const Scalar tol = Scalar(1e-12);
    while (hi - lo > Scalar(1e-6)) {
      const Scalar mid = (lo + hi) / Scalar(2);
      if (h_tilde(mid) < y) lo = mid;
      else hi = mid;
    }
    Scalar t = (lo + hi) / Scalar(2);
    for (int it = 0; it < 50; ++it) {
      const Scalar slope = Scalar(3) * (Scalar(1) - t * t) / Scalar(2);
      Scalar next = t - (h_tilde(t) - y) / slope;
      if (!(next > lo && next < hi)) next = (lo + hi) / Scalar(2);
      if (h_tilde(next) < y) lo = next;
      else hi = next;
      const bool done = abs(next - t) <= tol;
      t = next;
      if (done || hi - lo <= tol) break;
    }
    return t;
  }

  // Coefficient-wise forms for Eigen arrays.
  template <typename Derived>
  static auto w(const Eigen::ArrayBase<Derived>& t) {
    return t.unaryExpr([](typename Derived::Scalar x) { return w(x); });
  }

  template <typename Derived>
  static auto w_prime(const Eigen::ArrayBase<Derived>& t) {
    return t.unaryExpr([](typename Derived::Scalar x) { return w_prime(x); });
  }

  template <typename Derived>
  static auto h_tilde(const Eigen::ArrayBase<Derived>& t) {
    return t.unaryExpr([](typename Derived::Scalar x) { return h_tilde(x); });
  }
};

/// Surface tension 8/3.
inline constexpr double kSurfaceTension = DoubleWell::c0<double>();

}  // namespace perimeter_phase
