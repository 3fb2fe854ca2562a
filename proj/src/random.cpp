#include "perimeter_phase/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "perimeter_phase/errors.hpp"

namespace perimeter_phase {

namespace {

std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(splitmix(seed ^ splitmix(stream + 0x632be59bd9b4e019ULL))) {}

std::uint64_t CounterRng::bits(std::uint64_t counter) const {
  return splitmix(key_ + counter * 0x9e3779b97f4a7c15ULL);
}

double CounterRng::uniform(std::uint64_t counter) const {
  return double(bits(counter) >> 11) * 0x1.0p-53;
}

double CounterRng::next_normal() {
  const double u1 = 1.0 - next_uniform();
  const double u2 = next_uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

CounterRng CounterRng::substream(std::uint64_t stream) const {
  CounterRng r(0);
  r.key_ = splitmix(key_ ^ splitmix(stream + 0xd1b54a32d192ed03ULL));
  return r;
}

ScalarField band_limited_field_1d(DomainPtr domain, CounterRng& rng, int modes, double amplitude,
                                  double bound) {
  if (domain->dim() != 1) fail(ErrorCode::domain, "band-limited field: domain must be 1D");
  std::vector<double> c(static_cast<std::size_t>(modes)), p(static_cast<std::size_t>(modes));
  for (int k = 0; k < modes; ++k) {
    c[std::size_t(k)] = rng.next_normal() * amplitude / (k + 1);
    p[std::size_t(k)] = rng.next_uniform(0.0, 2.0 * std::numbers::pi);
  }
  const double a = domain->lo().x();
  const double len = domain->hi().x() - a;
  return ScalarField::from_function(domain, [&](const Point& x) {
    double v = 0.0;
    for (int k = 0; k < modes; ++k) {
      v += c[std::size_t(k)] * std::sin((k + 1) * std::numbers::pi * (x.x() - a) / len + p[std::size_t(k)]);
    }
    return std::clamp(v, -bound, bound);
  });
}

ScalarField nonnegative_field_2d(DomainPtr domain, CounterRng& rng, double floor,
                                 Eigen::ArrayXd* level) {
  const Domain& d = *domain;
  if (d.dim() != 2 || !d.is_ball()) fail(ErrorCode::domain, "nonnegative field: domain must be a 2D ball");
  const Point c = d.ball_center();
  const double r0 = d.ball_radius();
  const int modes = 4;
  double ck[modes][modes], pk[modes][modes];
  for (int i = 0; i < modes; ++i) {
    for (int j = 0; j < modes; ++j) {
      ck[i][j] = rng.next_normal() / (1 + i + j);
      pk[i][j] = rng.next_uniform(0.0, 2.0 * std::numbers::pi);
    }
  }
  const double rim = rng.next_uniform(0.0, 0.5);
  const double depth = rng.next_uniform(0.2, 1.0);
  Eigen::ArrayXd f(d.node_count());
  for (Index k = 0; k < f.size(); ++k) {
    const Point y = (d.node(k) - c) / r0;
    double g = 0.0;
    for (int i = 0; i < modes; ++i) {
      for (int j = 0; j < modes; ++j) {
        g += ck[i][j] * std::cos(std::numbers::pi * (i * y.x() + j * y.y()) + pk[i][j]);
      }
    }
    const double inside = std::max(0.0, 1.0 - y.squaredNorm());
    f[k] = floor + rim * (1.0 + std::sin(3.0 * std::atan2(y.y(), y.x()))) / 2.0 +
           inside * (g - depth);
    if (d.is_boundary(k)) f[k] = std::max(f[k], floor);
  }
  if (level) *level = f;
  return ScalarField(std::move(domain), f.max(0.0));
}

}  // namespace perimeter_phase
