#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "perimeter_phase/errors.hpp"
#include "perimeter_phase/geometry.hpp"

using namespace perimeter_phase;
using std::numbers::pi;

TEST_CASE("signed distance examples") {
  CHECK(Region::disc(Point(0, 0), 0.5).signed_distance(Point(0, 0)) == 0.5);
  CHECK(Region::half_plane(Point(1, 0), 0.0).signed_distance(Point(-0.3, 0.7)) == doctest::Approx(-0.3));
  CHECK(Region::interval(0, 1).signed_distance(Point(0.25, 0)) == 0.25);
  CHECK(signed_distance(Region::interval(0, 1), Point(1.5, 0)) == -0.5);
}

TEST_CASE("exact perimeter examples") {
  const auto line = Domain::interval(-1, 1, 64);
  CHECK(exact_perimeter(Region::interval(0, 1), *line) == 1.0);
  CHECK(exact_perimeter(Region::interval(-0.5, 0.5), *line) == 2.0);
  CHECK(exact_perimeter(Region::intervals({{-0.8, -0.6}, {0.1, 0.2}}), *line) == 4.0);
  CHECK(exact_perimeter(Region::full(), *line) == 0.0);

  const auto ball = Domain::ball(Point(0, 0), 1.0, 64, 2);
  CHECK(exact_perimeter(Region::disc(Point(0, 0), 0.5), *ball) == doctest::Approx(pi));
  CHECK(exact_perimeter(Region::half_plane(Point(1, 0), 0.0), *ball) == doctest::Approx(2.0));
  CHECK(exact_perimeter(Region::half_plane(Point(0, 1), 0.5), *ball) ==
        doctest::Approx(2 * std::sqrt(0.75)));
  // Disc centered on the ball boundary: the arc inside spans 2 acos(r / 2).
  CHECK(exact_perimeter(Region::disc(Point(1, 0), 0.5), *ball) ==
        doctest::Approx(2 * 0.5 * std::acos(0.25)).epsilon(1e-12));
  CHECK(exact_perimeter(Region::disc(Point(3, 0), 0.5), *ball) == 0.0);
  CHECK(exact_perimeter(Region::disc(Point(0, 0), 0.5).complement(), *ball) == doctest::Approx(pi));

  const auto box = Domain::box(Point(0, 0), Point(1, 1), 32);
  CHECK(exact_perimeter(Region::disc(Point(0, 0), 0.5), *box) == doctest::Approx(pi / 4));
  CHECK(exact_perimeter(Region::half_plane(Point(1, 1), 1.0), *box) == doctest::Approx(std::sqrt(2.0)));

  CHECK_THROWS_AS(exact_perimeter(Region::unite({Region::disc(Point(0, 0), 0.2),
                                                 Region::disc(Point(0.5, 0), 0.2)}),
                                  *ball),
                  Error);
  try {
    exact_perimeter(Region::intersect({Region::disc(Point(0, 0), 0.2)}), *ball);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::unsupported_region);
  }
}

TEST_CASE("interior boundary distance ignores the domain boundary") {
  const auto line = Domain::interval(-1, 1, 8);
  InteriorBoundary b(Region::interval(0, 1), *line);
  REQUIRE(b.pieces().size() == 1);
  CHECK(b.signed_distance(Point(0.9, 0)) == doctest::Approx(0.9));
  CHECK(b.signed_distance(Point(-0.4, 0)) == doctest::Approx(-0.4));
  InteriorBoundary full(Region::full(), *line);
  CHECK(std::isinf(full.signed_distance(Point(0.2, 0))));
  CHECK(full.signed_distance(Point(0.2, 0)) > 0);
}

TEST_CASE("rasterize examples") {
  const auto ball = Domain::ball(Point(0, 0), 1.0, 128, 2);
  const Mask all = rasterize(Region::full(), ball);
  CHECK(all.count() == ball->node_count());
  const Mask none = rasterize(Region::empty(), ball);
  CHECK(none.count() == 0);
  const Mask disc = rasterize(Region::disc(Point(0, 0), 0.5), ball);
  const double area = double(disc.count()) * ball->h() * ball->h();
  CHECK(std::abs(area - pi * 0.25) <= 0.02 * pi * 0.25);
  // Ties count as inside.
  const auto line = Domain::interval(-1, 1, 2);
  const Mask half = rasterize(Region::interval(0, 1), line);
  CHECK(half.inside[1] == 1);
}

TEST_CASE("marching squares perimeter of a disc on 1024^2") {
  const auto ball = Domain::ball(Point(0, 0), 1.0, 1024, 2);
  const double p = mask_perimeter(rasterize(Region::disc(Point(0, 0), 0.5), ball));
  CHECK(std::abs(p - pi) <= 0.005 * pi);
}

TEST_CASE("property: marching squares converges at least linearly") {
  const Region shapes[] = {Region::disc(Point(0.1, -0.05), 0.45),
                           Region::half_plane(Point(0.6, 0.8), 0.1)};
  for (const Region& r : shapes) {
    double prev = INFINITY;
    for (int n : {32, 64, 128, 256}) {
      const auto ball = Domain::ball(Point(0, 0), 1.0, n, 2);
      const double exact = exact_perimeter(r, *ball);
      const double err = std::abs(mask_perimeter(rasterize(r, ball)) - exact);
      const double h = ball->h();
      CHECK(err <= 2.0 * h);
      if (std::isfinite(prev)) CHECK((err <= 0.75 * prev || err <= 1e-11));
      prev = err;
    }
  }
}

TEST_CASE("boolean masks are smoothed before contouring") {
  const auto ball = Domain::ball(Point(0, 0), 1.0, 512, 2);
  const Mask sd = rasterize(Region::disc(Point(0, 0), 0.5), ball);
  const Mask b = Mask::from_booleans(ball, sd.inside);
  CHECK(std::abs(mask_perimeter(b) - pi) <= 0.01 * pi);
  const auto line = Domain::interval(-1, 1, 100);
  const Mask m = rasterize(Region::intervals({{-0.5, -0.2}, {0.3, 0.7}}), line);
  CHECK(mask_perimeter(Mask::from_booleans(line, m.inside)) == 4.0);
}

TEST_CASE("property: signed distance is 1-Lipschitz, complement flips sign") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> dist(-1.5, 1.5);
  const Region regions[] = {Region::disc(Point(0.2, 0.1), 0.5), Region::half_plane(Point(1, 2), 0.3),
                            Region::unite({Region::disc(Point(-0.5, 0), 0.2),
                                           Region::disc(Point(0.5, 0), 0.3)})};
  for (const Region& r : regions) {
    const Region c = r.complement();
    for (int i = 0; i < 10000; ++i) {
      const Point x(dist(rng), dist(rng));
      const Point y(dist(rng), dist(rng));
      CHECK(std::abs(r.signed_distance(x) - r.signed_distance(y)) <= (x - y).norm() + 1e-14);
      CHECK(c.signed_distance(x) == -r.signed_distance(x));
    }
  }
}

TEST_CASE("ball domain weights and node classes") {
  const auto ball = Domain::ball(Point(0, 0), 1.0, 128, 2);
  CHECK(std::abs(ball->measure() - pi) <= 1e-3);
  CHECK(std::abs(ball->node_weights().sum() - ball->measure()) <= 1e-12);
  const Index center = ball->node_index(64, 64);
  CHECK(ball->is_interior(center));
  CHECK(!ball->is_active(ball->node_index(0, 0)));
  Index boundary = 0;
  for (Index k = 0; k < ball->node_count(); ++k) {
    if (ball->is_boundary(k)) {
      ++boundary;
      CHECK(ball->node(k).norm() <= 1.0 + 2 * ball->h());
      CHECK(ball->node(k).norm() >= 1.0 - 2 * ball->h());
    }
  }
  CHECK(boundary > 0);
  const auto line = Domain::interval(-1, 1, 10);
  CHECK(line->is_boundary(0));
  CHECK(line->is_boundary(10));
  CHECK(line->is_interior(5));
  CHECK_THROWS_AS(Domain::box(Point(0, 0), Point(1, 2), 8), Error);
}

TEST_CASE("json round trips") {
  const auto d = Domain::ball(Point(0, 0), 1.0, 64, 2);
  const auto e = Domain::from_json(d->to_json());
  CHECK(e->n() == 64);
  CHECK(e->shape() == Domain::Shape::ball);
  CHECK(e->h() == d->h());
  const Region r = Region::unite({Region::disc(Point(0.1, 0), 0.3), Region::half_plane(Point(0, 1), 0.2).complement()});
  const Region s = Region::from_json(r.to_json());
  CHECK(s.signed_distance(Point(0.3, 0.4)) == r.signed_distance(Point(0.3, 0.4)));
  CHECK_THROWS_AS(Region::from_json(nlohmann::json{{"type", "torus"}}), Error);
  const Region iv = Region::from_json(nlohmann::json::parse(R"({"type":"interval","a":0,"b":1})"));
  CHECK(iv.contains(Point(0.5, 0)));
}
