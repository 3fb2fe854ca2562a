#pragma once

// Uniform grids over intervals, boxes and balls; exact regions with signed
// distance and perimeter; node masks and their marching-squares perimeter.
//
// Points are always Eigen::Vector2d. One-dimensional objects use the first
// coordinate and keep the second at zero, so discs and half-planes double as
// intervals and half-lines.

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace perimeter_phase {

using Point = Eigen::Vector2d;
using Index = Eigen::Index;

/// Uniform grid of n cells per axis over an interval, a box or the bounding
/// box of a ball. Ball cells carry the fraction of their area inside the ball.
class Domain {
 public:
  enum class Shape { interval, box, ball };

  static std::shared_ptr<const Domain> interval(double a, double b, int n);
  static std::shared_ptr<const Domain> box(const Point& lo, const Point& hi, int n);
  /// dim = 1 gives the interval (center - radius, center + radius).
  static std::shared_ptr<const Domain> ball(const Point& center, double radius, int n, int dim);

  int dim() const { return dim_; }
  Shape shape() const { return shape_; }
  int n() const { return n_; }
  double h() const { return h_; }
  const Point& lo() const { return lo_; }
  const Point& hi() const { return hi_; }

  /// Ball center and radius; intervals count as one-dimensional balls.
  Point ball_center() const;
  double ball_radius() const;
  bool is_ball() const { return shape_ != Shape::box; }

  Index nodes_per_axis() const { return n_ + 1; }
  Index node_count() const { return dim_ == 1 ? n_ + 1 : Index(n_ + 1) * (n_ + 1); }
  Index cell_count() const { return dim_ == 1 ? n_ : Index(n_) * n_; }
  double cell_volume() const { return dim_ == 1 ? h_ : h_ * h_; }

  Index node_index(Index i, Index j = 0) const { return i + (n_ + 1) * j; }
  Point node(Index k) const;
  Point cell_center(Index c) const;
  /// Corner node indices; in 1D only the first two entries are meaningful.
  std::array<Index, 4> cell_corners(Index c) const;
  int corners_per_cell() const { return dim_ == 1 ? 2 : 4; }

  double cell_weight(Index c) const { return cell_weight_[c]; }
  const Eigen::ArrayXd& cell_weights() const { return cell_weight_; }
  /// Lumped volume: sum over adjacent cells of weight * volume / corners.
  double node_weight(Index k) const { return node_weight_[k]; }
  const Eigen::ArrayXd& node_weights() const { return node_weight_; }

  bool is_active(Index k) const { return node_state_[k] != 0; }
  bool is_boundary(Index k) const { return node_state_[k] == 1; }
  bool is_interior(Index k) const { return node_state_[k] == 2; }

  /// Total measure of the domain as seen by the quadrature.
  double measure() const { return cell_weight_.sum() * cell_volume(); }
  /// Exact measure of the continuous shape.
  double exact_measure() const;

  bool contains(const Point& x) const;
  bool contains_open(const Point& x, double margin = 0.0) const;

  nlohmann::json to_json() const;
  static std::shared_ptr<const Domain> from_json(const nlohmann::json& j);

 private:
  Domain() = default;
  void finalize();

  int dim_ = 1;
  Shape shape_ = Shape::interval;
  int n_ = 0;
  double h_ = 0.0;
  Point lo_ = Point::Zero();
  Point hi_ = Point::Zero();
  Point center_ = Point::Zero();
  double radius_ = 0.0;
  Eigen::ArrayXd cell_weight_;
  Eigen::ArrayXd node_weight_;
  std::vector<std::uint8_t> node_state_;  // 0 inactive, 1 boundary, 2 interior
};

using DomainPtr = std::shared_ptr<const Domain>;

/// Exact set built from primitives. Signed distance is positive inside.
/// Unions and intersections compose by max/min, which is exact for the
/// disjoint and nested configurations used here.
class Region {
 public:
  struct Full {};
  struct Empty {};
  struct Interval { double a, b; };
  struct Disc { Point center; double radius; };
  /// {x : normal . x > offset}, normal of unit length.
  struct HalfPlane { Point normal; double offset; };

  static Region full();
  static Region empty();
  static Region interval(double a, double b);
  static Region intervals(const std::vector<std::pair<double, double>>& list);
  static Region disc(const Point& center, double radius);
  static Region half_plane(const Point& normal, double offset);

  Region complement() const;
  static Region unite(std::vector<Region> parts);
  static Region intersect(std::vector<Region> parts);

  double signed_distance(const Point& x) const;
  bool contains(const Point& x) const { return signed_distance(x) >= 0.0; }

  /// Axis-aligned bounding box when the region is bounded.
  std::optional<std::pair<Point, Point>> bounded_extent() const;

  enum class Kind { full, empty, interval, disc, half_plane, complement, unite, intersect };
  Kind kind() const;
  const Interval& as_interval() const;
  const Disc& as_disc() const;
  const HalfPlane& as_half_plane() const;
  const std::vector<Region>& children() const;

  nlohmann::json to_json() const;
  static Region from_json(const nlohmann::json& j);

 private:
  struct Node;
  explicit Region(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// A connected piece of the region boundary lying inside the domain.
struct BoundaryPiece {
  enum class Kind { point, arc, segment };
  Kind kind = Kind::point;
  Point a = Point::Zero();       // point, or segment start
  Point b = Point::Zero();       // segment end
  Point center = Point::Zero();  // arc
  double radius = 0.0;
  double theta0 = 0.0;  // arc spans [theta0, theta1], theta1 - theta0 <= 2 pi
  double theta1 = 0.0;

  /// Length (arcs, segments) or counting measure (points).
  double measure() const;
  double distance(const Point& x) const;
};

/// The part of the boundary of a region inside the open domain, with the
/// signed distance to it. This is the distance used by constructions that
/// must ignore boundary portions lying on or outside the domain boundary.
class InteriorBoundary {
 public:
  InteriorBoundary(Region region, const Domain& domain);

  const Region& region() const { return region_; }
  const std::vector<BoundaryPiece>& pieces() const { return pieces_; }
  /// Sum of piece measures: point count in 1D, length in 2D.
  double perimeter() const;
  /// Signed by membership, magnitude = distance to the interior boundary;
  /// +-infinity when the boundary misses the domain.
  double signed_distance(const Point& x) const;

 private:
  Region region_;
  std::vector<BoundaryPiece> pieces_;
};

double signed_distance(const Region& region, const Point& x);

/// Perimeter of the region inside the open domain, analytic per primitive.
/// Throws unsupported_region for 2D unions and intersections.
double exact_perimeter(const Region& region, const Domain& domain);

/// Node set with a level function whose zero set is the interface; inside is
/// level >= 0 unless given explicitly.
struct Mask {
  DomainPtr domain;
  std::vector<std::uint8_t> inside;
  Eigen::ArrayXd level;

  static Mask from_level(DomainPtr domain, Eigen::ArrayXd level);
  /// Level taken as a Gaussian-smoothed indicator (sigma = 1.5 cells) minus
  /// one half, so contours of purely boolean data stay nearly isotropic.
  static Mask from_booleans(DomainPtr domain, std::vector<std::uint8_t> inside);

  Index count() const;
};

/// Mask of nodes with signed_distance >= 0; the level is the signed distance.
Mask rasterize(const Region& region, DomainPtr domain);

/// Interface measure of a mask: sign changes between neighbouring active
/// nodes in 1D, marching-squares contour length of the level in 2D.
/// When `cells` is given only cells with a nonzero entry contribute.
double mask_perimeter(const Mask& mask, const std::vector<std::uint8_t>* cells = nullptr);

/// Cells whose center lies in the region (signed distance >= 0).
std::vector<std::uint8_t> cells_in(const Region& region, const Domain& domain);

}  // namespace perimeter_phase
