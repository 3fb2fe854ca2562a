#include "perimeter_phase/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "perimeter_phase/errors.hpp"

namespace perimeter_phase {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLevelClamp = 1e6;

double normalize_angle(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  return r;
}

Point read_point(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.empty() || j.size() > 2) {
    fail(ErrorCode::config, std::string(what) + ": expected an array of 1 or 2 numbers");
  }
  Point p = Point::Zero();
  for (std::size_t i = 0; i < j.size(); ++i) p[Index(i)] = j[i].get<double>();
  return p;
}

nlohmann::json write_point(const Point& p, int dim) {
  if (dim == 1) return nlohmann::json::array({p.x()});
  return nlohmann::json::array({p.x(), p.y()});
}

}  // namespace

// ---------------------------------------------------------------- Domain

DomainPtr Domain::interval(double a, double b, int n) {
  if (!(a < b)) fail(ErrorCode::domain, "interval domain requires a < b");
  if (n < 1) fail(ErrorCode::domain, "domain requires n >= 1");
  auto d = std::shared_ptr<Domain>(new Domain());
  d->dim_ = 1;
  d->shape_ = Shape::interval;
  d->n_ = n;
  d->lo_ = Point(a, 0.0);
  d->hi_ = Point(b, 0.0);
  d->h_ = (b - a) / n;
  d->center_ = Point(0.5 * (a + b), 0.0);
  d->radius_ = 0.5 * (b - a);
  d->finalize();
  return d;
}

DomainPtr Domain::box(const Point& lo, const Point& hi, int n) {
  if (!(lo.x() < hi.x() && lo.y() < hi.y())) fail(ErrorCode::domain, "box domain requires lo < hi");
  if (n < 1) fail(ErrorCode::domain, "domain requires n >= 1");
  const double wx = hi.x() - lo.x();
  const double wy = hi.y() - lo.y();
  if (std::abs(wx - wy) > 1e-12 * std::max(wx, wy)) {
    fail(ErrorCode::domain, "box domain must be square (one spacing h for both axes)");
  }
  auto d = std::shared_ptr<Domain>(new Domain());
  d->dim_ = 2;
  d->shape_ = Shape::box;
  d->n_ = n;
  d->lo_ = lo;
  d->hi_ = hi;
  d->h_ = wx / n;
  d->center_ = 0.5 * (lo + hi);
  d->finalize();
  return d;
}

DomainPtr Domain::ball(const Point& center, double radius, int n, int dim) {
  if (!(radius > 0.0)) fail(ErrorCode::domain, "ball domain requires a positive radius");
  if (dim != 1 && dim != 2) fail(ErrorCode::domain, "ball domain dimension must be 1 or 2");
  if (n < 1) fail(ErrorCode::domain, "domain requires n >= 1");
  if (dim == 1) {
    auto d = std::const_pointer_cast<Domain>(interval(center.x() - radius, center.x() + radius, n));
    d->shape_ = Shape::ball;
    return d;
  }
  auto d = std::shared_ptr<Domain>(new Domain());
  d->dim_ = 2;
  d->shape_ = Shape::ball;
  d->n_ = n;
  d->center_ = center;
  d->radius_ = radius;
  d->lo_ = center - Point(radius, radius);
  d->hi_ = center + Point(radius, radius);
  d->h_ = 2.0 * radius / n;
  d->finalize();
  return d;
}

void Domain::finalize() {
  const Index cells = cell_count();
  const Index nodes = node_count();
  cell_weight_ = Eigen::ArrayXd::Ones(cells);

  if (dim_ == 2 && shape_ == Shape::ball) {
    constexpr int kSub = 16;
    for (Index j = 0; j < n_; ++j) {
      for (Index i = 0; i < n_; ++i) {
        const Point p0 = lo_ + h_ * Point(double(i), double(j));
        const Point p1 = p0 + Point(h_, h_);
        const Point nearest(std::clamp(center_.x(), p0.x(), p1.x()),
                            std::clamp(center_.y(), p0.y(), p1.y()));
        const double far_x = std::max(std::abs(p0.x() - center_.x()), std::abs(p1.x() - center_.x()));
        const double far_y = std::max(std::abs(p0.y() - center_.y()), std::abs(p1.y() - center_.y()));
        double w;
        if (std::hypot(far_x, far_y) <= radius_) {
          w = 1.0;
        } else if ((nearest - center_).norm() >= radius_) {
          w = 0.0;
        } else {
          int count = 0;
          for (int b = 0; b < kSub; ++b) {
            for (int a = 0; a < kSub; ++a) {
              const Point q = p0 + h_ * Point((a + 0.5) / kSub, (b + 0.5) / kSub);
              if ((q - center_).squaredNorm() <= radius_ * radius_) ++count;
            }
          }
          w = double(count) / double(kSub * kSub);
        }
        cell_weight_[i + Index(n_) * j] = w;
      }
    }
  }

  node_weight_ = Eigen::ArrayXd::Zero(nodes);
  const double share = cell_volume() / corners_per_cell();
  for (Index c = 0; c < cells; ++c) {
    const double w = cell_weight_[c];
    if (w <= 0.0) continue;
    const auto corners = cell_corners(c);
    for (int k = 0; k < corners_per_cell(); ++k) node_weight_[corners[k]] += w * share;
  }

  node_state_.assign(std::size_t(nodes), 0);
  if (dim_ == 1) {
    for (Index k = 0; k < nodes; ++k) node_state_[k] = (k == 0 || k == n_) ? 1 : 2;
    return;
  }
  for (Index j = 0; j <= n_; ++j) {
    for (Index i = 0; i <= n_; ++i) {
      const Index k = node_index(i, j);
      if (node_weight_[k] <= 0.0) continue;
      bool interior = i > 0 && j > 0 && i < n_ && j < n_;
      if (interior) {
        for (Index dj = -1; dj <= 0 && interior; ++dj) {
          for (Index di = -1; di <= 0; ++di) {
            if (cell_weight_[(i + di) + Index(n_) * (j + dj)] < 1.0) {
              interior = false;
              break;
            }
          }
        }
      }
      node_state_[k] = interior ? 2 : 1;
    }
  }
}

Point Domain::ball_center() const {
  if (!is_ball()) fail(ErrorCode::domain, "domain is not a ball");
  return center_;
}

double Domain::ball_radius() const {
  if (!is_ball()) fail(ErrorCode::domain, "domain is not a ball");
  return radius_;
}

Point Domain::node(Index k) const {
  if (dim_ == 1) return Point(lo_.x() + h_ * double(k), 0.0);
  const Index i = k % (n_ + 1);
  const Index j = k / (n_ + 1);
  return lo_ + h_ * Point(double(i), double(j));
}

Point Domain::cell_center(Index c) const {
  if (dim_ == 1) return Point(lo_.x() + h_ * (double(c) + 0.5), 0.0);
  const Index i = c % n_;
  const Index j = c / n_;
  return lo_ + h_ * Point(double(i) + 0.5, double(j) + 0.5);
}

std::array<Index, 4> Domain::cell_corners(Index c) const {
  if (dim_ == 1) return {c, c + 1, 0, 0};
  const Index i = c % n_;
  const Index j = c / n_;
  const Index k = node_index(i, j);
  return {k, k + 1, k + n_ + 1, k + n_ + 2};
}

double Domain::exact_measure() const {
  if (dim_ == 1) return hi_.x() - lo_.x();
  if (shape_ == Shape::box) return (hi_.x() - lo_.x()) * (hi_.y() - lo_.y());
  return std::numbers::pi * radius_ * radius_;
}

bool Domain::contains(const Point& x) const {
  if (dim_ == 1) return x.x() >= lo_.x() && x.x() <= hi_.x();
  if (shape_ == Shape::box) {
    return x.x() >= lo_.x() && x.x() <= hi_.x() && x.y() >= lo_.y() && x.y() <= hi_.y();
  }
  return (x - center_).norm() <= radius_;
}

bool Domain::contains_open(const Point& x, double margin) const {
  if (dim_ == 1) return x.x() > lo_.x() + margin && x.x() < hi_.x() - margin;
  if (shape_ == Shape::box) {
    return x.x() > lo_.x() + margin && x.x() < hi_.x() - margin && x.y() > lo_.y() + margin &&
           x.y() < hi_.y() - margin;
  }
  return (x - center_).norm() < radius_ - margin;
}

nlohmann::json Domain::to_json() const {
  nlohmann::json shape;
  switch (shape_) {
    case Shape::interval:
      shape = {{"type", "interval"}, {"a", lo_.x()}, {"b", hi_.x()}};
      break;
    case Shape::box:
      shape = {{"type", "box"}, {"lo", write_point(lo_, 2)}, {"hi", write_point(hi_, 2)}};
      break;
    case Shape::ball:
      shape = {{"type", "ball"}, {"center", write_point(center_, dim_)}, {"radius", radius_}};
      break;
  }
  return {{"dim", dim_}, {"n", n_}, {"h", h_}, {"shape", shape}};
}

DomainPtr Domain::from_json(const nlohmann::json& j) {
  try {
    const nlohmann::json& shape = j.contains("shape") ? j.at("shape") : j;
    const int n = j.at("n").get<int>();
    const std::string type = shape.at("type").get<std::string>();
    if (type == "interval") return interval(shape.at("a").get<double>(), shape.at("b").get<double>(), n);
    if (type == "box") return box(read_point(shape.at("lo"), "lo"), read_point(shape.at("hi"), "hi"), n);
    if (type == "ball") {
      const auto& c = shape.at("center");
      const int dim = j.contains("dim") ? j.at("dim").get<int>() : int(c.size());
      return ball(read_point(c, "center"), shape.at("radius").get<double>(), n, dim);
    }
    fail(ErrorCode::config, "unknown domain type '" + type + "' (allowed: interval, box, ball)");
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::config, std::string("domain description: ") + e.what());
  }
}

// ---------------------------------------------------------------- Region

struct Region::Node {
  Kind kind;
  std::variant<Full, Empty, Interval, Disc, HalfPlane> primitive;
  std::vector<Region> children;
};

Region Region::full() { return Region(std::make_shared<Node>(Node{Kind::full, Full{}, {}})); }
Region Region::empty() { return Region(std::make_shared<Node>(Node{Kind::empty, Empty{}, {}})); }

Region Region::interval(double a, double b) {
  if (!(a < b)) fail(ErrorCode::domain, "interval region requires a < b");
  return Region(std::make_shared<Node>(Node{Kind::interval, Interval{a, b}, {}}));
}

Region Region::intervals(const std::vector<std::pair<double, double>>& list) {
  if (list.empty()) return empty();
  std::vector<Region> parts;
  for (const auto& [a, b] : list) parts.push_back(interval(a, b));
  return parts.size() == 1 ? parts.front() : unite(std::move(parts));
}

Region Region::disc(const Point& center, double radius) {
  if (!(radius > 0.0)) fail(ErrorCode::domain, "disc region requires a positive radius");
  return Region(std::make_shared<Node>(Node{Kind::disc, Disc{center, radius}, {}}));
}

Region Region::half_plane(const Point& normal, double offset) {
  const double len = normal.norm();
  if (!(len > 0.0)) fail(ErrorCode::domain, "half-plane normal must be nonzero");
  return Region(std::make_shared<Node>(
      Node{Kind::half_plane, HalfPlane{normal / len, offset / len}, {}}));
}

Region Region::complement() const {
  return Region(std::make_shared<Node>(Node{Kind::complement, Full{}, {*this}}));
}

Region Region::unite(std::vector<Region> parts) {
  if (parts.empty()) return empty();
  return Region(std::make_shared<Node>(Node{Kind::unite, Full{}, std::move(parts)}));
}

Region Region::intersect(std::vector<Region> parts) {
  if (parts.empty()) return full();
  return Region(std::make_shared<Node>(Node{Kind::intersect, Full{}, std::move(parts)}));
}

Region::Kind Region::kind() const { return node_->kind; }
const Region::Interval& Region::as_interval() const { return std::get<Interval>(node_->primitive); }
const Region::Disc& Region::as_disc() const { return std::get<Disc>(node_->primitive); }
const Region::HalfPlane& Region::as_half_plane() const { return std::get<HalfPlane>(node_->primitive); }
const std::vector<Region>& Region::children() const { return node_->children; }

double Region::signed_distance(const Point& x) const {
  switch (node_->kind) {
    case Kind::full: return kInf;
    case Kind::empty: return -kInf;
    case Kind::interval: {
      const auto& iv = as_interval();
      return std::min(x.x() - iv.a, iv.b - x.x());
    }
    case Kind::disc: {
      const auto& d = as_disc();
      return d.radius - (x - d.center).norm();
    }
    case Kind::half_plane: {
      const auto& hp = as_half_plane();
      return hp.normal.dot(x) - hp.offset;
    }
    case Kind::complement: return -node_->children.front().signed_distance(x);
    case Kind::unite: {
      double best = -kInf;
      for (const auto& c : node_->children) best = std::max(best, c.signed_distance(x));
      return best;
    }
    case Kind::intersect: {
      double best = kInf;
      for (const auto& c : node_->children) best = std::min(best, c.signed_distance(x));
      return best;
    }
  }
  return -kInf;
}

std::optional<std::pair<Point, Point>> Region::bounded_extent() const {
  switch (node_->kind) {
    case Kind::full:
    case Kind::half_plane:
    case Kind::complement:
      return std::nullopt;
    case Kind::empty:
      return std::pair<Point, Point>{Point(kInf, kInf), Point(-kInf, -kInf)};
    case Kind::interval: {
      const auto& iv = as_interval();
      return std::pair<Point, Point>{Point(iv.a, 0.0), Point(iv.b, 0.0)};
    }
    case Kind::disc: {
      const auto& d = as_disc();
      const Point r(d.radius, d.radius);
      return std::pair<Point, Point>{d.center - r, d.center + r};
    }
    case Kind::unite: {
      std::pair<Point, Point> box{Point(kInf, kInf), Point(-kInf, -kInf)};
      for (const auto& c : node_->children) {
        const auto e = c.bounded_extent();
        if (!e) return std::nullopt;
        box.first = box.first.cwiseMin(e->first);
        box.second = box.second.cwiseMax(e->second);
      }
      return box;
    }
    case Kind::intersect: {
      std::optional<std::pair<Point, Point>> box;
      for (const auto& c : node_->children) {
        const auto e = c.bounded_extent();
        if (!e) continue;
        if (!box) box = e;
        else {
          box->first = box->first.cwiseMax(e->first);
          box->second = box->second.cwiseMin(e->second);
        }
      }
      return box;
    }
  }
  return std::nullopt;
}

nlohmann::json Region::to_json() const {
  switch (node_->kind) {
    case Kind::full: return {{"type", "full"}};
    case Kind::empty: return {{"type", "empty"}};
    case Kind::interval: return {{"type", "interval"}, {"a", as_interval().a}, {"b", as_interval().b}};
    case Kind::disc:
      return {{"type", "disc"},
              {"center", write_point(as_disc().center, 2)},
              {"radius", as_disc().radius}};
    case Kind::half_plane:
      return {{"type", "half_plane"},
              {"normal", write_point(as_half_plane().normal, 2)},
              {"offset", as_half_plane().offset}};
    case Kind::complement: return {{"type", "complement"}, {"of", children().front().to_json()}};
    case Kind::unite:
    case Kind::intersect: {
      nlohmann::json parts = nlohmann::json::array();
      for (const auto& c : children()) parts.push_back(c.to_json());
      return {{"type", node_->kind == Kind::unite ? "union" : "intersection"}, {"of", parts}};
    }
  }
  return {};
}

Region Region::from_json(const nlohmann::json& j) {
  try {
    const std::string type = j.at("type").get<std::string>();
    if (type == "full") return full();
    if (type == "empty") return empty();
    if (type == "interval") return interval(j.at("a").get<double>(), j.at("b").get<double>());
    if (type == "intervals") {
      std::vector<std::pair<double, double>> list;
      for (const auto& p : j.at("list")) list.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
      return intervals(list);
    }
    if (type == "disc") return disc(read_point(j.at("center"), "center"), j.at("radius").get<double>());
    if (type == "half_plane") {
      return half_plane(read_point(j.at("normal"), "normal"), j.value("offset", 0.0));
    }
    if (type == "complement") return from_json(j.at("of")).complement();
    if (type == "union" || type == "intersection") {
      std::vector<Region> parts;
      for (const auto& p : j.at("of")) parts.push_back(from_json(p));
      return type == "union" ? unite(std::move(parts)) : intersect(std::move(parts));
    }
    fail(ErrorCode::config,
         "unknown region type '" + type +
             "' (allowed: full, empty, interval, intervals, disc, half_plane, complement, union, "
             "intersection)");
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::config, std::string("region description: ") + e.what());
  }
}

double signed_distance(const Region& region, const Point& x) { return region.signed_distance(x); }

// ---------------------------------------------------------------- boundary pieces

double BoundaryPiece::measure() const {
  switch (kind) {
    case Kind::point: return 1.0;
    case Kind::arc: return radius * (theta1 - theta0);
    case Kind::segment: return (b - a).norm();
  }
  return 0.0;
}

double BoundaryPiece::distance(const Point& x) const {
  switch (kind) {
    case Kind::point: return (x - a).norm();
    case Kind::segment: {
      const Point d = b - a;
      const double len2 = d.squaredNorm();
      const double t = len2 > 0.0 ? std::clamp((x - a).dot(d) / len2, 0.0, 1.0) : 0.0;
      return (x - (a + t * d)).norm();
    }
    case Kind::arc: {
      const Point rel = x - center;
      const double r = rel.norm();
      if (r > 0.0) {
        const double ang = normalize_angle(std::atan2(rel.y(), rel.x()) - theta0);
        if (ang <= theta1 - theta0) return std::abs(r - radius);
      } else {
        return radius;
      }
      const Point e0 = center + radius * Point(std::cos(theta0), std::sin(theta0));
      const Point e1 = center + radius * Point(std::cos(theta1), std::sin(theta1));
      return std::min((x - e0).norm(), (x - e1).norm());
    }
  }
  return kInf;
}

namespace {

void collect_1d_candidates(const Region& r, std::vector<double>& out) {
  switch (r.kind()) {
    case Region::Kind::interval:
      out.push_back(r.as_interval().a);
      out.push_back(r.as_interval().b);
      break;
    case Region::Kind::disc:
      out.push_back(r.as_disc().center.x() - r.as_disc().radius);
      out.push_back(r.as_disc().center.x() + r.as_disc().radius);
      break;
    case Region::Kind::half_plane: {
      const auto& hp = r.as_half_plane();
      if (hp.normal.x() != 0.0) out.push_back(hp.offset / hp.normal.x());
      break;
    }
    case Region::Kind::complement:
    case Region::Kind::unite:
    case Region::Kind::intersect:
      for (const auto& c : r.children()) collect_1d_candidates(c, out);
      break;
    default:
      break;
  }
}

const Region& strip_complements(const Region& r) {
  const Region* cur = &r;
  while (cur->kind() == Region::Kind::complement) cur = &cur->children().front();
  return *cur;
}

std::vector<BoundaryPiece> disc_pieces(const Region::Disc& disc, const Domain& domain) {
  std::vector<double> angles;
  const Point& c = disc.center;
  const double r = disc.radius;
  if (domain.shape() == Domain::Shape::ball) {
    const Point c2 = domain.ball_center();
    const double r2 = domain.ball_radius();
    const double d = (c2 - c).norm();
    if (d > 0.0 && d < r + r2 && d > std::abs(r - r2)) {
      const double base = std::atan2(c2.y() - c.y(), c2.x() - c.x());
      const double beta = std::acos(std::clamp((r * r + d * d - r2 * r2) / (2.0 * r * d), -1.0, 1.0));
      angles.push_back(normalize_angle(base + beta));
      angles.push_back(normalize_angle(base - beta));
    }
  } else {
    for (double X : {domain.lo().x(), domain.hi().x()}) {
      const double q = (X - c.x()) / r;
      if (std::abs(q) <= 1.0) {
        angles.push_back(normalize_angle(std::acos(q)));
        angles.push_back(normalize_angle(-std::acos(q)));
      }
    }
    for (double Y : {domain.lo().y(), domain.hi().y()}) {
      const double q = (Y - c.y()) / r;
      if (std::abs(q) <= 1.0) {
        angles.push_back(normalize_angle(std::asin(q)));
        angles.push_back(normalize_angle(std::numbers::pi - std::asin(q)));
      }
    }
  }
  std::sort(angles.begin(), angles.end());
  angles.erase(std::unique(angles.begin(), angles.end(),
                           [](double a, double b) { return std::abs(a - b) < 1e-14; }),
               angles.end());

  auto at = [&](double t) { return Point(c + r * Point(std::cos(t), std::sin(t))); };
  std::vector<BoundaryPiece> out;
  if (angles.empty()) {
    if (domain.contains_open(at(0.0))) {
      BoundaryPiece p;
      p.kind = BoundaryPiece::Kind::arc;
      p.center = c;
      p.radius = r;
      p.theta0 = 0.0;
      p.theta1 = kTwoPi;
      out.push_back(p);
    }
    return out;
  }
  for (std::size_t k = 0; k < angles.size(); ++k) {
    const double t0 = angles[k];
    const double t1 = k + 1 < angles.size() ? angles[k + 1] : angles.front() + kTwoPi;
    if (t1 - t0 <= 0.0) continue;
    if (!domain.contains_open(at(0.5 * (t0 + t1)))) continue;
    BoundaryPiece p;
    p.kind = BoundaryPiece::Kind::arc;
    p.center = c;
    p.radius = r;
    p.theta0 = t0;
    p.theta1 = t1;
    out.push_back(p);
  }
  return out;
}

std::vector<BoundaryPiece> line_pieces(const Region::HalfPlane& hp, const Domain& domain) {
  const Point p0 = hp.offset * hp.normal;
  const Point t(-hp.normal.y(), hp.normal.x());
  std::vector<double> taus;
  if (domain.shape() == Domain::Shape::ball) {
    const Point q = p0 - domain.ball_center();
    const double b = q.dot(t);
    const double disc = b * b - q.squaredNorm() + domain.ball_radius() * domain.ball_radius();
    if (disc > 0.0) {
      taus.push_back(-b - std::sqrt(disc));
      taus.push_back(-b + std::sqrt(disc));
    }
  } else {
    if (t.x() != 0.0) {
      for (double X : {domain.lo().x(), domain.hi().x()}) taus.push_back((X - p0.x()) / t.x());
    }
    if (t.y() != 0.0) {
      for (double Y : {domain.lo().y(), domain.hi().y()}) taus.push_back((Y - p0.y()) / t.y());
    }
  }
  std::sort(taus.begin(), taus.end());
  std::vector<BoundaryPiece> out;
  for (std::size_t k = 0; k + 1 < taus.size(); ++k) {
    if (taus[k + 1] - taus[k] <= 0.0) continue;
    const Point mid = p0 + 0.5 * (taus[k] + taus[k + 1]) * t;
    if (!domain.contains_open(mid)) continue;
    BoundaryPiece p;
    p.kind = BoundaryPiece::Kind::segment;
    p.a = p0 + taus[k] * t;
    p.b = p0 + taus[k + 1] * t;
    out.push_back(p);
  }
  return out;
}

// Length of the part of segment [p, q] inside the disc (c, r).
double clipped_length(const Point& p, const Point& q, const Point& c, double r) {
  const Point d = q - p;
  const double a = d.squaredNorm();
  if (a == 0.0) return 0.0;
  const Point f = p - c;
  const double b = f.dot(d);
  const double disc = b * b - a * (f.squaredNorm() - r * r);
  if (disc <= 0.0) return 0.0;
  const double root = std::sqrt(disc);
  const double t0 = std::max(0.0, (-b - root) / a);
  const double t1 = std::min(1.0, (-b + root) / a);
  return t1 > t0 ? (t1 - t0) * std::sqrt(a) : 0.0;
}

}  // namespace

InteriorBoundary::InteriorBoundary(Region region, const Domain& domain) : region_(std::move(region)) {
  if (domain.dim() == 1) {
    std::vector<double> candidates;
    collect_1d_candidates(region_, candidates);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    const double a = domain.lo().x();
    const double b = domain.hi().x();
    const double eta = 1e-9 * (b - a);
    for (double p : candidates) {
      if (!(p > a && p < b)) continue;
      if (region_.contains(Point(p - eta, 0.0)) == region_.contains(Point(p + eta, 0.0))) continue;
      BoundaryPiece piece;
      piece.kind = BoundaryPiece::Kind::point;
      piece.a = Point(p, 0.0);
      pieces_.push_back(piece);
    }
    return;
  }
  const Region& core = strip_complements(region_);
  switch (core.kind()) {
    case Region::Kind::full:
    case Region::Kind::empty:
      return;
    case Region::Kind::disc:
      pieces_ = disc_pieces(core.as_disc(), domain);
      return;
    case Region::Kind::half_plane:
      pieces_ = line_pieces(core.as_half_plane(), domain);
      return;
    default:
      fail(ErrorCode::unsupported_region,
           "exact boundary of 2D unions, intersections and intervals is not supported");
  }
}

double InteriorBoundary::perimeter() const {
  double sum = 0.0;
  for (const auto& p : pieces_) sum += p.measure();
  return sum;
}

double InteriorBoundary::signed_distance(const Point& x) const {
  const double sign = region_.contains(x) ? 1.0 : -1.0;
  double best = kInf;
  for (const auto& p : pieces_) best = std::min(best, p.distance(x));
  return sign * best;
}

double exact_perimeter(const Region& region, const Domain& domain) {
  return InteriorBoundary(region, domain).perimeter();
}

// ---------------------------------------------------------------- masks

Mask Mask::from_level(DomainPtr domain, Eigen::ArrayXd level) {
  Mask m;
  m.inside.resize(std::size_t(level.size()));
  for (Index k = 0; k < level.size(); ++k) m.inside[k] = level[k] >= 0.0 ? 1 : 0;
  m.domain = std::move(domain);
  m.level = std::move(level);
  return m;
}

Mask Mask::from_booleans(DomainPtr domain, std::vector<std::uint8_t> inside) {
  Mask m;
  const Index nodes = domain->node_count();
  if (Index(inside.size()) != nodes) fail(ErrorCode::domain, "mask size does not match the domain");
  m.level.resize(nodes);
  if (domain->dim() == 1) {
    for (Index k = 0; k < nodes; ++k) m.level[k] = inside[k] ? 1.0 : -1.0;
  } else {
    const Index n1 = domain->nodes_per_axis();
    constexpr double kSigma = 1.5;
    constexpr int kRadius = 6;
    std::array<double, 2 * kRadius + 1> kernel{};
    double total = 0.0;
    for (int t = -kRadius; t <= kRadius; ++t) {
      kernel[t + kRadius] = std::exp(-0.5 * t * t / (kSigma * kSigma));
      total += kernel[t + kRadius];
    }
    for (auto& v : kernel) v /= total;
    Eigen::ArrayXd src(nodes), tmp(nodes);
    for (Index k = 0; k < nodes; ++k) src[k] = inside[k] ? 1.0 : 0.0;
    for (Index j = 0; j < n1; ++j) {
      for (Index i = 0; i < n1; ++i) {
        double acc = 0.0;
        for (int t = -kRadius; t <= kRadius; ++t) {
          acc += kernel[t + kRadius] * src[std::clamp<Index>(i + t, 0, n1 - 1) + n1 * j];
        }
        tmp[i + n1 * j] = acc;
      }
    }
    for (Index j = 0; j < n1; ++j) {
      for (Index i = 0; i < n1; ++i) {
        double acc = 0.0;
        for (int t = -kRadius; t <= kRadius; ++t) {
          acc += kernel[t + kRadius] * tmp[i + n1 * std::clamp<Index>(j + t, 0, n1 - 1)];
        }
        m.level[i + n1 * j] = acc - 0.5;
      }
    }
  }
  m.inside = std::move(inside);
  m.domain = std::move(domain);
  return m;
}

Index Mask::count() const {
  Index c = 0;
  for (auto v : inside) c += v ? 1 : 0;
  return c;
}

Mask rasterize(const Region& region, DomainPtr domain) {
  const Index nodes = domain->node_count();
  Eigen::ArrayXd level(nodes);
  for (Index k = 0; k < nodes; ++k) {
    level[k] = std::clamp(region.signed_distance(domain->node(k)), -kLevelClamp, kLevelClamp);
  }
  return Mask::from_level(std::move(domain), std::move(level));
}

double mask_perimeter(const Mask& mask, const std::vector<std::uint8_t>* cells) {
  const Domain& d = *mask.domain;
  const auto& lv = mask.level;
  if (d.dim() == 1) {
    double count = 0.0;
    for (Index c = 0; c < d.cell_count(); ++c) {
      if (d.cell_weight(c) <= 0.0) continue;
      if (cells && !(*cells)[c]) continue;
      if ((lv[c] >= 0.0) != (lv[c + 1] >= 0.0)) count += 1.0;
    }
    return count;
  }

  const double h = d.h();
  double length = 0.0;
  for (Index c = 0; c < d.cell_count(); ++c) {
    if (d.cell_weight(c) <= 0.0) continue;
    if (cells && !(*cells)[c]) continue;
    const auto k = d.cell_corners(c);
    // Corners counter-clockwise: (0,0), (1,0), (1,1), (0,1).
    const std::array<double, 4> v{lv[k[0]], lv[k[1]], lv[k[3]], lv[k[2]]};
    const std::array<Point, 4> p{Point(0, 0), Point(1, 0), Point(1, 1), Point(0, 1)};
    int inside_count = 0;
    for (double x : v) inside_count += x >= 0.0 ? 1 : 0;
    if (inside_count == 0 || inside_count == 4) continue;

    auto cut = [&](int e) {
      const int a = e;
      const int b = (e + 1) % 4;
      const double t = v[a] / (v[a] - v[b]);
      return Point(p[a] + t * (p[b] - p[a]));
    };
    auto crosses = [&](int e) { return (v[e] >= 0.0) != (v[(e + 1) % 4] >= 0.0); };

    std::vector<std::pair<Point, Point>> segments;
    if (inside_count == 2 && crosses(0) && crosses(1) && crosses(2) && crosses(3)) {
      // Saddle: cut off the corners whose sign differs from the center.
      const bool center_inside = 0.25 * (v[0] + v[1] + v[2] + v[3]) >= 0.0;
      for (int corner = 0; corner < 4; ++corner) {
        if ((v[corner] >= 0.0) == center_inside) continue;
        segments.emplace_back(cut((corner + 3) % 4), cut(corner));
      }
    } else {
      std::vector<Point> pts;
      for (int e = 0; e < 4; ++e) {
        if (crosses(e)) pts.push_back(cut(e));
      }
      if (pts.size() == 2) segments.emplace_back(pts[0], pts[1]);
    }
    const Point origin = d.cell_center(c) - Point(0.5 * h, 0.5 * h);
    for (const auto& [a, b] : segments) {
      if (d.shape() == Domain::Shape::ball && d.cell_weight(c) < 1.0) {
        length += clipped_length(origin + h * a, origin + h * b, d.ball_center(), d.ball_radius());
      } else {
        length += h * (b - a).norm();
      }
    }
  }
  return length;
}

std::vector<std::uint8_t> cells_in(const Region& region, const Domain& domain) {
  std::vector<std::uint8_t> out(std::size_t(domain.cell_count()), 0);
  for (Index c = 0; c < domain.cell_count(); ++c) {
    out[c] = region.signed_distance(domain.cell_center(c)) >= 0.0 ? 1 : 0;
  }
  return out;
}

}  // namespace perimeter_phase
