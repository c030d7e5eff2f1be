#include "sgw/scene.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <sstream>

#include "sgw/error.hpp"

namespace sgw {

namespace {

std::array<Vec2, 4> rectangle_corners(const Obstacle& o) {
  const Pose2 frame(o.center, o.rotation);
  const double hx = o.half_extents.x(), hy = o.half_extents.y();
  return {frame.transform({-hx, -hy}), frame.transform({hx, -hy}), frame.transform({hx, hy}),
          frame.transform({-hx, hy})};
}

double quantize(double value, double step) { return std::round(value / step) * step; }

bool intervals_clear(double a0, double a1, double b0, double b1, double gap) {
  return a1 + gap <= b0 + 1e-9 || b1 + gap <= a0 + 1e-9;
}

}  // namespace

double Obstacle::bottom() const {
  if (kind == ShapeKind::kCircle) return center.y() - radius;
  double v = rectangle_corners(*this)[0].y();
  for (const auto& c : rectangle_corners(*this)) v = std::min(v, c.y());
  return v;
}

double Obstacle::top() const {
  if (kind == ShapeKind::kCircle) return center.y() + radius;
  double v = rectangle_corners(*this)[0].y();
  for (const auto& c : rectangle_corners(*this)) v = std::max(v, c.y());
  return v;
}

double Obstacle::left() const {
  if (kind == ShapeKind::kCircle) return center.x() - radius;
  double v = rectangle_corners(*this)[0].x();
  for (const auto& c : rectangle_corners(*this)) v = std::min(v, c.x());
  return v;
}

double Obstacle::right() const {
  if (kind == ShapeKind::kCircle) return center.x() + radius;
  double v = rectangle_corners(*this)[0].x();
  for (const auto& c : rectangle_corners(*this)) v = std::max(v, c.x());
  return v;
}

double Obstacle::perimeter() const {
  if (kind == ShapeKind::kCircle) return kTwoPi * radius;
  return 4.0 * (half_extents.x() + half_extents.y());
}

double signed_distance(const Obstacle& o, const Vec2& point, Vec2* normal) {
  if (o.kind == ShapeKind::kCircle) {
    const Vec2 d = point - o.center;
    const double n = d.norm();
    if (normal) *normal = n > 0.0 ? Vec2(d / n) : Vec2(0.0, 1.0);
    return n - o.radius;
  }
  const Pose2 frame(o.center, o.rotation);
  const Vec2 q = inverse(frame).transform(point);
  const Vec2 excess{std::abs(q.x()) - o.half_extents.x(), std::abs(q.y()) - o.half_extents.y()};
  Vec2 local_normal;
  double dist;
  if (excess.x() > 0.0 || excess.y() > 0.0) {
    const Vec2 outside{std::max(excess.x(), 0.0), std::max(excess.y(), 0.0)};
    dist = outside.norm();
    local_normal = Vec2(std::copysign(outside.x(), q.x()), std::copysign(outside.y(), q.y())) / dist;
  } else if (excess.x() > excess.y()) {
    dist = excess.x();
    local_normal = Vec2(q.x() >= 0.0 ? 1.0 : -1.0, 0.0);
  } else {
    dist = excess.y();
    local_normal = Vec2(0.0, q.y() >= 0.0 ? 1.0 : -1.0);
  }
  if (normal) *normal = frame.rotate(local_normal);
  return dist;
}

const Obstacle& Landscape::object(int id) const {
  for (const auto& o : objects) {
    if (o.id == id) return o;
  }
  throw Error("unknown object id " + std::to_string(id));
}

double Landscape::skyline_top() const {
  double top = ground_y;
  for (const auto& o : objects) top = std::max(top, o.top());
  return top;
}

Landscape generate_scene(std::uint64_t seed, const SceneParams& params) {
  if (params.min_objects < 1 || params.max_objects < params.min_objects)
    throw SceneGenerationError("object count range is empty");
  if (params.resolution <= 0.0) throw SceneGenerationError("resolution must be positive");
  if (params.min_object_width <= 0.0 || params.max_object_width < params.min_object_width ||
      params.min_object_height <= 0.0 || params.max_object_height < params.min_object_height)
    throw SceneGenerationError("object size range is empty");
  const double usable = params.width - 2.0 * params.edge_margin;
  if (params.min_object_width > usable)
    throw SceneGenerationError("objects are wider than the scene");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  Landscape scene;
  scene.width = params.width;
  scene.ground_y = params.ground_y;
  scene.resolution = params.resolution;

  const int count = std::uniform_int_distribution<int>(params.min_objects, params.max_objects)(rng);
  const double size_step = 2.0 * params.resolution;
  std::vector<bool> has_top;  // parallel to scene.objects

  for (int k = 0; k < count; ++k) {
    bool placed = false;
    for (int attempt = 0; attempt < params.max_attempts && !placed; ++attempt) {
      Obstacle o;
      o.id = k;
      const double h = quantize(uniform(params.min_object_height, params.max_object_height), size_step);
      const bool stack = k > 0 && unit(rng) < params.stack_probability;
      if (stack) {
        std::vector<int> bases;
        for (int i = 0; i < static_cast<int>(scene.objects.size()); ++i) {
          const auto& b = scene.objects[i];
          if (!has_top[i] && 2.0 * b.half_extents.x() > params.min_object_width + size_step)
            bases.push_back(i);
        }
        if (bases.empty()) continue;
        const auto& base = scene.objects[bases[std::uniform_int_distribution<std::size_t>(
            0, bases.size() - 1)(rng)]];
        const double base_w = 2.0 * base.half_extents.x();
        const double w = std::floor(uniform(params.min_object_width,
                                            std::min(params.max_object_width, base_w - size_step)) /
                                    size_step) *
                         size_step;
        if (w < params.min_object_width - 1e-9) continue;
        const double cx = quantize(uniform(base.left() + w / 2.0, base.right() - w / 2.0), params.resolution);
        o.half_extents = {w / 2.0, h / 2.0};
        o.center = {cx, base.top() + h / 2.0};
        if (o.left() < base.left() - 1e-9 || o.right() > base.right() + 1e-9) continue;
      } else {
        const double w = quantize(uniform(params.min_object_width, std::min(params.max_object_width, usable)),
                                  size_step);
        if (w > usable) continue;
        const double cx = quantize(uniform(params.edge_margin + w / 2.0, params.width - params.edge_margin - w / 2.0),
                                   params.resolution);
        o.half_extents = {w / 2.0, h / 2.0};
        o.center = {cx, params.ground_y + h / 2.0};
        if (o.left() < params.edge_margin - 1e-9 || o.right() > params.width - params.edge_margin + 1e-9) continue;
      }
      bool clear = true;
      for (const auto& other : scene.objects) {
        const bool vertical_overlap = !intervals_clear(o.bottom(), o.top(), other.bottom(), other.top(), 0.0);
        if (!vertical_overlap) continue;
        const double gap = stack ? 0.0 : params.min_gap;
        if (!intervals_clear(o.left(), o.right(), other.left(), other.right(), gap)) {
          clear = false;
          break;
        }
      }
      if (!clear) continue;
      if (stack) {
        for (std::size_t i = 0; i < scene.objects.size(); ++i) {
          if (std::abs(scene.objects[i].top() - o.bottom()) < 1e-9 &&
              !intervals_clear(o.left(), o.right(), scene.objects[i].left(), scene.objects[i].right(), 0.0))
            has_top[i] = true;
        }
      }
      scene.objects.push_back(o);
      has_top.push_back(false);
      placed = true;
    }
    if (!placed) {
      std::ostringstream msg;
      msg << "could not place object " << k << " after " << params.max_attempts << " attempts (seed " << seed << ")";
      throw SceneGenerationError(msg.str());
    }
  }
  return scene;
}

std::string validate_scene(const Landscape& scene) {
  if (scene.resolution <= 0.0) return "resolution must be positive";
  if (scene.objects.empty()) return "scene has no objects";
  constexpr double eps = 1e-9;
  for (const auto& o : scene.objects) {
    bool rests = std::abs(o.bottom() - scene.ground_y) < eps;
    for (const auto& other : scene.objects) {
      if (other.id == o.id) continue;
      if (std::abs(other.top() - o.bottom()) < eps &&
          !intervals_clear(o.left(), o.right(), other.left(), other.right(), 0.0))
        rests = true;
      const bool overlap = !intervals_clear(o.left(), o.right(), other.left(), other.right(), 0.0) &&
                           !intervals_clear(o.bottom(), o.top(), other.bottom(), other.top(), 0.0);
      if (overlap) return "objects " + std::to_string(o.id) + " and " + std::to_string(other.id) + " overlap";
    }
    if (!rests) return "object " + std::to_string(o.id) + " is floating";
  }
  return {};
}

std::vector<Vec2> sample_boundary(const Obstacle& o, double resolution) {
  std::vector<Vec2> points;
  const double perimeter = o.perimeter();
  const int n = std::max(1, static_cast<int>(std::lround(perimeter / resolution)));
  points.reserve(n);
  if (o.kind == ShapeKind::kCircle) {
    for (int i = 0; i < n; ++i) {
      const double a = kTwoPi * i / n - kPi / 2.0;
      points.push_back(o.center + o.radius * Vec2(std::cos(a), std::sin(a)));
    }
    return points;
  }
  const auto corners = rectangle_corners(o);
  const double spacing = perimeter / n;
  const std::array<double, 4> lengths{2.0 * o.half_extents.x(), 2.0 * o.half_extents.y(),
                                      2.0 * o.half_extents.x(), 2.0 * o.half_extents.y()};
  for (int i = 0; i < n; ++i) {
    double s = i * spacing;
    int edge = 0;
    while (edge < 3 && s >= lengths[edge] - 1e-9) {
      s -= lengths[edge];
      ++edge;
    }
    const Vec2& a = corners[edge];
    const Vec2& b = corners[(edge + 1) % 4];
    points.push_back(a + (b - a) * (std::max(s, 0.0) / lengths[edge]));
  }
  return points;
}

FeatureCloud extract_features(const Landscape& scene, const FeatureParams& params) {
  FeatureCloud cloud;
  const int half = params.neighbours / 2;
  for (const auto& o : scene.objects) {
    const auto points = sample_boundary(o, scene.resolution);
    const int n = static_cast<int>(points.size());
    if (n < params.neighbours)
      throw FeatureExtractionError("object " + std::to_string(o.id) + " has " + std::to_string(n) +
                                   " boundary samples, fewer than the " + std::to_string(params.neighbours) +
                                   " neighbours required");
    auto at = [&](int i) -> const Vec2& { return points[((i % n) + n) % n]; };

    std::vector<double> normal_angle(n);
    for (int i = 0; i < n; ++i) {
      Vec2 mean = Vec2::Zero();
      for (int j = -half; j <= half; ++j) mean += at(i + j);
      mean /= 2 * half + 1;
      Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
      for (int j = -half; j <= half; ++j) {
        const Vec2 d = at(i + j) - mean;
        cov += d * d.transpose();
      }
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> solver(cov);
      Vec2 normal = solver.eigenvectors().col(0);
      const Vec2 probe = points[i] + 0.25 * scene.resolution * normal;
      if (signed_distance(o, probe) < 0.0) normal = -normal;
      normal_angle[i] = std::atan2(normal.y(), normal.x());
    }

    for (int i = 0; i < n; ++i) {
      // Tangent angle is the normal angle plus a constant, so the turn is the normal turn.
      const double turn = std::abs(angle_diff(normal_angle[((i + half) % n + n) % n],
                                              normal_angle[((i - half) % n + n) % n]));
      double arc = 0.0;
      for (int j = -half; j < half; ++j) arc += (at(i + j + 1) - at(i + j)).norm();
      const double r = arc > 0.0 ? std::min(turn / arc, params.max_curvature) : params.max_curvature;
      cloud.features.push_back({Pose2(points[i], normal_angle[i]), r, o.id});
    }
  }
  return cloud;
}

FeatureCloud transform_cloud(const FeatureCloud& cloud, const Pose2& transform) {
  FeatureCloud out;
  out.source = cloud.source;
  out.features.reserve(cloud.features.size());
  for (const auto& f : cloud.features) out.features.push_back({compose(transform, f.v), f.r, f.object_id});
  return out;
}

}  // namespace sgw
