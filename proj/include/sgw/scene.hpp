#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sgw/se2.hpp"

namespace sgw {

enum class ShapeKind { kRectangle, kCircle };

/// A rigid obstacle. Rectangles use half_extents and rotation; circles use radius.
struct Obstacle {
  int id = 0;
  ShapeKind kind = ShapeKind::kRectangle;
  Vec2 center = Vec2::Zero();
  Vec2 half_extents = Vec2::Zero();
  double rotation = 0.0;
  double radius = 0.0;

  double bottom() const;
  double top() const;
  double left() const;
  double right() const;
  double perimeter() const;

  bool operator==(const Obstacle&) const = default;
};

/// Signed distance from a point to the obstacle boundary, negative inside.
/// When `normal` is given it receives the unit direction of steepest ascent.
double signed_distance(const Obstacle& obstacle, const Vec2& point, Vec2* normal = nullptr);

/// Objects resting on a ground line at y = ground_y.
struct Landscape {
  double width = 300.0;
  double ground_y = 0.0;
  std::vector<Obstacle> objects;
  double resolution = 2.0;

  const Obstacle& object(int id) const;
  /// Highest point of any object, or ground_y when empty.
  double skyline_top() const;

  bool operator==(const Landscape&) const = default;
};

struct SceneParams {
  double width = 300.0;
  double ground_y = 0.0;
  int min_objects = 2;
  int max_objects = 4;
  double min_object_width = 20.0;
  double max_object_width = 60.0;
  double min_object_height = 20.0;
  double max_object_height = 50.0;
  /// Minimum free gap between neighbouring objects on the ground.
  double min_gap = 16.0;
  /// Free margin kept at both ends of the scene.
  double edge_margin = 15.0;
  /// Chance that an object is stacked on an earlier one instead of the ground.
  double stack_probability = 0.2;
  double resolution = 2.0;
  int max_attempts = 500;

  bool operator==(const SceneParams&) const = default;
};

/// Throws SceneGenerationError when the params are infeasible or rejection sampling gives up.
Landscape generate_scene(std::uint64_t seed, const SceneParams& params);

/// Checks the resting and non-overlap invariants; returns an empty string when valid.
std::string validate_scene(const Landscape& scene);

struct SurfaceFeature {
  /// Position on the surface; theta is the outward normal direction.
  Pose2 v;
  /// Curvature descriptor in 1/mm, zero on straight segments.
  double r = 0.0;
  int object_id = 0;
};

struct FeatureCloud {
  std::vector<SurfaceFeature> features;
  std::string source;
};

struct FeatureParams {
  int neighbours = 7;
  /// Upper bound on the curvature descriptor, reached at sharp corners.
  double max_curvature = 0.5;

  bool operator==(const FeatureParams&) const = default;
};

/// Ordered counter-clockwise boundary samples of one obstacle at the given spacing.
std::vector<Vec2> sample_boundary(const Obstacle& obstacle, double resolution);

/// Samples every object boundary and estimates PCA normals and curvature.
/// Throws FeatureExtractionError when an object yields fewer samples than the neighbourhood.
FeatureCloud extract_features(const Landscape& scene, const FeatureParams& params = {});

/// Applies a rigid transform to every feature pose.
FeatureCloud transform_cloud(const FeatureCloud& cloud, const Pose2& transform);

}  // namespace sgw
