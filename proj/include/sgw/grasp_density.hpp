#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "sgw/gripper.hpp"
#include "sgw/scene.hpp"
#include "sgw/se2.hpp"

namespace sgw {

/// Kernel bandwidths. Position is isotropic (the same sigma on both axes).
struct Bandwidth {
  double p = 4.0;
  double theta = 0.15;
  double r = 0.02;

  bool operator==(const Bandwidth&) const = default;
};

/// A point in SE(2) x R: a pose plus a curvature descriptor.
struct Sample {
  Pose2 v;
  double r = 0.0;
};

/// Product kernel centred at (mu, mu_r). Pose-only densities ignore mu_r.
struct Kernel {
  Pose2 mu;
  double mu_r = 0.0;
  Bandwidth sigma;
  double weight = 1.0;

  bool operator==(const Kernel&) const = default;
};

/// One-dimensional normal pdf of an offset.
double normal_pdf(double offset, double sigma);

/// N2(p) * N1(theta, wrapped) * N1(r).
double eval_kernel(const Sample& s, const Kernel& k);
/// N2(p) * N1(theta, wrapped); the pose marginal of the kernel.
double eval_kernel(const Pose2& pose, const Kernel& k);

/// Weighted kernel sum. Throws Error on an empty mixture.
double eval_density(const Sample& s, std::span<const Kernel> mixture);
double eval_density(const Pose2& pose, std::span<const Kernel> mixture);

struct ContactLearningParams {
  Bandwidth bandwidth;
  /// Neighbourhood radius around the finger centre, in finger radii.
  double cutoff_factor = 3.0;
  /// Pre-normalisation weight of a feature lying on the cutoff circle.
  double weight_at_cutoff = 0.01;

  bool operator==(const ContactLearningParams&) const = default;
};

/// Per-link mixtures over (link pose relative to the feature frame, curvature).
struct ContactModel {
  std::array<std::vector<Kernel>, 2> links;
  /// Cutoff radius from the finger centre, in mm.
  double cutoff = 0.0;
  /// Weight decay rate in 1/mm^2 for exp(-decay * d^2).
  double decay = 0.0;
  /// Sum of raw weights per link before normalisation.
  std::array<double, 2> normalizer{0.0, 0.0};
  Bandwidth bandwidth;
  GripperModel gripper;

  bool operator==(const ContactModel&) const = default;
};

/// Throws LearningError naming the link when no feature lies within the cutoff.
ContactModel learn_contact_model(const FeatureCloud& demo, const Pose2& grasp, double aperture,
                                 const GripperModel& gripper, const ContactLearningParams& params = {});

struct QueryParams {
  /// Number of kernels kept per link (highest weight first).
  int max_kernels = 6000;
  /// Total raw weight below which the scene is considered unlike the demonstration.
  double weight_floor = 1e-12;

  bool operator==(const QueryParams&) const = default;
};

/// Mixture over absolute link poses in the world frame.
struct QueryDensity {
  int link = 0;
  std::vector<Kernel> kernels;
  Bandwidth bandwidth;

  double eval(const Pose2& pose) const;
};

/// Throws EmptyDensityError when no scene surface resembles the demonstrated contacts.
std::array<QueryDensity, 2> build_query_density(const ContactModel& model, const FeatureCloud& scene,
                                                const QueryParams& params = {});

struct CandidateGrasp {
  Pose2 pose;
  double aperture = 0.0;
  double score = 0.0;
  int object_id = 0;

  bool operator==(const CandidateGrasp&) const = default;
};

struct SamplingParams {
  double aperture_step = 1.0;
  int top_k = 20;
  double cluster_position = 2.0;
  double cluster_angle = 5.0 * kPi / 180.0;
  double cluster_aperture = 1.0;
  /// Distinct samples polished by local likelihood ascent before the final ranking.
  int refine_count = 40;

  bool operator==(const SamplingParams&) const = default;
};

/// Strict ordering used for ranking: score descending, then lexicographic (x, y, theta, aperture).
bool ranks_before(const CandidateGrasp& a, const CandidateGrasp& b);

/// Draws L1 poses from the first density, snaps them onto the nearest surface,
/// scans the aperture grid for an L2 contact on the same object and ranks by
/// M1(l1) * M2(l2). The best distinct samples are polished by a local pattern
/// search on the score before clustering. Throws NoGraspError when nothing survives.
std::vector<CandidateGrasp> sample_grasps(const std::array<QueryDensity, 2>& density, const GripperModel& gripper,
                                          const Landscape& scene, int n_samples, std::uint64_t seed,
                                          const SamplingParams& params = {});

}  // namespace sgw
