#include "sgw/grasp_density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <tuple>

#include "sgw/error.hpp"

namespace sgw {

namespace {

constexpr double kInvSqrtTwoPi = 0.3989422804014327;

// Kernels further than this many position sigmas contribute nothing measurable.
constexpr double kPositionCutoffSigmas = 8.0;

double pose_factor(const Pose2& pose, const Kernel& k) {
  const Vec2 d = pose.p() - k.mu.p();
  const double sp = k.sigma.p;
  const double d2 = d.squaredNorm();
  if (d2 > kPositionCutoffSigmas * kPositionCutoffSigmas * sp * sp) return 0.0;
  const double position = std::exp(-0.5 * d2 / (sp * sp)) / (kTwoPi * sp * sp);
  return position * normal_pdf(angle_diff(pose.theta(), k.mu.theta()), k.sigma.theta);
}

}  // namespace

double normal_pdf(double offset, double sigma) {
  const double z = offset / sigma;
  return kInvSqrtTwoPi / sigma * std::exp(-0.5 * z * z);
}

double eval_kernel(const Sample& s, const Kernel& k) {
  return pose_factor(s.v, k) * normal_pdf(s.r - k.mu_r, k.sigma.r);
}

double eval_kernel(const Pose2& pose, const Kernel& k) { return pose_factor(pose, k); }

double eval_density(const Sample& s, std::span<const Kernel> mixture) {
  if (mixture.empty()) throw Error("cannot evaluate an empty mixture");
  double sum = 0.0;
  for (const auto& k : mixture) sum += k.weight * eval_kernel(s, k);
  return sum;
}

double eval_density(const Pose2& pose, std::span<const Kernel> mixture) {
  if (mixture.empty()) throw Error("cannot evaluate an empty mixture");
  double sum = 0.0;
  for (const auto& k : mixture) sum += k.weight * eval_kernel(pose, k);
  return sum;
}

double QueryDensity::eval(const Pose2& pose) const { return eval_density(pose, kernels); }

ContactModel learn_contact_model(const FeatureCloud& demo, const Pose2& grasp, double aperture,
                                 const GripperModel& gripper, const ContactLearningParams& params) {
  ContactModel model;
  model.gripper = gripper;
  model.bandwidth = params.bandwidth;
  model.cutoff = params.cutoff_factor * gripper.finger_radius;
  const double cutoff_gap = model.cutoff - gripper.finger_radius;
  model.decay = cutoff_gap > 0.0 ? std::log(1.0 / params.weight_at_cutoff) / (cutoff_gap * cutoff_gap) : 0.0;

  const auto links = link_poses(gripper, grasp, aperture);
  for (int i = 0; i < 2; ++i) {
    const Pose2& link = links[i];
    auto& kernels = model.links[i];
    for (const auto& f : demo.features) {
      const double centre_distance = (f.v.p() - link.p()).norm();
      if (centre_distance > model.cutoff) continue;
      const double d = std::abs(centre_distance - gripper.finger_radius);
      Kernel k;
      k.mu = compose(inverse(f.v), link);
      k.mu_r = f.r;
      k.sigma = params.bandwidth;
      k.weight = std::exp(-model.decay * d * d);
      kernels.push_back(k);
    }
    if (kernels.empty())
      throw LearningError("no surface features within the cutoff of link L" + std::to_string(i + 1));
    double z = 0.0;
    for (const auto& k : kernels) z += k.weight;
    model.normalizer[i] = z;
    for (auto& k : kernels) k.weight /= z;
  }
  return model;
}

std::array<QueryDensity, 2> build_query_density(const ContactModel& model, const FeatureCloud& scene,
                                                const QueryParams& params) {
  if (scene.features.empty()) throw EmptyDensityError("scene has no surface features");
  std::array<QueryDensity, 2> out;
  for (int i = 0; i < 2; ++i) {
    struct Weighted {
      double weight;
      Pose2 pose;
    };
    std::vector<Weighted> raw;
    for (const auto& f : scene.features) {
      for (const auto& ck : model.links[i]) {
        const double w = ck.weight * normal_pdf(f.r - ck.mu_r, ck.sigma.r);
        if (!(w > 0.0)) continue;
        raw.push_back({w, compose(f.v, ck.mu)});
      }
    }
    double total = 0.0;
    for (const auto& r : raw) total += r.weight;
    if (!(total >= params.weight_floor))
      throw EmptyDensityError("no scene surface resembles the demonstrated contact of link L" +
                              std::to_string(i + 1));
    std::stable_sort(raw.begin(), raw.end(), [](const Weighted& a, const Weighted& b) { return a.weight > b.weight; });
    if (static_cast<int>(raw.size()) > params.max_kernels) raw.resize(params.max_kernels);

    double kept = 0.0;
    for (const auto& r : raw) kept += r.weight;
    auto& qd = out[i];
    qd.link = i;
    qd.bandwidth = model.bandwidth;
    qd.kernels.reserve(raw.size());
    for (const auto& r : raw) qd.kernels.push_back({r.pose, 0.0, model.bandwidth, r.weight / kept});
  }
  return out;
}

bool ranks_before(const CandidateGrasp& a, const CandidateGrasp& b) {
  if (a.score != b.score) return a.score > b.score;
  return std::make_tuple(a.pose.x(), a.pose.y(), a.pose.theta(), a.aperture) <
         std::make_tuple(b.pose.x(), b.pose.y(), b.pose.theta(), b.aperture);
}

namespace {

struct GraspBuilder {
  const std::array<QueryDensity, 2>& density;
  const GripperModel& gripper;
  const Landscape& scene;
  const SamplingParams& params;

  // Snaps L1 onto the nearest object, finds the first aperture on the grid
  // where L2 touches the same object, then closes within that grid cell
  // until L2 sits on the surface.
  std::optional<CandidateGrasp> from_link1(const Pose2& drawn) const {
    if (!gripper.within_cone(drawn.theta())) return std::nullopt;
    const double r = gripper.finger_radius;
    int target = kNoObject;
    double best_gap = std::numeric_limits<double>::infinity();
    Vec2 push = Vec2::Zero();
    for (const auto& o : scene.objects) {
      Vec2 n;
      const double g = finger_gap(o, drawn.p(), r, &n);
      if (g < best_gap) {
        best_gap = g;
        target = o.id;
        push = n;
      }
    }
    if (target == kNoObject) return std::nullopt;
    const Pose2 link1(drawn.p() - best_gap * push, drawn.theta());
    const LinkContact c1 = check_link(link1.p(), r, gripper, scene);
    if (c1.state != ContactState::kTouching || c1.nearest != target) return std::nullopt;
    const double m1 = density[0].eval(link1);
    if (!(m1 > 0.0)) return std::nullopt;

    auto feasible = [&](double aperture) {
      const auto report = check_gripper_collision(gripper_from_link1(gripper, link1, aperture), aperture, gripper, scene);
      return !report.penetrating() && report.both_touching(target);
    };
    const int steps =
        static_cast<int>(std::floor((gripper.max_aperture - gripper.min_aperture) / params.aperture_step + 1e-9));
    for (int a = 0; a <= steps; ++a) {
      double aperture = gripper.min_aperture + a * params.aperture_step;
      if (!feasible(aperture)) continue;
      double lo = std::max(gripper.min_aperture, aperture - params.aperture_step);
      if (lo < aperture && !feasible(lo)) {
        for (int it = 0; it < 40; ++it) {
          const double mid = 0.5 * (lo + aperture);
          (feasible(mid) ? aperture : lo) = mid;
        }
      } else {
        aperture = lo;
      }
      const Pose2 pose = gripper_from_link1(gripper, link1, aperture);
      const double score = m1 * density[1].eval(link_poses(gripper, pose, aperture)[1]);
      if (!(score > 0.0)) return std::nullopt;
      return CandidateGrasp{pose, aperture, score, target};
    }
    return std::nullopt;
  }

  // Pattern search over the L1 pose, halving the step when no neighbour improves.
  CandidateGrasp refine(CandidateGrasp best) const {
    double step_p = 1.0, step_t = 0.02;
    for (int round = 0; round < 8; ++round) {
      bool improved = true;
      while (improved) {
        improved = false;
        const Pose2 l1 = link_poses(gripper, best.pose, best.aperture)[0];
        const std::array<Pose2, 6> moves{Pose2(l1.x() + step_p, l1.y(), l1.theta()),
                                         Pose2(l1.x() - step_p, l1.y(), l1.theta()),
                                         Pose2(l1.x(), l1.y() + step_p, l1.theta()),
                                         Pose2(l1.x(), l1.y() - step_p, l1.theta()),
                                         Pose2(l1.x(), l1.y(), l1.theta() + step_t),
                                         Pose2(l1.x(), l1.y(), l1.theta() - step_t)};
        for (const auto& m : moves) {
          const auto c = from_link1(m);
          if (c && c->object_id == best.object_id && c->score > best.score) {
            best = *c;
            improved = true;
          }
        }
      }
      step_p *= 0.5;
      step_t *= 0.5;
    }
    return best;
  }
};

std::vector<CandidateGrasp> cluster(const std::vector<CandidateGrasp>& ranked, const SamplingParams& params,
                                    std::size_t limit) {
  std::vector<CandidateGrasp> kept;
  for (const auto& c : ranked) {
    const bool duplicate = std::any_of(kept.begin(), kept.end(), [&](const CandidateGrasp& o) {
      return position_distance(c.pose, o.pose) <= params.cluster_position &&
             angle_distance(c.pose, o.pose) <= params.cluster_angle &&
             std::abs(c.aperture - o.aperture) <= params.cluster_aperture;
    });
    if (duplicate) continue;
    kept.push_back(c);
    if (kept.size() >= limit) break;
  }
  return kept;
}

}  // namespace

std::vector<CandidateGrasp> sample_grasps(const std::array<QueryDensity, 2>& density, const GripperModel& gripper,
                                          const Landscape& scene, int n_samples, std::uint64_t seed,
                                          const SamplingParams& params) {
  if (density[0].kernels.empty() || density[1].kernels.empty())
    throw NoGraspError("query density is empty");
  if (scene.objects.empty()) throw NoGraspError("scene has no objects");

  std::vector<double> cumulative(density[0].kernels.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < cumulative.size(); ++k) cumulative[k] = acc += density[0].kernels[k].weight;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Bandwidth& bw = density[0].bandwidth;
  const GraspBuilder builder{density, gripper, scene, params};

  std::vector<CandidateGrasp> raw;
  for (int s = 0; s < n_samples; ++s) {
    const double pick = unit(rng) * acc;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
    const auto& k = density[0].kernels[std::min<std::size_t>(it - cumulative.begin(), cumulative.size() - 1)];
    const double dx = bw.p * normal(rng), dy = bw.p * normal(rng), dt = bw.theta * normal(rng);
    if (auto c = builder.from_link1(Pose2(k.mu.x() + dx, k.mu.y() + dy, k.mu.theta() + dt))) raw.push_back(*c);
  }
  if (raw.empty()) throw NoGraspError("no collision-free two-contact grasp survived sampling");

  std::sort(raw.begin(), raw.end(), ranks_before);
  auto seeds = cluster(raw, params, static_cast<std::size_t>(params.refine_count));
  for (auto& c : seeds) c = builder.refine(c);
  std::sort(seeds.begin(), seeds.end(), ranks_before);
  return cluster(seeds, params, static_cast<std::size_t>(params.top_k));
}

}  // namespace sgw
