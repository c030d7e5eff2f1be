#include "sgw/controller.hpp"

#include <algorithm>
#include <cmath>

#include "sgw/error.hpp"

namespace sgw {

namespace {

const Mat32& lift() {
  static const Mat32 g = (Mat32() << 1, 0, 0, 1, 0, 0).finished();
  return g;
}

State state_error(const State& x, const Pose2& ref) {
  return {x.x() - ref.x(), x.y() - ref.y(), angle_diff(x.z(), ref.theta())};
}

}  // namespace

State plant_step(const State& x, const Vec2& u, double dt) { return x + lift() * u * dt; }

State predict_state(const State& x, const Vec2& u, double dt) { return plant_step(x, u, dt); }

LinearizedDynamics linearize(const TrajectoryPlan& plan) {
  LinearizedDynamics d;
  const int n = plan.horizon() + 1;
  d.A.assign(n, Mat3::Identity());
  d.B.assign(n, lift() * plan.dt);
  d.c.assign(n, State::Zero());
  return d;
}

CostSchedule make_cost_schedule(int horizon, double dt, double kappa, double r_floor) {
  CostSchedule c;
  for (int tau = 0; tau <= horizon; ++tau) {
    const double w = std::exp(-tau * dt * kappa);
    c.Q.push_back(Eigen::Vector3d(w, w, 1.0).asDiagonal());
    const double r = std::max(w, r_floor);
    c.R.push_back(Eigen::Vector2d(r, r).asDiagonal());
  }
  return c;
}

RiccatiSolution riccati_backward(std::span<const Eigen::MatrixXd> A, std::span<const Eigen::MatrixXd> B,
                                 std::span<const Eigen::MatrixXd> Q, std::span<const Eigen::MatrixXd> R,
                                 const Eigen::MatrixXd& terminal) {
  const std::size_t n = A.size();
  if (n == 0 || B.size() != n || Q.size() != n || R.size() != n) throw SolverError("inconsistent schedule lengths");
  RiccatiSolution s;
  s.P.resize(n);
  s.K.resize(n);
  auto gain = [&](std::size_t tau, const Eigen::MatrixXd& next) {
    const Eigen::MatrixXd S = R[tau] + B[tau].transpose() * next * B[tau];
    const Eigen::LLT<Eigen::MatrixXd> llt(S);
    if (llt.info() != Eigen::Success) throw SolverError("R + B'PB is not positive definite at step " + std::to_string(tau));
    return Eigen::MatrixXd(llt.solve(B[tau].transpose() * next * A[tau]));
  };
  s.P[0] = terminal;
  s.K[0] = gain(0, terminal);
  for (std::size_t tau = 1; tau < n; ++tau) {
    const Eigen::MatrixXd& next = s.P[tau - 1];
    s.K[tau] = gain(tau, next);
    Eigen::MatrixXd P = Q[tau] + A[tau].transpose() * next * A[tau] - A[tau].transpose() * next * B[tau] * s.K[tau];
    s.P[tau] = 0.5 * (P + P.transpose());
  }
  return s;
}

GainSchedule solve_gains(const LinearizedDynamics& dyn, const CostSchedule& cost) {
  if (dyn.horizon() != cost.horizon()) throw SolverError("dynamics and cost horizons differ");
  const std::vector<Eigen::MatrixXd> A(dyn.A.begin(), dyn.A.end()), B(dyn.B.begin(), dyn.B.end()),
      Q(cost.Q.begin(), cost.Q.end()), R(cost.R.begin(), cost.R.end());
  const auto s = riccati_backward(A, B, Q, R, Q.front());
  GainSchedule g;
  for (std::size_t tau = 0; tau < s.P.size(); ++tau) {
    g.P.push_back(s.P[tau]);
    g.K.push_back(s.K[tau]);
  }
  return g;
}

AssistCandidate make_candidate(int id, TrajectoryPlan plan, const ControllerParams& params) {
  AssistCandidate c;
  c.id = id;
  c.cost = make_cost_schedule(plan.horizon(), plan.dt, params.kappa, params.r_floor);
  c.gains = solve_gains(linearize(plan), c.cost);
  c.plan = std::move(plan);
  return c;
}

int nearest_waypoint(const TrajectoryPlan& plan, const Vec2& position, int tau_max) {
  tau_max = std::clamp(tau_max, 0, plan.horizon());
  int best = tau_max;
  double best_d = (plan.waypoints[tau_max].pose.p() - position).squaredNorm();
  for (int tau = tau_max - 1; tau >= 0; --tau) {
    const double d = (plan.waypoints[tau].pose.p() - position).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = tau;
    }
  }
  return best;
}

double arbitration_cost(const AssistCandidate& c, int tau, const State& x, const Vec2& u, int weight_tau) {
  const double dt = c.plan.dt;
  const int wt = std::clamp(weight_tau, 0, c.cost.horizon());
  const State xh = state_error(predict_state(x, u, dt), c.plan.next(tau).pose);
  const Vec2 uh = u - c.plan.controls[tau];
  return xh.dot(c.cost.Q[wt] * xh) + uh.dot(c.cost.R[wt] * uh);
}

ArbitrationResult arbitrate(const State& x, const Vec2& u, std::span<const AssistCandidate> candidates,
                            std::span<const int> taus, int weight_tau) {
  if (candidates.empty()) throw Error("arbitration needs at least one candidate");
  if (taus.size() != candidates.size()) throw Error("one time-to-go per candidate is required");
  ArbitrationResult r;
  r.costs.resize(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    r.costs[i] = arbitration_cost(candidates[i], taus[i], x, u, weight_tau);
    if (r.best < 0 || r.costs[i] < r.costs[r.best] ||
        (r.costs[i] == r.costs[r.best] && candidates[i].id < candidates[r.best].id))
      r.best = static_cast<int>(i);
  }
  r.selected = r.best;
  return r;
}

Vec2 saturate(const Vec2& v, double limit) {
  const double n = v.norm();
  return n > limit ? Vec2(v * (limit / n)) : v;
}

void assist_command(ArbitrationResult& r, const AssistCandidate& c, int tau, const State& x, const Vec2& u,
                    const ControllerParams& params, double dt) {
  const State err = state_error(x, c.plan.at(tau).pose);
  r.waypoint = tau;
  r.lqr_command = c.plan.controls[tau] - c.gains.K[tau] * err;
  r.alpha = std::exp(-tau * dt * params.kappa);
  r.command = saturate(r.alpha * r.lqr_command + (1.0 - r.alpha) * u, params.speed_limit);
  r.theta = c.plan.next(tau).pose.theta();
  r.aperture = c.plan.next(tau).aperture;
}

Arbitrator::Arbitrator(std::vector<AssistCandidate> candidates, ControllerParams params, double dt)
    : candidates_(std::move(candidates)), params_(params), dt_(dt) {
  if (candidates_.empty()) throw Error("arbitration needs at least one candidate");
  for (const auto& c : candidates_) taus_.push_back(c.plan.horizon());
}

ArbitrationResult Arbitrator::step(const State& x, const Vec2& u) {
  for (std::size_t i = 0; i < candidates_.size(); ++i)
    taus_[i] = nearest_waypoint(candidates_[i].plan, x.head<2>(), taus_[i]);
  const int weight_tau = incumbent_ ? taus_[*incumbent_] : *std::min_element(taus_.begin(), taus_.end());

  ArbitrationResult r = arbitrate(x, u, candidates_, taus_, weight_tau);
  if (!incumbent_) {
    incumbent_ = r.best;
    r.switched = true;
  } else if (r.best != *incumbent_ && r.costs[r.best] < (1.0 - params_.hysteresis_margin) * r.costs[*incumbent_]) {
    streak_ = r.best == challenger_ ? streak_ + 1 : 1;
    challenger_ = r.best;
    if (streak_ >= params_.hysteresis_ticks) {
      incumbent_ = r.best;
      r.switched = true;
      streak_ = 0;
      challenger_ = -1;
    }
  } else {
    streak_ = 0;
    challenger_ = -1;
  }
  r.selected = *incumbent_;
  assist_command(r, candidates_[r.selected], taus_[r.selected], x, u, params_, dt_);
  return r;
}

}  // namespace sgw
