#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <vector>

#include "sgw/planner.hpp"

namespace sgw {

using State = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat32 = Eigen::Matrix<double, 3, 2>;
using Mat23 = Eigen::Matrix<double, 2, 3>;
using Mat2 = Eigen::Matrix2d;

inline State to_state(const Pose2& p) { return {p.x(), p.y(), p.theta()}; }

/// Kinematic plant x+ = x + G u dt; G lifts the planar velocity into (x, y, theta).
State plant_step(const State& x, const Vec2& u, double dt);

/// Per-waypoint error dynamics, indexed by time-to-go like the plan.
struct LinearizedDynamics {
  std::vector<Mat3> A;
  std::vector<Mat32> B;
  std::vector<State> c;

  int horizon() const { return static_cast<int>(A.size()) - 1; }
};

LinearizedDynamics linearize(const TrajectoryPlan& plan);

struct CostSchedule {
  std::vector<Mat3> Q;
  std::vector<Mat2> R;

  int horizon() const { return static_cast<int>(Q.size()) - 1; }
};

/// Q(tau) = diag(w, w, 1), R(tau) = diag(w, w) with w = exp(-tau dt kappa);
/// R entries never drop below r_floor.
CostSchedule make_cost_schedule(int horizon, double dt, double kappa, double r_floor = 1e-9);

struct GainSchedule {
  std::vector<Mat3> P;
  std::vector<Mat23> K;

  int horizon() const { return static_cast<int>(P.size()) - 1; }
  bool operator==(const GainSchedule&) const = default;
};

/// Dense backward Riccati recursion for arbitrary dimensions, indexed by
/// time-to-go. P[0] = terminal; for tau >= 1
///   K[tau] = (R + B' P[tau-1] B)^-1 B' P[tau-1] A
///   P[tau] = Q + A' P[tau-1] A - A' P[tau-1] B K[tau]
/// K[0] holds the goal with the tau = 0 costs against P[0].
/// Throws SolverError when R + B' P B is not positive definite.
struct RiccatiSolution {
  std::vector<Eigen::MatrixXd> P;
  std::vector<Eigen::MatrixXd> K;
};
RiccatiSolution riccati_backward(std::span<const Eigen::MatrixXd> A, std::span<const Eigen::MatrixXd> B,
                                 std::span<const Eigen::MatrixXd> Q, std::span<const Eigen::MatrixXd> R,
                                 const Eigen::MatrixXd& terminal);

GainSchedule solve_gains(const LinearizedDynamics& dyn, const CostSchedule& cost);

/// Held-input integral of the plant over dt.
State predict_state(const State& x, const Vec2& u, double dt);

struct ControllerParams {
  /// Decay rate of the cost schedules per second of time-to-go.
  double kappa = 1.0;
  double r_floor = 1e-9;
  /// Relative margin a challenger must beat the incumbent by.
  double hysteresis_margin = 0.05;
  /// Consecutive ticks the margin must hold before switching.
  int hysteresis_ticks = 3;
  /// Planar speed limit in mm/s.
  double speed_limit = 50.0;

  bool operator==(const ControllerParams&) const = default;
};

/// A plan ready for arbitration: its gains and cost schedule.
struct AssistCandidate {
  int id = 0;
  TrajectoryPlan plan;
  CostSchedule cost;
  GainSchedule gains;
};

AssistCandidate make_candidate(int id, TrajectoryPlan plan, const ControllerParams& params);

/// Index of the plan waypoint nearest to a position, searched over [0, tau_max].
/// Ties keep the larger time-to-go.
int nearest_waypoint(const TrajectoryPlan& plan, const Vec2& position, int tau_max);

/// Immediate cost of one candidate: xh' Q xh + uh' R uh with
/// xh = predict_state(x, u) - x_g(tau - 1) and uh = u - u_g(tau).
/// The weights are taken at weight_tau so candidates are compared on one scale.
double arbitration_cost(const AssistCandidate& c, int tau, const State& x, const Vec2& u, int weight_tau);

/// Candidate references are indices into the candidate list.
struct ArbitrationResult {
  int selected = -1;
  /// Cost per candidate, in candidate order.
  std::vector<double> costs;
  /// Lowest-cost candidate this tick, before hysteresis.
  int best = -1;
  /// Feedback command u_g - K (x - x_g) of the selected plan.
  Vec2 lqr_command = Vec2::Zero();
  /// Blend of lqr_command and the operator input, saturated.
  Vec2 command = Vec2::Zero();
  double alpha = 0.0;
  double theta = 0.0;
  double aperture = 0.0;
  /// Time-to-go of the selected plan.
  int waypoint = 0;
  bool switched = false;
};

/// Stateless greedy selection: costs for every candidate at its time-to-go and
/// the argmin (ties to the lowest candidate id). Throws Error on an empty candidate list.
ArbitrationResult arbitrate(const State& x, const Vec2& u, std::span<const AssistCandidate> candidates,
                            std::span<const int> taus, int weight_tau);

/// Fills lqr_command, command, alpha, theta, aperture and waypoint for candidate c at tau.
void assist_command(ArbitrationResult& r, const AssistCandidate& c, int tau, const State& x, const Vec2& u,
                    const ControllerParams& params, double dt);

Vec2 saturate(const Vec2& v, double limit);

/// Per-tick state machine: tracks each candidate's time-to-go, applies
/// hysteresis to the greedy choice and produces the blended command.
class Arbitrator {
 public:
  Arbitrator(std::vector<AssistCandidate> candidates, ControllerParams params, double dt);

  ArbitrationResult step(const State& x, const Vec2& u);

  const std::vector<AssistCandidate>& candidates() const { return candidates_; }
  const std::vector<int>& time_to_go() const { return taus_; }
  std::optional<int> incumbent() const { return incumbent_; }

 private:
  std::vector<AssistCandidate> candidates_;
  ControllerParams params_;
  double dt_;
  std::vector<int> taus_;
  std::optional<int> incumbent_;
  int challenger_ = -1;
  int streak_ = 0;
};

}  // namespace sgw
