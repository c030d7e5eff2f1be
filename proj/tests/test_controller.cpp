#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "sgw/controller.hpp"
#include "sgw/error.hpp"

using namespace sgw;
using Eigen::MatrixXd;

namespace {

MatrixXd scalar(double v) { return MatrixXd::Constant(1, 1, v); }

TrajectoryPlan line_plan(Vec2 from, Vec2 to, int id = 0) {
  Landscape empty;
  CandidateGrasp g{Pose2(to, -kPi / 2), 20.0, 1.0, id};
  return plan_trajectory({Pose2(from, -kPi / 2), 20.0}, g, empty, GripperModel{});
}

}  // namespace

TEST_CASE("horizon-one scalar recursion matches the hand solution") {
  const std::vector<MatrixXd> one(2, scalar(1.0));
  const auto s = riccati_backward(one, one, one, one, scalar(1.0));
  CHECK(std::abs(s.K[1](0, 0) - 0.5) < 1e-12);
  CHECK(std::abs(s.P[1](0, 0) - 1.5) < 1e-12);
}

TEST_CASE("scalar recursion matches exhaustive search over a control grid") {
  const int horizon = 4;
  const double a = 1.0, b = 1.0, q = 1.0, r = 1.0, terminal = 1.0;
  const std::vector<MatrixXd> A(horizon + 1, scalar(a)), B(horizon + 1, scalar(b)), Q(horizon + 1, scalar(q)),
      R(horizon + 1, scalar(r));
  const auto s = riccati_backward(A, B, Q, R, scalar(terminal));
  std::vector<double> controls;
  for (int i = 0; i <= 30; ++i) controls.push_back(-1.5 + 0.1 * i);
  for (double x0 : {-1.0, 0.0, 1.0}) {
    const auto dp = testing::grid_lqr_oracle(a, b, q, r, terminal, horizon, x0, controls);
    const double lqr = s.P[horizon](0, 0) * x0 * x0;
    CHECK(dp.cost >= lqr - 1e-12);
    CHECK(dp.cost <= lqr + dp.bound + 1e-12);
  }
}

TEST_CASE("zero input map gives zero gain") {
  const int n = 6;
  std::vector<MatrixXd> A(n, MatrixXd::Identity(3, 3)), B(n, MatrixXd::Zero(3, 2)), Q(n, MatrixXd::Zero(3, 3)),
      R(n, MatrixXd::Identity(2, 2));
  const auto s = riccati_backward(A, B, Q, R, MatrixXd::Identity(3, 3));
  for (const auto& k : s.K) CHECK(k.norm() == 0.0);
}

TEST_CASE("long horizon converges to the algebraic Riccati solution") {
  const double dt = 0.05, q = 1.0, r = 1.0;
  const int n = 2000;
  LinearizedDynamics dyn;
  dyn.A.assign(n + 1, Mat3::Identity());
  Mat32 b = Mat32::Zero();
  b(0, 0) = b(1, 1) = dt;
  dyn.B.assign(n + 1, b);
  dyn.c.assign(n + 1, State::Zero());
  CostSchedule cost;
  cost.Q.assign(n + 1, Mat3::Identity());
  cost.R.assign(n + 1, Mat2::Identity());
  const auto g = solve_gains(dyn, cost);
  // Closed form of p = q + p - p^2 dt^2 / (r + dt^2 p) for each translational axis.
  const double p_inf = (q * dt * dt + std::sqrt(q * q * std::pow(dt, 4) + 4 * dt * dt * q * r)) / (2 * dt * dt);
  CHECK(std::abs(g.P[n](0, 0) - p_inf) < 1e-6);
  CHECK(std::abs(g.P[n](1, 1) - p_inf) < 1e-6);
  // The heading row is uncontrolled, so its cost-to-go accumulates one unit per step.
  CHECK(g.P[n](2, 2) == doctest::Approx(n + 1.0));
}

TEST_CASE("cost schedule shape") {
  const auto c = make_cost_schedule(40, 0.05, 1.0);
  CHECK(c.Q[0] == Mat3::Identity());
  CHECK(c.Q[20](0, 0) == doctest::Approx(std::exp(-1.0)));
  CHECK(c.Q[20](2, 2) == 1.0);
  CHECK(c.R[40](1, 1) == doctest::Approx(std::exp(-2.0)));
  const auto floored = make_cost_schedule(10, 1.0, 100.0, 1e-9);
  CHECK(floored.R[10](0, 0) == 1e-9);
}

TEST_CASE("gain schedules keep P symmetric positive semidefinite") {
  const auto plan = line_plan({20, 180}, {200, 30});
  const auto g = solve_gains(linearize(plan), make_cost_schedule(plan.horizon(), plan.dt, 1.0));
  for (const auto& p : g.P) {
    CHECK((p - p.transpose()).norm() == 0.0);
    CHECK(Eigen::SelfAdjointEigenSolver<Mat3>(p).eigenvalues().minCoeff() >= -1e-9);
  }
  for (const auto& k : g.K) CHECK(k.allFinite());
}

TEST_CASE("linearization of the kinematic plant") {
  const auto plan = line_plan({0, 100}, {50, 20});
  const auto d = linearize(plan);
  for (int tau = 0; tau <= d.horizon(); ++tau) {
    CHECK(d.A[tau] == Mat3::Identity());
    CHECK(d.B[tau].row(2).norm() == 0.0);
    CHECK(d.c[tau] == State::Zero());
  }
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(-100.0, 100.0);
  const double h = 1e-4;
  for (int i = 0; i < 10; ++i) {
    const State x(unit(rng), unit(rng), unit(rng) / 50);
    const Vec2 u(unit(rng), unit(rng));
    Mat3 ja;
    Mat32 jb;
    for (int j = 0; j < 3; ++j) {
      State e = State::Zero();
      e[j] = h;
      ja.col(j) = (plant_step(x + e, u, plan.dt) - plant_step(x - e, u, plan.dt)) / (2 * h);
    }
    for (int j = 0; j < 2; ++j) {
      Vec2 e = Vec2::Zero();
      e[j] = h;
      jb.col(j) = (plant_step(x, u + e, plan.dt) - plant_step(x, u - e, plan.dt)) / (2 * h);
    }
    CHECK((ja - d.A[0]).norm() < 1e-6);
    CHECK((jb - d.B[0]).norm() < 1e-6);
  }
}

TEST_CASE("state prediction") {
  const State x(3, -2, 0.4);
  CHECK(predict_state(x, Vec2::Zero(), 0.05) == x);
  const State p = predict_state(State::Zero(), Vec2(10, 0), 0.05);
  CHECK(p.x() == doctest::Approx(0.5));
  CHECK(p.y() == 0.0);
  CHECK(p.z() == 0.0);
  State fine = x;
  const Vec2 u(12.5, -7.25);
  for (int i = 0; i < 100; ++i) fine = plant_step(fine, u, 0.05 / 100);
  CHECK((fine - predict_state(x, u, 0.05)).norm() < 1e-12);
}

TEST_CASE("exact match on a plan costs nothing and selects it") {
  std::vector<AssistCandidate> cands{make_candidate(0, line_plan({100, 150}, {100, 30}), {}),
                                     make_candidate(1, line_plan({100, 150}, {220, 60}, 1), {})};
  const int tau = 40;
  const State x = to_state(cands[0].plan.at(tau).pose);
  const std::vector<int> taus{tau, tau};
  const auto r = arbitrate(x, cands[0].plan.controls[tau], cands, taus, tau);
  CHECK(r.best == 0);
  CHECK(r.costs[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.costs[1] > 0.0);
}

TEST_CASE("argmin is invariant to cost scaling and candidate order") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<AssistCandidate> cands;
  for (int i = 0; i < 4; ++i)
    cands.push_back(make_candidate(i, line_plan({150, 160}, {60.0 + 50 * i, 20.0 + 10 * i}, i), {}));
  for (int trial = 0; trial < 50; ++trial) {
    const State x(150 + 40 * unit(rng), 120 + 30 * unit(rng), -kPi / 2);
    const Vec2 u(40 * unit(rng), 40 * unit(rng));
    std::vector<int> taus;
    for (const auto& c : cands) taus.push_back(nearest_waypoint(c.plan, x.head<2>(), c.plan.horizon()));
    const auto base = arbitrate(x, u, cands, taus, taus[0]);

    auto scaled = cands;
    for (auto& c : scaled) {
      for (auto& q : c.cost.Q) q *= 3.7;
      for (auto& r : c.cost.R) r *= 3.7;
    }
    CHECK(arbitrate(x, u, scaled, taus, taus[0]).best == base.best);

    std::vector<AssistCandidate> reversed(cands.rbegin(), cands.rend());
    std::vector<int> rtaus(taus.rbegin(), taus.rend());
    const auto rev = arbitrate(x, u, reversed, rtaus, taus[0]);
    CHECK(reversed[rev.best].id == cands[base.best].id);
  }
}

TEST_CASE("cost ties go to the lowest id") {
  const auto plan = line_plan({100, 150}, {100, 30});
  std::vector<AssistCandidate> cands{make_candidate(5, plan, {}), make_candidate(2, plan, {})};
  const std::vector<int> taus{10, 10};
  const auto r = arbitrate(State(100, 60, -kPi / 2), Vec2(3, 4), cands, taus, 10);
  CHECK(cands[r.best].id == 2);
}

TEST_CASE("a single candidate is always selected") {
  Arbitrator arb({make_candidate(0, line_plan({100, 150}, {100, 30}), {})}, {}, 0.05);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(-50.0, 50.0);
  for (int i = 0; i < 100; ++i) CHECK(arb.step(State(100 + unit(rng), 100 + unit(rng), 0), Vec2(unit(rng), unit(rng))).selected == 0);
}

TEST_CASE("empty candidate list is rejected") {
  CHECK_THROWS_AS(arbitrate(State::Zero(), Vec2::Zero(), {}, {}, 0), Error);
}

TEST_CASE("operator heading toward another plan switches the selection") {
  // Plans from a common start diverge by more than 90 degrees.
  const Vec2 start(150, 150);
  std::vector<AssistCandidate> cands{make_candidate(0, line_plan(start, {40, 60}, 0), {}),
                                     make_candidate(1, line_plan(start, {260, 60}, 1), {})};
  Arbitrator arb(cands, {}, 0.05);
  State x(start.x(), start.y(), -kPi / 2);
  const int n0 = cands[0].plan.horizon();
  auto r = arb.step(x, cands[0].plan.controls[n0]);
  REQUIRE(r.selected == 0);
  const Vec2 toward_b = cands[1].plan.controls[cands[1].plan.horizon()];
  int switched_at = -1;
  for (int tick = 0; tick < 20 && switched_at < 0; ++tick) {
    // Brute-force oracle for the greedy cost of each plan at the shared weight.
    r = arb.step(x, toward_b);
    const double ca = arbitration_cost(cands[0], arb.time_to_go()[0], x, toward_b, arb.time_to_go()[0]);
    const double cb = arbitration_cost(cands[1], arb.time_to_go()[1], x, toward_b, arb.time_to_go()[0]);
    CHECK(r.costs[1] <= r.costs[0]);
    CHECK(cb < ca);
    if (r.selected == 1) switched_at = tick;
    x = plant_step(x, r.command, 0.05);
  }
  CHECK(switched_at >= 2);
  CHECK(switched_at <= 5);
}

TEST_CASE("zero gain reproduces the nominal control on the plan") {
  auto c = make_candidate(0, line_plan({100, 150}, {100, 30}), {});
  for (auto& k : c.gains.K) k.setZero();
  ArbitrationResult r;
  const int tau = 12;
  assist_command(r, c, tau, to_state(c.plan.at(tau).pose), c.plan.controls[tau], {}, c.plan.dt);
  CHECK((r.lqr_command - c.plan.controls[tau]).norm() == 0.0);
  CHECK((r.command - c.plan.controls[tau]).norm() < 1e-12);
  CHECK(r.theta == c.plan.at(tau - 1).pose.theta());
  CHECK(r.aperture == c.plan.at(tau - 1).aperture);
}

TEST_CASE("feedback reduces perpendicular error near the goal") {
  const auto c = make_candidate(0, line_plan({100, 150}, {100, 30}), {});
  for (int tau : {1, 5, 10, 20}) {
    ArbitrationResult r;
    State x = to_state(c.plan.at(tau).pose);
    x.x() += 5.0;
    assist_command(r, c, tau, x, c.plan.controls[tau], {}, c.plan.dt);
    CHECK(r.lqr_command.x() < 0.0);
    CHECK(r.command.x() < 0.0);
  }
}

TEST_CASE("blended command never exceeds the speed limit") {
  const auto c = make_candidate(0, line_plan({100, 150}, {100, 30}), {});
  ControllerParams params;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    ArbitrationResult r;
    const int tau = static_cast<int>((unit(rng) + 1) / 2 * c.plan.horizon());
    const State x(100 + 500 * unit(rng), 100 + 500 * unit(rng), unit(rng));
    assist_command(r, c, tau, x, Vec2(300 * unit(rng), 300 * unit(rng)), params, c.plan.dt);
    CHECK(r.command.norm() <= params.speed_limit + 1e-12);
    CHECK(r.command.allFinite());
  }
}

TEST_CASE("following the nominal controls reaches the goal") {
  const auto plan = line_plan({30, 170}, {210, 40});
  Arbitrator arb({make_candidate(0, plan, {})}, {}, plan.dt);
  State x = to_state(plan.at(plan.horizon()).pose);
  double prev = std::numeric_limits<double>::infinity();
  int steps = 0;
  for (; steps < plan.horizon() + 5; ++steps) {
    const int tau = nearest_waypoint(plan, x.head<2>(), arb.time_to_go()[0]);
    const auto r = arb.step(x, plan.controls[tau]);
    x = plant_step(x, r.command, plan.dt);
    const double d = (x.head<2>() - plan.grasp.pose.p()).norm();
    CHECK(d <= prev + 1e-9);
    prev = d;
    if ((x.head<2>() - plan.grasp.pose.p()).norm() < 1e-6) break;
  }
  CHECK((x.head<2>() - plan.grasp.pose.p()).norm() < 1e-6);
  CHECK(steps <= plan.horizon() + 5);
}
