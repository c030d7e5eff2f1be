#pragma once

// Shared scenes and independent numerical oracles for the test suites.

#include <array>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "sgw/gripper.hpp"
#include "sgw/scene.hpp"

namespace sgw::testing {

inline Obstacle make_rect(int id, double cx, double bottom, double w, double h) {
  Obstacle o;
  o.id = id;
  o.center = {cx, bottom + h / 2};
  o.half_extents = {w / 2, h / 2};
  return o;
}

/// The demonstration: a 40 x 30 mm block with a pinch grasp 8 mm below its top.
struct Demo {
  Landscape scene;
  Pose2 grasp{100.0, 22.0, -kPi / 2};
  double aperture = 40.0;
  GripperModel gripper;

  Demo() {
    scene.width = 200;
    scene.objects = {make_rect(0, 100, 0, 40, 30)};
  }
};

/// Randomised-shift Halton quasi Monte-Carlo estimate of the integral of f over a box.
inline double qmc_integrate(const std::function<double(const std::vector<double>&)>& f,
                            const std::vector<double>& lo, const std::vector<double>& hi, int n,
                            std::uint64_t seed) {
  static constexpr std::array<int, 6> primes{2, 3, 5, 7, 11, 13};
  const std::size_t dim = lo.size();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> shift(dim);
  for (auto& s : shift) s = unit(rng);
  double volume = 1.0;
  for (std::size_t d = 0; d < dim; ++d) volume *= hi[d] - lo[d];

  double sum = 0.0;
  std::vector<double> x(dim);
  for (int i = 1; i <= n; ++i) {
    for (std::size_t d = 0; d < dim; ++d) {
      double h = 0.0, scale = 1.0 / primes[d];
      for (int k = i; k > 0; k /= primes[d], scale /= primes[d]) h += (k % primes[d]) * scale;
      const double u = std::fmod(h + shift[d], 1.0);
      x[d] = lo[d] + u * (hi[d] - lo[d]);
    }
    sum += f(x);
  }
  return volume * sum / n;
}

/// Scalar finite-horizon LQR solved by exhaustive search over every control
/// sequence drawn from a uniform grid. Returns the best cost from x0 and, in
/// bound, the worst-case excess over the continuous optimum caused by the grid:
/// half the largest Hessian eigenvalue times the squared rounding distance.
struct GridDpResult {
  double cost = 0.0;
  double bound = 0.0;
};

inline GridDpResult grid_lqr_oracle(double a, double b, double q, double r, double terminal, int horizon, double x0,
                                    const std::vector<double>& controls) {
  auto cost_of = [&](const std::vector<double>& u) {
    double x = x0, j = 0.0;
    for (int k = 0; k < horizon; ++k) {
      j += q * x * x + r * u[k] * u[k];
      x = a * x + b * u[k];
    }
    return j + terminal * x * x;
  };
  GridDpResult out;
  out.cost = std::numeric_limits<double>::infinity();
  std::vector<int> idx(horizon, 0);
  std::vector<double> u(horizon);
  const int levels = static_cast<int>(controls.size());
  while (true) {
    for (int k = 0; k < horizon; ++k) u[k] = controls[idx[k]];
    out.cost = std::min(out.cost, cost_of(u));
    int k = 0;
    while (k < horizon && ++idx[k] == levels) idx[k++] = 0;
    if (k == horizon) break;
  }
  // The cost is quadratic in u, so second differences with unit steps give the exact Hessian.
  const double saved_x0 = x0;
  x0 = 0.0;
  std::vector<double> e(horizon, 0.0);
  const double j0 = cost_of(e);
  std::vector<double> hess(horizon * horizon);
  for (int i = 0; i < horizon; ++i) {
    for (int j = 0; j < horizon; ++j) {
      std::vector<double> ei(horizon, 0.0), ej(horizon, 0.0), eij(horizon, 0.0);
      ei[i] = 1;
      ej[j] = 1;
      eij[i] += 1;
      eij[j] += 1;
      hess[i * horizon + j] = cost_of(eij) - cost_of(ei) - cost_of(ej) + j0;
    }
  }
  x0 = saved_x0;
  // Gershgorin bound on the largest eigenvalue.
  double lmax = 0.0;
  for (int i = 0; i < horizon; ++i) {
    double row = 0.0;
    for (int j = 0; j < horizon; ++j) row += std::abs(hess[i * horizon + j]);
    lmax = std::max(lmax, row);
  }
  double spacing = 0.0;
  for (std::size_t i = 1; i < controls.size(); ++i) spacing = std::max(spacing, controls[i] - controls[i - 1]);
  out.bound = 0.5 * lmax * horizon * (spacing / 2) * (spacing / 2);
  return out;
}

}  // namespace sgw::testing
