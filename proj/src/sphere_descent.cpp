#include "facecap/sphere_descent.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace facecap {

namespace {

constexpr double kBBMin = 1e-12;
constexpr double kBBMax = 1e8;
constexpr double kPlateauRel = 1e-14;
constexpr int kPlateauWindow = 12;

void renormalize_rows(Eigen::MatrixXd& x) {
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double n = x.row(i).norm();
    if (n > 0.0) x.row(i) /= n;
  }
}

// Project the Euclidean gradient onto the tangent space of each row's sphere.
void project_to_tangent(const Eigen::MatrixXd& x, Eigen::MatrixXd& g) {
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    g.row(i) -= g.row(i).dot(x.row(i)) * x.row(i);
}

}  // namespace

// Spectral projected gradient: Barzilai-Borwein trial step, monotone Armijo
// backtracking, retraction by row renormalization. Stops on the gradient or
// step tolerance, or when the objective flatlines at double resolution.
DescentResult minimize_on_sphere(const SphereObjective& f,
                                 const SphereGradient& grad,
                                 Eigen::MatrixXd x0,
                                 const DescentOptions& opts,
                                 const SphereRepair& repair) {
  renormalize_rows(x0);

  DescentResult res;
  res.points = std::move(x0);

  Eigen::MatrixXd g(res.points.rows(), res.points.cols());
  Eigen::MatrixXd trial(res.points.rows(), res.points.cols());
  Eigen::MatrixXd prev_x, prev_g;

  double value = f(res.points);
  double bb_step = 0.0;
  std::deque<double> window{value};

  int iter = 0;
  for (; iter < opts.max_iters; ++iter) {
    if (repair && repair(res.points)) {
      value = f(res.points);
      prev_x.resize(0, 0);  // curvature pair no longer valid
    }

    grad(res.points, g);
    project_to_tangent(res.points, g);
    const double gnorm = g.norm();
    res.grad_norm = gnorm;
    if (gnorm <= opts.grad_tol) {
      res.converged = true;
      break;
    }

    if (prev_x.size() > 0) {
      const Eigen::MatrixXd s = res.points - prev_x;
      const Eigen::MatrixXd y = g - prev_g;
      const double sy = (s.array() * y.array()).sum();
      bb_step = sy > 0.0 ? std::clamp(s.squaredNorm() / sy, kBBMin, kBBMax)
                         : kBBMax;
    } else if (bb_step <= 0.0) {
      bb_step = 1.0 / (1.0 + gnorm);
    }

    prev_x = res.points;
    prev_g = g;

    bool accepted = false;
    double step_alpha = bb_step;
    for (int bt = 0; bt < opts.max_backtracks; ++bt) {
      trial = res.points - step_alpha * g;
      renormalize_rows(trial);
      const double trial_value = f(trial);
      if (trial_value <= value - opts.armijo_c * step_alpha * gnorm * gnorm) {
        res.points.swap(trial);
        value = trial_value;
        accepted = true;
        break;
      }
      step_alpha *= 0.5;
    }

    if (!accepted) {
      // Line search exhausted: either we are at the numerical floor of the
      // objective (tiny candidate step) or genuinely stuck.
      res.converged = step_alpha * gnorm <= opts.step_tol;
      break;
    }
    if (step_alpha * gnorm <= opts.step_tol) {
      res.converged = true;
      ++iter;
      break;
    }

    window.push_back(value);
    if (window.size() > kPlateauWindow) window.pop_front();
    if (window.size() == kPlateauWindow &&
        window.front() - value <= kPlateauRel * (1.0 + std::abs(value))) {
      res.converged = true;
      ++iter;
      break;
    }
  }

  res.value = value;
  res.iterations = iter;
  return res;
}

}  // namespace facecap
