#pragma once

#include <functional>

#include <Eigen/Core>

namespace facecap {

struct DescentOptions {
  int max_iters = 5000;
  double grad_tol = 1e-8;   // Frobenius norm of the projected gradient
  double step_tol = 1e-10;  // accepted step length below this counts as converged
  double armijo_c = 1e-4;
  int max_backtracks = 60;
};

struct DescentResult {
  Eigen::MatrixXd points;  // rows unit length
  double value = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Objective over an n x d row-matrix of sphere points. May return +inf to
// reject a trial step (e.g. near-coincident points).
using SphereObjective = std::function<double(const Eigen::MatrixXd&)>;
// Euclidean gradient dF/dX written into the second argument (same shape).
using SphereGradient =
    std::function<void(const Eigen::MatrixXd&, Eigen::MatrixXd&)>;
// Optional iterate repair hook, run before each iteration; returns true if it
// modified the iterate (rows must stay unit length).
using SphereRepair = std::function<bool(Eigen::MatrixXd&)>;

// Projected gradient descent on the product of unit spheres: gradient step,
// per-row renormalization, Armijo backtracking line search.
DescentResult minimize_on_sphere(const SphereObjective& f,
                                 const SphereGradient& grad,
                                 Eigen::MatrixXd x0,
                                 const DescentOptions& opts,
                                 const SphereRepair& repair = nullptr);

}  // namespace facecap
