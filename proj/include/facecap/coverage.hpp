#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "facecap/geometry.hpp"

namespace facecap {

struct CoverageConfig {
  int dim = 3;
  double radius = 1.0;  // chord units, in (0, 2)
  int n_max = 64;
  int restarts = 32;    // harder landscape than capacity
  int max_iters = 1500; // per penalty round
  std::uint64_t seed = 0;
  double feasibility_tol = 1e-6;
  double match_slack = 1e-6;
  // Separation is checked strictly: min separation must clear radius by this
  // margin. The separation constraint is a strict inequality and the match
  // objective actively squeezes identities down to distance exactly `radius`
  // from each other in tight packings; accepting those boundary
  // configurations would overcount the coverage by one.
  double separation_margin = 1e-4;
  int penalty_rounds = 6;
  double penalty_initial = 10.0;  // escalated x10 per round
  int threads = 0;

  void validate() const;
};

enum class PlacementVerdict {
  feasible,
  infeasible_constraints,  // at least one restart converged, none feasible
  infeasible_unconverged,  // no restart converged and none feasible
};

std::string to_string(PlacementVerdict v);

struct PlacementResult {
  Eigen::MatrixXd points;       // n x d identity points (best restart)
  double objective = 0.0;       // mean over i of (D(x_i, mf) - r)^2
  double worst_match_distance = 0.0;
  double min_separation = 0.0;  // +inf when n == 1
  bool converged = false;
  PlacementVerdict verdict = PlacementVerdict::infeasible_unconverged;
  int best_restart = 0;
  int iterations = 0;
};

// Places n identity points around a fixed MasterFace point so that every
// identity lies within chord `radius` of it while identities stay mutually
// separated by more than `radius`. The MasterFace defaults to the north pole
// (last coordinate 1); by rotational symmetry the pole choice does not
// affect feasibility. Quadratic-penalty method over the separation
// constraints, projected gradient descent inside each round.
PlacementResult place_around_masterface(
    const CoverageConfig& cfg, int n,
    const std::optional<Eigen::VectorXd>& pole = std::nullopt);

struct CoverageResult {
  int dim = 0;
  double radius = 0.0;
  int coverage = 0;  // N-bar
  double objective = 0.0;
  double worst_match_distance = 0.0;
  double min_separation = 0.0;
  bool feasible_at_coverage = false;
  bool infeasible_at_next = false;
  bool ceiling_reached = false;
  bool converged = false;
  int iterations_used = 0;
  int restart_index_of_best = 0;
};

// Largest feasible n <= n_max (feasibility is monotone: dropping a point
// preserves both constraint families), with the witness verdict at n + 1.
CoverageResult max_coverage(const CoverageConfig& cfg);

struct CoverageCell {
  CoverageResult result;
  bool failed = false;
  std::string error;
};

struct CoverageSweep {
  std::vector<int> dims;
  std::vector<double> radii;
  CoverageConfig defaults;
  std::vector<CoverageCell> cells;  // dims-major order
  const CoverageCell& cell(std::size_t di, std::size_t ri) const {
    return cells[di * radii.size() + ri];
  }
};

CoverageSweep coverage_sweep(const std::vector<int>& dims,
                             const std::vector<double>& radii,
                             const CoverageConfig& defaults);

}  // namespace facecap
