#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "facecap/geometry.hpp"

namespace facecap {

// Capacity counting convention for the boundary case. `exclusive` reports the
// last n whose realized nearest-neighbour distance clears the radius;
// `inclusive` reports the first n that fails (one more).
enum class CapacityConvention { exclusive, inclusive };

struct CapacityConfig {
  int dim = 3;
  double radius = 1.0;  // chord units, in (0, 2)
  int n_max = 128;
  int restarts = 16;
  int max_iters = 5000;
  std::uint64_t seed = 0;
  double feasibility_tol = 1e-6;
  CapacityConvention convention = CapacityConvention::exclusive;
  int threads = 0;  // 0 = hardware concurrency

  void validate() const;
};

struct DistributeResult {
  Eigen::MatrixXd points;  // n x d, unit rows
  double energy = 0.0;
  double min_distance = 0.0;  // r'
  bool converged = false;
  int iterations = 0;
  int best_restart = 0;
};

// Multi-restart Riesz-energy minimization of n points on the unit sphere in
// R^dim. Deterministic for a fixed seed regardless of thread scheduling:
// restart k draws from seed derive_seed(seed, n, dim, k) and the best
// configuration is the lowest-energy one with the smallest restart index.
// A non-converged best restart is still returned, flagged.
DistributeResult distribute(int n, int dim, int restarts, int max_iters,
                            std::uint64_t seed, int threads = 0);

struct CapacityResult {
  int dim = 0;
  double radius = 0.0;
  // Reported count under cfg.convention. The distance fields below always
  // refer to the exclusive reading: realized_min_distance is r' at the last
  // passing n, next_min_distance is r' at the first failing n (NaN when the
  // search hit n_max without failing).
  int capacity = 0;
  double realized_min_distance = 0.0;
  double next_min_distance = 0.0;
  double energy = 0.0;
  int iterations_used = 0;
  int restart_index_of_best = 0;
  bool converged = false;        // solves backing the result all converged
  bool ceiling_reached = false;  // n_max passed the bound; capacity == n_max
};

// Largest n <= n_max with r'(n) >= radius - feasibility_tol, scanning n
// upward with full restarts plus a warm start from the previous optimum.
CapacityResult capacity(const CapacityConfig& cfg);

struct CapacityCell {
  CapacityResult result;
  bool failed = false;
  std::string error;
};

struct CapacitySweep {
  std::vector<int> dims;
  std::vector<double> radii;
  CapacityConfig defaults;                // radius/dim fields ignored
  std::vector<CapacityCell> cells;        // dims-major order
  const CapacityCell& cell(std::size_t di, std::size_t ri) const {
    return cells[di * radii.size() + ri];
  }
};

// One capacity result per (d, r) grid cell. The n-scan is shared across the
// radii of one dimension (it does not depend on r), so each cell equals the
// standalone capacity() call with the same config.
CapacitySweep capacity_sweep(const std::vector<int>& dims,
                             const std::vector<double>& radii,
                             const CapacityConfig& defaults);

}  // namespace facecap
