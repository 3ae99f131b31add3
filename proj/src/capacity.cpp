#include "facecap/capacity.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "facecap/parallel.hpp"
#include "facecap/rng.hpp"
#include "facecap/sphere_descent.hpp"

namespace facecap {

namespace {

constexpr double kCoincidenceTol = 1e-9;
constexpr double kPerturbScale = 1e-6;

// Raw-pointer pair loops: the O(n^2) pair sweeps dominate solver cost and
// Eigen row expressions add per-pair overhead that matters at this grain.
double riesz_value(const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows(), dim = x.cols();
  const double* p = x.data();  // column-major, entry (i, c) at p[i + c * n]
  double e = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (Eigen::Index c = 0; c < dim; ++c) {
        const double t = p[i + c * n] - p[j + c * n];
        s += t * t;
      }
      if (s < 1e-24) return std::numeric_limits<double>::infinity();
      e += 1.0 / std::sqrt(s);
    }
  }
  return e;
}

void riesz_grad(const Eigen::MatrixXd& x, Eigen::MatrixXd& g) {
  const Eigen::Index n = x.rows(), dim = x.cols();
  const double* p = x.data();
  g.setZero();
  double* gp = g.data();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (Eigen::Index c = 0; c < dim; ++c) {
        const double t = p[i + c * n] - p[j + c * n];
        s += t * t;
      }
      if (s < 1e-24) s = 1e-24;
      const double d = std::sqrt(s);
      const double w = 1.0 / (d * s);  // 1 / d^3
      for (Eigen::Index c = 0; c < dim; ++c) {
        const double t = w * (p[i + c * n] - p[j + c * n]);
        gp[i + c * n] -= t;
        gp[j + c * n] += t;
      }
    }
  }
}

// Re-perturbs one point of any (near-)coincident pair; the Riesz objective is
// singular there.
bool repair_coincident(Eigen::MatrixXd& x, Rng& rng) {
  bool touched = false;
  const Eigen::Index n = x.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if ((x.row(i) - x.row(j)).norm() < kCoincidenceTol) {
        for (Eigen::Index c = 0; c < x.cols(); ++c)
          x(j, c) += kPerturbScale * rng.gaussian();
        x.row(j) /= x.row(j).norm();
        touched = true;
      }
    }
  }
  return touched;
}

struct RestartOutcome {
  DescentResult descent;
  int index = 0;
};

DescentOptions descent_options(int max_iters) {
  DescentOptions opts;
  opts.max_iters = max_iters;
  return opts;
}

DescentResult solve_from(Eigen::MatrixXd init, int max_iters,
                         std::uint64_t repair_seed) {
  Rng repair_rng(repair_seed);
  return minimize_on_sphere(
      riesz_value, riesz_grad, std::move(init), descent_options(max_iters),
      [&repair_rng](Eigen::MatrixXd& x) { return repair_coincident(x, repair_rng); });
}

// Runs `restarts` random starts plus an optional warm start (previous optimum
// with one fresh random point appended, restart index == restarts). Reduction
// is argmin energy with smallest-index tie break, independent of scheduling.
DistributeResult distribute_impl(int n, int dim, int restarts, int max_iters,
                                 std::uint64_t seed, int threads,
                                 const Eigen::MatrixXd* warm_prev) {
  if (n < 2) throw std::invalid_argument("distribute: n must be >= 2");
  if (dim < 2) throw std::invalid_argument("distribute: dim must be >= 2");
  if (restarts < 1) throw std::invalid_argument("distribute: restarts must be >= 1");

  const bool warm = warm_prev != nullptr && warm_prev->rows() == n - 1;
  const int units = restarts + (warm ? 1 : 0);
  std::vector<RestartOutcome> outcomes(units);

  parallel_for(units, threads, [&](int k) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(n),
                        static_cast<std::uint64_t>(dim),
                        static_cast<std::uint64_t>(k)));
    Eigen::MatrixXd init;
    if (warm && k == restarts) {
      init.resize(n, dim);
      init.topRows(n - 1) = *warm_prev;
      init.row(n - 1) = random_unit_vector(rng, dim);
    } else {
      init = random_sphere_points(rng, n, dim);
    }
    outcomes[k].descent = solve_from(
        std::move(init), max_iters,
        derive_seed(seed, static_cast<std::uint64_t>(n),
                    static_cast<std::uint64_t>(dim), 0x7265700ULL + k));
    outcomes[k].index = k;
  });

  int best = 0;
  for (int k = 1; k < units; ++k)
    if (outcomes[k].descent.value < outcomes[best].descent.value) best = k;

  DistributeResult res;
  res.points = std::move(outcomes[best].descent.points);
  res.energy = outcomes[best].descent.value;
  res.converged = outcomes[best].descent.converged;
  res.iterations = outcomes[best].descent.iterations;
  res.best_restart = outcomes[best].index;
  res.min_distance =
      pairwise_min_distance(SpherePointSet::from_rows(res.points, 1e-6));
  return res;
}

// One step of the incremental n-scan shared by capacity() and
// capacity_sweep(): depends on (dim, seed, restarts, max_iters) only.
class CapacityChain {
 public:
  CapacityChain(int dim, int restarts, int max_iters, std::uint64_t seed,
                int threads)
      : dim_(dim), restarts_(restarts), max_iters_(max_iters), seed_(seed),
        threads_(threads) {}

  const DistributeResult& solve(int n) {
    if (n != next_n_) throw std::logic_error("CapacityChain: out-of-order solve");
    current_ = distribute_impl(n, dim_, restarts_, max_iters_, seed_, threads_,
                               have_prev_ ? &prev_points_ : nullptr);
    prev_points_ = current_.points;
    have_prev_ = true;
    ++next_n_;
    return current_;
  }

 private:
  int dim_, restarts_, max_iters_;
  std::uint64_t seed_;
  int threads_;
  int next_n_ = 2;
  bool have_prev_ = false;
  Eigen::MatrixXd prev_points_;
  DistributeResult current_;
};

int reported_capacity(int last_passing, CapacityConvention convention) {
  return convention == CapacityConvention::exclusive ? last_passing
                                                     : last_passing + 1;
}

// r'(n) from energy minimization is not strictly monotone in n: isolated n
// can beat their predecessors (the 12-point icosahedron in 3D has a larger
// minimum distance than the optimal 11-point set). The scan therefore keeps
// going until the bound has failed this many times in a row past a pass.
constexpr int kScanHysteresis = 4;

// Tracks one radius through the shared n-scan: the largest passing n, the
// witness r'(n+1), and whether the scan may stop for this radius.
class RadiusScan {
 public:
  RadiusScan(double radius, double tol) : radius_(radius), bound_(radius - tol) {}

  void observe(int n, const DistributeResult& cur) {
    if (resolved_) return;
    if (cur.min_distance >= bound_) {
      pass_n_ = n;
      pass_ = cur;
      pass_.points.resize(0, 0);  // only scalars are needed downstream
      fails_ = 0;
      return;
    }
    if (pass_n_ == n - 1) {
      witness_min_distance_ = cur.min_distance;
      witness_converged_ = cur.converged;
    }
    if (pass_n_ >= 0 && ++fails_ >= kScanHysteresis) resolved_ = true;
  }

  bool resolved() const { return resolved_; }
  bool ever_passed() const { return pass_n_ >= 0; }

  CapacityResult result(int dim, CapacityConvention convention, int n_max) const {
    CapacityResult r;
    r.dim = dim;
    r.radius = radius_;
    r.capacity = reported_capacity(pass_n_, convention);
    r.realized_min_distance = pass_.min_distance;
    r.energy = pass_.energy;
    r.iterations_used = pass_.iterations;
    r.restart_index_of_best = pass_.best_restart;
    if (pass_n_ == n_max) {
      // Even the ceiling satisfies the bound; no witness exists.
      r.capacity = n_max;
      r.ceiling_reached = true;
      r.next_min_distance = std::numeric_limits<double>::quiet_NaN();
      r.converged = pass_.converged;
    } else {
      r.next_min_distance = witness_min_distance_;
      r.converged = pass_.converged && witness_converged_;
    }
    return r;
  }

 private:
  double radius_;
  double bound_;
  int pass_n_ = -1;
  DistributeResult pass_;
  double witness_min_distance_ = std::numeric_limits<double>::quiet_NaN();
  bool witness_converged_ = false;
  int fails_ = 0;
  bool resolved_ = false;
};

}  // namespace

void CapacityConfig::validate() const {
  if (dim < 2) throw std::invalid_argument("capacity: dim must be >= 2");
  if (!(radius > 0.0 && radius < 2.0))
    throw std::invalid_argument("capacity: radius must lie in (0, 2)");
  if (n_max < 2) throw std::invalid_argument("capacity: n_max must be >= 2");
  if (restarts < 1) throw std::invalid_argument("capacity: restarts must be >= 1");
  if (max_iters < 1) throw std::invalid_argument("capacity: max_iters must be >= 1");
  if (feasibility_tol < 0.0)
    throw std::invalid_argument("capacity: feasibility_tol must be >= 0");
}

DistributeResult distribute(int n, int dim, int restarts, int max_iters,
                            std::uint64_t seed, int threads) {
  return distribute_impl(n, dim, restarts, max_iters, seed, threads, nullptr);
}

CapacityResult capacity(const CapacityConfig& cfg) {
  cfg.validate();

  CapacityChain chain(cfg.dim, cfg.restarts, cfg.max_iters, cfg.seed,
                      cfg.threads);
  RadiusScan scan(cfg.radius, cfg.feasibility_tol);
  for (int n = 2; n <= cfg.n_max && !scan.resolved(); ++n)
    scan.observe(n, chain.solve(n));
  if (!scan.ever_passed())
    throw std::runtime_error("capacity: n = 2 already fails the radius bound");
  return scan.result(cfg.dim, cfg.convention, cfg.n_max);
}

CapacitySweep capacity_sweep(const std::vector<int>& dims,
                             const std::vector<double>& radii,
                             const CapacityConfig& defaults) {
  if (dims.empty() || radii.empty())
    throw std::invalid_argument("capacity_sweep: empty grid");

  CapacitySweep sweep;
  sweep.dims = dims;
  sweep.radii = radii;
  sweep.defaults = defaults;
  sweep.cells.resize(dims.size() * radii.size());

  for (std::size_t di = 0; di < dims.size(); ++di) {
    // Validate per-cell configs first; invalid cells become error rows.
    std::vector<std::size_t> live;
    for (std::size_t ri = 0; ri < radii.size(); ++ri) {
      CapacityCell& cell = sweep.cells[di * radii.size() + ri];
      CapacityConfig cfg = defaults;
      cfg.dim = dims[di];
      cfg.radius = radii[ri];
      try {
        cfg.validate();
        live.push_back(ri);
      } catch (const std::exception& e) {
        cell.failed = true;
        cell.error = e.what();
      }
    }
    if (live.empty()) continue;

    // The n-scan is radius-independent, so one chain serves every radius of
    // this dimension; each cell matches the standalone capacity() call.
    CapacityConfig cfg = defaults;
    cfg.dim = dims[di];
    CapacityChain chain(cfg.dim, cfg.restarts, cfg.max_iters, cfg.seed,
                        cfg.threads);

    std::vector<RadiusScan> scans;
    scans.reserve(live.size());
    for (std::size_t ri : live)
      scans.emplace_back(radii[ri], cfg.feasibility_tol);

    for (int n = 2; n <= cfg.n_max; ++n) {
      bool all_resolved = true;
      for (auto& scan : scans) all_resolved = all_resolved && scan.resolved();
      if (all_resolved) break;
      const DistributeResult& cur = chain.solve(n);
      for (auto& scan : scans) scan.observe(n, cur);
    }

    for (std::size_t k = 0; k < live.size(); ++k) {
      CapacityCell& cell = sweep.cells[di * radii.size() + live[k]];
      if (!scans[k].ever_passed()) {
        cell.failed = true;
        cell.error = "capacity: n = 2 already fails the radius bound";
      } else {
        cell.result = scans[k].result(cfg.dim, cfg.convention, cfg.n_max);
      }
    }
  }
  return sweep;
}

}  // namespace facecap
