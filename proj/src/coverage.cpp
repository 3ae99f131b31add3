#include "facecap/coverage.hpp"

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

// Mean squared deviation of the match distances from r (the quantity the
// verdict reports), without penalty terms.
double match_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& pole,
                       double r) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double d = (x.row(i).transpose() - pole).norm();
    acc += (d - r) * (d - r);
  }
  return acc / static_cast<double>(x.rows());
}

double penalized_value(const Eigen::MatrixXd& x, const Eigen::VectorXd& pole,
                       double r, double w) {
  const Eigen::Index n = x.rows();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = (x.row(i).transpose() - pole).norm();
    acc += (d - r) * (d - r);
  }
  acc /= static_cast<double>(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = (x.row(i) - x.row(j)).norm();
      if (d < r) acc += w * (r - d) * (r - d);
    }
  }
  return acc;
}

void penalized_grad(const Eigen::MatrixXd& x, Eigen::MatrixXd& g,
                    const Eigen::VectorXd& pole, double r, double w) {
  const Eigen::Index n = x.rows();
  g.setZero();
  const double inv_n = 1.0 / static_cast<double>(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::RowVectorXd diff = x.row(i) - pole.transpose();
    const double d = diff.norm();
    if (d > 1e-12) g.row(i) += inv_n * 2.0 * (d - r) / d * diff;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const Eigen::RowVectorXd diff = x.row(i) - x.row(j);
      const double d = diff.norm();
      if (d < r && d > 1e-12) {
        const double coef = -2.0 * w * (r - d) / d;
        g.row(i) += coef * diff;
        g.row(j) -= coef * diff;
      }
    }
  }
}

// Nudges points off (near-)coincidence with each other or with the pole,
// where the match gradient direction is undefined.
bool repair_degenerate(Eigen::MatrixXd& x, const Eigen::VectorXd& pole,
                       Rng& rng) {
  bool touched = false;
  const Eigen::Index n = x.rows();
  auto perturb = [&](Eigen::Index row) {
    for (Eigen::Index c = 0; c < x.cols(); ++c)
      x(row, c) += kPerturbScale * rng.gaussian();
    x.row(row) /= x.row(row).norm();
    touched = true;
  };
  for (Eigen::Index i = 0; i < n; ++i) {
    if ((x.row(i).transpose() - pole).norm() < kCoincidenceTol) perturb(i);
    for (Eigen::Index j = i + 1; j < n; ++j)
      if ((x.row(i) - x.row(j)).norm() < kCoincidenceTol) perturb(j);
  }
  return touched;
}

// Random unit tangent at the pole; initial points sit on the match circle
// (chord `radius` from the pole) at random azimuths.
Eigen::VectorXd random_tangent(Rng& rng, const Eigen::VectorXd& pole) {
  const Eigen::Index dim = pole.size();
  Eigen::VectorXd t;
  double n = 0.0;
  do {
    t = random_gaussian_vector(rng, dim);
    t -= t.dot(pole) * pole;
    n = t.norm();
  } while (n < 1e-9);
  return t / n;
}

Eigen::MatrixXd initial_placement(Rng& rng, int n, const Eigen::VectorXd& pole,
                                  double radius) {
  const double polar = 2.0 * std::asin(radius / 2.0);
  const double c = std::cos(polar), s = std::sin(polar);
  Eigen::MatrixXd x(n, pole.size());
  for (int i = 0; i < n; ++i)
    x.row(i) = (c * pole + s * random_tangent(rng, pole)).transpose();
  return x;
}

struct RestartOutcome {
  Eigen::MatrixXd points;
  double objective = std::numeric_limits<double>::infinity();
  double worst_match = 0.0;
  double min_sep = 0.0;
  bool converged = false;
  bool feasible = false;
  int iterations = 0;
};

Eigen::VectorXd north_pole(int dim) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(dim);
  p[dim - 1] = 1.0;
  return p;
}

}  // namespace

void CoverageConfig::validate() const {
  if (dim < 2) throw std::invalid_argument("coverage: dim must be >= 2");
  if (!(radius > 0.0 && radius < 2.0))
    throw std::invalid_argument("coverage: radius must lie in (0, 2)");
  if (n_max < 1) throw std::invalid_argument("coverage: n_max must be >= 1");
  if (restarts < 1) throw std::invalid_argument("coverage: restarts must be >= 1");
  if (max_iters < 1) throw std::invalid_argument("coverage: max_iters must be >= 1");
  if (penalty_rounds < 1)
    throw std::invalid_argument("coverage: penalty_rounds must be >= 1");
  if (feasibility_tol < 0.0 || match_slack < 0.0 || separation_margin < 0.0)
    throw std::invalid_argument("coverage: tolerances must be >= 0");
}

std::string to_string(PlacementVerdict v) {
  switch (v) {
    case PlacementVerdict::feasible: return "feasible";
    case PlacementVerdict::infeasible_constraints:
      return "infeasible (constraint violated)";
    case PlacementVerdict::infeasible_unconverged:
      return "infeasible (unconverged)";
  }
  return "unknown";
}

PlacementResult place_around_masterface(
    const CoverageConfig& cfg, int n,
    const std::optional<Eigen::VectorXd>& pole_opt) {
  cfg.validate();
  if (n < 1) throw std::invalid_argument("place_around_masterface: n must be >= 1");

  Eigen::VectorXd pole = pole_opt ? *pole_opt : north_pole(cfg.dim);
  if (pole.size() != cfg.dim)
    throw std::invalid_argument("place_around_masterface: pole dimension mismatch");
  pole /= pole.norm();

  const double r = cfg.radius;
  std::vector<RestartOutcome> outcomes(cfg.restarts);

  parallel_for(cfg.restarts, cfg.threads, [&](int k) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(n),
                        static_cast<std::uint64_t>(cfg.dim),
                        static_cast<std::uint64_t>(k)));
    Eigen::MatrixXd x = initial_placement(rng, n, pole, r);

    Rng repair_rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(n),
                               static_cast<std::uint64_t>(cfg.dim),
                               0x636f7600ULL + k));
    RestartOutcome& out = outcomes[k];
    double w = cfg.penalty_initial;
    for (int round = 0; round < cfg.penalty_rounds; ++round) {
      DescentOptions opts;
      opts.max_iters = cfg.max_iters;
      DescentResult dr = minimize_on_sphere(
          [&](const Eigen::MatrixXd& p) { return penalized_value(p, pole, r, w); },
          [&](const Eigen::MatrixXd& p, Eigen::MatrixXd& g) {
            penalized_grad(p, g, pole, r, w);
          },
          std::move(x), opts,
          [&](Eigen::MatrixXd& p) { return repair_degenerate(p, pole, repair_rng); });
      x = std::move(dr.points);
      out.converged = dr.converged;
      out.iterations += dr.iterations;
      w *= 10.0;
    }

    // Verdict from raw distances, not solver-internal state.
    out.points = std::move(x);
    out.objective = match_objective(out.points, pole, r);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      worst = std::max(worst, (out.points.row(i).transpose() - pole).norm());
    out.worst_match = worst;
    double min_sep = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j)
        min_sep = std::min(min_sep, (out.points.row(i) - out.points.row(j)).norm());
    out.min_sep = min_sep;
    out.feasible = worst <= r + cfg.match_slack &&
                   (n < 2 || min_sep >= r + cfg.separation_margin);
  });

  // Prefer feasible restarts; among them (or among all, if none), take the
  // smallest objective with smallest-index tie break.
  int best = 0;
  bool any_feasible = outcomes[0].feasible;
  bool any_converged = outcomes[0].converged;
  for (int k = 1; k < cfg.restarts; ++k) {
    any_feasible = any_feasible || outcomes[k].feasible;
    any_converged = any_converged || outcomes[k].converged;
    if (outcomes[k].feasible != outcomes[best].feasible) {
      if (outcomes[k].feasible) best = k;
    } else if (outcomes[k].objective < outcomes[best].objective) {
      best = k;
    }
  }

  const RestartOutcome& sel = outcomes[best];
  PlacementResult res;
  res.points = sel.points;
  res.objective = sel.objective;
  res.worst_match_distance = sel.worst_match;
  res.min_separation = sel.min_sep;
  res.converged = sel.converged;
  res.best_restart = best;
  res.iterations = sel.iterations;
  if (any_feasible)
    res.verdict = PlacementVerdict::feasible;
  else if (any_converged)
    res.verdict = PlacementVerdict::infeasible_constraints;
  else
    res.verdict = PlacementVerdict::infeasible_unconverged;
  return res;
}

CoverageResult max_coverage(const CoverageConfig& cfg) {
  cfg.validate();

  CoverageResult out;
  out.dim = cfg.dim;
  out.radius = cfg.radius;

  PlacementResult last_feasible;
  bool have_feasible = false;
  for (int n = 1; n <= cfg.n_max; ++n) {
    PlacementResult cur = place_around_masterface(cfg, n);
    if (cur.verdict == PlacementVerdict::feasible) {
      last_feasible = std::move(cur);
      have_feasible = true;
      continue;
    }
    out.coverage = n - 1;
    out.infeasible_at_next = true;
    if (have_feasible) {
      out.objective = last_feasible.objective;
      out.worst_match_distance = last_feasible.worst_match_distance;
      out.min_separation = last_feasible.min_separation;
      out.feasible_at_coverage = true;
      out.converged = last_feasible.converged;
      out.iterations_used = last_feasible.iterations;
      out.restart_index_of_best = last_feasible.best_restart;
    }
    return out;
  }

  out.coverage = cfg.n_max;
  out.ceiling_reached = true;
  out.objective = last_feasible.objective;
  out.worst_match_distance = last_feasible.worst_match_distance;
  out.min_separation = last_feasible.min_separation;
  out.feasible_at_coverage = have_feasible;
  out.converged = last_feasible.converged;
  out.iterations_used = last_feasible.iterations;
  out.restart_index_of_best = last_feasible.best_restart;
  return out;
}

CoverageSweep coverage_sweep(const std::vector<int>& dims,
                             const std::vector<double>& radii,
                             const CoverageConfig& defaults) {
  if (dims.empty() || radii.empty())
    throw std::invalid_argument("coverage_sweep: empty grid");

  CoverageSweep sweep;
  sweep.dims = dims;
  sweep.radii = radii;
  sweep.defaults = defaults;
  sweep.cells.resize(dims.size() * radii.size());

  for (std::size_t di = 0; di < dims.size(); ++di) {
    for (std::size_t ri = 0; ri < radii.size(); ++ri) {
      CoverageCell& cell = sweep.cells[di * radii.size() + ri];
      CoverageConfig cfg = defaults;
      cfg.dim = dims[di];
      cfg.radius = radii[ri];
      try {
        cell.result = max_coverage(cfg);
      } catch (const std::exception& e) {
        cell.failed = true;
        cell.error = e.what();
      }
    }
  }
  return sweep;
}

}  // namespace facecap
