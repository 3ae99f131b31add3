#include "facecap/model_fit.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include <Eigen/Dense>

namespace facecap {

namespace {

// Two-column least squares y ~ a * reg + b, solved by QR.
struct LinePair {
  double a = 0.0, b = 0.0, rms = 0.0;
};

LinePair least_squares_line(const std::vector<double>& reg,
                            const std::vector<double>& y) {
  const Eigen::Index m = static_cast<Eigen::Index>(reg.size());
  Eigen::MatrixXd design(m, 2);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    design(i, 0) = reg[i];
    design(i, 1) = 1.0;
    rhs[i] = y[i];
  }
  Eigen::Vector2d sol = design.colPivHouseholderQr().solve(rhs);
  const double rms = std::sqrt((design * sol - rhs).squaredNorm() /
                               static_cast<double>(m));
  return LinePair{sol[0], sol[1], rms};
}

int count_distinct_radii(const std::vector<SweepRow>& rows) {
  std::set<double> radii;
  for (const auto& row : rows) radii.insert(row.radius);
  return static_cast<int>(radii.size());
}

// Groups usable rows by dimension (sorted by d) and records exclusions.
std::map<int, std::vector<SweepRow>> group_usable(
    const std::vector<SweepRow>& rows, std::vector<ExcludedCell>& excluded) {
  std::map<int, std::vector<SweepRow>> by_dim;
  for (const auto& row : rows) {
    if (!row.usable) {
      excluded.push_back({row.dim, row.radius, "flagged by solver"});
      continue;
    }
    by_dim[row.dim].push_back(row);
  }
  for (auto it = by_dim.begin(); it != by_dim.end();) {
    if (count_distinct_radii(it->second) < 3) {
      for (const auto& row : it->second)
        excluded.push_back({row.dim, row.radius,
                            "dimension dropped: fewer than 3 usable radii"});
      it = by_dim.erase(it);
    } else {
      ++it;
    }
  }
  return by_dim;
}

}  // namespace

FitParams table1_params() {
  FitParams p;
  p.capacity = CapacityParams{0.993, 3.701, -0.436, -3.706};
  p.coverage = CoverageParams{-0.172, 8.258, 0.153, 0.315};
  return p;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double coverage_feature(double r, const FixedConstants& fixed) {
  return sigmoid(fixed.phi * (std::pow(r, fixed.epsilon) - 1.0));
}

PerDimParams fit_capacity_stage1(const std::vector<SweepRow>& rows) {
  if (count_distinct_radii(rows) < 3)
    throw std::invalid_argument("underdetermined stage-1 fit: need >= 3 distinct radii");
  // The model Table-1 parameters themselves predict counts below 1 at small
  // d and large r, so only positivity (the log-space requirement) is hard.
  std::vector<double> reg, y;
  for (const auto& row : rows) {
    if (row.count <= 0.0)
      throw std::invalid_argument("fit_capacity_stage1: counts must be positive");
    reg.push_back(row.radius);
    y.push_back(std::log(row.count));
  }
  const LinePair fit = least_squares_line(reg, y);
  // log N = A + r B, so the slope is B and the intercept is A.
  return PerDimParams{rows.front().dim, fit.b, fit.a, fit.rms};
}

PerDimParams fit_coverage_stage1(const std::vector<SweepRow>& rows,
                                 const FixedConstants& fixed) {
  if (count_distinct_radii(rows) < 3)
    throw std::invalid_argument("underdetermined stage-1 fit: need >= 3 distinct radii");
  std::vector<double> reg, y;
  for (const auto& row : rows) {
    reg.push_back(coverage_feature(row.radius, fixed));
    y.push_back(row.count);
  }
  const LinePair fit = least_squares_line(reg, y);
  return PerDimParams{rows.front().dim, fit.a, fit.b, fit.rms};
}

CapacityParams fit_capacity_stage2(const std::vector<PerDimParams>& per_dim,
                                   double* residual_a, double* residual_b) {
  if (per_dim.size() < 2)
    throw std::invalid_argument("underdetermined stage-2 fit: need >= 2 dimensions");
  std::vector<double> d, a, b;
  for (const auto& p : per_dim) {
    d.push_back(static_cast<double>(p.dim));
    a.push_back(p.a);
    b.push_back(p.b);
  }
  const LinePair fa = least_squares_line(d, a);
  const LinePair fb = least_squares_line(d, b);
  if (residual_a) *residual_a = fa.rms;
  if (residual_b) *residual_b = fb.rms;
  return CapacityParams{fa.a, fa.b, fb.a, fb.b};
}

CoverageParams fit_coverage_stage2(const std::vector<PerDimParams>& per_dim,
                                   double* residual_a, double* residual_b) {
  if (per_dim.size() < 2)
    throw std::invalid_argument("underdetermined stage-2 fit: need >= 2 dimensions");
  std::vector<double> d3, a, b;
  for (const auto& p : per_dim) {
    const double d = static_cast<double>(p.dim);
    d3.push_back(d * d * d);
    a.push_back(p.a);
    b.push_back(p.b);
  }
  const LinePair fa = least_squares_line(d3, a);
  const LinePair fb = least_squares_line(d3, b);
  if (residual_a) *residual_a = fa.rms;
  if (residual_b) *residual_b = fb.rms;
  return CoverageParams{fa.a, fa.b, fb.a, fb.b};
}

FitReport fit_capacity_model(const std::vector<SweepRow>& rows) {
  FitReport report;
  auto by_dim = group_usable(rows, report.excluded);
  for (const auto& [dim, dim_rows] : by_dim)
    report.per_dim.push_back(fit_capacity_stage1(dim_rows));
  report.params.capacity = fit_capacity_stage2(
      report.per_dim, &report.stage2_residual_a, &report.stage2_residual_b);
  return report;
}

FitReport fit_coverage_model(const std::vector<SweepRow>& rows,
                             const FixedConstants& fixed) {
  FitReport report;
  report.params.fixed = fixed;
  auto by_dim = group_usable(rows, report.excluded);
  for (const auto& [dim, dim_rows] : by_dim)
    report.per_dim.push_back(fit_coverage_stage1(dim_rows, fixed));
  report.params.coverage = fit_coverage_stage2(
      report.per_dim, &report.stage2_residual_a, &report.stage2_residual_b);
  return report;
}

double eval_log_capacity(const CapacityParams& p, double r, double d) {
  return d * (p.alpha + p.gamma * r) + p.beta + p.delta * r;
}

double eval_capacity(const CapacityParams& p, double r, double d) {
  return std::exp(eval_log_capacity(p, r, d));
}

double eval_coverage(const CoverageParams& p, const FixedConstants& fixed,
                     double r, double d, bool* clamped) {
  const double d3 = d * d * d;
  const double value = (p.alpha_bar * d3 + p.beta_bar) * coverage_feature(r, fixed) +
                       p.gamma_bar * d3 + p.delta_bar;
  if (clamped) *clamped = value < 0.0;
  return value < 0.0 ? 0.0 : value;
}

}  // namespace facecap
