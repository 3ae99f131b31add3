#pragma once

#include <optional>
#include <string>
#include <vector>

namespace facecap {

struct CapacityParams {
  double alpha = 0.0, beta = 0.0, gamma = 0.0, delta = 0.0;
};

struct CoverageParams {
  double alpha_bar = 0.0, beta_bar = 0.0, gamma_bar = 0.0, delta_bar = 0.0;
};

// Shape constants of the coverage sigmoid; set manually, never fitted.
struct FixedConstants {
  double phi = 10000.0;
  double epsilon = 0.0005;
};

struct FitParams {
  std::optional<CapacityParams> capacity;
  std::optional<CoverageParams> coverage;
  FixedConstants fixed;
};

// The parameter set reported in the paper's Table 1.
FitParams table1_params();

// Stage-1 parameters of one dimension: capacity N = exp(A + rB), coverage
// N-bar = A * sigma(phi (r^eps - 1)) + B. `residual` is the stage-1 RMS error
// (log space for capacity, linear for coverage).
struct PerDimParams {
  int dim = 0;
  double a = 0.0;
  double b = 0.0;
  double residual = 0.0;
};

struct SweepRow {
  int dim = 0;
  double radius = 0.0;
  double count = 0.0;   // N or N-bar; real-valued to admit model-generated tables
  bool usable = true;   // false for cells the solver flagged (excluded from fits)
};

struct ExcludedCell {
  int dim = 0;
  double radius = 0.0;
  std::string reason;
};

struct FitReport {
  FitParams params;  // exactly one of capacity/coverage filled
  std::vector<PerDimParams> per_dim;
  std::vector<ExcludedCell> excluded;
  double stage2_residual_a = 0.0;
  double stage2_residual_b = 0.0;
};

double sigmoid(double z);
// The known regressor sigma(phi (r^eps - 1)) of the coverage model.
double coverage_feature(double r, const FixedConstants& fixed);

// Linear least squares of ln N against A + rB for one dimension's rows.
// Requires >= 3 distinct radii and all counts >= 1.
PerDimParams fit_capacity_stage1(const std::vector<SweepRow>& rows_one_dim);
// Linear least squares of N-bar against A * feature(r) + B.
PerDimParams fit_coverage_stage1(const std::vector<SweepRow>& rows_one_dim,
                                 const FixedConstants& fixed = {});

// A(d) = alpha d + beta, B(d) = gamma d + delta. Requires >= 2 dimensions.
CapacityParams fit_capacity_stage2(const std::vector<PerDimParams>& per_dim,
                                   double* residual_a = nullptr,
                                   double* residual_b = nullptr);
// A(d) = alpha_bar d^3 + beta_bar, B(d) = gamma_bar d^3 + delta_bar.
CoverageParams fit_coverage_stage2(const std::vector<PerDimParams>& per_dim,
                                   double* residual_a = nullptr,
                                   double* residual_b = nullptr);

// Full two-stage pipeline over a sweep table. Unusable cells are excluded and
// listed; dimensions left with fewer than 3 usable cells are dropped and
// listed as well. Throws when a stage is underdetermined.
FitReport fit_capacity_model(const std::vector<SweepRow>& rows);
FitReport fit_coverage_model(const std::vector<SweepRow>& rows,
                             const FixedConstants& fixed = {});

double eval_log_capacity(const CapacityParams& p, double r, double d);
double eval_capacity(const CapacityParams& p, double r, double d);
// Clamps negative predictions to 0; sets *clamped when that happens.
double eval_coverage(const CoverageParams& p, const FixedConstants& fixed,
                     double r, double d, bool* clamped = nullptr);

}  // namespace facecap
