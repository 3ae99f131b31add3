#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "facecap/model_fit.hpp"

namespace facecap {

// Decision radii used in the paper's high-dimensional analysis, one per FMR
// operating point of the evaluated recognition models.
struct PresetRadius {
  double radius;
  const char* fmr_label;
};

inline constexpr std::array<PresetRadius, 3> kPaperFmrPresets{{
    {1.12, "1e-4"},
    {1.18, "1e-3"},
    {1.25, "1e-2"},
}};

struct EtaResult {
  double eta = 0.0;
  double capacity = 0.0;
  double coverage = 0.0;
  bool coverage_clamped = false;  // negative coverage prediction floored to 0
  bool implausible = false;       // eta > 1: extrapolation out of its range
};

// eta(r, d) = coverage / capacity. Computed through the capacity exponent so
// large d cannot overflow the ratio. Throws "model out of range" when the
// capacity model degenerates (NaN or underflow to 0).
EtaResult effectiveness(const FitParams& params, double r, double d);

struct EffectivenessGrid {
  std::vector<int> dims;
  std::vector<double> radii;
  std::vector<std::string> fmr_labels;  // empty, or one per radius
  Eigen::MatrixXd capacity;             // dims x radii
  Eigen::MatrixXd coverage;
  Eigen::MatrixXd eta;
  std::vector<std::string> flags;       // per cell, dims-major; "" when clean
  const std::string& flag(std::size_t di, std::size_t ri) const {
    return flags[di * radii.size() + ri];
  }
};

EffectivenessGrid effectiveness_grid(const FitParams& params,
                                     const std::vector<int>& dims,
                                     const std::vector<double>& radii,
                                     std::vector<std::string> fmr_labels = {});

// Grid over the paper's three FMR radii.
EffectivenessGrid effectiveness_paper_preset(const FitParams& params,
                                             const std::vector<int>& dims);

}  // namespace facecap
