#include "facecap/effectiveness.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace facecap {

EtaResult effectiveness(const FitParams& params, double r, double d) {
  if (!params.capacity || !params.coverage)
    throw std::invalid_argument("effectiveness: both parameter sets required");

  const double log_cap = eval_log_capacity(*params.capacity, r, d);
  if (std::isnan(log_cap))
    throw std::runtime_error("effectiveness: model out of range (capacity NaN)");

  EtaResult res;
  res.capacity = std::exp(log_cap);
  if (res.capacity <= 0.0)
    throw std::runtime_error("effectiveness: model out of range (capacity <= 0)");
  res.coverage = eval_coverage(*params.coverage, params.fixed, r, d,
                               &res.coverage_clamped);
  res.eta = res.coverage > 0.0 ? std::exp(std::log(res.coverage) - log_cap) : 0.0;
  res.implausible = res.eta > 1.0;
  return res;
}

EffectivenessGrid effectiveness_grid(const FitParams& params,
                                     const std::vector<int>& dims,
                                     const std::vector<double>& radii,
                                     std::vector<std::string> fmr_labels) {
  if (dims.empty() || radii.empty())
    throw std::invalid_argument("effectiveness_grid: empty grid");
  if (!fmr_labels.empty() && fmr_labels.size() != radii.size())
    throw std::invalid_argument("effectiveness_grid: one FMR label per radius");

  EffectivenessGrid grid;
  grid.dims = dims;
  grid.radii = radii;
  grid.fmr_labels = std::move(fmr_labels);
  const Eigen::Index nd = static_cast<Eigen::Index>(dims.size());
  const Eigen::Index nr = static_cast<Eigen::Index>(radii.size());
  grid.capacity.resize(nd, nr);
  grid.coverage.resize(nd, nr);
  grid.eta.resize(nd, nr);
  grid.flags.assign(dims.size() * radii.size(), "");

  for (Eigen::Index di = 0; di < nd; ++di) {
    for (Eigen::Index ri = 0; ri < nr; ++ri) {
      std::string& flag = grid.flags[di * radii.size() + ri];
      try {
        const EtaResult cell =
            effectiveness(params, radii[ri], static_cast<double>(dims[di]));
        grid.capacity(di, ri) = cell.capacity;
        grid.coverage(di, ri) = cell.coverage;
        grid.eta(di, ri) = cell.eta;
        if (cell.coverage_clamped) flag = "clamped";
        if (cell.implausible) flag = flag.empty() ? "implausible" : flag + ";implausible";
      } catch (const std::exception&) {
        grid.capacity(di, ri) = std::numeric_limits<double>::quiet_NaN();
        grid.coverage(di, ri) = std::numeric_limits<double>::quiet_NaN();
        grid.eta(di, ri) = std::numeric_limits<double>::quiet_NaN();
        flag = "model_out_of_range";
      }
    }
  }
  return grid;
}

EffectivenessGrid effectiveness_paper_preset(const FitParams& params,
                                             const std::vector<int>& dims) {
  std::vector<double> radii;
  std::vector<std::string> labels;
  for (const auto& preset : kPaperFmrPresets) {
    radii.push_back(preset.radius);
    labels.push_back(preset.fmr_label);
  }
  return effectiveness_grid(params, dims, radii, std::move(labels));
}

}  // namespace facecap
