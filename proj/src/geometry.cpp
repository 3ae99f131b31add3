#include "facecap/geometry.hpp"

#include <algorithm>
#include <limits>

namespace facecap {

DistanceMatrix distance_matrix(const SpherePointSet& s) {
  const Eigen::Index n = s.size();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double dist = (s.point(i) - s.point(j)).norm();
      d(i, j) = dist;
      d(j, i) = dist;
    }
  }
  return DistanceMatrix{std::move(d)};
}

double pairwise_min_distance(const SpherePointSet& s) {
  const Eigen::Index n = s.size();
  if (n < 2) throw std::invalid_argument("pairwise_min_distance: need at least two points");
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      best = std::min(best, (s.point(i) - s.point(j)).norm());
  return best;
}

double riesz_energy(const SpherePointSet& s) {
  const Eigen::Index n = s.size();
  if (n < 2) throw std::invalid_argument("riesz_energy: need at least two points");
  double e = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double dist = (s.point(i) - s.point(j)).norm();
      if (dist < 1e-12) throw std::invalid_argument("riesz_energy: degenerate configuration");
      e += 1.0 / dist;
    }
  }
  return e;
}

}  // namespace facecap
