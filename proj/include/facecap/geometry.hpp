#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace facecap {

inline constexpr double kUnitNormTol = 1e-9;

// A set of n points on the unit sphere in R^d, stored as the rows of an
// n x d matrix. Construction validates the unit-norm invariant.
class SpherePointSet {
 public:
  static SpherePointSet from_rows(Eigen::MatrixXd points,
                                  double norm_tol = kUnitNormTol) {
    if (points.rows() < 1) throw std::invalid_argument("SpherePointSet: need at least one point");
    if (points.cols() < 2) throw std::invalid_argument("SpherePointSet: dimension must be >= 2");
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      if (std::abs(points.row(i).norm() - 1.0) > norm_tol)
        throw std::invalid_argument("SpherePointSet: point " + std::to_string(i) +
                                    " is not unit length");
    }
    return SpherePointSet(std::move(points));
  }

  // Normalizes each row before constructing; rejects zero rows.
  static SpherePointSet normalizing(Eigen::MatrixXd points) {
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      const double n = points.row(i).norm();
      if (n < 1e-12)
        throw std::invalid_argument("SpherePointSet: degenerate embedding at row " +
                                    std::to_string(i));
      points.row(i) /= n;
    }
    return from_rows(std::move(points), 1e-12);
  }

  Eigen::Index size() const { return points_.rows(); }
  Eigen::Index dim() const { return points_.cols(); }
  const Eigen::MatrixXd& points() const { return points_; }
  Eigen::MatrixXd::ConstRowXpr point(Eigen::Index i) const { return points_.row(i); }

 private:
  explicit SpherePointSet(Eigen::MatrixXd points) : points_(std::move(points)) {}
  Eigen::MatrixXd points_;
};

// Symmetric matrix of pairwise Euclidean (chord) distances, zero diagonal.
struct DistanceMatrix {
  Eigen::MatrixXd entries;
  Eigen::Index size() const { return entries.rows(); }
};

// v / ||v||. Throws on (near-)zero input.
template <typename Derived>
Eigen::VectorXd project_to_sphere(const Eigen::MatrixBase<Derived>& v) {
  const double n = v.norm();
  if (n < 1e-12) throw std::invalid_argument("project_to_sphere: degenerate embedding");
  return v / n;
}

// Cosine similarity of two unit vectors; for unit inputs the chord distance
// satisfies D^2 = 2 - 2 cos.
template <typename DerivedA, typename DerivedB>
double cosine_similarity(const Eigen::MatrixBase<DerivedA>& a,
                         const Eigen::MatrixBase<DerivedB>& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("cosine_similarity: dimension mismatch");
  return a.dot(b);
}

DistanceMatrix distance_matrix(const SpherePointSet& s);

// Minimum pairwise chord distance r' of the point set. Requires n >= 2.
double pairwise_min_distance(const SpherePointSet& s);

// Sum over unordered pairs of 1/D(x_i, x_j). Throws if two points
// (nearly) coincide, where the sum is singular.
double riesz_energy(const SpherePointSet& s);

}  // namespace facecap
