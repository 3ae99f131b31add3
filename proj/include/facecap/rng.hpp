#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace facecap {

// splitmix64 finalizer; used both as a mixer and to derive per-work-unit
// seeds so that results do not depend on scheduling order.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b, std::uint64_t c) {
  std::uint64_t s = mix64(master);
  s = mix64(s ^ a);
  s = mix64(s ^ b);
  s = mix64(s ^ c);
  return s;
}

// Deterministic RNG stream. Gaussian draws use Box-Muller on top of the
// mt19937_64 bit stream instead of std::normal_distribution, whose output
// sequence is not pinned by the standard.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() {  // in [0, 1)
    return (engine_() >> 11) * 0x1.0p-53;
  }

  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1, u2;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    u2 = uniform();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * M_PI * u2;
    spare_ = mag * std::sin(ang);
    have_spare_ = true;
    return mag * std::cos(ang);
  }

  std::uint64_t bits() { return engine_(); }

  // Uniform integer in [0, n) without modulo bias.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return v % n;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

inline Eigen::VectorXd random_gaussian_vector(Rng& rng, Eigen::Index dim) {
  Eigen::VectorXd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = rng.gaussian();
  return v;
}

// Uniform point on the unit sphere in R^dim (normalized Gaussian).
inline Eigen::VectorXd random_unit_vector(Rng& rng, Eigen::Index dim) {
  Eigen::VectorXd v;
  double n = 0.0;
  do {
    v = random_gaussian_vector(rng, dim);
    n = v.norm();
  } while (n < 1e-12);
  return v / n;
}

// n uniform sphere points as rows of an n x dim matrix.
inline Eigen::MatrixXd random_sphere_points(Rng& rng, Eigen::Index n,
                                            Eigen::Index dim) {
  Eigen::MatrixXd pts(n, dim);
  for (Eigen::Index i = 0; i < n; ++i) pts.row(i) = random_unit_vector(rng, dim);
  return pts;
}

}  // namespace facecap
