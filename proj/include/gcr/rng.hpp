#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace gcr {

// Seedable generator with every transformation pinned in code: raw draws come
// from std::mt19937_64 (algorithm fixed by the C++ standard), uniforms take
// the top 53 bits, and gaussians use Box-Muller. std::*_distribution is
// avoided because its output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform01() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1]; safe as a log argument.
  double uniform_open0() {
    return (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;
  }

  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_open0();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  // Uniformly distributed point on the unit sphere in R^d.
  std::vector<double> unit_vector(std::size_t d) {
    std::vector<double> v(d);
    double norm_sq = 0.0;
    do {
      norm_sq = 0.0;
      for (std::size_t t = 0; t < d; ++t) {
        v[t] = gaussian();
        norm_sq += v[t] * v[t];
      }
    } while (norm_sq < 1e-24);
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (auto& x : v) x *= inv;
    return v;
  }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace gcr
