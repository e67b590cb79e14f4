#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "gcpsim/types.hpp"

namespace gcpsim {

// Zipfian rank generator over [0, n) with skew theta (the YCSB convention,
// Gray et al.'s rejection-free inversion). Rank 0 is the hottest item with
// probability 1/zeta(n, theta).
class ZipfGenerator {
 public:
  ZipfGenerator(uint64_t n, double theta) : n_(n), theta_(theta) {
    if (n == 0) throw ConfigError("zipf over an empty domain");
    if (theta <= 0.0 || theta >= 1.0)
      throw ConfigError("zipf_theta must lie in (0, 1)");
    zetan_ = zeta(n, theta);
    alpha_ = 1.0 / (1.0 - theta);
    double zeta2 = zeta(2, theta);
    eta_ = (1.0 - std::pow(2.0 / static_cast<double>(n), 1.0 - theta)) /
           (1.0 - zeta2 / zetan_);
  }

  template <typename Rng>
  uint64_t next(Rng& rng) {
    double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    double uz = u * zetan_;
    if (uz < 1.0) return 0;
    if (uz < 1.0 + std::pow(0.5, theta_)) return 1;
    auto r = static_cast<uint64_t>(
        static_cast<double>(n_) * std::pow(eta_ * u - eta_ + 1.0, alpha_));
    return r >= n_ ? n_ - 1 : r;
  }

  // analytic probability mass of the hottest rank
  double top_mass() const { return 1.0 / zetan_; }

 private:
  static double zeta(uint64_t n, double theta) {
    double s = 0.0;
    for (uint64_t i = 1; i <= n; ++i)
      s += 1.0 / std::pow(static_cast<double>(i), theta);
    return s;
  }

  uint64_t n_;
  double theta_;
  double zetan_;
  double alpha_;
  double eta_;
};

inline uint64_t fnv1a(uint64_t x) {
  uint64_t h = 14695981039346656037ull;
  for (int i = 0; i < 8; ++i) {
    h ^= x & 0xFF;
    h *= 1099511628211ull;
    x >>= 8;
  }
  return h;
}

}  // namespace gcpsim
