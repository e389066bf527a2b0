#pragma once

#include <cmath>
#include <cstddef>

namespace rtpref::testing {

// Welford accumulator for Monte Carlo means.
class Moments {
 public:
  void add(double x) {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double se() const { return std::sqrt(variance() / static_cast<double>(n_)); }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

inline bool within_se(const Moments& m, double target, double k = 3.0) {
  return std::abs(m.mean() - target) <= k * m.se();
}

}  // namespace rtpref::testing
