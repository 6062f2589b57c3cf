#pragma once

#include <cstddef>

namespace stablerank {

/// Monte-Carlo stability: m = hits / N with its normal-approximation error.
struct StabilityEstimate {
  double value = 0.0;
  double confidence_error = 0.0;
  double confidence_level = 0.95;
  std::size_t samples = 0;
};

/// Standard normal quantile, accurate to double precision.
double normal_quantile(double p);

/// e = Z(1 - alpha/2) sqrt(m (1 - m) / N).
double confidence_error(double m, std::size_t samples, double alpha);

StabilityEstimate make_estimate(std::size_t hits, std::size_t samples, double alpha);

}  // namespace stablerank
