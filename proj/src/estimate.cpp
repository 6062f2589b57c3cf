#include "stablerank/estimate.hpp"

#include <cmath>
#include <numbers>

#include "stablerank/model.hpp"

namespace stablerank {

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ValidationError("normal_quantile: p must lie in (0, 1)");
  auto cdf = [](double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); };
  double lo = -40.0;
  double hi = 40.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid) < p ? lo : hi) = mid;
  }
  double x = 0.5 * (lo + hi);
  // One Newton step polishes the last bits.
  const double density = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  if (density > 0.0) x -= (cdf(x) - p) / density;
  return x;
}

double confidence_error(double m, std::size_t samples, double alpha) {
  if (!(m >= 0.0 && m <= 1.0)) throw ValidationError("confidence_error: m must lie in [0, 1]");
  if (samples < 1) throw ValidationError("confidence_error: need at least one sample");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("confidence_error: alpha must lie in (0, 1)");
  return normal_quantile(1.0 - alpha / 2.0) * std::sqrt(m * (1.0 - m) / static_cast<double>(samples));
}

StabilityEstimate make_estimate(std::size_t hits, std::size_t samples, double alpha) {
  const double m = static_cast<double>(hits) / static_cast<double>(samples);
  return {m, confidence_error(m, samples, alpha), 1.0 - alpha, samples};
}

}  // namespace stablerank
