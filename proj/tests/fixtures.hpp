#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "stablerank/geometry.hpp"
#include "stablerank/model.hpp"

namespace fixtures {

using stablerank::Dataset;
using stablerank::Matrix;
using stablerank::Ranking;
using stablerank::Vector;

// Five items of the running example.
inline Dataset toy() {
  Matrix a(5, 2);
  a << 0.63, 0.71, 0.83, 0.65, 0.58, 0.78, 0.7, 0.68, 0.53, 0.82;
  return Dataset({"t1", "t2", "t3", "t4", "t5"}, a);
}

// Top-k example: t2, t3, t4 sit near the diagonal.
inline Dataset skyline_toy() {
  Matrix a(5, 2);
  a << 1, 0, .99, .99, .98, .98, .97, .97, 0, 1;
  return Dataset({"t1", "t2", "t3", "t4", "t5"}, a);
}

inline Ranking ids(const Dataset& d, std::vector<std::string> order) { return Ranking::from_ids(d, order); }

// Brute-force oracle: share of a regular angle grid on [lo, hi) giving each
// ranking. Uses nothing but rank().
inline std::map<std::vector<std::size_t>, double> angle_grid(const Dataset& d, double lo, double hi,
                                                             std::size_t points) {
  std::map<std::vector<std::size_t>, double> share;
  const double step = (hi - lo) / static_cast<double>(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double a = lo + (static_cast<double>(i) + 0.5) * step;
    Vector w(2);
    w << std::cos(a), std::sin(a);
    share[stablerank::rank(d, w).order] += 1.0 / static_cast<double>(points);
  }
  return share;
}

}  // namespace fixtures
