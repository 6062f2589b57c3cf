#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "stablerank/geometry.hpp"
#include "stablerank/model.hpp"

namespace stablerank {

struct Region2d {
  AngleInterval interval;
  double stability = 0.0;           // width over the roi width
  double quadrant_stability = 0.0;  // width over pi/2
};

/// Stability of a 2D ranking: the angle interval where it holds, clamped to
/// the roi. Infeasible when a lower item dominates the one above it or the
/// bounds cross.
Verdict<Region2d> verify_2d(const Dataset& data, const Ranking& ranking,
                            const AngleInterval& roi = {0.0, kHalfPi});

/// Regions produced by a ray sweep, popped most stable first.
///
/// Boundaries are kept as one sorted vector and the heap holds region
/// indices, so memory stays at 12 bytes per region.
class RegionHeap {
 public:
  struct Entry {
    double stability = 0.0;
    AngleInterval interval;
    std::uint32_t index = 0;  // position in sweep order
  };

  RegionHeap() = default;
  RegionHeap(AngleInterval roi, std::vector<double> bounds);

  const AngleInterval& roi() const { return roi_; }
  std::size_t region_count() const { return bounds_.size() - 1; }
  std::size_t remaining() const { return heap_.size(); }
  bool empty() const { return heap_.empty(); }

  Entry entry(std::uint32_t index) const;
  /// Every region in sweep order, whether popped or not.
  std::vector<Entry> regions() const;
  std::optional<Entry> pop();

 private:
  bool wider(std::uint32_t a, std::uint32_t b) const;

  AngleInterval roi_;
  std::vector<double> bounds_{0.0, kHalfPi};
  std::vector<std::uint32_t> heap_;
};

/// Sweeps a ray from interval.lo to interval.hi and records every region
/// boundary. Exchanges closer than kGeomEps are handled as one step.
RegionHeap ray_sweep(const Dataset& data, const AngleInterval& interval = {0.0, kHalfPi});

struct Next2d {
  Ranking ranking;
  Vector weights;  // unit weights at the interval midpoint
  double stability = 0.0;
  AngleInterval interval;
};

/// Most stable remaining region, ranked at its midpoint; none when exhausted.
std::optional<Next2d> get_next_2d(RegionHeap& heap, const Dataset& data);

}  // namespace stablerank
