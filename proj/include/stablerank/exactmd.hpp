#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <queue>
#include <vector>

#include "stablerank/estimate.hpp"
#include "stablerank/geometry.hpp"
#include "stablerank/model.hpp"
#include "stablerank/sampler.hpp"

namespace stablerank {

/// Weight samples, one per column, drawn uniformly from a region of interest.
/// Partitioning reorders columns but never changes the multiset.
class SampleStore {
 public:
  SampleStore() = default;
  explicit SampleStore(Matrix samples) : samples_(std::move(samples)) {}

  static SampleStore draw(const RegionOfInterest& roi, std::size_t count, const RngStream& rng,
                          SamplerOptions options = {});

  std::size_t size() const { return static_cast<std::size_t>(samples_.cols()); }
  std::size_t dim() const { return static_cast<std::size_t>(samples_.rows()); }
  const Matrix& samples() const { return samples_; }
  auto sample(std::ptrdiff_t i) const { return samples_.col(i); }
  void swap(std::ptrdiff_t i, std::ptrdiff_t j) { samples_.col(i).swap(samples_.col(j)); }

 private:
  Matrix samples_;
};

/// Exchange hyperplanes meeting the region of interest, in pair-id order.
struct ExchangeSet {
  std::vector<Hyperplane> planes;
};

/// A cell of the partial arrangement. `cuts` holds +(k+1) for the positive
/// side of plane k and -(k+1) for the negative side. The sample window
/// [sb, se] is inclusive and empty when se < sb.
struct Region {
  std::vector<std::int32_t> cuts;
  double stability = 1.0;
  std::size_t pending = 0;
  std::ptrdiff_t sb = 0;
  std::ptrdiff_t se = -1;
  std::uint64_t seq = 0;

  std::size_t window_size() const { return se < sb ? 0 : static_cast<std::size_t>(se - sb + 1); }
  std::vector<HalfSpace> half_spaces(const ExchangeSet& h) const;
};

struct RegionMd {
  std::vector<HalfSpace> constraints;
  StabilityEstimate estimate;
};

/// Share of samples satisfying every half-space, over the whole store or
/// the window [sb, se]; the denominator is always the store size.
StabilityEstimate stability_oracle(const std::vector<HalfSpace>& constraints, const SampleStore& store,
                                   double alpha = 0.05);
StabilityEstimate stability_oracle(const std::vector<HalfSpace>& constraints, const SampleStore& store,
                                   std::ptrdiff_t sb, std::ptrdiff_t se, double alpha = 0.05);

/// Region of a ranking: the positive half-spaces of its adjacent pairs.
/// Infeasible on a dominated pair, or when the half-spaces share no interior
/// point inside the roi.
Verdict<RegionMd> verify_md(const Dataset& data, const Ranking& ranking, const RegionOfInterest& roi,
                            const SampleStore& store, double alpha = 0.05);

/// Hyperplanes of non-dominated pairs with samples on both sides, plus those
/// an exact check finds meeting a partial roi.
ExchangeSet exchange_hyperplanes(const Dataset& data, const RegionOfInterest& roi, const SampleStore& store);

/// Partitions the window so samples below h come first. Returns the last
/// index of the negative block, or none when all samples share one side.
std::optional<std::ptrdiff_t> pass_through(const Hyperplane& h, const Region& region, SampleStore& store);

struct MdOptions {
  double alpha = 0.05;
  /// Split on hyperplanes that an exact check finds crossing a region even
  /// when its samples are one-sided; the empty side gets stability 0.
  bool exact_fallback = false;
};

struct NextMd {
  Ranking ranking;
  Vector weights;
  StabilityEstimate estimate;
  Region region;
};

/// Lazy best-first arrangement: only the most stable region is ever split.
class ArrangementState {
 public:
  ArrangementState(SampleStore store, ExchangeSet planes, RegionOfInterest roi, MdOptions options = {});

  const SampleStore& store() const { return store_; }
  const ExchangeSet& planes() const { return planes_; }
  const RegionOfInterest& roi() const { return roi_; }
  const MdOptions& options() const { return options_; }
  std::size_t open_regions() const { return heap_.size(); }

  std::optional<NextMd> next(const Dataset& data);

 private:
  struct Less {
    bool operator()(const Region& a, const Region& b) const {
      if (a.stability != b.stability) return a.stability < b.stability;
      return a.seq > b.seq;
    }
  };

  bool crosses_exactly(const Region& region, const Hyperplane& h) const;
  void split(Region& parent, std::size_t plane, std::optional<std::ptrdiff_t> at, bool empty_negative);
  Vector representative(const Region& region) const;

  SampleStore store_;
  ExchangeSet planes_;
  RegionOfInterest roi_;
  MdOptions options_;
  std::priority_queue<Region, std::vector<Region>, Less> heap_;
  std::uint64_t seq_ = 0;
};

/// Draws `samples` weights from the roi and collects its exchange set.
ArrangementState make_arrangement(const Dataset& data, const RegionOfInterest& roi, std::size_t samples,
                                  const RngStream& rng, MdOptions options = {});

std::optional<NextMd> get_next_md(ArrangementState& state, const Dataset& data);

}  // namespace stablerank
