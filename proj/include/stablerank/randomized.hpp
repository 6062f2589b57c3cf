#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "stablerank/estimate.hpp"
#include "stablerank/model.hpp"
#include "stablerank/sampler.hpp"

namespace stablerank {

enum class ResultMode { full, topk_set, topk_ranked };

ResultMode parse_result_mode(std::string_view name);
std::string_view to_string(ResultMode mode);

/// Item indices: a whole ranking, a ranked prefix, or an id-sorted top-k set.
using ResultKey = std::vector<std::uint32_t>;

struct ResultKeyHash {
  std::size_t operator()(const ResultKey& key) const;
};

/// The sample that first produced a key, kept as its witness weights.
struct KeyStats {
  std::size_t count = 0;
  Vector witness;
};

/// Sample counts carried across get-next calls.
class MonteCarloState {
 public:
  MonteCarloState(const Dataset& data, RegionOfInterest roi, ResultMode mode, std::size_t k, std::uint64_t seed,
                  SamplerOptions options = {});

  ResultMode mode() const { return mode_; }
  std::size_t k() const { return k_; }
  const RegionOfInterest& roi() const { return sampler_.roi(); }
  std::size_t total() const { return total_; }
  const std::unordered_map<ResultKey, KeyStats, ResultKeyHash>& counts() const { return counts_; }
  const std::vector<ResultKey>& returned() const { return returned_; }
  bool was_returned(const ResultKey& key) const;

  ResultKey key_of(const Dataset& data, const Vector& w) const;
  /// Canonical key order: lexicographic on id rank.
  static bool key_less(const Dataset& data, const ResultKey& a, const ResultKey& b);

  /// Draws and keys the next chunk of samples, in parallel.
  std::vector<std::pair<ResultKey, Vector>> draw_chunk(const Dataset& data, std::size_t count);
  void record(ResultKey key, const Vector& w);
  void mark_returned(const ResultKey& key);
  /// Unreturned key with the largest count, ties to the smaller key.
  std::optional<ResultKey> best_new(const Dataset& data) const;

 private:
  RoiSampler sampler_;
  ResultMode mode_;
  std::size_t k_;
  RngStream rng_;
  std::uint64_t chunks_ = 0;
  std::size_t total_ = 0;
  std::unordered_map<ResultKey, KeyStats, ResultKeyHash> counts_;
  std::vector<ResultKey> returned_;
  std::unordered_set<ResultKey, ResultKeyHash> returned_set_;
};

struct NextRandom {
  ResultKey key;
  Vector weights;  // a sample that produced the key
  StabilityEstimate estimate;
  std::size_t new_samples = 0;
};

/// Draws exactly `budget` samples, then returns the most frequent key not yet
/// returned; none when every observed key was already returned.
std::optional<NextRandom> get_next_fixed_budget(MonteCarloState& state, const Dataset& data, std::size_t budget,
                                                double alpha = 0.05);

inline constexpr std::size_t kDefaultSampleCap = 10'000'000;

class BudgetExceeded : public Error {
 public:
  BudgetExceeded(std::size_t used, std::optional<NextRandom> partial)
      : Error("sample cap of " + std::to_string(used) + " reached before the error target"),
        used_(used), partial_(std::move(partial)) {}
  std::size_t used() const { return used_; }
  const std::optional<NextRandom>& partial() const { return partial_; }

 private:
  std::size_t used_;
  std::optional<NextRandom> partial_;
};

/// Samples one at a time until the best new key's confidence error is at
/// most `target`. The stop also needs 0 < m < 1, or enough samples to bound
/// the error for any m, since a lone observation has zero estimated variance.
NextRandom get_next_fixed_error(MonteCarloState& state, const Dataset& data, double target, double alpha = 0.05,
                                std::size_t cap = kDefaultSampleCap);

struct ObservationCost {
  double mean = 0.0;
  double variance = 0.0;
};

/// Geometric first-hit cost of a key with stability s: mean 1/s, variance (1-s)/s^2.
ObservationCost expected_samples_to_observe(double s);

/// Samples needed for error e at stability s: s (1-s) (Z / e)^2.
double expected_samples_for_error(double s, double e, double alpha = 0.05);

/// Ranking or top-k ids of a key.
std::vector<std::string> key_ids(const Dataset& data, const ResultKey& key);

}  // namespace stablerank
