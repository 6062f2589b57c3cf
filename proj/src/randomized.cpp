#include "stablerank/randomized.hpp"

#include <algorithm>
#include <cmath>

#include "stablerank/parallel.hpp"

namespace stablerank {
namespace {

constexpr std::size_t kKeyBlock = 256;
constexpr std::size_t kErrorBatch = 1024;

}  // namespace

ResultMode parse_result_mode(std::string_view name) {
  if (name == "full") return ResultMode::full;
  if (name == "topk-set" || name == "topk_set") return ResultMode::topk_set;
  if (name == "topk-ranked" || name == "topk_ranked") return ResultMode::topk_ranked;
  throw ValidationError("unknown mode '" + std::string(name) + "' (full, topk-set, topk-ranked)");
}

std::string_view to_string(ResultMode mode) {
  switch (mode) {
    case ResultMode::full:
      return "full";
    case ResultMode::topk_set:
      return "topk-set";
    case ResultMode::topk_ranked:
      return "topk-ranked";
  }
  return "full";
}

std::size_t ResultKeyHash::operator()(const ResultKey& key) const {
  // FNV-1a over the indices.
  std::uint64_t h = 1469598103934665603ull;
  for (std::uint32_t v : key) {
    h ^= v;
    h *= 1099511628211ull;
  }
  return static_cast<std::size_t>(h);
}

MonteCarloState::MonteCarloState(const Dataset& data, RegionOfInterest roi, ResultMode mode, std::size_t k,
                                 std::uint64_t seed, SamplerOptions options)
    : sampler_(std::move(roi), options), mode_(mode), k_(k), rng_(seed) {
  if (sampler_.roi().dim() != data.dim()) throw DimensionError("region of interest and dataset differ in d");
  if (mode_ == ResultMode::full) {
    k_ = data.size();
  } else if (k_ < 1 || k_ > data.size()) {
    throw ValidationError("k must lie in [1, " + std::to_string(data.size()) + "]");
  }
}

bool MonteCarloState::was_returned(const ResultKey& key) const { return returned_set_.count(key) > 0; }

ResultKey MonteCarloState::key_of(const Dataset& data, const Vector& w) const {
  std::vector<std::size_t> members;
  if (mode_ == ResultMode::full) {
    members = rank(data, w).order;
  } else {
    members = top_k(data, w, k_, mode_ == ResultMode::topk_set ? TopKMode::set : TopKMode::ranked).members;
  }
  return ResultKey(members.begin(), members.end());
}

bool MonteCarloState::key_less(const Dataset& data, const ResultKey& a, const ResultKey& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), [&](auto x, auto y) {
    return data.id_rank(x) < data.id_rank(y);
  });
}

std::vector<std::pair<ResultKey, Vector>> MonteCarloState::draw_chunk(const Dataset& data, std::size_t count) {
  const Matrix w = sampler_.draw(count, rng_.split(chunks_++));
  std::vector<std::pair<ResultKey, Vector>> out(count);
  parallel_chunks((count + kKeyBlock - 1) / kKeyBlock, [&](std::size_t block) {
    const std::size_t end = std::min(count, (block + 1) * kKeyBlock);
    for (std::size_t j = block * kKeyBlock; j < end; ++j) {
      Vector col = w.col(static_cast<Eigen::Index>(j));
      out[j] = {key_of(data, col), std::move(col)};
    }
  });
  return out;
}

void MonteCarloState::record(ResultKey key, const Vector& w) {
  auto [it, fresh] = counts_.try_emplace(std::move(key));
  if (fresh) it->second.witness = w;
  ++it->second.count;
  ++total_;
}

void MonteCarloState::mark_returned(const ResultKey& key) {
  if (returned_set_.insert(key).second) returned_.push_back(key);
}

std::optional<ResultKey> MonteCarloState::best_new(const Dataset& data) const {
  const ResultKey* best = nullptr;
  std::size_t best_count = 0;
  for (const auto& [key, stats] : counts_) {
    if (was_returned(key)) continue;
    if (!best || stats.count > best_count || (stats.count == best_count && key_less(data, key, *best))) {
      best = &key;
      best_count = stats.count;
    }
  }
  if (!best) return std::nullopt;
  return *best;
}

std::optional<NextRandom> get_next_fixed_budget(MonteCarloState& state, const Dataset& data, std::size_t budget,
                                                double alpha) {
  if (budget < 1) throw ValidationError("sample budget must be at least 1");
  for (auto& [key, w] : state.draw_chunk(data, budget)) state.record(std::move(key), w);
  auto best = state.best_new(data);
  if (!best) return std::nullopt;
  state.mark_returned(*best);
  const KeyStats& stats = state.counts().at(*best);
  return NextRandom{*best, stats.witness, make_estimate(stats.count, state.total(), alpha), budget};
}

NextRandom get_next_fixed_error(MonteCarloState& state, const Dataset& data, double target, double alpha,
                                std::size_t cap) {
  if (!(target > 0.0)) throw ValidationError("error target must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
  const double z = normal_quantile(1.0 - alpha / 2.0);
  // Past this many samples the error is below target whatever m is.
  const double any_m = std::ceil(z * z / (4.0 * target * target));

  std::optional<ResultKey> candidate = state.best_new(data);
  std::size_t used = 0;
  auto count_of = [&](const ResultKey& key) { return state.counts().at(key).count; };
  auto settled = [&] {
    if (!candidate) return false;
    const double n = static_cast<double>(state.total());
    const double m = static_cast<double>(count_of(*candidate)) / n;
    if (z * std::sqrt(m * (1.0 - m) / n) > target) return false;
    return (m > 0.0 && m < 1.0) || n >= any_m;
  };
  auto result = [&] {
    const KeyStats& stats = state.counts().at(*candidate);
    return NextRandom{*candidate, stats.witness, make_estimate(stats.count, state.total(), alpha), used};
  };

  while (!settled()) {
    if (used >= cap) throw BudgetExceeded(used, candidate ? std::optional<NextRandom>(result()) : std::nullopt);
    auto batch = state.draw_chunk(data, std::min(kErrorBatch, cap - used));
    for (auto& [key, w] : batch) {
      const bool fresh = !state.was_returned(key);
      ResultKey seen = key;
      state.record(std::move(key), w);
      ++used;
      if (fresh && (!candidate || count_of(seen) > count_of(*candidate))) candidate = std::move(seen);
      if (settled()) break;
    }
  }
  state.mark_returned(*candidate);
  return result();
}

ObservationCost expected_samples_to_observe(double s) {
  if (!(s > 0.0 && s <= 1.0)) throw ValidationError("stability must lie in (0, 1]");
  return {1.0 / s, (1.0 - s) / (s * s)};
}

double expected_samples_for_error(double s, double e, double alpha) {
  if (!(e > 0.0)) throw ValidationError("error must be positive");
  const double z = normal_quantile(1.0 - alpha / 2.0);
  return s * (1.0 - s) * (z / e) * (z / e);
}

std::vector<std::string> key_ids(const Dataset& data, const ResultKey& key) {
  std::vector<std::string> out;
  out.reserve(key.size());
  for (std::uint32_t i : key) out.push_back(data.id(i));
  return out;
}

}  // namespace stablerank
