#include "stablerank/exactmd.hpp"

#include <algorithm>
#include <numeric>

namespace stablerank {
namespace {

constexpr Eigen::Index kChunk = 4096;

// Above this many half-spaces the dense LP behind the empty-region check is
// too large; such rankings are reported with a zero estimate instead.
constexpr std::size_t kExactCheckLimit = 2000;

Matrix normals(const std::vector<HalfSpace>& constraints, Eigen::Index d) {
  Matrix a(static_cast<Eigen::Index>(constraints.size()), d);
  for (std::size_t k = 0; k < constraints.size(); ++k) {
    a.row(static_cast<Eigen::Index>(k)) = constraints[k].normal().transpose();
  }
  return a;
}

std::vector<Vector> normal_list(const std::vector<HalfSpace>& constraints) {
  std::vector<Vector> rows;
  rows.reserve(constraints.size());
  for (const auto& c : constraints) rows.push_back(c.normal());
  return rows;
}

std::size_t count_inside(const Matrix& a, const SampleStore& store, std::ptrdiff_t sb, std::ptrdiff_t se) {
  if (se < sb) return 0;
  if (a.rows() == 0) return static_cast<std::size_t>(se - sb + 1);
  std::size_t hits = 0;
  for (Eigen::Index c = sb; c <= se; c += kChunk) {
    const Eigen::Index len = std::min<Eigen::Index>(kChunk, se - c + 1);
    hits += static_cast<std::size_t>(((a * store.samples().middleCols(c, len)).array() > 0.0).colwise().all().count());
  }
  return hits;
}

void check_dims(const Dataset& data, const RegionOfInterest& roi, const SampleStore& store) {
  if (roi.dim() != data.dim() || store.dim() != data.dim()) {
    throw DimensionError("dataset, region of interest and samples must share d");
  }
  if (store.size() == 0) throw ValidationError("sample store is empty");
}

}  // namespace

SampleStore SampleStore::draw(const RegionOfInterest& roi, std::size_t count, const RngStream& rng,
                              SamplerOptions options) {
  if (count < 1) throw ValidationError("sample store needs at least one sample");
  return SampleStore(RoiSampler(roi, options).draw(count, rng));
}

std::vector<HalfSpace> Region::half_spaces(const ExchangeSet& h) const {
  std::vector<HalfSpace> out;
  out.reserve(cuts.size());
  for (std::int32_t c : cuts) {
    out.push_back({h.planes[static_cast<std::size_t>(std::abs(c) - 1)], c > 0 ? 1 : -1});
  }
  return out;
}

StabilityEstimate stability_oracle(const std::vector<HalfSpace>& constraints, const SampleStore& store,
                                   double alpha) {
  return stability_oracle(constraints, store, 0, static_cast<std::ptrdiff_t>(store.size()) - 1, alpha);
}

StabilityEstimate stability_oracle(const std::vector<HalfSpace>& constraints, const SampleStore& store,
                                   std::ptrdiff_t sb, std::ptrdiff_t se, double alpha) {
  if (store.size() == 0) throw ValidationError("sample store is empty");
  if (sb < 0 || se >= static_cast<std::ptrdiff_t>(store.size())) throw ValidationError("window out of range");
  const Matrix a = normals(constraints, static_cast<Eigen::Index>(store.dim()));
  return make_estimate(count_inside(a, store, sb, se), store.size(), alpha);
}

Verdict<RegionMd> verify_md(const Dataset& data, const Ranking& ranking, const RegionOfInterest& roi,
                            const SampleStore& store, double alpha) {
  check_dims(data, roi, store);
  check_permutation(data, ranking);
  std::vector<HalfSpace> constraints;
  for (std::size_t p = 0; p + 1 < ranking.order.size(); ++p) {
    const std::size_t up = ranking.order[p];
    const std::size_t down = ranking.order[p + 1];
    auto t = data.item(up);
    auto t2 = data.item(down);
    if (identical(t, t2)) {
      if (data.id_rank(up) > data.id_rank(down)) return {std::nullopt, InfeasiblePair{up, down}};
      continue;
    }
    if (dominates(t, t2)) continue;
    if (dominates(t2, t)) return {std::nullopt, InfeasiblePair{up, down}};
    constraints.push_back({Hyperplane{(t - t2).transpose(), up, down}, 1});
  }
  StabilityEstimate estimate = stability_oracle(constraints, store, alpha);
  if (estimate.value == 0.0 && constraints.size() <= kExactCheckLimit &&
      !interior_point(normal_list(constraints), {}, roi)) {
    return {std::nullopt, std::nullopt};
  }
  return {RegionMd{std::move(constraints), estimate}, std::nullopt};
}

ExchangeSet exchange_hyperplanes(const Dataset& data, const RegionOfInterest& roi, const SampleStore& store) {
  check_dims(data, roi, store);
  const std::size_t n = data.size();
  std::vector<std::size_t> by_id(n);
  std::iota(by_id.begin(), by_id.end(), std::size_t{0});
  std::sort(by_id.begin(), by_id.end(), [&](auto a, auto b) { return data.id_rank(a) < data.id_rank(b); });

  struct Candidate {
    std::size_t a;
    std::size_t b;
    bool pos = false;
    bool neg = false;
  };
  std::vector<Candidate> candidates;
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = p + 1; q < n; ++q) {
      const std::size_t a = by_id[p];
      const std::size_t b = by_id[q];
      auto ta = data.item(a);
      auto tb = data.item(b);
      if (identical(ta, tb) || dominates(ta, tb) || dominates(tb, ta)) continue;
      candidates.push_back({a, b});
    }
  }

  std::size_t open = candidates.size();
  const auto total = static_cast<Eigen::Index>(store.size());
  for (Eigen::Index c = 0; c < total && open > 0; c += kChunk) {
    const Eigen::Index len = std::min(kChunk, total - c);
    const Matrix scores = data.attrs() * store.samples().middleCols(c, len);
    for (auto& cand : candidates) {
      if (cand.pos && cand.neg) continue;
      const auto diff = (scores.row(static_cast<Eigen::Index>(cand.a)) -
                         scores.row(static_cast<Eigen::Index>(cand.b))).array();
      cand.pos = cand.pos || (diff > 0.0).any();
      cand.neg = cand.neg || (diff < 0.0).any();
      if (cand.pos && cand.neg) --open;
    }
  }

  ExchangeSet out;
  for (const auto& cand : candidates) {
    Hyperplane h{(data.item(cand.a) - data.item(cand.b)).transpose(), cand.a, cand.b};
    // A mixed-sign plane always meets the open quadrant.
    const bool crosses = (cand.pos && cand.neg) || roi.kind() == RegionOfInterest::Kind::full ||
                         interior_point({}, {h.coeffs}, roi).has_value();
    if (crosses) out.planes.push_back(std::move(h));
  }
  return out;
}

std::optional<std::ptrdiff_t> pass_through(const Hyperplane& h, const Region& region, SampleStore& store) {
  std::ptrdiff_t i = region.sb - 1;
  for (std::ptrdiff_t j = region.sb; j <= region.se; ++j) {
    if (h.coeffs.dot(store.sample(j)) < 0.0) store.swap(++i, j);
  }
  if (i == region.sb - 1 || i == region.se) return std::nullopt;
  return i;
}

ArrangementState::ArrangementState(SampleStore store, ExchangeSet planes, RegionOfInterest roi, MdOptions options)
    : store_(std::move(store)), planes_(std::move(planes)), roi_(std::move(roi)), options_(options) {
  if (store_.size() == 0) throw ValidationError("sample store is empty");
  if (store_.dim() != roi_.dim()) throw DimensionError("samples and region of interest differ in d");
  Region root;
  root.se = static_cast<std::ptrdiff_t>(store_.size()) - 1;
  root.seq = seq_++;
  heap_.push(std::move(root));
}

bool ArrangementState::crosses_exactly(const Region& region, const Hyperplane& h) const {
  return interior_point(normal_list(region.half_spaces(planes_)), {h.coeffs}, roi_).has_value();
}

void ArrangementState::split(Region& parent, std::size_t plane, std::optional<std::ptrdiff_t> at,
                             bool empty_negative) {
  // `at` is the last negative sample; without one, the whole window sits on
  // the side opposite the empty child.
  const std::ptrdiff_t neg_end = at ? *at : (empty_negative ? parent.sb - 1 : parent.se);
  const auto tag = static_cast<std::int32_t>(plane + 1);
  const double total = static_cast<double>(store_.size());
  for (int side : {-1, 1}) {
    Region child;
    child.cuts = parent.cuts;
    child.cuts.push_back(side * tag);
    child.pending = plane + 1;
    child.sb = side < 0 ? parent.sb : neg_end + 1;
    child.se = side < 0 ? neg_end : parent.se;
    child.stability = static_cast<double>(child.window_size()) / total;
    child.seq = seq_++;
    heap_.push(std::move(child));
  }
}

Vector ArrangementState::representative(const Region& region) const {
  if (region.window_size() > 0) {
    Vector mean = store_.samples().middleCols(region.sb, static_cast<Eigen::Index>(region.window_size()))
                      .rowwise().mean();
    return mean.normalized();
  }
  auto w = interior_point(normal_list(region.half_spaces(planes_)), {}, roi_);
  if (!w) throw Error("region without samples has no interior point");
  return *w;
}

std::optional<NextMd> ArrangementState::next(const Dataset& data) {
  if (data.dim() != store_.dim()) throw DimensionError("dataset and samples differ in d");
  while (!heap_.empty()) {
    Region r = heap_.top();
    heap_.pop();
    bool was_split = false;
    for (; r.pending < planes_.planes.size(); ++r.pending) {
      const Hyperplane& h = planes_.planes[r.pending];
      if (auto at = pass_through(h, r, store_)) {
        split(r, r.pending, at, false);
        was_split = true;
        break;
      }
      if (options_.exact_fallback && crosses_exactly(r, h)) {
        const bool all_positive = r.window_size() == 0 || h.coeffs.dot(store_.sample(r.sb)) >= 0.0;
        split(r, r.pending, std::nullopt, all_positive);
        was_split = true;
        break;
      }
    }
    if (was_split) continue;
    Vector w = representative(r);
    StabilityEstimate estimate = make_estimate(r.window_size(), store_.size(), options_.alpha);
    return NextMd{rank(data, w), std::move(w), estimate, std::move(r)};
  }
  return std::nullopt;
}

ArrangementState make_arrangement(const Dataset& data, const RegionOfInterest& roi, std::size_t samples,
                                  const RngStream& rng, MdOptions options) {
  SampleStore store = SampleStore::draw(roi, samples, rng);
  ExchangeSet planes = exchange_hyperplanes(data, roi, store);
  return ArrangementState(std::move(store), std::move(planes), roi, options);
}

std::optional<NextMd> get_next_md(ArrangementState& state, const Dataset& data) { return state.next(data); }

}  // namespace stablerank
