#include "stablerank/exact2d.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <queue>

namespace stablerank {
namespace {

void check_interval(const AngleInterval& roi) {
  if (!(roi.lo >= 0.0 && roi.hi <= kHalfPi && roi.lo < roi.hi)) {
    throw ValidationError("angle interval must satisfy 0 <= lo < hi <= pi/2");
  }
}

void check_2d(const Dataset& data) {
  if (data.dim() != 2) throw DimensionError("exact 2D engine needs d = 2, got d = " + std::to_string(data.dim()));
}

}  // namespace

Verdict<Region2d> verify_2d(const Dataset& data, const Ranking& ranking, const AngleInterval& roi) {
  check_2d(data);
  check_interval(roi);
  check_permutation(data, ranking);

  double lo = roi.lo;
  double hi = roi.hi;
  std::optional<InfeasiblePair> lo_pair;
  std::optional<InfeasiblePair> hi_pair;
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
    const double angle = *exchange_angle_2d(t, t2);
    if (t(0) < t2(0)) {
      // `up` wins only after the exchange.
      if (angle > lo) {
        lo = angle;
        lo_pair = InfeasiblePair{up, down};
      }
    } else if (angle < hi) {
      hi = angle;
      hi_pair = InfeasiblePair{up, down};
    }
  }
  if (lo >= hi) return {std::nullopt, lo_pair ? lo_pair : hi_pair};
  Region2d region{{lo, hi}, (hi - lo) / roi.width(), (hi - lo) / kHalfPi};
  return {region, std::nullopt};
}

RegionHeap::RegionHeap(AngleInterval roi, std::vector<double> bounds) : roi_(roi), bounds_(std::move(bounds)) {
  if (bounds_.size() < 2) throw ValidationError("RegionHeap: need at least two boundaries");
  if (bounds_.size() - 1 > std::numeric_limits<std::uint32_t>::max()) throw Error("RegionHeap: too many regions");
  heap_.resize(bounds_.size() - 1);
  std::iota(heap_.begin(), heap_.end(), std::uint32_t{0});
  std::make_heap(heap_.begin(), heap_.end(), [this](auto a, auto b) { return wider(b, a); });
}

bool RegionHeap::wider(std::uint32_t a, std::uint32_t b) const {
  const double wa = bounds_[a + 1] - bounds_[a];
  const double wb = bounds_[b + 1] - bounds_[b];
  if (wa != wb) return wa > wb;
  return a < b;
}

RegionHeap::Entry RegionHeap::entry(std::uint32_t index) const {
  AngleInterval interval{bounds_[index], bounds_[index + 1]};
  return {interval.width() / roi_.width(), interval, index};
}

std::vector<RegionHeap::Entry> RegionHeap::regions() const {
  std::vector<Entry> out;
  out.reserve(region_count());
  for (std::uint32_t i = 0; i < region_count(); ++i) out.push_back(entry(i));
  return out;
}

std::optional<RegionHeap::Entry> RegionHeap::pop() {
  if (heap_.empty()) return std::nullopt;
  std::pop_heap(heap_.begin(), heap_.end(), [this](auto a, auto b) { return wider(b, a); });
  const std::uint32_t index = heap_.back();
  heap_.pop_back();
  return entry(index);
}

RegionHeap ray_sweep(const Dataset& data, const AngleInterval& interval) {
  check_2d(data);
  check_interval(interval);
  const Matrix& t = data.attrs();
  const auto n = static_cast<std::uint32_t>(data.size());
  const double lo = interval.lo;
  const double hi = interval.hi;

  auto score = [&](std::uint32_t i, double c, double s) { return c * t(i, 0) + s * t(i, 1); };
  auto slope = [&](std::uint32_t i, double c, double s) { return -s * t(i, 0) + c * t(i, 1); };

  // Order just after lo: score at lo, then the direction scores move in.
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), std::uint32_t{0});
  {
    const double c = std::cos(lo);
    const double s = std::sin(lo);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      const double sa = score(a, c, s);
      const double sb = score(b, c, s);
      if (sa != sb) return sa > sb;
      const double da = slope(a, c, s);
      const double db = slope(b, c, s);
      if (da != db) return da > db;
      return data.id_rank(a) < data.id_rank(b);
    });
  }
  std::vector<std::uint32_t> pos(n);
  for (std::uint32_t p = 0; p < n; ++p) pos[order[p]] = p;

  struct Event {
    double angle;
    std::uint32_t a;  // above
    std::uint32_t b;  // below
  };
  auto later = [&](const Event& x, const Event& y) {
    if (x.angle != y.angle) return x.angle > y.angle;
    if (data.id_rank(x.a) != data.id_rank(y.a)) return data.id_rank(x.a) > data.id_rank(y.a);
    return data.id_rank(x.b) > data.id_rank(y.b);
  };
  std::priority_queue<Event, std::vector<Event>, decltype(later)> events(later);

  // Only a pair whose upper item leads on x1 and trails on x2 swaps later on.
  auto push = [&](std::uint32_t p, double floor) {
    const std::uint32_t a = order[p];
    const std::uint32_t b = order[p + 1];
    if (!(t(a, 0) > t(b, 0) && t(b, 1) > t(a, 1))) return;
    const double angle = std::atan2(t(a, 0) - t(b, 0), t(b, 1) - t(a, 1));
    if (angle >= hi) return;
    events.push({std::max(angle, floor), a, b});
  };
  for (std::uint32_t p = 0; p + 1 < n; ++p) push(p, lo);

  std::vector<double> bounds{lo};
  std::vector<std::uint32_t> group;
  while (!events.empty()) {
    const double angle = events.top().angle;
    const double reach = angle + kGeomEps * std::max(1.0, angle);
    group.clear();
    while (!events.empty() && events.top().angle <= reach) {
      const Event e = events.top();
      events.pop();
      if (pos[e.a] + 1 == pos[e.b]) group.push_back(pos[e.a]);
    }
    if (group.empty()) continue;
    if (!nearly_equal_angle(bounds.back(), angle)) bounds.push_back(angle);

    // Each run of touching swaps is a block of items tied at `angle`; their
    // order past it follows the slope.
    std::sort(group.begin(), group.end());
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    std::size_t g = 0;
    while (g < group.size()) {
      const std::uint32_t first = group[g];
      std::uint32_t last = first + 1;
      for (++g; g < group.size() && group[g] <= last; ++g) last = std::max(last, group[g] + 1);
      std::sort(order.begin() + first, order.begin() + last + 1, [&](std::uint32_t a, std::uint32_t b) {
        const double da = slope(a, c, s);
        const double db = slope(b, c, s);
        if (da != db) return da > db;
        return data.id_rank(a) < data.id_rank(b);
      });
      for (std::uint32_t p = first; p <= last; ++p) pos[order[p]] = p;
      for (std::uint32_t p = first == 0 ? 0 : first - 1; p <= last && p + 1 < n; ++p) push(p, angle);
    }
  }
  if (bounds.size() > 1 && nearly_equal_angle(bounds.back(), hi)) {
    bounds.back() = hi;
  } else {
    bounds.push_back(hi);
  }
  return RegionHeap(interval, std::move(bounds));
}

std::optional<Next2d> get_next_2d(RegionHeap& heap, const Dataset& data) {
  auto entry = heap.pop();
  if (!entry) return std::nullopt;
  Vector w = weights_at_angle(entry->interval.mid());
  return Next2d{rank(data, w), std::move(w), entry->stability, entry->interval};
}

}  // namespace stablerank
