#include <doctest.h>

#include <numbers>
#include <set>

#include "fixtures.hpp"
#include "stablerank/exact2d.hpp"
#include "stablerank/sampler.hpp"

using namespace stablerank;
using fixtures::ids;
using std::numbers::pi;

TEST_CASE("verify_2d on the toy ranking") {
  const auto d = fixtures::toy();
  const auto v = verify_2d(d, ids(d, {"t2", "t4", "t3", "t5", "t1"}));
  REQUIRE(v.feasible());
  CHECK(v.region->interval.lo == doctest::Approx(0.7378).epsilon(1e-3));
  CHECK(v.region->interval.hi == doctest::Approx(0.8761).epsilon(1e-3));
  CHECK(v.region->stability == doctest::Approx(0.0880).epsilon(1e-3 / 0.088));
  CHECK(v.region->quadrant_stability == v.region->stability);

  // The lower bound comes from (t5, t1), the upper from (t4, t3).
  CHECK(v.region->interval.lo == doctest::Approx(*exchange_angle_2d(d.item(4), d.item(0))));
  CHECK(v.region->interval.hi == doctest::Approx(*exchange_angle_2d(d.item(3), d.item(2))));

  const auto grid = fixtures::angle_grid(d, 0.0, pi / 2, 100000);
  CHECK(grid.at(ids(d, {"t2", "t4", "t3", "t5", "t1"}).order) ==
        doctest::Approx(v.region->stability).epsilon(1e-4 / 0.088));
}

TEST_CASE("verify_2d with dominance") {
  Matrix a(2, 2);
  a << 0.9, 0.9, 0.1, 0.1;
  Dataset d({"a", "b"}, a);
  const auto bad = verify_2d(d, ids(d, {"b", "a"}));
  CHECK_FALSE(bad.feasible());
  REQUIRE(bad.violation);
  CHECK(bad.violation->upper == 1);
  CHECK(bad.violation->lower == 0);

  const auto good = verify_2d(d, ids(d, {"a", "b"}));
  REQUIRE(good.feasible());
  CHECK(good.region->stability == 1.0);
  CHECK(good.region->interval.lo == 0.0);
  CHECK(good.region->interval.hi == doctest::Approx(pi / 2));
}

TEST_CASE("verify_2d rejects crossing bounds and bad input") {
  const auto d = fixtures::toy();
  // t2 over t1 needs a small angle, t3 over t2 a large one.
  const auto v = verify_2d(d, ids(d, {"t1", "t2", "t3", "t4", "t5"}));
  CHECK_FALSE(v.feasible());
  CHECK(v.violation);

  Matrix three = Matrix::Ones(2, 3);
  CHECK_THROWS_AS(verify_2d(Dataset({"a", "b"}, three), Ranking{{0, 1}}), DimensionError);
  CHECK_THROWS_AS(verify_2d(d, Ranking{{0, 1, 2}}), ValidationError);

  Matrix same(2, 2);
  same << 0.5, 0.5, 0.5, 0.5;
  Dataset twins({"a", "b"}, same);
  CHECK(verify_2d(twins, ids(twins, {"a", "b"})).feasible());
  CHECK_FALSE(verify_2d(twins, ids(twins, {"b", "a"})).feasible());
}

TEST_CASE("verify_2d normalizes by the roi width") {
  const auto d = fixtures::toy();
  const auto v = verify_2d(d, ids(d, {"t2", "t4", "t3", "t5", "t1"}), {0.7, 0.9});
  REQUIRE(v.feasible());
  CHECK(v.region->interval.lo == doctest::Approx(0.737815).epsilon(1e-5));
  CHECK(v.region->stability == doctest::Approx(v.region->interval.width() / 0.2));
  CHECK(v.region->quadrant_stability == doctest::Approx(v.region->interval.width() / (pi / 2)));
  // Outside the roi the ranking is infeasible.
  CHECK_FALSE(verify_2d(d, ids(d, {"t2", "t4", "t3", "t5", "t1"}), {0.1, 0.5}).feasible());
}

TEST_CASE("ray sweep over the toy data") {
  const auto d = fixtures::toy();
  const auto heap = ray_sweep(d);
  REQUIRE(heap.region_count() == 11);
  double total = 0.0, share = 0.0;
  double last_hi = 0.0;
  for (const auto& e : heap.regions()) {
    CHECK(e.interval.lo == last_hi);
    last_hi = e.interval.hi;
    total += e.interval.width();
    share += e.stability;
  }
  CHECK(std::abs(total - pi / 2) <= 1e-9);
  CHECK(std::abs(share - 1.0) <= 1e-9);
  const auto first = heap.regions().front();
  CHECK(first.interval.hi == doctest::Approx(std::atan2(0.63 - 0.58, 0.78 - 0.71)));
  CHECK(first.stability == doctest::Approx(0.3948).epsilon(1e-3 / 0.3948));
}

TEST_CASE("ray sweep on one item") {
  Dataset one({"only"}, Matrix::Constant(1, 2, 0.4));
  auto heap = ray_sweep(one, {pi / 4, pi / 3});
  REQUIRE(heap.region_count() == 1);
  auto next = get_next_2d(heap, one);
  REQUIRE(next);
  CHECK(next->stability == 1.0);
  CHECK_FALSE(get_next_2d(heap, one));
}

TEST_CASE("get_next_2d sequence on the toy data") {
  const auto d = fixtures::toy();
  auto heap = ray_sweep(d);
  auto first = get_next_2d(heap, d);
  REQUIRE(first);
  CHECK(first->ranking == ids(d, {"t2", "t4", "t1", "t3", "t5"}));
  CHECK(first->stability == doctest::Approx(0.3948).epsilon(1e-3 / 0.3948));
  CHECK(first->weights.norm() == doctest::Approx(1.0));
  auto second = get_next_2d(heap, d);
  REQUIRE(second);
  CHECK(second->stability == doctest::Approx(0.1444).epsilon(1e-3 / 0.1444));
  CHECK(second->interval.lo == doctest::Approx(1.3439).epsilon(1e-4));
  CHECK(second->interval.hi == doctest::Approx(pi / 2));
  auto third = get_next_2d(heap, d);
  REQUIRE(third);
  CHECK(third->stability == doctest::Approx(0.1015).epsilon(1e-3 / 0.1015));
  for (int i = 4; i <= 11; ++i) CHECK(get_next_2d(heap, d));
  CHECK_FALSE(get_next_2d(heap, d));
}

namespace {

// Drains a heap and checks the partition, consistency, membership and
// monotonicity properties along the way.
std::set<std::vector<std::size_t>> drain_and_check(const Dataset& d, AngleInterval roi, std::uint64_t seed) {
  auto heap = ray_sweep(d, roi);
  RngStream rng(seed);
  std::set<std::vector<std::size_t>> seen;
  std::vector<AngleInterval> intervals;
  double total = 0.0;
  double last = 2.0;
  while (auto next = get_next_2d(heap, d)) {
    CHECK(next->stability <= last);
    last = next->stability;
    total += next->interval.width();
    intervals.push_back(next->interval);
    CHECK(seen.insert(next->ranking.order).second);

    const auto v = verify_2d(d, next->ranking, roi);
    REQUIRE(v.feasible());
    CHECK(std::abs(v.region->interval.lo - next->interval.lo) <= 1e-9);
    CHECK(std::abs(v.region->interval.hi - next->interval.hi) <= 1e-9);
    CHECK(std::abs(v.region->stability - next->stability) <= 1e-9);

    for (int i = 0; i < 100; ++i) {
      const double a = rng.uniform(next->interval.lo, next->interval.hi);
      // Skip points within rounding distance of a boundary.
      if (a - next->interval.lo < 1e-9 || next->interval.hi - a < 1e-9) continue;
      CHECK(rank(d, weights_at_angle(a)) == next->ranking);
    }
  }
  CHECK(std::abs(total - roi.width()) <= 1e-9);
  std::sort(intervals.begin(), intervals.end(), [](auto& a, auto& b) { return a.lo < b.lo; });
  for (std::size_t i = 1; i < intervals.size(); ++i) CHECK(intervals[i].lo >= intervals[i - 1].hi);
  return seen;
}

}  // namespace

TEST_CASE("region properties on the toy data") {
  const auto d = fixtures::toy();
  CHECK(drain_and_check(d, {0.0, pi / 2}, 1).size() == 11);
  CHECK(drain_and_check(d, {0.7, 0.9}, 2).size() == fixtures::angle_grid(d, 0.7, 0.9, 100000).size());
}

TEST_CASE("region properties on synthetic data") {
  for (auto mode : {Distribution::independent, Distribution::correlated, Distribution::anti_correlated}) {
    const auto d = generate_synthetic(40, 2, mode, 11);
    drain_and_check(d, {0.0, pi / 2}, 3);
    drain_and_check(d, {0.3, 1.1}, 4);
  }
}

TEST_CASE("coincident exchanges collapse into one step") {
  // Every pair of these items exchanges at pi/4.
  Matrix a(4, 2);
  a << 0.9, 0.1, 0.7, 0.3, 0.3, 0.7, 0.1, 0.9;
  Dataset d({"a", "b", "c", "d"}, a);
  auto heap = ray_sweep(d);
  REQUIRE(heap.region_count() == 2);
  auto first = get_next_2d(heap, d);
  auto second = get_next_2d(heap, d);
  REQUIRE(first);
  REQUIRE(second);
  CHECK(first->stability == doctest::Approx(0.5));
  const std::set<std::vector<std::size_t>> got{first->ranking.order, second->ranking.order};
  const std::set<std::vector<std::size_t>> want{ids(d, {"a", "b", "c", "d"}).order, ids(d, {"d", "c", "b", "a"}).order};
  CHECK(got == want);
  drain_and_check(d, {0.0, pi / 2}, 5);
}

TEST_CASE("sweep agrees with a dense angle grid") {
  for (std::uint64_t seed : {21u, 22u}) {
    const auto d = generate_synthetic(seed == 21 ? 20 : 50, 2, Distribution::independent, seed);
    const std::size_t points = 1000000;
    const double step = (pi / 2) / points;
    const auto grid = fixtures::angle_grid(d, 0.0, pi / 2, points);
    auto heap = ray_sweep(d);
    std::set<std::vector<std::size_t>> swept;
    for (const auto& e : heap.regions()) {
      const auto r = rank(d, weights_at_angle(e.interval.mid())).order;
      swept.insert(r);
      // A region wider than two grid cells always holds a grid point.
      if (e.interval.width() > 2 * step) CHECK(grid.count(r) == 1);
    }
    for (const auto& [r, share] : grid) CHECK(swept.count(r) == 1);
  }
}
