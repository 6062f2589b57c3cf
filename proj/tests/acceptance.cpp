// Acceptance run: one PASS/FAIL line per criterion, with the measured values.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "stablerank/exact2d.hpp"
#include "stablerank/exactmd.hpp"
#include "stablerank/randomized.hpp"

using namespace stablerank;
using fixtures::ids;
using std::numbers::pi;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

// Collects sub-checks of one criterion and prints a single verdict line.
class Criterion {
 public:
  explicit Criterion(std::string name) : name_(std::move(name)) {}
  ~Criterion() {
    std::printf("%s %s\n", ok_ ? "PASS" : "FAIL", name_.c_str());
    std::printf("%s", details_.str().c_str());
    std::fflush(stdout);
    if (!ok_) ++failures;
  }

  bool check(bool cond, const std::string& what) {
    details_ << "    " << (cond ? "ok   " : "bad  ") << what << '\n';
    ok_ = ok_ && cond;
    return cond;
  }

 private:
  std::string name_;
  std::ostringstream details_;
  bool ok_ = true;
};

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

double sigma(double p, std::size_t n) { return std::sqrt(p * (1 - p) / static_cast<double>(n)); }

void toy_golden() {
  Criterion c("toy golden suite");
  const auto d = fixtures::toy();
  const Vector w = Vector::Ones(2);
  const auto t0 = Clock::now();
  const Ranking r = rank(d, w);
  const double ms = seconds_since(t0) * 1e3;
  c.check(r == ids(d, {"t2", "t4", "t3", "t5", "t1"}), "rank(<1,1>) = <t2,t4,t3,t5,t1>");
  c.check(ms < 1.0, fmt("rank runtime %.4f ms < 1 ms", ms));

  const auto heap = ray_sweep(d);
  double width = 0.0;
  for (const auto& e : heap.regions()) width += e.interval.width();
  c.check(heap.region_count() == 11, fmt("ray_sweep regions = %zu", heap.region_count()));
  c.check(std::abs(width - pi / 2) <= 1e-9, fmt("widths sum to pi/2 (off by %.2e)", width - pi / 2));

  const auto v = verify_2d(d, ids(d, {"t2", "t4", "t3", "t5", "t1"}));
  if (c.check(v.feasible(), "verify_2d feasible")) {
    const auto& g = *v.region;
    c.check(std::abs(g.interval.lo - 0.7378) <= 1e-3 && std::abs(g.interval.hi - 0.8761) <= 1e-3,
            fmt("interval (%.5f, %.5f) vs (0.7378, 0.8761)", g.interval.lo, g.interval.hi));
    c.check(std::abs(g.stability - 0.0880) <= 1e-3, fmt("stability %.5f vs 0.0880", g.stability));
    const auto grid = fixtures::angle_grid(d, 0.0, pi / 2, 1000000);
    const double share = grid.at(ids(d, {"t2", "t4", "t3", "t5", "t1"}).order);
    c.check(std::abs(share - g.stability) <= 1e-5, fmt("10^6-point grid share %.6f", share));
  }

  auto h = ray_sweep(d);
  const double want[] = {0.3948, 0.1444, 0.1015};
  for (double x : want) {
    auto next = get_next_2d(h, d);
    c.check(next && std::abs(next->stability - x) <= 1e-3,
            fmt("get_next_2d %.5f vs %.4f", next ? next->stability : -1.0, x));
  }
}

void skyline() {
  Criterion c("skyline toy suite");
  const auto d = fixtures::skyline_toy();
  MonteCarloState state(d, RegionOfInterest::full(2), ResultMode::topk_set, 3, 1);
  auto first = get_next_fixed_budget(state, d, 100000);
  const ResultKey want{1, 2, 3};
  c.check(first && first->key == want, "most stable top-3 set is {t2,t3,t4}");

  // Grid oracle for the same set.
  const std::size_t points = 1000000;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < points; ++i) {
    const double a = (i + 0.5) * (pi / 2) / points;
    hits += top_k(d, weights_at_angle(a), 3, TopKMode::set).members == std::vector<std::size_t>{1, 2, 3};
  }
  const double grid = double(hits) / points;
  c.check(std::abs(grid - 0.9607) <= 1e-3, fmt("grid oracle %.5f", grid));
  if (first) {
    c.check(std::abs(first->estimate.value - 0.9607) <= 0.01,
            fmt("Monte-Carlo %.5f vs 0.9607 +- 0.01 (10^5 samples)", first->estimate.value));
  }
}

void sampler_suite() {
  Criterion c("sampler suite");
  const double x = inverse_cdf_3d(0.13, pi / 20);
  c.check(std::abs(x - pi / 55.5) <= 1e-3, fmt("inverse_cdf_3d(0.13, pi/20) = %.6f vs %.6f", x, pi / 55.5));

  RngStream rng(2);
  const Vector ray = Vector::Ones(3).normalized();
  std::size_t in = 0;
  for (int i = 0; i < 100000; ++i) in += angle_between(sample_u(3, rng), ray) <= pi / 20;
  const double frac = in / 1e5;
  c.check(std::abs(frac - 0.04925) <= 0.005, fmt("cap fraction %.5f vs 0.04925 +- 0.005", frac));

  const std::size_t gamma = kDefaultPartitions;
  const auto table = build_cap_cdf(3, pi / 20, gamma);
  double worst = 0.0;
  for (std::size_t i = 0; i <= gamma; ++i)
    worst = std::max(worst, std::abs(table.cdf[i] - cap_cdf_3d(i * table.step, pi / 20)));
  c.check(worst <= 1.0 / gamma, fmt("table vs closed form max deviation %.2e <= %.2e", worst, 1.0 / gamma));

  double ortho = 0.0;
  for (int d = 3; d <= 5; ++d) {
    for (int t = 0; t < 100; ++t) {
      Vector rho(d - 1);
      for (int j = 0; j < d - 1; ++j) rho(j) = rng.uniform(0.0, pi / 2);
      const Matrix m = rotation_matrix(rho);
      ortho = std::max(ortho, (m.transpose() * m - Matrix::Identity(d, d)).cwiseAbs().maxCoeff());
    }
  }
  c.check(ortho <= 1e-10, fmt("rotation orthogonality %.2e <= 1e-10", ortho));
}

// Sampled engines see the exact order only up to sampling resolution. A
// sampled engine may swap two rankings whose exact stabilities are closer
// than three standard deviations of the difference of their estimates;
// every other swap fails. Literal order agreement is reported alongside.
void cross_engine() {
  Criterion c("cross-engine equivalence (20 datasets, d = 2)");
  const Distribution modes[] = {Distribution::independent, Distribution::correlated, Distribution::anti_correlated};
  const std::size_t samples = 100000;
  int literal = 0;
  for (int s = 0; s < 20; ++s) {
    const std::size_t n = 10 + 10 * (s % 5);
    const auto d = generate_synthetic(n, 2, modes[s % 3], 1000 + s);
    auto heap = ray_sweep(d);
    auto md = make_arrangement(d, RegionOfInterest::full(2), samples, RngStream(2000 + s));
    MonteCarloState mc(d, RegionOfInterest::full(2), ResultMode::full, 0, 3000 + s);
    bool ok = true;
    bool same_order = true;
    std::string why;
    auto judge = [&](const char* engine, int i, const Ranking& got, double estimate, std::size_t used,
                     const Next2d& exact) {
      const auto v = verify_2d(d, got);
      if (!v.feasible()) {
        ok = false;
        why += fmt(" %s #%d infeasible;", engine, i + 1);
        return;
      }
      const double truth = v.region->stability;
      const double p = exact.stability;
      if (got != exact.ranking) {
        same_order = false;
        const double band = 3 * std::sqrt((p * (1 - p) + truth * (1 - truth)) / static_cast<double>(used));
        if (std::abs(truth - p) > band) {
          ok = false;
          why += fmt(" %s #%d is a %.5f region, expected %.5f;", engine, i + 1, truth, p);
        } else {
          why += fmt(" %s #%d swaps a tie (%.5f vs %.5f);", engine, i + 1, truth, p);
        }
      }
      if (std::abs(estimate - truth) > 3 * sigma(truth, used)) {
        ok = false;
        why += fmt(" %s #%d estimate %.5f vs exact %.5f;", engine, i + 1, estimate, truth);
      }
    };
    for (int i = 0; i < 3; ++i) {
      auto exact = get_next_2d(heap, d);
      auto m = get_next_md(md, d);
      auto r = get_next_fixed_budget(mc, d, samples);
      if (!exact) {
        ok = ok && !m && !r;
        break;
      }
      if (!m || !r) {
        ok = false;
        why += " engine ran out early;";
        break;
      }
      judge("md", i, m->ranking, m->estimate.value, samples, *exact);
      Ranking rr;
      rr.order.assign(r->key.begin(), r->key.end());
      judge("random", i, rr, r->estimate.value, r->estimate.samples, *exact);
    }
    literal += ok && same_order;
    c.check(ok, fmt("dataset %d (n = %zu)%s", s, n, why.c_str()));
  }
  c.check(true, fmt("%d of 20 datasets agree in literal order", literal));
}

void statistical() {
  Criterion c("statistical suite");
  const auto d = fixtures::toy();
  const double truth = verify_2d(d, ids(d, {"t2", "t4", "t1", "t3", "t5"})).region->stability;
  int covered = 0;
  for (int t = 0; t < 500; ++t) {
    MonteCarloState state(d, RegionOfInterest::full(2), ResultMode::full, 0, 10000 + t);
    auto r = get_next_fixed_budget(state, d, 1000);
    covered += r && std::abs(r->estimate.value - truth) <= r->estimate.confidence_error;
  }
  c.check(covered / 500.0 >= 0.92, fmt("CI coverage %.3f >= 0.92 (N = 1000 per trial)", covered / 500.0));

  // Items whose first region [0, pi/8) has stability exactly 0.25.
  Matrix a(2, 2);
  a << 1, 0, 1 - std::tan(pi / 8), 1;
  const Dataset quarter({"a", "b"}, a);
  const double s = verify_2d(quarter, Ranking{{0, 1}}).region->stability;
  RngStream rng(7);
  double total = 0.0;
  for (int t = 0; t < 1000; ++t) {
    int draws = 1;
    while (rank(quarter, sample_u(2, rng)).order != std::vector<std::size_t>{0, 1}) ++draws;
    total += draws;
  }
  const double expected = expected_samples_to_observe(s).mean;
  c.check(std::abs(total / 1000 - expected) <= 0.1 * expected,
          fmt("first-hit mean %.3f vs %.3f at S = %.3f", total / 1000, expected, s));
}

void correlation() {
  Criterion c("correlation ordering (n = 10^4, d = 3, top-10 set)");
  const auto roi = RegionOfInterest::cone(Vector::Ones(3), pi / 50);
  int votes = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    double best[3];
    const Distribution modes[] = {Distribution::correlated, Distribution::independent, Distribution::anti_correlated};
    for (int m = 0; m < 3; ++m) {
      const auto d = generate_synthetic(10000, 3, modes[m], seed);
      MonteCarloState state(d, roi, ResultMode::topk_set, 10, seed);
      best[m] = get_next_fixed_budget(state, d, 5000)->estimate.value;
    }
    const bool ordered = best[0] > best[1] && best[1] > best[2];
    votes += ordered;
    c.check(true, fmt("seed %llu: correlated %.4f, independent %.4f, anti %.4f%s", (unsigned long long)seed, best[0],
                      best[1], best[2], ordered ? "" : " (out of order)"));
  }
  c.check(votes >= 3, fmt("%d of 5 seeds strictly ordered", votes));
}

void performance() {
  Criterion c("performance sanity");
  {
    const auto d = generate_synthetic(10000, 2, Distribution::independent, 1);
    const auto t0 = Clock::now();
    const auto heap = ray_sweep(d);
    const double sec = seconds_since(t0);
    c.check(sec < 30.0, fmt("ray_sweep n = 10^4: %.2f s, %zu regions", sec, heap.region_count()));
  }
  {
    const auto d = generate_synthetic(100000, 3, Distribution::independent, 2);
    const auto t0 = Clock::now();
    MonteCarloState state(d, RegionOfInterest::full(3), ResultMode::topk_set, 10, 3);
    auto r = get_next_fixed_budget(state, d, 5000);
    const double sec = seconds_since(t0);
    c.check(r.has_value() && sec < 300.0, fmt("random top-10 get-next, N = 5000, n = 10^5, d = 3: %.2f s", sec));
  }
}

}  // namespace

int main() {
  toy_golden();
  skyline();
  sampler_suite();
  cross_engine();
  statistical();
  correlation();
  performance();
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
