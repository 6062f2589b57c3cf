#include "stablerank/geometry.hpp"

#include <algorithm>

#include <Eigen/LU>

#include "stablerank/lp.hpp"

namespace stablerank {

std::optional<Hyperplane> exchange_hyperplane(const Dataset& data, std::size_t i, std::size_t j) {
  auto ti = data.item(i);
  auto tj = data.item(j);
  if (identical(ti, tj) || dominates(ti, tj) || dominates(tj, ti)) return std::nullopt;
  return Hyperplane{(ti - tj).transpose(), i, j};
}

namespace {

// Closed sub-interval of [0, pi/2] where a.(cos x, sin x) >= 0, if any.
std::optional<AngleInterval> halfplane_interval(double a0, double a1) {
  const bool at_lo = a0 >= 0.0;
  const bool at_hi = a1 >= 0.0;
  if (at_lo && at_hi) return AngleInterval{0.0, kHalfPi};
  if (!at_lo && !at_hi) return std::nullopt;
  // A sinusoid changes sign at most once on an interval shorter than pi.
  const double root = std::atan2(std::abs(a0), std::abs(a1));
  return at_lo ? AngleInterval{0.0, root} : AngleInterval{root, kHalfPi};
}

}  // namespace

AngleInterval roi_to_angle_interval_2d(const RegionOfInterest& roi) {
  if (roi.dim() != 2) throw DimensionError("roi_to_angle_interval_2d: d must be 2");
  switch (roi.kind()) {
    case RegionOfInterest::Kind::full:
      return {0.0, kHalfPi};
    case RegionOfInterest::Kind::cone: {
      const double center = std::atan2(roi.ray()(1), roi.ray()(0));
      AngleInterval out{std::max(0.0, center - roi.max_angle()),
                        std::min(kHalfPi, center + roi.max_angle())};
      if (out.width() <= 0.0) throw ValidationError("region of interest is empty");
      return out;
    }
    case RegionOfInterest::Kind::constraints: {
      AngleInterval out{0.0, kHalfPi};
      for (const auto& c : roi.constraint_list()) {
        Vector a = c.as_ge();
        auto part = halfplane_interval(a(0), a(1));
        if (!part) throw ValidationError("region of interest is empty");
        out.lo = std::max(out.lo, part->lo);
        out.hi = std::min(out.hi, part->hi);
      }
      if (out.width() <= 0.0) throw ValidationError("region of interest is empty");
      return out;
    }
  }
  return {0.0, kHalfPi};
}

std::vector<Vector> extreme_rays(const RegionOfInterest& roi) {
  const auto d = static_cast<Eigen::Index>(roi.dim());
  std::vector<Vector> rows;
  for (Eigen::Index j = 0; j < d; ++j) rows.push_back(Vector::Unit(d, j));
  for (const auto& c : roi.constraint_list()) rows.push_back(c.as_ge().normalized());

  // Vertices of the cone's slice by sum(w) = 1: choose d-1 tight rows.
  const std::size_t m = rows.size();
  const std::size_t pick = static_cast<std::size_t>(d - 1);
  std::vector<Vector> rays;
  std::vector<bool> mask(m, false);
  std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(pick), true);
  do {
    Matrix a(d, d);
    Vector b = Vector::Zero(d);
    Eigen::Index r = 0;
    for (std::size_t k = 0; k < m; ++k) {
      if (mask[k]) a.row(r++) = rows[k].transpose();
    }
    a.row(d - 1).setOnes();
    b(d - 1) = 1.0;
    Eigen::FullPivLU<Matrix> lu(a);
    if (!lu.isInvertible()) continue;
    Vector w = lu.solve(b);
    bool feasible = true;
    for (const auto& row : rows) {
      if (row.dot(w) < -1e-10) {
        feasible = false;
        break;
      }
    }
    if (!feasible) continue;
    w = w.cwiseMax(0.0).normalized();
    bool seen = std::any_of(rays.begin(), rays.end(),
                            [&](const Vector& v) { return (v - w).norm() < 1e-9; });
    if (!seen) rays.push_back(w);
  } while (std::prev_permutation(mask.begin(), mask.end()));
  return rays;
}

Cap bounding_cap(const RegionOfInterest& roi) {
  const auto d = static_cast<Eigen::Index>(roi.dim());
  if (roi.kind() == RegionOfInterest::Kind::cone) return {roi.ray(), roi.max_angle()};

  std::vector<Vector> rays = extreme_rays(roi);
  if (rays.empty()) throw ValidationError("bounding_cap: infeasible constraints");

  auto max_angle = [&](const Vector& c) {
    double worst = 0.0;
    for (const auto& v : rays) worst = std::max(worst, angle_between(c, v));
    return worst;
  };

  Vector center = Vector::Zero(d);
  for (const auto& v : rays) center += v;
  center.normalize();
  Cap best{center, max_angle(center)};

  // Badoiu-Clarkson steps toward the farthest ray shrink the cap.
  for (int step = 1; step <= 200; ++step) {
    const Vector* far = &rays.front();
    double far_angle = -1.0;
    for (const auto& v : rays) {
      double a = angle_between(center, v);
      if (a > far_angle) {
        far_angle = a;
        far = &v;
      }
    }
    center = (center + (*far - center) / (step + 1.0)).normalized();
    double a = max_angle(center);
    if (a < best.angle) best = {center, a};
  }
  best.angle = std::min(kHalfPi, best.angle + 1e-12);
  return best;
}

std::optional<Vector> interior_point(const std::vector<Vector>& strict,
                                     const std::vector<Vector>& equalities,
                                     const RegionOfInterest& roi) {
  const auto d = static_cast<Eigen::Index>(roi.dim());
  std::vector<Vector> rows;
  for (const auto& a : strict) {
    double norm = a.norm();
    if (norm > 0.0) rows.push_back(a / norm);
  }
  if (roi.kind() == RegionOfInterest::Kind::constraints) {
    for (const auto& c : roi.constraint_list()) rows.push_back(c.as_ge().normalized());
  }

  // Variables (w_1..w_d, t): maximize t with every strict row >= t, w_j >= t,
  // t <= 1, sum(w) = 1 and the equalities. Cone regions are cut iteratively.
  for (int round = 0; round < 100; ++round) {
    const auto m_le = static_cast<Eigen::Index>(rows.size()) + d + 1;
    lp::Problem p;
    p.A_le = Matrix::Zero(m_le, d + 1);
    p.b_le = Vector::Zero(m_le);
    Eigen::Index r = 0;
    for (const auto& a : rows) {
      p.A_le.row(r).head(d) = -a.transpose();
      p.A_le(r++, d) = 1.0;
    }
    for (Eigen::Index j = 0; j < d; ++j) {
      p.A_le(r, j) = -1.0;
      p.A_le(r++, d) = 1.0;
    }
    p.A_le(r, d) = 1.0;
    p.b_le(r) = 1.0;

    const auto m_eq = static_cast<Eigen::Index>(equalities.size()) + 1;
    p.A_eq = Matrix::Zero(m_eq, d + 1);
    p.b_eq = Vector::Zero(m_eq);
    for (std::size_t e = 0; e < equalities.size(); ++e) {
      p.A_eq.row(static_cast<Eigen::Index>(e)).head(d) = equalities[e].transpose();
    }
    p.A_eq.row(m_eq - 1).head(d).setOnes();
    p.b_eq(m_eq - 1) = 1.0;

    p.c = Vector::Zero(d + 1);
    p.c(d) = 1.0;

    lp::Solution sol = lp::maximize(p);
    if (sol.status != lp::Status::optimal || sol.objective <= 1e-9) return std::nullopt;
    Vector w = sol.x.head(d);

    if (roi.kind() != RegionOfInterest::Kind::cone) return w.normalized();
    if (angle_between(w, roi.ray()) < roi.max_angle() - kGeomEps) return w.normalized();
    // Supporting half-space of the cap at w: ray.x - cos(angle) (w/|w|).x >= 0.
    rows.push_back((roi.ray() - std::cos(roi.max_angle()) * w.normalized()).normalized());
  }
  return std::nullopt;
}

}  // namespace stablerank
