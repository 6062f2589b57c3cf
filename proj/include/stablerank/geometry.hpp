#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "stablerank/model.hpp"

namespace stablerank {

inline constexpr double kHalfPi = std::numbers::pi / 2.0;

/// Relative tolerance for "on the hyperplane" and angle-equality tests.
inline constexpr double kGeomEps = 1e-9;

inline bool nearly_equal_angle(double a, double b) {
  return std::abs(a - b) <= kGeomEps * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

/// True iff t is >= t2 everywhere and > t2 somewhere.
template <typename DerivedA, typename DerivedB>
bool dominates(const Eigen::MatrixBase<DerivedA>& t, const Eigen::MatrixBase<DerivedB>& t2) {
  if (t.size() != t2.size()) throw DimensionError("dominates: dimension mismatch");
  bool strict = false;
  for (Eigen::Index k = 0; k < t.size(); ++k) {
    if (t(k) < t2(k)) return false;
    if (t(k) > t2(k)) strict = true;
  }
  return strict;
}

template <typename DerivedA, typename DerivedB>
bool identical(const Eigen::MatrixBase<DerivedA>& t, const Eigen::MatrixBase<DerivedB>& t2) {
  return (t.array() == t2.array()).all();
}

/// Angle in (0, pi/2) of the weight ray scoring two 2D items equally, or none
/// when the pair never exchanges order inside the quadrant.
template <typename DerivedA, typename DerivedB>
std::optional<double> exchange_angle_2d(const Eigen::MatrixBase<DerivedA>& t,
                                        const Eigen::MatrixBase<DerivedB>& t2) {
  if (t.size() != 2 || t2.size() != 2) throw DimensionError("exchange_angle_2d: d must be 2");
  if (identical(t, t2) || dominates(t, t2) || dominates(t2, t)) return std::nullopt;
  // Non-dominance makes numerator and denominator share a sign.
  return std::atan2(std::abs(t2(0) - t(0)), std::abs(t(1) - t2(1)));
}

/// The hyperplane sum_k coeffs[k] * w[k] = 0 of weights scoring `first` and
/// `second` equally; coeffs = item(first) - item(second).
struct Hyperplane {
  Vector coeffs;
  std::size_t first = 0;
  std::size_t second = 0;

  double eval(const Vector& w) const { return coeffs.dot(w); }
};

/// h+ (sign = +1) holds the weights ranking `first` above `second`.
struct HalfSpace {
  Hyperplane plane;
  int sign = 1;

  bool contains(const Vector& w) const { return sign * plane.eval(w) > 0.0; }
  Vector normal() const { return sign * plane.coeffs; }
};

std::optional<Hyperplane> exchange_hyperplane(const Dataset& data, std::size_t i, std::size_t j);

struct AngleInterval {
  double lo = 0.0;
  double hi = kHalfPi;

  double width() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
  /// Half-open: lower bound closed, upper bound open.
  bool contains(double angle) const { return angle >= lo && angle < hi; }
};

/// Unit weight vector of a 2D angle.
inline Vector weights_at_angle(double angle) {
  Vector w(2);
  w << std::cos(angle), std::sin(angle);
  return w;
}

/// Hyperspherical angles of w: theta_1 = atan2(w_2, w_1) and
/// theta_i = atan2(w_{i+1}, |w_1..w_i|). Non-negative inputs give angles in
/// [0, pi/2]; other inputs give theta_1 in (-pi, pi].
template <typename Derived>
Vector to_polar(const Eigen::MatrixBase<Derived>& w) {
  const Eigen::Index d = w.size();
  if (d < 2) throw DimensionError("to_polar: need at least 2 components");
  if (w.squaredNorm() == 0.0) throw ValidationError("to_polar: zero vector");
  Vector angles(d - 1);
  angles(0) = std::atan2(w(1), w(0));
  for (Eigen::Index i = 1; i < d - 1; ++i) {
    angles(i) = std::atan2(w(i + 1), w.head(i + 1).norm());
  }
  return angles;
}

/// Inverse of to_polar: x_1 = r prod cos(theta_j),
/// x_{i+1} = r sin(theta_i) prod_{j>i} cos(theta_j).
template <typename Derived>
Vector to_cartesian(double r, const Eigen::MatrixBase<Derived>& angles) {
  const Eigen::Index d = angles.size() + 1;
  Vector x(d);
  double tail = r;
  for (Eigen::Index i = d - 2; i >= 0; --i) {
    x(i + 1) = tail * std::sin(angles(i));
    tail *= std::cos(angles(i));
  }
  x(0) = tail;
  return x;
}

/// Rotation by `angle` in the x_1 - x_{i+1} plane (i is 1-based).
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> plane_rotation(Eigen::Index d, Eigen::Index i,
                                                                     Scalar angle) {
  using std::cos;
  using std::sin;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Identity(d, d);
  m(0, 0) = cos(angle);
  m(0, i) = -sin(angle);
  m(i, 0) = sin(angle);
  m(i, i) = cos(angle);
  return m;
}

/// Orthogonal matrix taking the d-th axis onto the ray with polar angles rho.
/// Product M_1(rho_1) ... M_{d-2}(rho_{d-2}) M_{d-1}(rho_{d-1} - pi/2); the last
/// factor turns clockwise by pi/2 - rho_{d-1}.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> rotation_matrix(
    const Eigen::MatrixBase<Derived>& rho) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index d = rho.size() + 1;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Identity(d, d);
  for (Eigen::Index i = 1; i <= d - 1; ++i) {
    Scalar angle = rho(i - 1);
    if (i == d - 1) angle -= Scalar(kHalfPi);
    m = m * plane_rotation<Scalar>(d, i, angle);
  }
  return m;
}

template <typename DerivedW, typename DerivedR>
Vector rotate(const Eigen::MatrixBase<DerivedW>& w, const Eigen::MatrixBase<DerivedR>& rho) {
  if (w.size() != rho.size() + 1) throw DimensionError("rotate: rho must have d-1 angles");
  return rotation_matrix(rho) * w;
}

template <typename DerivedA, typename DerivedB>
double angle_between(const Eigen::MatrixBase<DerivedA>& u, const Eigen::MatrixBase<DerivedB>& v) {
  // atan2 form keeps accuracy for nearly parallel vectors.
  const double cross = std::sqrt(std::max(0.0, u.squaredNorm() * v.squaredNorm() - u.dot(v) * u.dot(v)));
  return std::atan2(cross, u.dot(v));
}

/// The angle range covered by a 2D region of interest.
AngleInterval roi_to_angle_interval_2d(const RegionOfInterest& roi);

/// A ray and maximum angle.
struct Cap {
  Vector ray;  // unit length
  double angle = 0.0;
};

/// A cap enclosing the region of interest. For constraint regions it encloses
/// the extreme rays of the constraint cone, hence the whole region.
Cap bounding_cap(const RegionOfInterest& roi);

/// Extreme rays (unit length) of the cone {w >= 0, constraints}.
std::vector<Vector> extreme_rays(const RegionOfInterest& roi);

/// Finds w with a.w > 0 for every row of `strict`, e.w = 0 for every row of
/// `equalities`, w > 0 and w strictly inside the region of interest. Returns a
/// unit vector, or none when no such point exists.
std::optional<Vector> interior_point(const std::vector<Vector>& strict,
                                     const std::vector<Vector>& equalities,
                                     const RegionOfInterest& roi);

}  // namespace stablerank
