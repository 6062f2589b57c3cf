#include "stablerank/sampler.hpp"

#include <algorithm>
#include <cmath>

#include "stablerank/parallel.hpp"

namespace stablerank {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

Vector unit_normal(Eigen::Index d, RngStream& rng) {
  Vector u(d);
  double norm2 = 0.0;
  do {
    for (Eigen::Index i = 0; i < d; ++i) u(i) = rng.normal();
    norm2 = u.squaredNorm();
  } while (norm2 == 0.0);
  return u / std::sqrt(norm2);
}

double cap_offset(std::size_t d, double angle, double y, RngStream& rng, const CapCdfTable* table) {
  if (table) return table->inverse(y, rng);
  if (d == 2) return angle * y;
  if (d == 3) return inverse_cdf_3d(y, angle);
  throw ValidationError("sample_cap: d > 3 needs a CDF table");
}

// Cap draw with a precomputed rotation; retries points outside the quadrant.
Vector draw_cap(const Matrix& rotation, double angle, std::size_t d, RngStream& rng,
                const CapCdfTable* table, std::size_t max_trials) {
  for (std::size_t trial = 0; trial < max_trials; ++trial) {
    const double offset = cap_offset(d, angle, rng.uniform(), rng, table);
    Vector around = unit_normal(static_cast<Eigen::Index>(d) - 1, rng);
    Vector w = rotation * cap_point(around, offset);
    if ((w.array() >= -1e-12).all()) return w.cwiseMax(0.0);
  }
  throw Error("cap sampling: no point inside the positive quadrant after " +
              std::to_string(max_trials) + " trials");
}

}  // namespace

RngStream RngStream::split(std::uint64_t index) const {
  return RngStream(splitmix64(seed_ ^ splitmix64(index + 0x632BE59BD9B4E019ull)));
}

Vector sample_u(std::size_t d, RngStream& rng) {
  if (d < 2) throw ValidationError("sample_u: d must be >= 2");
  return unit_normal(static_cast<Eigen::Index>(d), rng).cwiseAbs();
}

double CapCdfTable::inverse(double y, RngStream& rng) const {
  auto it = std::upper_bound(cdf.begin(), cdf.end(), y);
  auto cell = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - cdf.begin()) - 1));
  cell = std::min(cell, partitions - 1);
  return static_cast<double>(cell) * step + rng.uniform(0.0, step);
}

CapCdfTable build_cap_cdf(std::size_t d, double angle, std::size_t partitions) {
  if (d < 2) throw ValidationError("build_cap_cdf: d must be >= 2");
  if (!(angle > 0.0 && angle <= kHalfPi)) throw ValidationError("build_cap_cdf: angle must lie in (0, pi/2]");
  if (partitions < 1) throw ValidationError("build_cap_cdf: need at least one partition");
  CapCdfTable t;
  t.dim = d;
  t.angle = angle;
  t.partitions = partitions;
  t.step = angle / static_cast<double>(partitions);
  t.cdf.reserve(partitions + 1);
  t.cdf.push_back(0.0);
  const double power = static_cast<double>(d) - 2.0;
  double sum = 0.0;
  for (std::size_t i = 1; i <= partitions; ++i) {
    sum += std::pow(std::sin(static_cast<double>(i) * t.step), power);
    t.cdf.push_back(sum);
  }
  for (auto& v : t.cdf) v /= sum;
  t.cdf.back() = 1.0;
  t.integral = sum * t.step;
  return t;
}

double cap_cdf_3d(double x, double angle) { return (1.0 - std::cos(x)) / (1.0 - std::cos(angle)); }

double inverse_cdf_3d(double y, double angle) {
  return std::acos(std::clamp(1.0 - (1.0 - std::cos(angle)) * y, -1.0, 1.0));
}

Vector cap_point(const Vector& around, double offset) {
  Vector p(around.size() + 1);
  p.head(around.size()) = std::sin(offset) * around;
  p(around.size()) = std::cos(offset);
  return p;
}

Vector sample_cap(const Vector& rho, double angle, std::size_t d, RngStream& rng, const CapCdfTable* table) {
  if (static_cast<std::size_t>(rho.size()) + 1 != d) throw DimensionError("sample_cap: rho must have d-1 angles");
  if (!(angle > 0.0 && angle <= kHalfPi)) throw ValidationError("sample_cap: angle must lie in (0, pi/2]");
  return draw_cap(rotation_matrix(rho), angle, d, rng, table, kDefaultRejectionTrials);
}

Vector sample_rejection(const RegionOfInterest& roi, RngStream& rng, std::size_t max_trials) {
  for (std::size_t trial = 0; trial < max_trials; ++trial) {
    Vector w = sample_u(roi.dim(), rng);
    if (roi.contains(w)) return w;
  }
  throw Error("rejection sampling: region of interest accepted none of " + std::to_string(max_trials) +
              " draws; it is degenerate or too small");
}

SamplingMethod choose_method(std::size_t d, double angle, std::size_t partitions) {
  if (d <= 3) return SamplingMethod::inverse_cdf;
  const double integral = build_cap_cdf(d, angle, partitions).integral;
  return std::log(static_cast<double>(partitions)) > 1.0 / integral ? SamplingMethod::rejection
                                                                    : SamplingMethod::inverse_cdf;
}

RoiSampler::RoiSampler(RegionOfInterest roi, SamplerOptions options)
    : roi_(std::move(roi)), options_(options) {
  const std::size_t d = roi_.dim();
  if (roi_.kind() == RegionOfInterest::Kind::full) {
    method_ = SamplingMethod::rejection;
    return;
  }
  cap_ = bounding_cap(roi_);
  method_ = choose_method(d, cap_.angle, options_.partitions);
  if (method_ == SamplingMethod::inverse_cdf) {
    rho_ = to_polar(cap_.ray);
    if (d > 3) {
      table_ = build_cap_cdf(d, cap_.angle, options_.partitions);
      use_table_ = true;
    }
  }
}

Vector RoiSampler::operator()(RngStream& rng) const {
  const std::size_t d = roi_.dim();
  if (roi_.kind() == RegionOfInterest::Kind::full) return sample_u(d, rng);
  if (method_ == SamplingMethod::rejection) return sample_rejection(roi_, rng, options_.max_trials);
  const Matrix rotation = rotation_matrix(rho_);
  for (std::size_t trial = 0; trial < options_.max_trials; ++trial) {
    Vector w = draw_cap(rotation, cap_.angle, d, rng, use_table_ ? &table_ : nullptr, options_.max_trials);
    if (roi_.contains(w)) return w;
  }
  throw Error("cap sampling: region of interest accepted none of " + std::to_string(options_.max_trials) +
              " draws");
}

Matrix RoiSampler::draw(std::size_t count, const RngStream& rng) const {
  Matrix out(static_cast<Eigen::Index>(roi_.dim()), static_cast<Eigen::Index>(count));
  const std::size_t chunks = (count + kChunk - 1) / kChunk;
  parallel_chunks(chunks, [&](std::size_t c) {
    RngStream sub = rng.split(c);
    const std::size_t end = std::min(count, (c + 1) * kChunk);
    for (std::size_t j = c * kChunk; j < end; ++j) out.col(static_cast<Eigen::Index>(j)) = (*this)(sub);
  });
  return out;
}

}  // namespace stablerank
