#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "stablerank/geometry.hpp"
#include "stablerank/model.hpp"

namespace stablerank {

/// Seeded pseudo-random stream. `split(i)` derives an independent substream
/// that depends only on (seed, i).
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }
  RngStream split(std::uint64_t index) const;

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double normal() { return normal_(engine_); }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

/// Uniform direction on the positive part of the unit d-sphere:
/// w_i = |N(0,1)|, normalized.
Vector sample_u(std::size_t d, RngStream& rng);

/// Normalized right Riemann sums of sin^(d-2) over a regular partition of
/// [0, angle]; cdf[i] approximates F(i * step).
struct CapCdfTable {
  std::size_t dim = 0;
  double angle = 0.0;
  std::size_t partitions = 0;
  double step = 0.0;
  double integral = 0.0;  // unnormalized: sum * step ~ int_0^angle sin^(d-2)
  std::vector<double> cdf;

  /// Polar offset for a uniform draw y: the cell holding y, then a uniform
  /// position inside it.
  double inverse(double y, RngStream& rng) const;
};

inline constexpr std::size_t kDefaultPartitions = 10'000;

CapCdfTable build_cap_cdf(std::size_t d, double angle, std::size_t partitions = kDefaultPartitions);

/// F(x) = (1 - cos x) / (1 - cos angle), the d = 3 cap CDF.
double cap_cdf_3d(double x, double angle);
/// F^-1(y) = arccos(1 - (1 - cos angle) y).
double inverse_cdf_3d(double y, double angle);

/// Point at polar offset `offset` from the d-th axis in the direction of the
/// unit (d-1)-vector `around`: (sin(offset) * around, cos(offset)).
Vector cap_point(const Vector& around, double offset);

/// Uniform point of the spherical cap of half-angle `angle` around the ray with
/// polar angles `rho`. Points with a negative component are redrawn. `table`
/// is required for d > 3.
Vector sample_cap(const Vector& rho, double angle, std::size_t d, RngStream& rng,
                  const CapCdfTable* table = nullptr);

inline constexpr std::size_t kDefaultRejectionTrials = 1'000'000;

/// Draws from the full quadrant until the region of interest accepts.
Vector sample_rejection(const RegionOfInterest& roi, RngStream& rng,
                        std::size_t max_trials = kDefaultRejectionTrials);

enum class SamplingMethod { inverse_cdf, rejection };

/// Rejection wins iff log(partitions) > 1 / int_0^angle sin^(d-2). The d = 3
/// closed form is always preferred.
SamplingMethod choose_method(std::size_t d, double angle, std::size_t partitions = kDefaultPartitions);

struct SamplerOptions {
  std::size_t partitions = kDefaultPartitions;
  std::size_t max_trials = kDefaultRejectionTrials;
};

/// Uniform sampler over a region of interest; picks the cheapest method.
class RoiSampler {
 public:
  explicit RoiSampler(RegionOfInterest roi, SamplerOptions options = {});

  const RegionOfInterest& roi() const { return roi_; }
  SamplingMethod method() const { return method_; }

  Vector operator()(RngStream& rng) const;

  /// `count` samples as columns. Sample j comes from substream j / kChunk of
  /// `rng`, so the result is independent of the thread count.
  Matrix draw(std::size_t count, const RngStream& rng) const;

  static constexpr std::size_t kChunk = 4096;

 private:
  RegionOfInterest roi_;
  SamplerOptions options_;
  SamplingMethod method_ = SamplingMethod::rejection;
  Cap cap_;
  Vector rho_;
  CapCdfTable table_;
  bool use_table_ = false;
};

}  // namespace stablerank
