#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "stablerank/exact2d.hpp"
#include "stablerank/exactmd.hpp"
#include "stablerank/randomized.hpp"

namespace stablerank {

enum class EngineKind { exact2d, md, random };

EngineKind parse_engine(std::string_view name);
std::string_view to_string(EngineKind kind);

struct EngineConfig {
  EngineKind engine = EngineKind::exact2d;
  ResultMode mode = ResultMode::full;
  std::size_t k = 0;
  RegionOfInterest roi = RegionOfInterest::full(2);
  std::size_t samples = 100'000;      // md sample store
  std::size_t budget = 10'000;        // random, per call
  std::optional<double> error;        // random: fixed error instead of budget
  double alpha = 0.05;
  std::uint64_t seed = 0;
  bool exact_fallback = false;
  std::size_t sample_cap = kDefaultSampleCap;
};

/// One get-next answer in engine-neutral form.
struct ResultRecord {
  std::size_t index = 0;  // 1-based call number
  double stability = 0.0;
  std::optional<double> confidence_error;  // none for exact 2D
  Vector weights;
  std::vector<std::string> items;  // ranking, or top-k members
  bool topk = false;
  std::optional<AngleInterval> interval;
  std::optional<std::size_t> samples;
};

nlohmann::json to_json(const ResultRecord& r);
std::string csv_header();
std::string to_csv(const ResultRecord& r);
std::string to_table(const ResultRecord& r);

/// A get-next stream over one dataset.
class Engine {
 public:
  virtual ~Engine() = default;
  virtual std::optional<ResultRecord> next() = 0;
  /// Regions known up front (2D only).
  virtual std::optional<std::size_t> region_count() const { return std::nullopt; }
};

/// Throws ValidationError for incompatible engine, mode and dimension.
std::unique_ptr<Engine> make_engine(std::shared_ptr<const Dataset> data, const EngineConfig& config);

struct VerifyReport {
  Ranking ranking;
  bool feasible = false;
  double stability = 0.0;
  std::optional<double> quadrant_stability;  // 2D: width over pi/2
  std::optional<double> confidence_error;
  std::optional<AngleInterval> interval;
  std::vector<HalfSpace> constraints;
  std::optional<InfeasiblePair> violation;
  std::optional<std::size_t> samples;
};

/// Exact in 2D, sampled with `samples` draws otherwise.
VerifyReport verify_ranking(const Dataset& data, const Ranking& ranking, const RegionOfInterest& roi,
                            std::size_t samples = 100'000, std::uint64_t seed = 0, double alpha = 0.05);

nlohmann::json to_json(const Dataset& data, const VerifyReport& report);
std::string describe_violation(const Dataset& data, const InfeasiblePair& pair);

nlohmann::json dataset_summary(const Dataset& data);

}  // namespace stablerank
