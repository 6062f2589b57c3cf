#include "stablerank/engine.hpp"

#include <cstdio>
#include <sstream>

#include "stablerank/csv.hpp"

namespace stablerank {
namespace {

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

class Exact2dEngine final : public Engine {
 public:
  Exact2dEngine(std::shared_ptr<const Dataset> data, const EngineConfig& config)
      : data_(std::move(data)), heap_(ray_sweep(*data_, roi_to_angle_interval_2d(config.roi))) {}

  std::optional<ResultRecord> next() override {
    auto r = get_next_2d(heap_, *data_);
    if (!r) return std::nullopt;
    ResultRecord out;
    out.index = ++calls_;
    out.stability = r->stability;
    out.weights = r->weights;
    out.items = r->ranking.ids(*data_);
    out.interval = r->interval;
    return out;
  }

  std::optional<std::size_t> region_count() const override { return heap_.region_count(); }

 private:
  std::shared_ptr<const Dataset> data_;
  RegionHeap heap_;
  std::size_t calls_ = 0;
};

class MdEngine final : public Engine {
 public:
  MdEngine(std::shared_ptr<const Dataset> data, const EngineConfig& config)
      : data_(std::move(data)),
        state_(make_arrangement(*data_, config.roi, config.samples, RngStream(config.seed),
                                MdOptions{config.alpha, config.exact_fallback})) {}

  std::optional<ResultRecord> next() override {
    auto r = get_next_md(state_, *data_);
    if (!r) return std::nullopt;
    ResultRecord out;
    out.index = ++calls_;
    out.stability = r->estimate.value;
    out.confidence_error = r->estimate.confidence_error;
    out.weights = r->weights;
    out.items = r->ranking.ids(*data_);
    out.samples = r->estimate.samples;
    return out;
  }

 private:
  std::shared_ptr<const Dataset> data_;
  ArrangementState state_;
  std::size_t calls_ = 0;
};

class RandomEngine final : public Engine {
 public:
  RandomEngine(std::shared_ptr<const Dataset> data, const EngineConfig& config)
      : data_(std::move(data)), config_(config),
        state_(*data_, config.roi, config.mode, config.k, config.seed) {}

  std::optional<ResultRecord> next() override {
    std::optional<NextRandom> r;
    if (config_.error) {
      r = get_next_fixed_error(state_, *data_, *config_.error, config_.alpha, config_.sample_cap);
    } else {
      r = get_next_fixed_budget(state_, *data_, config_.budget, config_.alpha);
    }
    if (!r) return std::nullopt;
    ResultRecord out;
    out.index = ++calls_;
    out.stability = r->estimate.value;
    out.confidence_error = r->estimate.confidence_error;
    out.weights = r->weights;
    out.items = key_ids(*data_, r->key);
    out.topk = config_.mode != ResultMode::full;
    out.samples = state_.total();
    return out;
  }

 private:
  std::shared_ptr<const Dataset> data_;
  EngineConfig config_;
  MonteCarloState state_;
  std::size_t calls_ = 0;
};

}  // namespace

EngineKind parse_engine(std::string_view name) {
  if (name == "2d" || name == "exact2d") return EngineKind::exact2d;
  if (name == "md" || name == "exactmd") return EngineKind::md;
  if (name == "random" || name == "randomized") return EngineKind::random;
  throw ValidationError("unknown engine '" + std::string(name) + "' (2d, md, random)");
}

std::string_view to_string(EngineKind kind) {
  switch (kind) {
    case EngineKind::exact2d:
      return "2d";
    case EngineKind::md:
      return "md";
    case EngineKind::random:
      return "random";
  }
  return "2d";
}

nlohmann::json to_json(const ResultRecord& r) {
  nlohmann::json j;
  j["index"] = r.index;
  j["stability"] = r.stability;
  j["confidence_error"] = r.confidence_error ? nlohmann::json(*r.confidence_error) : nlohmann::json(nullptr);
  j["weights"] = to_std(r.weights);
  j[r.topk ? "topk" : "ranking"] = r.items;
  if (r.interval) j["region"] = {{"lo", r.interval->lo}, {"hi", r.interval->hi}};
  if (r.samples) j["samples"] = *r.samples;
  return j;
}

std::string csv_header() { return "index,stability,confidence_error,weights,items,lo,hi"; }

std::string to_csv(const ResultRecord& r) {
  std::vector<std::string> w;
  for (Eigen::Index i = 0; i < r.weights.size(); ++i) w.push_back(num(r.weights(i)));
  std::ostringstream out;
  out << r.index << ',' << num(r.stability) << ',' << (r.confidence_error ? num(*r.confidence_error) : "") << ','
      << csv::quote(join(w, ' ')) << ',' << csv::quote(join(r.items, ' ')) << ','
      << (r.interval ? num(r.interval->lo) : "") << ',' << (r.interval ? num(r.interval->hi) : "");
  return out.str();
}

std::string to_table(const ResultRecord& r) {
  char head[96];
  std::snprintf(head, sizeof head, "%4zu  %10.6f  ", r.index, r.stability);
  std::string out = head;
  if (r.confidence_error) {
    char e[32];
    std::snprintf(e, sizeof e, "+-%-9.6f  ", *r.confidence_error);
    out += e;
  }
  if (r.interval) {
    char iv[64];
    std::snprintf(iv, sizeof iv, "[%.6f, %.6f)  ", r.interval->lo, r.interval->hi);
    out += iv;
  }
  out += (r.topk ? "{" : "<") + join(r.items, ',') + (r.topk ? "}" : ">");
  return out;
}

std::unique_ptr<Engine> make_engine(std::shared_ptr<const Dataset> data, const EngineConfig& config) {
  if (!data) throw ValidationError("no dataset");
  if (config.roi.dim() != data->dim()) throw DimensionError("region of interest and dataset differ in d");
  if (config.engine != EngineKind::random && config.mode != ResultMode::full) {
    throw ValidationError("exact engines rank whole orders; top-k modes need the random engine");
  }
  switch (config.engine) {
    case EngineKind::exact2d:
      if (data->dim() != 2) throw ValidationError("the 2d engine needs d = 2");
      return std::make_unique<Exact2dEngine>(std::move(data), config);
    case EngineKind::md:
      if (config.samples < 1) throw ValidationError("samples must be at least 1");
      return std::make_unique<MdEngine>(std::move(data), config);
    case EngineKind::random:
      if (config.error && !(*config.error > 0.0)) throw ValidationError("error target must be positive");
      if (!config.error && config.budget < 1) throw ValidationError("budget must be at least 1");
      return std::make_unique<RandomEngine>(std::move(data), config);
  }
  throw ValidationError("unknown engine");
}

VerifyReport verify_ranking(const Dataset& data, const Ranking& ranking, const RegionOfInterest& roi,
                            std::size_t samples, std::uint64_t seed, double alpha) {
  if (roi.dim() != data.dim()) throw DimensionError("region of interest and dataset differ in d");
  VerifyReport out;
  out.ranking = ranking;
  if (data.dim() == 2) {
    auto v = verify_2d(data, ranking, roi_to_angle_interval_2d(roi));
    out.feasible = v.feasible();
    out.violation = v.violation;
    if (v.region) {
      out.stability = v.region->stability;
      out.quadrant_stability = v.region->quadrant_stability;
      out.interval = v.region->interval;
    }
    return out;
  }
  SampleStore store = SampleStore::draw(roi, samples, RngStream(seed));
  auto v = verify_md(data, ranking, roi, store, alpha);
  out.feasible = v.feasible();
  out.violation = v.violation;
  out.samples = samples;
  if (v.region) {
    out.stability = v.region->estimate.value;
    out.confidence_error = v.region->estimate.confidence_error;
    out.constraints = std::move(v.region->constraints);
  }
  return out;
}

std::string describe_violation(const Dataset& data, const InfeasiblePair& pair) {
  const std::string& up = data.id(pair.upper);
  const std::string& down = data.id(pair.lower);
  if (identical(data.item(pair.upper), data.item(pair.lower))) {
    return up + " and " + down + " are identical, so " + down + " (smaller id) must come first";
  }
  if (dominates(data.item(pair.lower), data.item(pair.upper))) {
    return down + " dominates " + up + " but is ranked below it";
  }
  return "no weight vector ranks " + up + " above " + down + " together with the rest of the order";
}

nlohmann::json to_json(const Dataset& data, const VerifyReport& report) {
  nlohmann::json j;
  j["feasible"] = report.feasible;
  j["ranking"] = report.ranking.ids(data);
  if (!report.feasible) {
    j["stability"] = 0.0;
    j["error"] = report.violation ? describe_violation(data, *report.violation)
                                  : "the adjacent-pair constraints leave no weight vector inside the region";
    if (report.violation) {
      j["violation"] = {{"upper", data.id(report.violation->upper)}, {"lower", data.id(report.violation->lower)}};
    }
    return j;
  }
  j["stability"] = report.stability;
  j["confidence_error"] = report.confidence_error ? nlohmann::json(*report.confidence_error) : nlohmann::json(nullptr);
  if (report.quadrant_stability) j["quadrant_stability"] = *report.quadrant_stability;
  if (report.interval) {
    j["region"] = {{"lo", report.interval->lo}, {"hi", report.interval->hi}};
  } else {
    nlohmann::json cs = nlohmann::json::array();
    for (const auto& c : report.constraints) {
      cs.push_back({{"coeffs", to_std(c.normal())}, {"above", data.id(c.plane.first)},
                    {"below", data.id(c.plane.second)}});
    }
    j["region"] = {{"half_spaces", cs}};
  }
  if (report.samples) j["samples"] = *report.samples;
  return j;
}

nlohmann::json dataset_summary(const Dataset& data) {
  nlohmann::json meta = nlohmann::json::array();
  for (const auto& m : data.meta()) {
    meta.push_back({{"name", m.name},
                    {"direction", m.direction == Direction::higher_preferred ? "higher" : "lower"},
                    {"raw_min", m.raw_min},
                    {"raw_max", m.raw_max}});
  }
  return {{"n", data.size()}, {"d", data.dim()}, {"attr_meta", meta}};
}

}  // namespace stablerank
