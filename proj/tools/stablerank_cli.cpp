// Command-line front end for the stable-rankings engines.
//
// Exit status: 0 success, 1 usage or input error, 2 infeasible ranking.

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "stablerank/csv.hpp"
#include "stablerank/engine.hpp"
#include "stablerank/service.hpp"

namespace sr = stablerank;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;

struct DataFlags {
  std::string path;
  std::string id_col = "id";
  std::vector<std::string> attrs;
  bool raw = false;
};

struct RoiFlags {
  std::vector<double> ray;
  double angle = 0.0;
  std::vector<std::string> constraints;
  std::vector<double> interval;
};

enum class Format { json_lines, csv, table };

void add_data_flags(CLI::App* cmd, DataFlags& f) {
  cmd->add_option("--data", f.path, "CSV file with a header row")->required()->check(CLI::ExistingFile);
  cmd->add_option("--id-col", f.id_col, "id column")->capture_default_str();
  cmd->add_flag("--raw", f.raw, "values are already in [0, 1]; skip min-max normalization");
  cmd->add_option("--attr", f.attrs, "scoring attribute NAME:higher|lower or NAME=log(COL):higher; repeatable");
}

void add_roi_flags(CLI::App* cmd, RoiFlags& f) {
  auto* ray = cmd->add_option("--roi-ray", f.ray, "reference weights of a cone region")->delimiter(',');
  auto* angle = cmd->add_option("--roi-angle", f.angle, "cone half-angle in radians");
  auto* cons = cmd->add_option("--roi-constraint", f.constraints, "homogeneous constraint like 1,-1<=0; repeatable");
  auto* interval = cmd->add_option("--roi-interval", f.interval, "2D angle interval LO,HI")->delimiter(',');
  ray->needs(angle);
  angle->needs(ray);
  ray->excludes(cons)->excludes(interval);
  cons->excludes(interval);
}

void add_format_flag(CLI::App* cmd, Format& f) {
  cmd->add_option("--format", f, "json-lines | csv | table")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, Format>{{"json-lines", Format::json_lines}, {"csv", Format::csv}, {"table", Format::table}}));
}

sr::Dataset load(const DataFlags& f) {
  sr::Schema schema;
  schema.id_column = f.id_col;
  schema.normalize = !f.raw;
  if (f.attrs.empty()) {
    std::ifstream in(f.path, std::ios::binary);
    std::vector<std::string> header;
    if (!sr::csv::read_record(in, header)) throw sr::ParseError(0, "empty input, expected a header row");
    for (const auto& h : header) {
      if (h != f.id_col) schema.attributes.push_back(sr::AttributeSpec::parse(h + ":higher"));
    }
  } else {
    for (const auto& a : f.attrs) schema.attributes.push_back(sr::AttributeSpec::parse(a));
  }
  return sr::load_dataset_file(f.path, schema);
}

sr::RegionOfInterest make_roi(const RoiFlags& f, std::size_t d) {
  if (!f.ray.empty()) {
    sr::Vector ray = Eigen::Map<const sr::Vector>(f.ray.data(), static_cast<Eigen::Index>(f.ray.size()));
    if (f.ray.size() != d) throw sr::DimensionError("--roi-ray needs " + std::to_string(d) + " weights");
    return sr::RegionOfInterest::cone(ray, f.angle);
  }
  if (!f.constraints.empty()) {
    std::vector<sr::HomogeneousConstraint> cs;
    for (const auto& c : f.constraints) cs.push_back(sr::HomogeneousConstraint::parse(c));
    auto roi = sr::RegionOfInterest::constraints(std::move(cs));
    if (roi.dim() != d) throw sr::DimensionError("--roi-constraint needs " + std::to_string(d) + " coefficients");
    return roi;
  }
  if (!f.interval.empty()) {
    if (d != 2) throw sr::DimensionError("--roi-interval is for d = 2");
    if (f.interval.size() != 2) throw sr::ValidationError("--roi-interval takes LO,HI");
    const double lo = f.interval[0];
    const double hi = f.interval[1];
    if (!(lo >= 0.0 && hi <= sr::kHalfPi && lo < hi)) throw sr::ValidationError("--roi-interval needs 0 <= LO < HI <= pi/2");
    // angle >= lo and angle <= hi as half-planes through the origin.
    sr::HomogeneousConstraint above{sr::Vector(2), sr::HomogeneousConstraint::Relation::ge};
    above.coeffs << -std::sin(lo), std::cos(lo);
    sr::HomogeneousConstraint below{sr::Vector(2), sr::HomogeneousConstraint::Relation::ge};
    below.coeffs << std::sin(hi), -std::cos(hi);
    return sr::RegionOfInterest::constraints({above, below});
  }
  return sr::RegionOfInterest::full(d);
}

sr::Vector weights_from(const std::vector<double>& w) {
  return Eigen::Map<const sr::Vector>(w.data(), static_cast<Eigen::Index>(w.size()));
}

std::vector<std::string> read_ranking_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw sr::Error("cannot open '" + path + "'");
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream parts(line);
    std::string id;
    while (std::getline(parts, id, ',')) {
      id.erase(0, id.find_first_not_of(" \t\r"));
      id.erase(id.find_last_not_of(" \t\r") + 1);
      if (!id.empty()) ids.push_back(id);
    }
  }
  return ids;
}

void print_record(const sr::ResultRecord& r, Format format) {
  switch (format) {
    case Format::json_lines:
      std::cout << sr::to_json(r).dump() << '\n';
      break;
    case Format::csv:
      std::cout << sr::to_csv(r) << '\n';
      break;
    case Format::table:
      std::cout << sr::to_table(r) << '\n';
      break;
  }
}

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int) { g_interrupted = true; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stable rankings under linear scoring.\n"
               "Exit status: 0 success, 1 usage or input error, 2 infeasible ranking.\n"
               "STABLE_RANK_THREADS caps internal parallelism."};
  app.require_subcommand(1);

  // generate
  std::size_t gen_n = 1000;
  std::size_t gen_d = 2;
  std::string gen_dist = "independent";
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  auto* generate = app.add_subcommand("generate", "write a synthetic dataset as CSV");
  generate->add_option("--n", gen_n, "items")->capture_default_str();
  generate->add_option("--d", gen_d, "attributes")->capture_default_str();
  generate->add_option("--dist", gen_dist, "independent | correlated | anti-correlated")->capture_default_str();
  generate->add_option("--seed", gen_seed, "random seed")->capture_default_str();
  generate->add_option("--out", gen_out, "output file (default stdout)");

  // verify
  DataFlags verify_data;
  RoiFlags verify_roi;
  std::vector<double> verify_weights;
  std::vector<std::string> verify_ranking;
  std::string verify_ranking_file;
  std::size_t verify_samples = 100'000;
  std::uint64_t verify_seed = 0;
  double verify_alpha = 0.05;
  Format verify_format = Format::json_lines;
  auto* verify = app.add_subcommand("verify", "stability of one ranking");
  add_data_flags(verify, verify_data);
  add_roi_flags(verify, verify_roi);
  auto* vw = verify->add_option("--weights", verify_weights, "rank by these weights")->delimiter(',');
  auto* vr = verify->add_option("--ranking", verify_ranking, "ids, best first")->delimiter(',');
  auto* vf = verify->add_option("--ranking-file", verify_ranking_file, "file of ids, best first")
                 ->check(CLI::ExistingFile);
  vw->excludes(vr)->excludes(vf);
  vr->excludes(vf);
  verify->add_option("--samples", verify_samples, "samples for d > 2")->capture_default_str();
  verify->add_option("--seed", verify_seed, "random seed")->capture_default_str();
  verify->add_option("--alpha", verify_alpha, "1 - confidence level")->capture_default_str();
  add_format_flag(verify, verify_format);

  // enumerate2d
  DataFlags enum_data;
  RoiFlags enum_roi;
  std::size_t enum_limit = 0;
  Format enum_format = Format::table;
  auto* enumerate = app.add_subcommand("enumerate2d", "every 2D ranking region, most stable first");
  add_data_flags(enumerate, enum_data);
  add_roi_flags(enumerate, enum_roi);
  enumerate->add_option("--limit", enum_limit, "stop after this many regions (0 = all)");
  add_format_flag(enumerate, enum_format);

  // get-next
  DataFlags next_data;
  RoiFlags next_roi;
  std::string next_engine = "2d";
  std::string next_mode = "full";
  std::size_t next_k = 0;
  std::size_t next_count = 10;
  double next_min_stability = 0.0;
  std::optional<std::size_t> next_budget;
  std::optional<double> next_error;
  double next_alpha = 0.05;
  std::uint64_t next_seed = 0;
  std::size_t next_samples = 100'000;
  bool next_fallback = false;
  Format next_format = Format::json_lines;
  auto* get_next = app.add_subcommand("get-next", "stream the next most stable rankings");
  add_data_flags(get_next, next_data);
  add_roi_flags(get_next, next_roi);
  get_next->add_option("--engine", next_engine, "2d | md | random")->capture_default_str();
  get_next->add_option("--mode", next_mode, "full | topk-set | topk-ranked")->capture_default_str();
  get_next->add_option("--k", next_k, "k for top-k modes");
  get_next->add_option("--count", next_count, "results to emit")->capture_default_str();
  get_next->add_option("--min-stability", next_min_stability, "stop below this stability");
  auto* budget = get_next->add_option("--budget", next_budget, "random engine: samples per call");
  auto* error = get_next->add_option("--error", next_error, "random engine: confidence error target");
  budget->excludes(error);
  get_next->add_option("--alpha", next_alpha, "1 - confidence level")->capture_default_str();
  get_next->add_option("--seed", next_seed, "random seed")->capture_default_str();
  get_next->add_option("--samples", next_samples, "md engine: sample store size")->capture_default_str();
  get_next->add_flag("--exact-fallback", next_fallback, "md engine: exact crossing checks for one-sided samples");
  add_format_flag(get_next, next_format);

  // sample
  std::size_t sample_d = 0;
  std::size_t sample_count = 1000;
  std::uint64_t sample_seed = 0;
  RoiFlags sample_roi;
  auto* sample = app.add_subcommand("sample", "uniform weight vectors from a region, as CSV");
  sample->add_option("--d", sample_d, "dimension")->required();
  sample->add_option("--count", sample_count, "samples")->capture_default_str();
  sample->add_option("--seed", sample_seed, "random seed")->capture_default_str();
  add_roi_flags(sample, sample_roi);

  // serve
  std::string serve_host = "127.0.0.1";
  int serve_port = 8080;
  if (const char* env = std::getenv("STABLE_RANK_PORT")) serve_port = std::atoi(env);
  std::string serve_static;
  std::string serve_snapshot;
  long serve_ttl = 3600;
  auto* serve = app.add_subcommand("serve", "HTTP/JSON session API");
  serve->add_option("--host", serve_host)->capture_default_str();
  serve->add_option("--port", serve_port, "port (or STABLE_RANK_PORT)")->capture_default_str();
  serve->add_option("--static", serve_static, "directory served at /");
  serve->add_option("--snapshot", serve_snapshot, "session snapshot file, loaded at start and written at exit");
  serve->add_option("--ttl", serve_ttl, "idle session lifetime in seconds")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*generate) {
      auto data = sr::generate_synthetic(gen_n, gen_d, sr::parse_distribution(gen_dist), gen_seed);
      std::cerr << "# seed " << gen_seed << '\n';
      if (gen_out.empty()) {
        sr::write_csv(std::cout, data);
      } else {
        std::ofstream out(gen_out);
        if (!out) throw sr::Error("cannot write '" + gen_out + "'");
        sr::write_csv(out, data);
      }
      return kExitOk;
    }

    if (*verify) {
      const sr::Dataset data = load(verify_data);
      const auto roi = make_roi(verify_roi, data.dim());
      sr::Ranking ranking;
      if (!verify_weights.empty()) {
        ranking = sr::rank(data, weights_from(verify_weights));
      } else if (!verify_ranking.empty()) {
        ranking = sr::Ranking::from_ids(data, verify_ranking);
      } else if (!verify_ranking_file.empty()) {
        ranking = sr::Ranking::from_ids(data, read_ranking_file(verify_ranking_file));
      } else {
        throw CLI::ValidationError("verify needs --weights, --ranking or --ranking-file");
      }
      if (data.dim() > 2) std::cerr << "# seed " << verify_seed << '\n';
      const auto report = sr::verify_ranking(data, ranking, roi, verify_samples, verify_seed, verify_alpha);
      const auto j = sr::to_json(data, report);
      if (!report.feasible) {
        std::cerr << "infeasible: " << j["error"].get<std::string>() << '\n';
        if (verify_format == Format::json_lines) std::cout << j.dump() << '\n';
        return kExitInfeasible;
      }
      sr::ResultRecord r;
      r.index = 1;
      r.stability = report.stability;
      r.confidence_error = report.confidence_error;
      r.items = ranking.ids(data);
      r.interval = report.interval;
      if (verify_format == Format::json_lines) {
        std::cout << j.dump() << '\n';
      } else if (verify_format == Format::csv) {
        std::cout << sr::csv_header() << '\n' << sr::to_csv(r) << '\n';
      } else {
        std::cout << sr::to_table(r) << '\n';
        for (const auto& c : report.constraints) {
          std::cout << "  " << data.id(c.plane.first) << " > " << data.id(c.plane.second) << " on  "
                    << c.normal().transpose() << " . w > 0\n";
        }
      }
      return kExitOk;
    }

    if (*enumerate) {
      auto data = std::make_shared<const sr::Dataset>(load(enum_data));
      sr::EngineConfig config;
      config.roi = make_roi(enum_roi, data->dim());
      auto engine = sr::make_engine(data, config);
      if (enum_format == Format::csv) std::cout << sr::csv_header() << '\n';
      for (std::size_t i = 0; enum_limit == 0 || i < enum_limit; ++i) {
        auto r = engine->next();
        if (!r) break;
        print_record(*r, enum_format);
      }
      return kExitOk;
    }

    if (*get_next) {
      auto data = std::make_shared<const sr::Dataset>(load(next_data));
      sr::EngineConfig config;
      config.engine = sr::parse_engine(next_engine);
      config.mode = sr::parse_result_mode(next_mode);
      config.k = next_k;
      config.roi = make_roi(next_roi, data->dim());
      config.samples = next_samples;
      if (next_budget) config.budget = *next_budget;
      config.error = next_error;
      config.alpha = next_alpha;
      config.seed = next_seed;
      config.exact_fallback = next_fallback;
      if ((next_budget || next_error) && config.engine != sr::EngineKind::random) {
        throw CLI::ValidationError("--budget and --error apply to the random engine");
      }
      if (config.engine != sr::EngineKind::exact2d) std::cerr << "# seed " << next_seed << '\n';
      auto engine = sr::make_engine(data, config);
      if (next_format == Format::csv) std::cout << sr::csv_header() << '\n';
      for (std::size_t i = 0; i < next_count; ++i) {
        auto r = engine->next();
        if (!r || r->stability < next_min_stability) break;
        print_record(*r, next_format);
      }
      return kExitOk;
    }

    if (*sample) {
      const auto roi = make_roi(sample_roi, sample_d);
      std::cerr << "# seed " << sample_seed << '\n';
      const sr::Matrix w = sr::RoiSampler(roi).draw(sample_count, sr::RngStream(sample_seed));
      std::ostringstream header;
      for (std::size_t j = 0; j < sample_d; ++j) header << (j ? "," : "") << 'w' << j + 1;
      std::cout << header.str() << '\n';
      const Eigen::IOFormat row(Eigen::FullPrecision, Eigen::DontAlignCols, ",", ",");
      for (Eigen::Index c = 0; c < w.cols(); ++c) std::cout << w.col(c).transpose().format(row) << '\n';
      return kExitOk;
    }

    if (*serve) {
      sr::ServiceOptions options;
      options.static_dir = serve_static;
      options.snapshot_path = serve_snapshot;
      options.ttl = std::chrono::seconds(serve_ttl);
      sr::Service service(options);
      if (!serve_snapshot.empty()) {
        std::ifstream in(serve_snapshot);
        if (in) service.restore(nlohmann::json::parse(in));
      }
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::jthread watcher([&](std::stop_token stop) {
        while (!stop.stop_requested() && !g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
        service.stop();
      });
      std::cerr << "listening on " << serve_host << ':' << serve_port << '\n';
      service.run(serve_host, serve_port);
      watcher.request_stop();
      return kExitOk;
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitOk;
}
