#include "stablerank/service.hpp"

#include <fstream>
#include <regex>
#include <sstream>

#include <httplib.h>

#include "stablerank/csv.hpp"

namespace stablerank {
namespace {

using nlohmann::json;

struct HttpError : Error {
  HttpError(int status, const std::string& what) : Error(what), status(status) {}
  int status;
};

HttpResponse reply(int status, const json& body) { return {status, body.dump(), "application/json"}; }
HttpResponse error_reply(int status, const std::string& message) { return reply(status, {{"error", message}}); }

std::int64_t unix_now() {
  return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

Vector vector_from_json(const json& j) {
  if (!j.is_array()) throw HttpError(400, "expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

Schema schema_from_json(const json& s, const std::string& csv_text) {
  Schema schema;
  schema.id_column = s.value("id_col", std::string("id"));
  schema.normalize = s.value("normalize", true);
  if (s.contains("attrs") && !s["attrs"].empty()) {
    for (const auto& a : s["attrs"]) schema.attributes.push_back(AttributeSpec::parse(a.get<std::string>()));
    return schema;
  }
  // Without attribute specs every non-id column scores, higher preferred.
  std::istringstream in(csv_text);
  std::vector<std::string> header;
  if (!csv::read_record(in, header)) throw ParseError(0, "empty input, expected a header row");
  for (const auto& h : header) {
    if (h != schema.id_column) schema.attributes.push_back(AttributeSpec::parse(h + ":higher"));
  }
  return schema;
}

EngineConfig config_from_json(const json& req, const Dataset& data) {
  EngineConfig c;
  c.roi = roi_from_json(req.value("roi", json()), data.dim());
  c.engine = parse_engine(req.value("engine", std::string(data.dim() == 2 ? "2d" : "md")));
  c.mode = parse_result_mode(req.value("mode", std::string("full")));
  c.k = req.value("k", std::size_t{0});
  const json p = req.value("params", json::object());
  c.samples = p.value("samples", c.samples);
  c.budget = p.value("budget", c.budget);
  if (p.contains("error") && !p["error"].is_null()) c.error = p["error"].get<double>();
  c.alpha = p.value("alpha", c.alpha);
  c.seed = p.value("seed", c.seed);
  c.exact_fallback = p.value("exact_fallback", c.exact_fallback);
  c.sample_cap = p.value("sample_cap", c.sample_cap);
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
  return c;
}

}  // namespace

RegionOfInterest roi_from_json(const json& j, std::size_t dim) {
  if (j.is_null()) return RegionOfInterest::full(dim);
  if (!j.is_object()) throw HttpError(400, "roi must be an object");
  RegionOfInterest roi = RegionOfInterest::full(dim);
  const std::string kind =
      j.value("kind", std::string(j.contains("ray") ? "cone" : j.contains("constraints") ? "constraints" : "full"));
  if (kind == "cone") {
    roi = RegionOfInterest::cone(vector_from_json(j.at("ray")), j.at("angle").get<double>());
  } else if (kind == "constraints") {
    std::vector<HomogeneousConstraint> cs;
    for (const auto& c : j.at("constraints")) cs.push_back(HomogeneousConstraint::parse(c.get<std::string>()));
    roi = RegionOfInterest::constraints(std::move(cs));
  } else if (kind != "full") {
    throw HttpError(400, "unknown roi kind '" + kind + "'");
  }
  if (roi.dim() != dim) throw DimensionError("roi has d = " + std::to_string(roi.dim()) + ", dataset has " +
                                             std::to_string(dim));
  return roi;
}

json roi_to_json(const RegionOfInterest& roi) {
  switch (roi.kind()) {
    case RegionOfInterest::Kind::full:
      return {{"kind", "full"}};
    case RegionOfInterest::Kind::cone:
      return {{"kind", "cone"},
              {"ray", std::vector<double>(roi.ray().data(), roi.ray().data() + roi.ray().size())},
              {"angle", roi.max_angle()}};
    case RegionOfInterest::Kind::constraints: {
      json cs = json::array();
      for (const auto& c : roi.constraint_list()) {
        std::string text;
        for (Eigen::Index i = 0; i < c.coeffs.size(); ++i) text += (i ? "," : "") + json(c.coeffs(i)).dump();
        static constexpr const char* ops[] = {"<=", "<", ">=", ">"};
        text += ops[static_cast<int>(c.relation)];
        text += "0";
        cs.push_back(text);
      }
      return {{"kind", "constraints"}, {"constraints", cs}};
    }
  }
  return {{"kind", "full"}};
}

Service::Service(ServiceOptions options) : options_(std::move(options)) {}

HttpResponse Service::handle(const std::string& method, const std::string& path, const std::string& body,
                             const std::multimap<std::string, std::string>& params) {
  static const std::regex session_re(R"(^/api/sessions/([A-Za-z0-9_-]+)$)");
  static const std::regex next_re(R"(^/api/sessions/([A-Za-z0-9_-]+)/next$)");
  expire_idle();
  try {
    auto parse_body = [&] {
      if (body.empty()) return json::object();
      json j = json::parse(body);
      if (!j.is_object()) throw HttpError(400, "request body must be a JSON object");
      return j;
    };
    std::smatch m;
    if (method == "POST" && path == "/api/datasets") return post_dataset(body, params);
    if (method == "POST" && path == "/api/sessions") return post_session(parse_body());
    if (method == "POST" && path == "/api/verify") return post_verify(parse_body());
    if (method == "POST" && std::regex_match(path, m, next_re)) return post_next(m[1]);
    if (method == "GET" && std::regex_match(path, m, session_re)) return get_session(m[1]);
    if (method == "DELETE" && std::regex_match(path, m, session_re)) return delete_session(m[1]);
    return error_reply(404, "no route for " + method + " " + path);
  } catch (const HttpError& e) {
    return error_reply(e.status, e.what());
  } catch (const json::exception& e) {
    return error_reply(400, std::string("bad JSON: ") + e.what());
  } catch (const ParseError& e) {
    return reply(400, {{"error", e.what()}, {"row", e.row()}});
  } catch (const BudgetExceeded& e) {
    return error_reply(422, e.what());
  } catch (const Error& e) {
    return error_reply(400, e.what());
  }
}

std::string Service::add_dataset(const std::string& csv_text, const json& schema_json, std::string id) {
  std::istringstream in(csv_text);
  auto data = std::make_shared<const Dataset>(load_dataset(in, schema_from_json(schema_json, csv_text)));
  std::lock_guard lock(mutex_);
  if (id.empty()) id = "d" + std::to_string(next_dataset_++);
  datasets_[id] = {std::move(data), csv_text, schema_json};
  return id;
}

HttpResponse Service::post_dataset(const std::string& body, const std::multimap<std::string, std::string>& params) {
  json schema = json::object();
  json attrs = json::array();
  for (const auto& [key, value] : params) {
    if (key == "id_col" || key == "id-col") schema["id_col"] = value;
    if (key == "attr") attrs.push_back(value);
    if (key == "normalize") schema["normalize"] = value != "false" && value != "0";
  }
  schema["attrs"] = attrs;
  const std::string id = add_dataset(body, schema);
  std::lock_guard lock(mutex_);
  json out = dataset_summary(*datasets_.at(id).data);
  out["dataset_id"] = id;
  return reply(201, out);
}

std::shared_ptr<Service::Session> Service::open_session(const std::string& id, const json& req) {
  const std::string dataset_id = req.at("dataset_id").get<std::string>();
  std::shared_ptr<const Dataset> data;
  {
    std::lock_guard lock(mutex_);
    auto it = datasets_.find(dataset_id);
    if (it == datasets_.end()) throw HttpError(404, "unknown dataset '" + dataset_id + "'");
    data = it->second.data;
  }
  EngineConfig config;
  try {
    config = config_from_json(req, *data);
  } catch (const ValidationError& e) {
    throw HttpError(422, e.what());
  }
  auto session = std::make_shared<Session>();
  session->id = id;
  session->dataset_id = dataset_id;
  session->request = req;
  try {
    session->engine = make_engine(data, config);
  } catch (const ValidationError& e) {
    throw HttpError(422, e.what());
  } catch (const DimensionError& e) {
    throw HttpError(422, e.what());
  }
  session->created = session->last_used = unix_now();
  session->touched = std::chrono::steady_clock::now();
  return session;
}

HttpResponse Service::post_session(const json& req) {
  std::string id;
  {
    std::lock_guard lock(mutex_);
    id = "s" + std::to_string(next_session_++);
  }
  auto session = open_session(id, req);
  json out{{"session_id", id}};
  if (auto count = session->engine->region_count()) out["region_count"] = *count;
  std::lock_guard lock(mutex_);
  sessions_[id] = std::move(session);
  return reply(201, out);
}

std::shared_ptr<Service::Session> Service::find_session(const std::string& id) {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw HttpError(404, "unknown session '" + id + "'");
  return it->second;
}

HttpResponse Service::post_next(const std::string& id) {
  auto session = find_session(id);
  std::lock_guard lock(session->mutex);
  session->last_used = unix_now();
  session->touched = std::chrono::steady_clock::now();
  if (session->exhausted) return {204, "", "application/json"};
  auto record = session->engine->next();
  if (!record) {
    session->exhausted = true;
    return {204, "", "application/json"};
  }
  json out = to_json(*record);
  session->history.push_back(out);
  return reply(200, out);
}

HttpResponse Service::get_session(const std::string& id) {
  auto session = find_session(id);
  std::lock_guard lock(session->mutex);
  session->last_used = unix_now();
  session->touched = std::chrono::steady_clock::now();
  json out{{"session_id", session->id},      {"dataset_id", session->dataset_id},
           {"request", session->request},    {"history", session->history},
           {"exhausted", session->exhausted}, {"created", session->created},
           {"last_used", session->last_used}};
  if (auto count = session->engine->region_count()) out["region_count"] = *count;
  return reply(200, out);
}

HttpResponse Service::delete_session(const std::string& id) {
  std::lock_guard lock(mutex_);
  if (sessions_.erase(id) == 0) return error_reply(404, "unknown session '" + id + "'");
  return {204, "", "application/json"};
}

HttpResponse Service::post_verify(const json& req) {
  const std::string dataset_id = req.at("dataset_id").get<std::string>();
  std::shared_ptr<const Dataset> data;
  {
    std::lock_guard lock(mutex_);
    auto it = datasets_.find(dataset_id);
    if (it == datasets_.end()) throw HttpError(404, "unknown dataset '" + dataset_id + "'");
    data = it->second.data;
  }
  const RegionOfInterest roi = roi_from_json(req.value("roi", json()), data->dim());
  Ranking ranking;
  if (req.contains("ranking")) {
    ranking = Ranking::from_ids(*data, req["ranking"].get<std::vector<std::string>>());
  } else if (req.contains("weights")) {
    ranking = rank(*data, vector_from_json(req["weights"]));
  } else {
    throw HttpError(400, "verify needs 'ranking' or 'weights'");
  }
  VerifyReport report = verify_ranking(*data, ranking, roi, req.value("samples", std::size_t{100'000}),
                                       req.value("seed", std::uint64_t{0}), req.value("alpha", 0.05));
  return reply(report.feasible ? 200 : 422, to_json(*data, report));
}

std::size_t Service::expire_idle(std::chrono::steady_clock::time_point now) {
  std::lock_guard lock(mutex_);
  return std::erase_if(sessions_, [&](const auto& entry) { return now - entry.second->touched > options_.ttl; });
}

json Service::snapshot() const {
  std::lock_guard lock(mutex_);
  json ds = json::array();
  for (const auto& [id, d] : datasets_) ds.push_back({{"id", id}, {"csv", d.csv}, {"schema", d.schema}});
  json ss = json::array();
  for (const auto& [id, s] : sessions_) {
    std::lock_guard session_lock(s->mutex);
    ss.push_back({{"id", id},
                  {"request", s->request},
                  {"calls", s->history.size()},
                  {"created", s->created},
                  {"last_used", s->last_used}});
  }
  return {{"datasets", ds}, {"sessions", ss}, {"next_dataset", next_dataset_}, {"next_session", next_session_}};
}

void Service::restore(const json& snap) {
  for (const auto& d : snap.at("datasets")) {
    add_dataset(d.at("csv").get<std::string>(), d.at("schema"), d.at("id").get<std::string>());
  }
  // Engines are deterministic, so replaying the calls rebuilds each state.
  for (const auto& s : snap.at("sessions")) {
    auto session = open_session(s.at("id").get<std::string>(), s.at("request"));
    const auto calls = s.at("calls").get<std::size_t>();
    for (std::size_t i = 0; i < calls; ++i) {
      auto record = session->engine->next();
      if (!record) break;
      session->history.push_back(to_json(*record));
    }
    session->created = s.value("created", session->created);
    session->last_used = s.value("last_used", session->last_used);
    std::lock_guard lock(mutex_);
    sessions_[session->id] = std::move(session);
  }
  std::lock_guard lock(mutex_);
  next_dataset_ = std::max(next_dataset_, snap.value("next_dataset", next_dataset_));
  next_session_ = std::max(next_session_, snap.value("next_session", next_session_));
}

void Service::run(const std::string& host, int port) {
  httplib::Server server;
  auto forward = [this](const httplib::Request& req, httplib::Response& res) {
    std::multimap<std::string, std::string> params(req.params.begin(), req.params.end());
    HttpResponse out = handle(req.method, req.path, req.body, params);
    res.status = out.status;
    if (!out.body.empty()) res.set_content(out.body, out.content_type);
  };
  server.Post(R"(/api/.*)", forward);
  server.Get(R"(/api/.*)", forward);
  server.Delete(R"(/api/.*)", forward);
  if (!options_.static_dir.empty() && !server.set_mount_point("/", options_.static_dir)) {
    throw Error("static directory '" + options_.static_dir + "' does not exist");
  }
  {
    std::lock_guard lock(mutex_);
    server_ = &server;
  }
  const bool ok = server.listen(host, port);
  {
    std::lock_guard lock(mutex_);
    server_ = nullptr;
  }
  if (!options_.snapshot_path.empty()) {
    std::ofstream out(options_.snapshot_path);
    out << snapshot().dump(2) << '\n';
  }
  if (!ok) throw Error("cannot listen on " + host + ":" + std::to_string(port));
}

void Service::stop() {
  std::lock_guard lock(mutex_);
  if (server_) static_cast<httplib::Server*>(server_)->stop();
}

}  // namespace stablerank
