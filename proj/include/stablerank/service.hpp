#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "stablerank/engine.hpp"

namespace stablerank {

struct ServiceOptions {
  std::string static_dir;     // UI bundle served at /, if set
  std::string snapshot_path;  // sessions are saved here on shutdown, if set
  std::chrono::seconds ttl{3600};
};

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// Parses {"kind": "full"}, {"ray": [...], "angle": x} or
/// {"constraints": ["1,-1<=0", ...]}. Null means the full quadrant.
RegionOfInterest roi_from_json(const nlohmann::json& j, std::size_t dim);
nlohmann::json roi_to_json(const RegionOfInterest& roi);

/// Session store behind the JSON API. `handle` does the routing so it can be
/// driven without a socket.
class Service {
 public:
  explicit Service(ServiceOptions options = {});

  HttpResponse handle(const std::string& method, const std::string& path, const std::string& body,
                      const std::multimap<std::string, std::string>& params = {});

  /// Drops sessions idle for longer than the TTL.
  std::size_t expire_idle(std::chrono::steady_clock::time_point now = std::chrono::steady_clock::now());

  nlohmann::json snapshot() const;
  void restore(const nlohmann::json& snap);

  /// Serves until `stop` is called; writes the snapshot afterwards.
  void run(const std::string& host, int port);
  void stop();

 private:
  struct StoredDataset {
    std::shared_ptr<const Dataset> data;
    std::string csv;
    nlohmann::json schema;
  };

  struct Session {
    std::mutex mutex;
    std::string id;
    std::string dataset_id;
    nlohmann::json request;
    std::unique_ptr<Engine> engine;
    std::vector<nlohmann::json> history;
    bool exhausted = false;
    std::int64_t created = 0;
    std::int64_t last_used = 0;
    std::chrono::steady_clock::time_point touched;
  };

  HttpResponse post_dataset(const std::string& body, const std::multimap<std::string, std::string>& params);
  HttpResponse post_session(const nlohmann::json& req);
  HttpResponse post_next(const std::string& id);
  HttpResponse get_session(const std::string& id);
  HttpResponse delete_session(const std::string& id);
  HttpResponse post_verify(const nlohmann::json& req);

  std::shared_ptr<Session> find_session(const std::string& id);
  std::shared_ptr<Session> open_session(const std::string& id, const nlohmann::json& req);
  std::string add_dataset(const std::string& csv, const nlohmann::json& schema, std::string id = {});

  ServiceOptions options_;
  mutable std::mutex mutex_;
  std::map<std::string, StoredDataset> datasets_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_dataset_ = 1;
  std::uint64_t next_session_ = 1;
  void* server_ = nullptr;  // httplib::Server while running
};

}  // namespace stablerank
