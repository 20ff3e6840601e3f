#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>

#include <json.hpp>

#include "rideprobe/config.hpp"
#include "rideprobe/store.hpp"

namespace rideprobe {

inline constexpr const char* kSchemaHeader = "X-Probe-Schema";

struct HttpRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// Read-only API over a store and its probe directory. State is fixed at
/// construction; handle() is const and safe to call concurrently.
///
///   GET  /api/meta
///   GET  /api/probes/{hourly|calendar|map|planner_defaults}
///   GET  /api/probes/animation[?date=YYYY-MM-DD]
///   POST /api/planner/simulate
class ProbeService {
 public:
  ProbeService(const AppConfig& config, Store store, const std::filesystem::path& probe_dir);

  HttpResponse handle(const HttpRequest& request) const;
  const Store& store() const noexcept { return store_; }

 private:
  HttpResponse simulate(const std::string& body) const;
  HttpResponse animation(const std::map<std::string, std::string>& query) const;

  AppConfig config_;
  Store store_;
  std::map<std::string, std::string> probe_files_;  // probe name -> file text
  nlohmann::json meta_;
};

/// cpp-httplib front end for a ProbeService.
class HttpServer {
 public:
  explicit HttpServer(const ProbeService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds `host`; port 0 picks a free one. Returns the bound port.
  /// Non-loopback hosts require `allow_remote`.
  int bind(const std::string& host, int port, bool allow_remote = false);
  /// Blocks until stop().
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

bool is_loopback_host(const std::string& host);

}  // namespace rideprobe
