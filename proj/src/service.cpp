#include "rideprobe/service.hpp"

#include <fstream>
#include <sstream>

#include <httplib.h>

#include "rideprobe/planner.hpp"
#include "rideprobe/planner_json.hpp"
#include "rideprobe/probes.hpp"

namespace rideprobe {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

const std::map<std::string, std::string> kProbeFiles = {
    {"hourly", "hourly.json"},
    {"calendar", "calendar.json"},
    {"map", "map.json"},
    {"planner_defaults", "planner_defaults.json"},
    {"animation", "animation.json"},
};

constexpr const char* kSimulatePath = "/api/planner/simulate";
constexpr const char* kMetaPath = "/api/meta";
constexpr const char* kProbePrefix = "/api/probes/";

HttpResponse json_response(int status, json body) {
  body["schema"] = kProbeSchema;
  return {status, body.dump(), "application/json"};
}

HttpResponse error_response(int status, const std::string& message, json extra = json::object()) {
  extra["error"] = message;
  return json_response(status, std::move(extra));
}

std::optional<std::string> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

}  // namespace

ProbeService::ProbeService(const AppConfig& config, Store store, const fs::path& probe_dir)
    : config_(config), store_(std::move(store)) {
  json available = json::array();
  for (const auto& [name, file] : kProbeFiles) {
    if (auto text = read_file(probe_dir / file)) {
      probe_files_.emplace(name, std::move(*text));
      available.push_back(name);
    }
  }
  meta_ = {
      {"manifest_hash", store_.manifest.value("manifest_hash", "")},
      {"sources", store_.manifest.value("sources", json::object())},
      {"pings", store_.manifest.value("pings", json(nullptr))},
      {"probes", std::move(available)},
      {"day_start_offset", config_.day_start_offset},
      {"n_shades", config_.n_shades},
      {"row_counts",
       {{"city_trips", store_.city_trips.size()},
        {"personal_trips", store_.personal_trips.size()},
        {"neighborhoods", store_.boundaries.entries.size()},
        {"weather_hours", store_.weather.records.size()},
        {"pings", store_.pings ? store_.pings->pings.size() : 0}}},
  };
}

HttpResponse ProbeService::handle(const HttpRequest& request) const {
  const std::string& path = request.path;
  const bool is_get = request.method == "GET";

  if (path == kMetaPath) {
    if (!is_get) return error_response(405, "use GET");
    return json_response(200, meta_);
  }
  if (path == kSimulatePath) {
    if (request.method != "POST") return error_response(405, "use POST");
    return simulate(request.body);
  }
  if (path.rfind(kProbePrefix, 0) == 0) {
    const std::string name = path.substr(std::string(kProbePrefix).size());
    if (kProbeFiles.count(name) == 0) return error_response(404, "unknown probe '" + name + "'");
    if (!is_get) return error_response(405, "use GET");
    if (name == "animation") return animation(request.query);
    auto it = probe_files_.find(name);
    if (it == probe_files_.end()) {
      return error_response(404, "probe '" + name + "' has not been built; run `rideprobe probes`");
    }
    return {200, it->second, "application/json"};
  }
  return error_response(404, "no route for " + path);
}

HttpResponse ProbeService::simulate(const std::string& body) const {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error& e) {
    return error_response(400, "invalid input", {{"fields", {{"body", "not valid JSON"}}}});
  }
  try {
    const PlannerInput input = planner_input_from_json(doc, config_.planner_defaults);
    return json_response(200, to_json(rideprobe::simulate(store_.city_trips, input,
                                                          config_.day_start_offset)));
  } catch (const ValidationError& e) {
    return error_response(400, "invalid input", {{"fields", e.fields()}});
  } catch (const NoMatchingTripsError& e) {
    return error_response(422, e.what(), {{"filters", filter_echo(e.filters())}});
  } catch (const InvalidStatsError& e) {
    return error_response(422, e.what());
  }
}

HttpResponse ProbeService::animation(const std::map<std::string, std::string>& query) const {
  auto date_it = query.find("date");
  if (date_it == query.end()) {
    auto it = probe_files_.find("animation");
    if (it == probe_files_.end()) {
      return error_response(404, "no animation probe; configure location pings and run `rideprobe probes`");
    }
    return {200, it->second, "application/json"};
  }
  const auto date = parse_date(date_it->second);
  if (!date) return error_response(400, "invalid input", {{"fields", {{"date", "must be YYYY-MM-DD"}}}});
  if (!store_.pings) {
    return error_response(404, "no location pings in the store; configure pings and re-run ingest");
  }
  try {
    const auto artifact = build_animation_probe(*store_.pings, store_.personal_trips, *date,
                                                config_.frame_step_s, config_.day_start_offset);
    return {200, serialize_probes(std::span<const ProbeArtifact>(&artifact, 1)), "application/json"};
  } catch (const EmptyDayError& e) {
    json dates = json::array();
    for (const auto& d : e.available()) dates.push_back(format_date(d));
    return error_response(404, e.what(), {{"available_dates", std::move(dates)}});
  }
}

struct HttpServer::Impl {
  explicit Impl(const ProbeService& s) : service(s) {}

  const ProbeService& service;
  httplib::Server server;
};

HttpServer::HttpServer(const ProbeService& service)
    : impl_(std::make_unique<Impl>(service)) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    HttpRequest request{req.method, req.path, {}, req.body};
    for (const auto& [k, v] : req.params) request.query.emplace(k, v);
    HttpResponse response;
    try {
      response = impl_->service.handle(request);
    } catch (const std::exception& e) {
      response = error_response(500, std::string("internal error: ") + e.what());
    }
    res.status = response.status;
    res.set_header(kSchemaHeader, kProbeSchema);
    res.set_content(response.body, response.content_type);
  };
  auto& s = impl_->server;
  s.Get(".*", handler);
  s.Post(".*", handler);
  s.Put(".*", handler);
  s.Delete(".*", handler);
  s.Patch(".*", handler);
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port, bool allow_remote) {
  if (!allow_remote && !is_loopback_host(host)) {
    throw ConfigError("refusing to bind " + host + " without --allow-remote");
  }
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound <= 0) throw IoError("cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw IoError("cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

bool is_loopback_host(const std::string& host) {
  return host == "localhost" || host == "::1" || host.rfind("127.", 0) == 0;
}

}  // namespace rideprobe
