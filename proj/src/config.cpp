#include "rideprobe/config.hpp"

#include <fstream>

#include "rideprobe/error.hpp"
#include "rideprobe/planner_json.hpp"
#include "rideprobe/store.hpp"

namespace rideprobe {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

fs::path resolve(const fs::path& base_dir, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base_dir / path;
}

SourceConfig read_source(const json& doc, const char* name, ColumnMap defaults,
                         const std::string& timezone, const fs::path& base_dir) {
  if (!doc.is_object()) throw ConfigError(std::string("source '") + name + "' must be an object");
  if (!doc.contains("path") || !doc["path"].is_string()) {
    throw ConfigError(std::string("source '") + name + "' needs a path");
  }
  defaults.timezone = timezone;
  SourceConfig src;
  src.path = resolve(base_dir, doc["path"].get<std::string>());
  src.columns = column_map_from_json(doc, std::move(defaults));
  return src;
}

template <class T>
T get_or(const json& doc, const char* key, T fallback) {
  if (!doc.contains(key)) return fallback;
  try {
    return doc[key].get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config field '") + key + "' has the wrong type");
  }
}

}  // namespace

AppConfig config_from_json(const json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  AppConfig c;
  c.timezone = get_or<std::string>(doc, "timezone", c.timezone);

  if (!doc.contains("sources") || !doc["sources"].is_object()) {
    throw ConfigError("config has no 'sources' object");
  }
  const json& sources = doc["sources"];
  for (const char* required : {"city", "personal", "boundaries", "weather"}) {
    if (!sources.contains(required)) throw ConfigError(std::string("missing source '") + required + "'");
  }
  c.city = read_source(sources["city"], "city", chicago_tnp_columns(), c.timezone, base_dir);
  c.personal =
      read_source(sources["personal"], "personal", personal_export_columns(), c.timezone, base_dir);
  c.weather = read_source(sources["weather"], "weather", weather_columns(), c.timezone, base_dir);
  if (sources.contains("pings") && !sources["pings"].is_null()) {
    c.pings = read_source(sources["pings"], "pings", location_ping_columns(), c.timezone, base_dir);
  }
  const json& b = sources["boundaries"];
  if (!b.is_object() || !b.contains("path") || !b["path"].is_string()) {
    throw ConfigError("source 'boundaries' needs a path");
  }
  c.boundaries = resolve(base_dir, b["path"].get<std::string>());
  c.boundary_name_property = get_or<std::string>(b, "name_property", "");
  if (sources["city"].contains("month")) {
    const auto text = get_or<std::string>(sources["city"], "month", "");
    c.city_month = parse_year_month(text);
    if (!c.city_month) throw ConfigError("city month must be YYYY-MM, got '" + text + "'");
  }

  c.day_start_offset = get_or<int>(doc, "day_start_offset", c.day_start_offset);
  if (c.day_start_offset < 0 || c.day_start_offset > 23) {
    throw ConfigError("day_start_offset must be in 0..23");
  }
  c.n_shades = get_or<int>(doc, "n_shades", c.n_shades);
  if (c.n_shades < 2) throw ConfigError("n_shades must be at least 2");
  c.frame_step_s = get_or<int>(doc, "frame_step_s", c.frame_step_s);
  if (c.frame_step_s < 1) throw ConfigError("frame_step_s must be positive");
  c.workers = get_or<unsigned>(doc, "workers", c.workers);
  if (c.workers == 0) c.workers = 1;

  if (doc.contains("metrics")) {
    const json& m = doc["metrics"];
    const auto rate = get_or<std::string>(m, "rate_method", "ratio_of_sums");
    if (rate == "ratio_of_sums") {
      c.metrics.rate = RateMethod::ratio_of_sums;
    } else if (rate == "mean_of_ratios") {
      c.metrics.rate = RateMethod::mean_of_ratios;
    } else {
      throw ConfigError("unknown rate_method '" + rate + "'");
    }
    const auto earnings = get_or<std::string>(m, "earnings", "fare_plus_tip");
    if (earnings == "fare_plus_tip") {
      c.metrics.earnings = EarningsDefinition::fare_plus_tip;
    } else if (earnings == "trip_total") {
      c.metrics.earnings = EarningsDefinition::trip_total;
    } else {
      throw ConfigError("unknown earnings definition '" + earnings + "'");
    }
  }

  if (doc.contains("planner_defaults")) {
    try {
      c.planner_defaults = planner_input_from_json(doc["planner_defaults"], c.planner_defaults);
    } catch (const ValidationError& e) {
      std::string msg = "bad planner_defaults:";
      for (const auto& [field, why] : e.fields()) msg += " " + field + " (" + why + ")";
      throw ConfigError(msg);
    }
  }

  c.store_dir = resolve(base_dir, get_or<std::string>(doc, "store_dir", c.store_dir.string()));
  c.probe_dir = resolve(base_dir, get_or<std::string>(doc, "probe_dir", c.probe_dir.string()));

  if (doc.contains("service")) {
    const json& s = doc["service"];
    c.host = get_or<std::string>(s, "host", c.host);
    c.port = get_or<int>(s, "port", c.port);
    c.allow_remote = get_or<bool>(s, "allow_remote", c.allow_remote);
    if (c.port < 0 || c.port > 65535) throw ConfigError("service port out of range");
  }
  return c;
}

AppConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(doc, path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

void check_sources_exist(const AppConfig& config) {
  auto check = [](const char* name, const fs::path& p) {
    if (!fs::exists(p)) throw IoError(std::string(name) + " source not found: " + p.string());
  };
  check("city", config.city.path);
  check("personal", config.personal.path);
  check("boundaries", config.boundaries);
  check("weather", config.weather.path);
  if (config.pings) check("pings", config.pings->path);
}

}  // namespace rideprobe
