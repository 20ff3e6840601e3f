#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "rideprobe/domain.hpp"
#include "rideprobe/metrics.hpp"
#include "rideprobe/planner.hpp"

namespace rideprobe {

struct SourceConfig {
  std::filesystem::path path;
  ColumnMap columns;
};

/// Everything a run needs. Relative paths in the file resolve against the
/// config file's directory. See README for the document layout.
struct AppConfig {
  SourceConfig city;
  SourceConfig personal;
  std::filesystem::path boundaries;
  std::string boundary_name_property;
  SourceConfig weather;
  std::optional<SourceConfig> pings;
  std::optional<YearMonth> city_month;

  std::string timezone = "America/Chicago";
  int day_start_offset = 0;
  int n_shades = kDefaultShades;
  int frame_step_s = 30;
  MetricOptions metrics;
  PlannerInput planner_defaults;  // platform_cut 0.25, tpc 0.55

  std::filesystem::path store_dir = "store";
  std::filesystem::path probe_dir = "probes";

  std::string host = "127.0.0.1";
  int port = 8080;
  bool allow_remote = false;

  unsigned workers = 1;
};

/// Throws ConfigError on malformed documents or out-of-range values.
AppConfig config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);
AppConfig load_config(const std::filesystem::path& path);

/// Throws IoError naming the first configured source file that is missing.
void check_sources_exist(const AppConfig& config);

}  // namespace rideprobe
