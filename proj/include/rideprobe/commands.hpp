#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "rideprobe/config.hpp"
#include "rideprobe/planner.hpp"
#include "rideprobe/probes.hpp"
#include "rideprobe/store.hpp"

namespace rideprobe {

// CLI exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitEmptyResult = 3;

struct IngestReport {
  std::string manifest_hash;
  std::filesystem::path store_dir;
  std::vector<std::string> warnings;
};

/// Load every source, classify, attach weather, write the store.
IngestReport cmd_ingest(const AppConfig& config);

struct ProbesReport {
  std::vector<std::filesystem::path> files;
  std::vector<std::string> warnings;
  VerifyReport verify;
};

/// Writes hourly, calendar, map, planner_defaults and (when pings exist)
/// animation probe files into `out_dir`.
ProbesReport cmd_probes(const AppConfig& config, const Store& store,
                        const std::filesystem::path& out_dir);

/// Calendar span shown to the driver: whole months from the first to the
/// last personal trip, or the city month when there are none.
DateRange calendar_range(const Store& store, int day_start_offset_hours);

PlannerOutput cmd_plan(const AppConfig& config, const Store& store, const PlannerInput& input);

/// Aligned two-column table of the output figures.
std::string format_plan_table(const PlannerOutput& output);

/// Entry point behind the `rideprobe` binary; returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rideprobe
