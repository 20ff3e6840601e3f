#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rideprobe/domain.hpp"
#include "rideprobe/metrics.hpp"
#include "rideprobe/planner.hpp"
#include "rideprobe/error.hpp"

namespace rideprobe {

inline constexpr const char* kProbeSchema = "probe/1";

enum class ProbeKind { hourly, calendar_month, calendar_week, map, animation, planner_defaults };
enum class ProbeScope { personal, city, both };

std::string_view kind_name(ProbeKind kind) noexcept;
std::string_view scope_name(ProbeScope scope) noexcept;

struct ProbeMeta {
  std::optional<std::string> data_month;  // "YYYY-MM" when the probe covers one month
  std::optional<std::string> range_start;
  std::optional<std::string> range_end;
  // Newest trip or ping timestamp among the inputs, so identical inputs
  // produce identical files.
  std::string generated_at;
  std::map<std::string, std::size_t> row_counts;

  bool operator==(const ProbeMeta&) const = default;
};

struct ProbeArtifact {
  ProbeKind kind = ProbeKind::hourly;
  ProbeScope scope = ProbeScope::both;
  nlohmann::json payload;
  ProbeMeta meta;

  bool operator==(const ProbeArtifact&) const = default;
};

struct ProbeContext {
  int day_start_offset_hours = 0;
  int n_shades = kDefaultShades;
  MetricOptions metrics;
};

nlohmann::json to_json(const HourlyStat& stat);
nlohmann::json to_json(const DayStat& stat);
nlohmann::json to_json(const WeekdayStat& stat);
nlohmann::json to_json(const NeighborhoodStat& stat);
nlohmann::json to_json(const NeighborhoodStats& stats);

/// Personal and city 24-hour series side by side. Hours with no personal
/// trips are listed under "personal_gaps"; their stats are null, not zero.
ProbeArtifact build_hourly_probe(std::span<const Trip> personal, std::span<const Trip> city,
                                 const ProbeContext& context = {});

struct CalendarProbe {
  ProbeArtifact month;  // calendar_month, personal
  ProbeArtifact week;   // calendar_week, both
};

/// Month grid: one cell per date in `range`, null where the driver has no
/// trips. Week matrix: 4 variables x 7 weekdays per scope.
CalendarProbe build_calendar_probe(std::span<const Trip> personal, std::span<const Trip> city,
                                   const DateRange& range, const ProbeContext& context = {});

/// Pickup map plus a precomputed linked drop-off map per pickup id, for each
/// scope; boundary geometry embedded once.
ProbeArtifact build_map_probe(std::span<const Trip> personal, std::span<const Trip> city,
                              const NeighborhoodSet& boundaries,
                              const ProbeContext& context = {});

/// Frames further than this from both neighbouring pings hold position.
inline constexpr int kPingGapSeconds = 15 * 60;
inline constexpr int kDefaultFrameStepSeconds = 30;

struct AnimationFrame {
  LocalTime t{};
  GeoPoint point;
  bool trip_active = false;
  // Position held from the previous ping across a gap longer than
  // kPingGapSeconds instead of interpolated.
  bool held = false;

  bool operator==(const AnimationFrame&) const = default;
};

class EmptyDayError : public InputError {
 public:
  EmptyDayError(Date requested, std::vector<Date> available);

  const std::vector<Date>& available() const noexcept { return available_; }

 private:
  std::vector<Date> available_;
};

/// Dates (under the day-start offset) that have at least one ping.
std::vector<Date> ping_dates(const PingSeries& pings, int day_start_offset_hours = 0);

/// Frames from the day's first ping to its last at a fixed step.
/// Throws EmptyDayError when the day has fewer than two pings.
std::vector<AnimationFrame> animation_frames(const PingSeries& pings, std::span<const Trip> trips,
                                             Date date, int frame_step_s = kDefaultFrameStepSeconds,
                                             int day_start_offset_hours = 0);

ProbeArtifact build_animation_probe(const PingSeries& pings, std::span<const Trip> trips, Date date,
                                    int frame_step_s = kDefaultFrameStepSeconds,
                                    int day_start_offset_hours = 0);

/// Default planner form plus the neighborhoods and date span the city data covers.
ProbeArtifact build_planner_defaults_probe(const PlannerInput& defaults,
                                           std::span<const Trip> city,
                                           const NeighborhoodSet& boundaries);

nlohmann::json to_json(const ProbeArtifact& artifact);
ProbeArtifact artifact_from_json(const nlohmann::json& doc);

/// A probe file is {"schema": "probe/1", "artifacts": [...]}, keys sorted,
/// two-space indent, trailing newline.
std::string serialize_probes(std::span<const ProbeArtifact> artifacts);
std::vector<ProbeArtifact> parse_probes(const std::string& text);

void export_probe(const ProbeArtifact& artifact, const std::filesystem::path& path);
void export_probes(std::span<const ProbeArtifact> artifacts, const std::filesystem::path& path);
/// Throws VersionError when the file's schema is not probe/1.
std::vector<ProbeArtifact> import_probes(const std::filesystem::path& path);

struct VerifyReport {
  std::size_t checked = 0;
  std::vector<std::string> mismatches;

  bool ok() const noexcept { return mismatches.empty(); }
};

/// Picks `cells` random numeric cells from hourly / calendar / map payloads
/// and recomputes each from the trips by direct filtering.
VerifyReport verify_probes(std::span<const ProbeArtifact> artifacts, std::span<const Trip> personal,
                           std::span<const Trip> city, const ProbeContext& context,
                           std::size_t cells = 100, std::uint64_t seed = 1);

}  // namespace rideprobe
