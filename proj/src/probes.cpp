#include "rideprobe/probes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>

#include "rideprobe/planner_json.hpp"
#include "rideprobe/store.hpp"

namespace rideprobe {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string_view rate_name(RateMethod m) {
  return m == RateMethod::mean_of_ratios ? "mean_of_ratios" : "ratio_of_sums";
}
std::string_view earnings_name(EarningsDefinition e) {
  return e == EarningsDefinition::trip_total ? "trip_total" : "fare_plus_tip";
}

/// Row counts, date span and newest timestamp of the inputs.
ProbeMeta make_meta(std::span<const Trip> personal, std::span<const Trip> city,
                    int day_start_offset_hours) {
  ProbeMeta meta;
  meta.row_counts["personal_trips"] = personal.size();
  meta.row_counts["city_trips"] = city.size();
  std::optional<LocalTime> newest;
  std::optional<Date> first, last;
  for (auto span : {personal, city}) {
    for (const auto& t : span) {
      if (!newest || t.start_ts > *newest) newest = t.start_ts;
      const Date d = date_of(t.start_ts, day_start_offset_hours);
      if (!first || std::chrono::sys_days{d} < std::chrono::sys_days{*first}) first = d;
      if (!last || std::chrono::sys_days{d} > std::chrono::sys_days{*last}) last = d;
    }
  }
  if (newest) meta.generated_at = format_timestamp(*newest);
  if (first) meta.range_start = format_date(*first);
  if (last) meta.range_end = format_date(*last);
  if (!city.empty()) {
    const Date d0 = date_of(city.front().start_ts);
    const YearMonth ym{static_cast<int>(d0.year()), static_cast<unsigned>(d0.month())};
    const bool one_month = std::all_of(city.begin(), city.end(), [&](const Trip& t) {
      return ym.contains(date_of(t.start_ts));
    });
    if (one_month) meta.data_month = format_year_month(ym);
  }
  return meta;
}

json hourly_series(const std::vector<HourlyStat>& stats) {
  json out = json::array();
  for (const auto& s : stats) out.push_back(to_json(s));
  return out;
}

json gap_hours(const std::vector<HourlyStat>& stats) {
  json out = json::array();
  for (const auto& s : stats) {
    if (s.trip_count == 0) out.push_back(s.hour);
  }
  return out;
}

json weekday_matrix(const std::array<WeekdayStat, kWeekdayCount>& stats) {
  json out = json::array();
  for (const auto& s : stats) out.push_back(to_json(s));
  return out;
}

json scope_maps(std::span<const Trip> trips, const ProbeContext& ctx) {
  const auto pickup = neighborhood_stats(trips, TripEnd::pickup, ctx.n_shades, ctx.metrics);
  json linked = json::object();
  for (const auto& [id, stat] : pickup.entries) {
    linked[id] = to_json(linked_dropoff_stats(trips, id, ctx.n_shades, ctx.metrics));
  }
  return {
      {"pickup", to_json(pickup)},
      {"dropoff", to_json(neighborhood_stats(trips, TripEnd::dropoff, ctx.n_shades, ctx.metrics))},
      {"linked", std::move(linked)},
  };
}

ProbeKind parse_kind(const std::string& s) {
  for (auto k : {ProbeKind::hourly, ProbeKind::calendar_month, ProbeKind::calendar_week,
                 ProbeKind::map, ProbeKind::animation, ProbeKind::planner_defaults}) {
    if (kind_name(k) == s) return k;
  }
  throw SchemaError("unknown probe kind '" + s + "'");
}

ProbeScope parse_scope(const std::string& s) {
  for (auto sc : {ProbeScope::personal, ProbeScope::city, ProbeScope::both}) {
    if (scope_name(sc) == s) return sc;
  }
  throw SchemaError("unknown probe scope '" + s + "'");
}

std::optional<std::string> opt_string(const json& doc, const char* key) {
  if (!doc.contains(key) || doc[key].is_null()) return std::nullopt;
  return doc[key].get<std::string>();
}

}  // namespace

std::string_view kind_name(ProbeKind kind) noexcept {
  switch (kind) {
    case ProbeKind::hourly:
      return "hourly";
    case ProbeKind::calendar_month:
      return "calendar_month";
    case ProbeKind::calendar_week:
      return "calendar_week";
    case ProbeKind::map:
      return "map";
    case ProbeKind::animation:
      return "animation";
    case ProbeKind::planner_defaults:
      return "planner_defaults";
  }
  return "hourly";
}

std::string_view scope_name(ProbeScope scope) noexcept {
  switch (scope) {
    case ProbeScope::personal:
      return "personal";
    case ProbeScope::city:
      return "city";
    case ProbeScope::both:
      return "both";
  }
  return "both";
}

json to_json(const HourlyStat& s) {
  return {{"hour", s.hour},
          {"trip_count", s.trip_count},
          {"fare_per_minute", opt(s.fare_per_minute)},
          {"avg_fare", opt(s.avg_fare)},
          {"avg_duration_min", opt(s.avg_duration_min)}};
}

json to_json(const DayStat& s) {
  return {{"date", format_date(s.date)},
          {"trip_count", s.trip_count},
          {"total_earnings", s.total_earnings},
          {"fare_per_minute", opt(s.fare_per_minute)},
          {"avg_fare", opt(s.avg_fare)},
          {"shade", s.shade}};
}

json to_json(const WeekdayStat& s) {
  return {{"weekday", weekday_name(s.weekday)},
          {"total_trips", s.total_trips},
          {"avg_fare", opt(s.avg_fare)},
          {"avg_duration_min", opt(s.avg_duration_min)},
          {"fare_per_minute", opt(s.fare_per_minute)}};
}

json to_json(const NeighborhoodStat& s) {
  return {{"id", s.id},
          {"trip_count", s.trip_count},
          {"fare_per_minute", opt(s.fare_per_minute)},
          {"avg_fare", opt(s.avg_fare)},
          {"avg_miles_per_trip", opt(s.avg_miles_per_trip)},
          {"shade", s.shade ? json(*s.shade) : json(nullptr)}};
}

json to_json(const NeighborhoodStats& stats) {
  json entries = json::object();
  for (const auto& [id, stat] : stats.entries) entries[id] = to_json(stat);
  return {{"entries", std::move(entries)}, {"unclassified", stats.unclassified}};
}

ProbeArtifact build_hourly_probe(std::span<const Trip> personal, std::span<const Trip> city,
                                 const ProbeContext& ctx) {
  const auto p = hourly_stats(personal, ctx.day_start_offset_hours, ctx.metrics);
  const auto c = hourly_stats(city, ctx.day_start_offset_hours, ctx.metrics);
  ProbeArtifact a;
  a.kind = ProbeKind::hourly;
  a.scope = ProbeScope::both;
  a.meta = make_meta(personal, city, ctx.day_start_offset_hours);
  a.payload = {
      {"day_start_offset", ctx.day_start_offset_hours},
      {"rate_method", rate_name(ctx.metrics.rate)},
      {"personal", hourly_series(p)},
      {"city", hourly_series(c)},
      {"personal_gaps", gap_hours(p)},
      {"city_gaps", gap_hours(c)},
      {"personal_empty", personal.empty()},
      {"city_empty", city.empty()},
  };
  return a;
}

CalendarProbe build_calendar_probe(std::span<const Trip> personal, std::span<const Trip> city,
                                   const DateRange& range, const ProbeContext& ctx) {
  const auto days =
      daily_stats(personal, range, ctx.n_shades, ctx.day_start_offset_hours, ctx.metrics);
  json cells = json::array();
  for (std::chrono::sys_days d{range.first}; d <= std::chrono::sys_days{range.last};
       d += std::chrono::days{1}) {
    const Date date{d};
    auto it = days.find(date);
    cells.push_back({{"date", format_date(date)},
                     {"weekday", weekday_name(weekday_of(date))},
                     {"stat", it == days.end() ? json(nullptr) : to_json(it->second)}});
  }

  CalendarProbe probe;
  probe.month.kind = ProbeKind::calendar_month;
  probe.month.scope = ProbeScope::personal;
  probe.month.meta = make_meta(personal, {}, ctx.day_start_offset_hours);
  probe.month.meta.range_start = format_date(range.first);
  probe.month.meta.range_end = format_date(range.last);
  probe.month.payload = {
      {"range", {{"first", format_date(range.first)}, {"last", format_date(range.last)}}},
      {"n_shades", ctx.n_shades},
      {"day_start_offset", ctx.day_start_offset_hours},
      {"earnings_definition", earnings_name(ctx.metrics.earnings)},
      {"cells", std::move(cells)},
  };

  probe.week.kind = ProbeKind::calendar_week;
  probe.week.scope = ProbeScope::both;
  probe.week.meta = make_meta(personal, city, ctx.day_start_offset_hours);
  probe.week.payload = {
      {"variables", {"total_trips", "avg_fare", "avg_duration_min", "fare_per_minute"}},
      {"day_start_offset", ctx.day_start_offset_hours},
      {"personal", weekday_matrix(weekday_stats(personal, ctx.day_start_offset_hours, ctx.metrics))},
      {"city", weekday_matrix(weekday_stats(city, ctx.day_start_offset_hours, ctx.metrics))},
  };
  return probe;
}

ProbeArtifact build_map_probe(std::span<const Trip> personal, std::span<const Trip> city,
                              const NeighborhoodSet& boundaries, const ProbeContext& ctx) {
  json geometry = json::object();
  for (const auto& entry : boundaries_to_json(boundaries)) {
    geometry[entry["id"].get<std::string>()] = {{"name", entry["name"]}, {"rings", entry["rings"]}};
  }
  ProbeArtifact a;
  a.kind = ProbeKind::map;
  a.scope = ProbeScope::both;
  a.meta = make_meta(personal, city, ctx.day_start_offset_hours);
  a.payload = {
      {"n_shades", ctx.n_shades},
      {"shade_metric", "fare_per_minute"},
      {"geometry", std::move(geometry)},
      {"personal", scope_maps(personal, ctx)},
      {"city", scope_maps(city, ctx)},
  };
  return a;
}

EmptyDayError::EmptyDayError(Date requested, std::vector<Date> available)
    : InputError([&] {
        std::string msg = "not enough pings on " + format_date(requested) + "; dates with pings:";
        if (available.empty()) msg += " none";
        for (const auto& d : available) msg += " " + format_date(d);
        return msg;
      }()),
      available_(std::move(available)) {}

std::vector<Date> ping_dates(const PingSeries& pings, int day_start_offset_hours) {
  std::set<std::chrono::sys_days> days;
  for (const auto& p : pings.pings) days.insert(std::chrono::sys_days{date_of(p.ts, day_start_offset_hours)});
  std::vector<Date> out;
  for (auto d : days) out.emplace_back(d);
  return out;
}

std::vector<AnimationFrame> animation_frames(const PingSeries& pings, std::span<const Trip> trips,
                                             Date date, int frame_step_s,
                                             int day_start_offset_hours) {
  if (frame_step_s <= 0) throw std::invalid_argument("frame step must be positive");
  const LocalTime day_start = start_of(date, day_start_offset_hours);
  const LocalTime day_end = day_start + std::chrono::days{1};
  std::vector<Ping> day;
  for (const auto& p : pings.pings) {
    if (p.ts >= day_start && p.ts < day_end) day.push_back(p);
  }
  std::stable_sort(day.begin(), day.end(), [](const Ping& a, const Ping& b) { return a.ts < b.ts; });
  if (day.size() < 2) throw EmptyDayError(date, ping_dates(pings, day_start_offset_hours));

  std::vector<std::pair<LocalTime, LocalTime>> intervals;
  for (const auto& t : trips) {
    if (t.end_ts >= day.front().ts && t.start_ts <= day.back().ts) {
      intervals.emplace_back(t.start_ts, t.end_ts);
    }
  }

  const std::chrono::seconds step{frame_step_s};
  const auto span = day.back().ts - day.front().ts;
  const auto count = static_cast<std::size_t>(span / step) + 1;
  std::vector<AnimationFrame> frames;
  frames.reserve(count);
  std::size_t next = 1;  // first ping with ts > t, or the last ping
  for (std::size_t k = 0; k < count; ++k) {
    AnimationFrame f;
    f.t = day.front().ts + step * static_cast<long long>(k);
    while (next + 1 < day.size() && day[next].ts <= f.t) ++next;
    const Ping& a = day[next - 1];
    const Ping& b = day[next];
    if (f.t == a.ts) {
      f.point = a.point;
    } else if (f.t >= b.ts) {
      f.point = b.point;
    } else if ((b.ts - a.ts).count() > kPingGapSeconds) {
      f.point = a.point;
      f.held = true;
    } else {
      const double w = static_cast<double>((f.t - a.ts).count()) /
                       static_cast<double>((b.ts - a.ts).count());
      f.point = GeoPoint{a.point.lat + (b.point.lat - a.point.lat) * w,
                         a.point.lon + (b.point.lon - a.point.lon) * w};
    }
    f.trip_active = std::any_of(intervals.begin(), intervals.end(), [&](const auto& iv) {
      return f.t >= iv.first && f.t <= iv.second;
    });
    frames.push_back(f);
  }
  return frames;
}

ProbeArtifact build_animation_probe(const PingSeries& pings, std::span<const Trip> trips, Date date,
                                    int frame_step_s, int day_start_offset_hours) {
  const auto frames = animation_frames(pings, trips, date, frame_step_s, day_start_offset_hours);
  json out = json::array();
  for (const auto& f : frames) {
    out.push_back({{"t", format_timestamp(f.t)},
                   {"lat", f.point.lat},
                   {"lon", f.point.lon},
                   {"trip_active", f.trip_active},
                   {"held", f.held}});
  }
  json available = json::array();
  for (const auto& d : ping_dates(pings, day_start_offset_hours)) available.push_back(format_date(d));

  ProbeArtifact a;
  a.kind = ProbeKind::animation;
  a.scope = ProbeScope::personal;
  a.meta.row_counts["pings"] = pings.pings.size();
  a.meta.row_counts["frames"] = frames.size();
  a.meta.range_start = format_date(date);
  a.meta.range_end = format_date(date);
  a.meta.generated_at = format_timestamp(frames.back().t);
  a.payload = {
      {"date", format_date(date)},
      {"frame_step_s", frame_step_s},
      {"day_start_offset", day_start_offset_hours},
      {"gap_threshold_s", kPingGapSeconds},
      {"available_dates", std::move(available)},
      {"frames", std::move(out)},
  };
  return a;
}

ProbeArtifact build_planner_defaults_probe(const PlannerInput& defaults, std::span<const Trip> city,
                                           const NeighborhoodSet& boundaries) {
  std::map<std::string, std::size_t> pickups;
  bool weather = false;
  for (const auto& t : city) {
    if (t.pickup_area) ++pickups[*t.pickup_area];
    weather = weather || t.temp_f.has_value();
  }
  std::vector<const Neighborhood*> sorted;
  for (const auto& n : boundaries.entries) sorted.push_back(&n);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->id < b->id; });
  json hoods = json::array();
  for (const auto* n : sorted) {
    auto it = pickups.find(n->id);
    hoods.push_back({{"id", n->id},
                     {"name", n->name},
                     {"city_pickups", it == pickups.end() ? 0 : it->second}});
  }

  ProbeArtifact a;
  a.kind = ProbeKind::planner_defaults;
  a.scope = ProbeScope::city;
  a.meta = make_meta({}, city, 0);
  a.payload = {
      {"defaults", to_json(defaults)},
      {"neighborhoods", std::move(hoods)},
      {"weather_available", weather},
      {"low_confidence_below", kLowConfidenceTrips},
  };
  return a;
}

json to_json(const ProbeArtifact& a) {
  auto opt_str = [](const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); };
  return {{"kind", kind_name(a.kind)},
          {"scope", scope_name(a.scope)},
          {"meta",
           {{"data_month", opt_str(a.meta.data_month)},
            {"range_start", opt_str(a.meta.range_start)},
            {"range_end", opt_str(a.meta.range_end)},
            {"generated_at", a.meta.generated_at},
            {"row_counts", a.meta.row_counts}}},
          {"payload", a.payload}};
}

ProbeArtifact artifact_from_json(const json& doc) {
  try {
    ProbeArtifact a;
    a.kind = parse_kind(doc.at("kind").get<std::string>());
    a.scope = parse_scope(doc.at("scope").get<std::string>());
    const json& meta = doc.at("meta");
    a.meta.data_month = opt_string(meta, "data_month");
    a.meta.range_start = opt_string(meta, "range_start");
    a.meta.range_end = opt_string(meta, "range_end");
    a.meta.generated_at = meta.value("generated_at", "");
    a.meta.row_counts = meta.at("row_counts").get<std::map<std::string, std::size_t>>();
    a.payload = doc.at("payload");
    return a;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("bad probe artifact: ") + e.what());
  }
}

std::string serialize_probes(std::span<const ProbeArtifact> artifacts) {
  json list = json::array();
  for (const auto& a : artifacts) list.push_back(to_json(a));
  json doc = {{"schema", kProbeSchema}, {"artifacts", std::move(list)}};
  return doc.dump(2) + "\n";
}

std::vector<ProbeArtifact> parse_probes(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("probe file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw SchemaError("probe file must be a JSON object");
  const std::string schema = doc.value("schema", "");
  if (schema != kProbeSchema) {
    throw VersionError("unsupported probe schema '" + schema + "' (expected " + kProbeSchema + ")");
  }
  std::vector<ProbeArtifact> out;
  if (!doc.contains("artifacts") || !doc["artifacts"].is_array()) {
    throw SchemaError("probe file has no artifacts array");
  }
  for (const auto& a : doc["artifacts"]) out.push_back(artifact_from_json(a));
  return out;
}

void export_probes(std::span<const ProbeArtifact> artifacts, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write probe file " + path.string());
  out << serialize_probes(artifacts);
  if (!out) throw IoError("write failed: " + path.string());
}

void export_probe(const ProbeArtifact& artifact, const fs::path& path) {
  export_probes(std::span<const ProbeArtifact>(&artifact, 1), path);
}

std::vector<ProbeArtifact> import_probes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open probe file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_probes(std::move(ss).str());
}

namespace {

struct Cell {
  std::string label;
  json value;
  std::span<const Trip> trips;
  std::function<bool(const Trip&)> select;
  std::string field;
};

json recompute(const Cell& cell, const MetricOptions& options) {
  TripAccumulator acc;
  for (const auto& t : cell.trips) {
    if (cell.select(t)) acc.add(t, options.earnings);
  }
  if (cell.field == "trip_count" || cell.field == "total_trips") return acc.count;
  if (cell.field == "total_earnings") return acc.earnings_sum;
  if (cell.field == "fare_per_minute") return opt(acc.fare_per_minute(options.rate));
  if (cell.field == "avg_fare") return opt(acc.avg_fare());
  if (cell.field == "avg_duration_min") return opt(acc.avg_duration_min());
  if (cell.field == "avg_miles_per_trip") return opt(acc.avg_miles());
  throw std::logic_error("no recompute rule for " + cell.field);
}

bool same_value(const json& a, const json& b) {
  if (a.is_null() || b.is_null()) return a.is_null() && b.is_null();
  const double x = a.get<double>();
  const double y = b.get<double>();
  return std::abs(x - y) <= 1e-9 * std::max({1.0, std::abs(x), std::abs(y)});
}

}  // namespace

VerifyReport verify_probes(std::span<const ProbeArtifact> artifacts, std::span<const Trip> personal,
                           std::span<const Trip> city, const ProbeContext& ctx, std::size_t cells,
                           std::uint64_t seed) {
  const int offset = ctx.day_start_offset_hours;
  std::vector<Cell> candidates;
  auto scope_trips = [&](const std::string& scope) { return scope == "personal" ? personal : city; };

  for (const auto& a : artifacts) {
    const json& p = a.payload;
    switch (a.kind) {
      case ProbeKind::hourly:
        for (const std::string scope : {"personal", "city"}) {
          for (const auto& s : p.at(scope)) {
            const int hour = s.at("hour").get<int>();
            for (const char* f : {"trip_count", "fare_per_minute", "avg_fare", "avg_duration_min"}) {
              candidates.push_back({"hourly/" + scope + "/" + std::to_string(hour) + "/" + f, s.at(f),
                                    scope_trips(scope),
                                    [hour](const Trip& t) { return hour_of(t.start_ts) == hour; }, f});
            }
          }
        }
        break;
      case ProbeKind::calendar_month:
        for (const auto& c : p.at("cells")) {
          if (c.at("stat").is_null()) continue;
          const std::string date_text = c.at("date").get<std::string>();
          const Date date = *parse_date(date_text);
          for (const char* f : {"trip_count", "total_earnings", "fare_per_minute", "avg_fare"}) {
            candidates.push_back({"calendar/" + date_text + "/" + f, c.at("stat").at(f), personal,
                                  [date, offset](const Trip& t) {
                                    return date_of(t.start_ts, offset) == date;
                                  },
                                  f});
          }
        }
        break;
      case ProbeKind::calendar_week:
        for (const std::string scope : {"personal", "city"}) {
          for (const auto& s : p.at(scope)) {
            const Weekday wd = *parse_weekday(s.at("weekday").get<std::string>());
            for (const char* f : {"total_trips", "avg_fare", "avg_duration_min", "fare_per_minute"}) {
              candidates.push_back({"week/" + scope + "/" + std::string(weekday_name(wd)) + "/" + f,
                                    s.at(f), scope_trips(scope),
                                    [wd, offset](const Trip& t) {
                                      return weekday_of(t.start_ts, offset) == wd;
                                    },
                                    f});
            }
          }
        }
        break;
      case ProbeKind::map:
        for (const std::string scope : {"personal", "city"}) {
          const json& maps = p.at(scope);
          static constexpr const char* kFields[] = {"trip_count", "fare_per_minute", "avg_fare",
                                                    "avg_miles_per_trip"};
          for (const auto& [id, s] : maps.at("pickup").at("entries").items()) {
            for (const char* f : kFields) {
              candidates.push_back({"map/" + scope + "/pickup/" + id + "/" + f, s.at(f),
                                    scope_trips(scope),
                                    [id = id](const Trip& t) { return t.pickup_area == id; }, f});
            }
          }
          for (const auto& [id, s] : maps.at("dropoff").at("entries").items()) {
            for (const char* f : kFields) {
              candidates.push_back({"map/" + scope + "/dropoff/" + id + "/" + f, s.at(f),
                                    scope_trips(scope),
                                    [id = id](const Trip& t) { return t.dropoff_area == id; }, f});
            }
          }
          for (const auto& [pid, linked] : maps.at("linked").items()) {
            for (const auto& [id, s] : linked.at("entries").items()) {
              for (const char* f : kFields) {
                candidates.push_back(
                    {"map/" + scope + "/linked/" + pid + "/" + id + "/" + f, s.at(f),
                     scope_trips(scope),
                     [pid = pid, id = id](const Trip& t) {
                       return t.pickup_area == pid && t.dropoff_area == id;
                     },
                     f});
              }
            }
          }
        }
        break;
      case ProbeKind::animation:
      case ProbeKind::planner_defaults:
        break;
    }
  }

  std::mt19937_64 rng(seed);
  std::shuffle(candidates.begin(), candidates.end(), rng);
  VerifyReport report;
  for (std::size_t i = 0; i < std::min(cells, candidates.size()); ++i) {
    const Cell& cell = candidates[i];
    const json expected = recompute(cell, ctx.metrics);
    ++report.checked;
    if (!same_value(cell.value, expected)) {
      report.mismatches.push_back(cell.label + ": payload " + cell.value.dump() + ", recomputed " +
                                  expected.dump());
    }
  }
  return report;
}

}  // namespace rideprobe
