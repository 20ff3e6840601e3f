#include "rideprobe/commands.hpp"

#include <algorithm>
#include <csignal>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "rideprobe/csv.hpp"
#include "rideprobe/geo.hpp"
#include "rideprobe/ingest.hpp"
#include "rideprobe/planner_json.hpp"
#include "rideprobe/service.hpp"

namespace rideprobe {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

json diagnostics_json(const LoadDiagnostics& d) {
  return {{"raw_rows", d.raw_rows},
          {"loaded", d.loaded},
          {"skipped", d.skipped},
          {"excluded_by_month", d.excluded_by_month},
          {"excluded_by_status", d.excluded_by_status},
          {"missing_location", d.missing_location},
          {"dropped_old", d.dropped_old},
          {"duplicates_replaced", d.duplicates_replaced}};
}

json source_entry(const fs::path& path) {
  return {{"file", path.filename().string()}, {"sha256", sha256_file(path)}};
}

/// Re-throws a loader failure with the source name in front, keeping the type family.
template <class F>
auto load_source(const char* name, F&& load) {
  try {
    return load();
  } catch (const NoMatchingTripsError&) {
    throw;
  } catch (const InputError& e) {
    throw InputError(std::string(name) + ": " + e.what());
  }
}

void append(std::vector<std::string>& out, const char* source, const std::vector<std::string>& in) {
  for (const auto& w : in) out.push_back(std::string(source) + ": " + w);
}

Date first_of_month(Date d) { return d.year() / d.month() / std::chrono::day{1}; }
Date last_of_month(Date d) {
  return Date{d.year() / d.month() / std::chrono::last};
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, sep)) {
    cur = std::string(trim(cur));
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

int to_hour(const std::string& s) {
  auto v = parse_double(s);
  if (!v || *v != static_cast<int>(*v) || *v < 0 || *v > 23) {
    throw ValidationError("hours", "'" + s + "' is not an hour 0-23");
  }
  return static_cast<int>(*v);
}

/// "8-11,17" -> {8,9,10,11,17}. Ranges are inclusive and may wrap midnight ("22-2").
std::set<int> parse_hours(const std::string& text) {
  std::set<int> out;
  for (const auto& part : split(text, ',')) {
    const auto dash = part.find('-');
    if (dash == std::string::npos) {
      out.insert(to_hour(part));
      continue;
    }
    const int from = to_hour(part.substr(0, dash));
    const int to = to_hour(part.substr(dash + 1));
    for (int h = from;; h = (h + 1) % 24) {
      out.insert(h);
      if (h == to) break;
    }
  }
  return out;
}

std::set<Weekday> parse_days(const std::string& text) {
  std::set<Weekday> out;
  for (const auto& part : split(text, ',')) {
    auto wd = parse_weekday(part);
    if (!wd) throw ValidationError("days", "'" + part + "' is not a weekday (mon..sun)");
    out.insert(*wd);
  }
  return out;
}

struct PlanFlags {
  std::optional<double> hours_per_week, gas_price, mpg, insurance, misc, platform_cut, tpc, temp_min,
      temp_max;
  std::optional<std::string> days, hours, neighborhoods, precip;
  std::optional<bool> tips_subject_to_cut, include_deadhead;
  bool json = false;
};

PlannerInput input_from_flags(const PlanFlags& f, PlannerInput in) {
  std::map<std::string, std::string> errors;
  if (f.hours_per_week) in.hours_per_week = *f.hours_per_week;
  if (f.gas_price) in.gas_price = *f.gas_price;
  if (f.mpg) in.mpg = *f.mpg;
  if (f.insurance) in.insurance_weekly = *f.insurance;
  if (f.misc) in.misc_weekly = *f.misc;
  if (f.platform_cut) in.platform_cut = *f.platform_cut;
  if (f.tpc) in.tpc = *f.tpc;
  if (f.tips_subject_to_cut) in.tips_subject_to_cut = *f.tips_subject_to_cut;
  if (f.include_deadhead) in.include_deadhead_miles = *f.include_deadhead;
  try {
    if (f.days) in.days = parse_days(*f.days);
  } catch (const ValidationError& e) {
    errors.insert(e.fields().begin(), e.fields().end());
  }
  try {
    if (f.hours) in.hours = parse_hours(*f.hours);
  } catch (const ValidationError& e) {
    errors.insert(e.fields().begin(), e.fields().end());
  }
  if (f.neighborhoods) {
    in.pickup_neighborhoods.clear();
    for (const auto& id : split(*f.neighborhoods, ',')) in.pickup_neighborhoods.insert(id);
  }
  if (f.temp_min || f.temp_max) {
    if (!f.temp_min || !f.temp_max) {
      errors["temp_range_f"] = "give both --temp-min and --temp-max";
    } else {
      in.temp_range_f = TempRange{*f.temp_min, *f.temp_max};
    }
  }
  if (f.precip) {
    if (*f.precip == "any") {
      in.precip = Precip::any;
    } else if (*f.precip == "dry") {
      in.precip = Precip::dry;
    } else if (*f.precip == "wet") {
      in.precip = Precip::wet;
    } else {
      errors["precip"] = "must be any, dry or wet";
    }
  }
  for (auto& [field, why] : validate(in)) errors.emplace(field, why);
  if (!errors.empty()) throw ValidationError(std::move(errors));
  return in;
}

HttpServer* g_server = nullptr;

extern "C" void stop_server(int) {
  if (g_server != nullptr) g_server->stop();
}

}  // namespace

IngestReport cmd_ingest(const AppConfig& config) {
  check_sources_exist(config);
  IngestReport report;
  Store store;

  auto boundaries = load_source("boundaries", [&] {
    return load_boundaries(config.boundaries, config.boundary_name_property);
  });
  append(report.warnings, "boundaries", boundaries.warnings);
  store.boundaries = std::move(boundaries.set);

  auto city = load_source("city", [&] {
    return load_city_trips(config.city.path, config.city.columns, config.city_month);
  });
  append(report.warnings, "city", city.diagnostics.warnings);
  auto personal = load_source("personal", [&] {
    return load_personal_trips(config.personal.path, config.personal.columns);
  });
  append(report.warnings, "personal", personal.diagnostics.warnings);
  auto weather = load_source("weather", [&] {
    return load_weather(config.weather.path, config.weather.columns);
  });
  append(report.warnings, "weather", weather.diagnostics.warnings);
  store.weather = std::move(weather.series);

  json classification;
  auto enrich = [&](const char* name, std::vector<Trip> trips) {
    auto classified = classify_trips(std::move(trips), store.boundaries, config.workers);
    auto attached = attach_weather(std::move(classified.trips), store.weather);
    classification[name] = {{"classified_pickups", classified.classified_pickups},
                            {"unclassified_pickups", classified.unclassified_pickups},
                            {"classified_dropoffs", classified.classified_dropoffs},
                            {"unclassified_dropoffs", classified.unclassified_dropoffs},
                            {"weather_unmatched", attached.unmatched}};
    if (attached.unmatched > 0) {
      report.warnings.push_back(std::string(name) + ": " + std::to_string(attached.unmatched) +
                                " trips have no weather record for their start hour");
    }
    return std::move(attached.trips);
  };
  store.city_trips = enrich("city", std::move(city.trips));
  store.personal_trips = enrich("personal", std::move(personal.trips));

  json manifest;
  manifest["sources"] = {
      {"city", source_entry(config.city.path)},
      {"personal", source_entry(config.personal.path)},
      {"boundaries", source_entry(config.boundaries)},
      {"weather", source_entry(config.weather.path)},
  };
  manifest["sources"]["city"]["diagnostics"] = diagnostics_json(city.diagnostics);
  manifest["sources"]["personal"]["diagnostics"] = diagnostics_json(personal.diagnostics);
  manifest["sources"]["weather"]["diagnostics"] = diagnostics_json(weather.diagnostics);
  manifest["sources"]["boundaries"]["features"] = store.boundaries.entries.size();
  manifest["pings"] = nullptr;
  if (config.pings) {
    auto pings = load_source("pings", [&] {
      return load_location_pings(config.pings->path, config.pings->columns);
    });
    append(report.warnings, "pings", pings.diagnostics.warnings);
    manifest["pings"] = source_entry(config.pings->path);
    manifest["pings"]["diagnostics"] = diagnostics_json(pings.diagnostics);
    store.pings = std::move(pings.series);
  }
  manifest["classification"] = std::move(classification);
  manifest["settings"] = {
      {"timezone", config.timezone},
      {"city_month", config.city_month ? json(format_year_month(*config.city_month)) : json(nullptr)},
      {"boundary_name_property", config.boundary_name_property},
  };
  manifest["warnings"] = report.warnings;

  report.manifest_hash = write_store(config.store_dir, store, std::move(manifest));
  report.store_dir = config.store_dir;
  return report;
}

DateRange calendar_range(const Store& store, int day_start_offset_hours) {
  const auto& trips = store.personal_trips.empty() ? store.city_trips : store.personal_trips;
  if (trips.empty()) throw EmptyInputError("store has no trips to lay out a calendar");
  std::chrono::sys_days lo = std::chrono::sys_days::max();
  std::chrono::sys_days hi = std::chrono::sys_days::min();
  for (const auto& t : trips) {
    const std::chrono::sys_days d{date_of(t.start_ts, day_start_offset_hours)};
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  return DateRange{first_of_month(Date{lo}), last_of_month(Date{hi})};
}

ProbesReport cmd_probes(const AppConfig& config, const Store& store, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create probe directory " + out_dir.string() + ": " + ec.message());

  ProbeContext ctx;
  ctx.day_start_offset_hours = config.day_start_offset;
  ctx.n_shades = config.n_shades;
  ctx.metrics = config.metrics;

  ProbesReport report;
  std::vector<ProbeArtifact> all;
  auto write = [&](const char* name, std::vector<ProbeArtifact> artifacts) {
    const fs::path path = out_dir / name;
    export_probes(artifacts, path);
    report.files.push_back(path);
    all.insert(all.end(), artifacts.begin(), artifacts.end());
  };

  write("hourly.json", {build_hourly_probe(store.personal_trips, store.city_trips, ctx)});
  auto calendar = build_calendar_probe(store.personal_trips, store.city_trips,
                                       calendar_range(store, config.day_start_offset), ctx);
  write("calendar.json", {std::move(calendar.month), std::move(calendar.week)});
  write("map.json", {build_map_probe(store.personal_trips, store.city_trips, store.boundaries, ctx)});
  write("planner_defaults.json",
        {build_planner_defaults_probe(config.planner_defaults, store.city_trips, store.boundaries)});

  const fs::path animation = out_dir / "animation.json";
  const auto days = store.pings ? ping_dates(*store.pings, config.day_start_offset) : std::vector<Date>{};
  std::optional<Date> day;
  if (store.pings) {
    // Most recent day with enough pings to animate.
    for (auto it = days.rbegin(); it != days.rend() && !day; ++it) {
      try {
        animation_frames(*store.pings, {}, *it, config.frame_step_s, config.day_start_offset);
        day = *it;
      } catch (const EmptyDayError&) {
      }
    }
  }
  if (day) {
    write("animation.json", {build_animation_probe(*store.pings, store.personal_trips, *day,
                                                   config.frame_step_s, config.day_start_offset)});
  } else {
    fs::remove(animation, ec);
    report.warnings.push_back(store.pings ? "no day has two or more pings; animation probe skipped"
                                          : "no location pings configured; animation probe skipped");
  }

  report.verify = verify_probes(all, store.personal_trips, store.city_trips, ctx);
  return report;
}

PlannerOutput cmd_plan(const AppConfig& config, const Store& store, const PlannerInput& input) {
  return simulate(store.city_trips, input, config.day_start_offset);
}

std::string format_plan_table(const PlannerOutput& o) {
  auto fixed = [](double v, int digits) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
  };
  const std::vector<std::pair<std::string, std::string>> rows = {
      {"Projected trips / week", fixed(o.pt, 1)},
      {"Gross fares", format_dollars(o.gross_fares)},
      {"Fares after platform cut", format_dollars(o.driver_fares)},
      {"Tips", format_dollars(o.tips)},
      {"Paid miles", fixed(o.paid_miles, 1)},
      {"Total miles", fixed(o.total_miles, 1)},
      {"Gas", format_dollars(o.gas_cost)},
      {"Insurance + other", format_dollars(o.fixed_cost)},
      {"Net earnings", format_dollars(o.net)},
      {"Matching trips", std::to_string(o.subset.n)},
      {"Average fare", format_dollars(o.subset.af)},
      {"Average trip (min)", fixed(o.subset.atd, 1)},
  };
  std::size_t left = 0, right = 0;
  for (const auto& [k, v] : rows) {
    left = std::max(left, k.size());
    right = std::max(right, v.size());
  }
  std::ostringstream out;
  for (const auto& [k, v] : rows) {
    out << std::left << std::setw(static_cast<int>(left)) << k << "  " << std::right
        << std::setw(static_cast<int>(right)) << v << '\n';
  }
  return out.str();
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"rideshare data probes and work planner", "rideprobe"};
  app.require_subcommand(1);
  std::string config_path;

  auto* ingest = app.add_subcommand("ingest", "load sources and write the store");
  ingest->add_option("--config", config_path, "config file")->required();

  auto* probes = app.add_subcommand("probes", "build probe files from the store");
  probes->add_option("--config", config_path, "config file")->required();
  std::string probe_out;
  probes->add_option("--out", probe_out, "output directory (default: probe_dir from config)");

  auto* plan = app.add_subcommand("plan", "simulate a weekly schedule");
  plan->add_option("--config", config_path, "config file")->required();
  PlanFlags flags;
  plan->add_option("--hours-per-week", flags.hours_per_week);
  plan->add_option("--days", flags.days, "e.g. mon,tue,fri");
  plan->add_option("--hours", flags.hours, "e.g. 8-11,17-19 (inclusive)");
  plan->add_option("--neighborhoods", flags.neighborhoods, "pickup neighborhood ids, comma separated");
  plan->add_option("--temp-min", flags.temp_min, "degrees F");
  plan->add_option("--temp-max", flags.temp_max, "degrees F");
  plan->add_option("--precip", flags.precip, "any | dry | wet");
  plan->add_option("--gas-price", flags.gas_price, "$ per gallon");
  plan->add_option("--mpg", flags.mpg);
  plan->add_option("--insurance", flags.insurance, "$ per week");
  plan->add_option("--misc", flags.misc, "other costs, $ per week");
  plan->add_option("--platform-cut", flags.platform_cut, "fraction kept by the platform");
  plan->add_option("--tpc", flags.tpc, "fraction of time with a passenger");
  plan->add_option("--tips-subject-to-cut", flags.tips_subject_to_cut);
  plan->add_option("--include-deadhead-miles", flags.include_deadhead);
  plan->add_flag("--json", flags.json, "print the output document as JSON");

  auto* serve = app.add_subcommand("serve", "serve probes and the planner over HTTP");
  serve->add_option("--config", config_path, "config file")->required();
  std::optional<std::string> host;
  std::optional<int> port;
  bool allow_remote = false;
  serve->add_option("--host", host);
  serve->add_option("--port", port);
  serve->add_flag("--allow-remote", allow_remote, "permit binding a non-loopback address");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    const AppConfig config = load_config(config_path);
    if (ingest->parsed()) {
      const auto report = cmd_ingest(config);
      for (const auto& w : report.warnings) err << "warning: " << w << '\n';
      out << "store " << report.store_dir.string() << '\n';
      out << "manifest_hash " << report.manifest_hash << '\n';
      return kExitOk;
    }
    const Store store = load_store(config.store_dir);
    if (probes->parsed()) {
      const fs::path dir = probe_out.empty() ? config.probe_dir : fs::path(probe_out);
      const auto report = cmd_probes(config, store, dir);
      for (const auto& w : report.warnings) err << "warning: " << w << '\n';
      for (const auto& f : report.files) out << f.string() << '\n';
      out << "verified " << report.verify.checked << " cells, " << report.verify.mismatches.size()
          << " mismatches\n";
      for (const auto& m : report.verify.mismatches) err << "mismatch: " << m << '\n';
      return report.verify.ok() ? kExitOk : kExitInternal;
    }
    if (plan->parsed()) {
      const PlannerInput input = input_from_flags(flags, config.planner_defaults);
      const PlannerOutput output = cmd_plan(config, store, input);
      if (flags.json) {
        out << to_json(output).dump(2) << '\n';
      } else {
        out << format_plan_table(output) << '\n' << output.summary << '\n';
      }
      return kExitOk;
    }
    if (serve->parsed()) {
      ProbeService service(config, store, config.probe_dir);
      HttpServer server(service);
      const std::string h = host.value_or(config.host);
      const int bound = server.bind(h, port.value_or(config.port), allow_remote || config.allow_remote);
      out << "listening on http://" << h << ':' << bound << std::endl;
      g_server = &server;
      std::signal(SIGINT, stop_server);
      std::signal(SIGTERM, stop_server);
      server.listen();
      g_server = nullptr;
      return kExitOk;
    }
  } catch (const ValidationError& e) {
    err << "error: invalid input\n";
    for (const auto& [field, why] : e.fields()) err << "  " << field << ": " << why << '\n';
    return kExitInputError;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const NoMatchingTripsError& e) {
    err << "error: " << e.what() << '\n' << "filters: " << filter_echo(e.filters()).dump() << '\n';
    return kExitEmptyResult;
  } catch (const InvalidStatsError& e) {
    err << "error: " << e.what() << '\n';
    return kExitEmptyResult;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace rideprobe
