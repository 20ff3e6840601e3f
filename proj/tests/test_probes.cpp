#include <doctest.h>

#include <fstream>
#include <random>

#include "oracles.hpp"
#include "rideprobe/probes.hpp"
#include "synth.hpp"
#include "tempdir.hpp"

using namespace rideprobe;
using rideprobe::testing::TempDir;
using namespace std::chrono;
using nlohmann::json;

namespace {

const std::vector<std::string> kAreas = {"zone_01", "zone_02", "zone_03", "zone_04", "zone_05", "zone_06"};

LocalTime at(const char* text) { return *parse_timestamp(text); }

struct Corpus {
  std::vector<Trip> personal;
  std::vector<Trip> city;
  NeighborhoodSet boundaries;
};

Corpus corpus(std::uint64_t seed, std::size_t personal = 80, std::size_t city = 600) {
  std::mt19937_64 rng(seed);
  Corpus c;
  c.boundaries = synth::grid_neighborhoods(2, 3, rng);
  c.personal = oracle::random_corpus(rng, personal, kAreas, false);
  c.city = oracle::random_corpus(rng, city, kAreas, true);
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("hourly probe: both series, gaps are null") {
  auto c = corpus(1, 3);
  c.personal = {c.personal[0]};
  const int hour = oracle::wall_hour(c.personal[0].start_ts);
  const auto a = build_hourly_probe(c.personal, c.city);
  CHECK(a.kind == ProbeKind::hourly);
  CHECK(a.scope == ProbeScope::both);
  REQUIRE(a.payload["personal"].size() == 24);
  REQUIRE(a.payload["city"].size() == 24);
  CHECK(a.payload["personal_gaps"].size() == 23);
  for (const auto& s : a.payload["personal"]) {
    if (s["hour"] == hour) {
      CHECK(s["trip_count"] == 1);
      CHECK(s["avg_fare"].get<double>() == c.personal[0].fare);
    } else {
      CHECK(s["trip_count"] == 0);
      CHECK(s["avg_fare"].is_null());
      CHECK(s["fare_per_minute"].is_null());
    }
  }
  CHECK(a.meta.row_counts.at("personal_trips") == 1);
  CHECK(a.meta.row_counts.at("city_trips") == c.city.size());
  CHECK(a.meta.data_month == "2022-06");
}

TEST_CASE("calendar probe: month grid and weekday matrix") {
  const auto c = corpus(2);
  const DateRange range{year{2022} / 6 / 1, year{2022} / 6 / 30};
  const auto p = build_calendar_probe(c.personal, c.city, range);
  const json& cells = p.month.payload["cells"];
  REQUIRE(cells.size() == 30);
  CHECK(cells[0]["date"] == "2022-06-01");
  CHECK(cells[0]["weekday"] == "wed");
  std::size_t trips = 0;
  for (const auto& cell : cells) {
    if (!cell["stat"].is_null()) trips += cell["stat"]["trip_count"].get<std::size_t>();
  }
  CHECK(trips == c.personal.size());  // corpus spans 2022-06-01..28
  CHECK(p.week.payload["personal"].size() == 7);
  CHECK(p.week.payload["city"].size() == 7);
  CHECK(p.week.payload["variables"].size() == 4);
  std::size_t week_total = 0;
  for (const auto& d : p.week.payload["city"]) week_total += d["total_trips"].get<std::size_t>();
  CHECK(week_total == c.city.size());
}

TEST_CASE("map probe carries geometry and a linked map per pickup") {
  const auto c = corpus(3);
  const auto a = build_map_probe(c.personal, c.city, c.boundaries);
  CHECK(a.payload["geometry"].size() == c.boundaries.entries.size());
  for (const char* scope : {"personal", "city"}) {
    const auto& trips = std::string(scope) == "personal" ? c.personal : c.city;
    const json& m = a.payload[scope];
    CHECK(m["pickup"] == to_json(neighborhood_stats(trips, TripEnd::pickup)));
    CHECK(m["linked"].size() == m["pickup"]["entries"].size());
    for (const auto& [id, linked] : m["linked"].items()) {
      std::vector<Trip> subset;
      for (const auto& t : trips) {
        if (t.pickup_area == id) subset.push_back(t);
      }
      CHECK(linked == to_json(neighborhood_stats(subset, TripEnd::dropoff)));
    }
  }
}

TEST_CASE("animation interpolates between pings") {
  PingSeries s;
  s.pings = {{at("2022-06-30T09:00:00"), {41.0, -87.0}}, {at("2022-06-30T09:01:00"), {41.2, -87.4}}};
  const auto frames = animation_frames(s, {}, year{2022} / 6 / 30, 30);
  REQUIRE(frames.size() == 3);
  CHECK(frames[1].t == at("2022-06-30T09:00:30"));
  CHECK(frames[1].point.lat == doctest::Approx(41.1));
  CHECK(frames[1].point.lon == doctest::Approx(-87.2));
  CHECK(frames[2].point == s.pings[1].point);
  CHECK_FALSE(frames[1].held);
}

TEST_CASE("animation holds across long gaps and marks trips") {
  PingSeries s;
  s.pings = {{at("2022-06-30T09:00:00"), {41.0, -87.0}},
             {at("2022-06-30T09:30:00"), {41.5, -87.5}},
             {at("2022-06-30T09:31:00"), {41.6, -87.6}}};
  Trip t;
  t.start_ts = at("2022-06-30T09:30:00");
  t.end_ts = at("2022-06-30T09:30:30");
  const std::vector<Trip> trips{t};
  const auto frames = animation_frames(s, trips, year{2022} / 6 / 30, 60);
  REQUIRE(frames.size() == 32);
  CHECK(frames[10].held);
  CHECK(frames[10].point == s.pings[0].point);
  CHECK_FALSE(frames[29].trip_active);
  CHECK(frames[30].trip_active);
  CHECK_FALSE(frames[31].trip_active);
}

TEST_CASE("animation frame count is floor(span / step) + 1") {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> secs(0, 86399);
  std::uniform_int_distribution<int> step(1, 600);
  for (int c = 0; c < 200; ++c) {
    PingSeries s;
    const auto day = local_days{year{2022} / 6 / 30};
    for (int i = 0; i < 2 + c % 10; ++i) s.pings.push_back({day + seconds{secs(rng)}, {41.8, -87.6}});
    std::sort(s.pings.begin(), s.pings.end(), [](auto& a, auto& b) { return a.ts < b.ts; });
    const int st = step(rng);
    const auto frames = animation_frames(s, {}, year{2022} / 6 / 30, st);
    const auto span = (s.pings.back().ts - s.pings.front().ts).count();
    CHECK(frames.size() == static_cast<std::size_t>(span / st + 1));
    for (std::size_t i = 1; i < frames.size(); ++i) CHECK((frames[i].t - frames[i - 1].t).count() == st);
  }
}

TEST_CASE("empty day lists the dates that have pings") {
  PingSeries s;
  s.pings = {{at("2022-06-29T09:00:00"), {41.0, -87.0}}, {at("2022-06-29T09:01:00"), {41.0, -87.0}},
             {at("2022-06-30T09:00:00"), {41.0, -87.0}}};
  CHECK(ping_dates(s) == std::vector<Date>{year{2022} / 6 / 29, year{2022} / 6 / 30});
  CHECK(ping_dates(s, 10) == std::vector<Date>{year{2022} / 6 / 28, year{2022} / 6 / 29});
  try {
    animation_frames(s, {}, year{2022} / 6 / 1);
    FAIL("expected EmptyDayError");
  } catch (const EmptyDayError& e) {
    CHECK(e.available().size() == 2);
    CHECK(std::string(e.what()).find("2022-06-29") != std::string::npos);
  }
  CHECK_THROWS_AS(animation_frames(s, {}, year{2022} / 6 / 30), EmptyDayError);  // one ping only
}

TEST_CASE("probe files round trip and are byte-stable") {
  TempDir dir("probes_io");
  const auto c = corpus(5);
  const std::vector<ProbeArtifact> artifacts = {build_hourly_probe(c.personal, c.city),
                                                build_map_probe(c.personal, c.city, c.boundaries)};
  const std::string text = serialize_probes(artifacts);
  CHECK(text.rfind("{\n  \"artifacts\": [", 0) == 0);
  CHECK(text.back() == '\n');
  CHECK(parse_probes(text) == artifacts);

  export_probes(artifacts, dir / "a.json");
  export_probes(std::vector<ProbeArtifact>{build_hourly_probe(c.personal, c.city),
                                           build_map_probe(c.personal, c.city, c.boundaries)},
                dir / "b.json");
  CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
  CHECK(import_probes(dir / "a.json") == artifacts);

  export_probe(artifacts[0], dir / "one.json");
  CHECK(import_probes(dir / "one.json").at(0) == artifacts[0]);
}

TEST_CASE("probe files with another schema are refused") {
  CHECK_THROWS_AS(parse_probes(R"({"schema":"probe/2","artifacts":[]})"), VersionError);
  CHECK_THROWS_AS(parse_probes(R"({"artifacts":[]})"), VersionError);
  CHECK_THROWS_AS(parse_probes("not json"), SchemaError);
  CHECK_THROWS_AS(parse_probes(R"({"schema":"probe/1","artifacts":[{"kind":"pie"}]})"), SchemaError);
}

TEST_CASE("planner defaults probe") {
  const auto c = corpus(6);
  const auto a = build_planner_defaults_probe(PlannerInput{}, c.city, c.boundaries);
  CHECK(a.payload["defaults"]["platform_cut"] == 0.25);
  CHECK(a.payload["defaults"]["tpc"] == 0.55);
  CHECK(a.payload["neighborhoods"].size() == c.boundaries.entries.size());
  CHECK(a.payload["weather_available"] == true);
}

TEST_CASE("verifier recomputes cells and catches tampering") {
  const auto c = corpus(7);
  ProbeContext ctx;
  ctx.day_start_offset_hours = 4;
  auto cal = build_calendar_probe(c.personal, c.city, {year{2022} / 6 / 1, year{2022} / 6 / 30}, ctx);
  std::vector<ProbeArtifact> artifacts = {build_hourly_probe(c.personal, c.city, ctx), cal.month, cal.week,
                                          build_map_probe(c.personal, c.city, c.boundaries, ctx)};
  const auto good = verify_probes(artifacts, c.personal, c.city, ctx, 500);
  CHECK(good.checked == 500);
  CHECK(good.ok());

  for (auto& s : artifacts[0].payload["city"]) s["avg_fare"] = 1e6;
  const auto bad = verify_probes(artifacts, c.personal, c.city, ctx, 100000);
  CHECK(bad.mismatches.size() == 24);
}
