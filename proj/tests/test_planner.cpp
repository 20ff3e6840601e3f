#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "rideprobe/error.hpp"
#include "rideprobe/planner.hpp"
#include "rideprobe/planner_json.hpp"

using namespace rideprobe;
using namespace std::chrono;

namespace {

const std::vector<std::string> kAreas = {"edgewater", "lincoln_park", "loop", "pilsen"};

LocalTime at(const char* text) { return *parse_timestamp(text); }

Trip trip(const char* start, double minutes, double fare) {
  Trip t;
  t.start_ts = at(start);
  t.duration_s = minutes * 60.0;
  t.end_ts = t.start_ts + seconds{static_cast<long long>(t.duration_s)};
  t.fare = fare;
  t.miles = minutes / 3.0;
  return t;
}

void check_against_oracle(const PlannerOutput& out, const oracle::PlanTruth& truth) {
  CHECK(out.subset.n == truth.n);
  CHECK(oracle::close(out.subset.af, truth.af));
  CHECK(oracle::close(out.subset.atd, truth.atd));
  CHECK(oracle::close(out.subset.avg_tip, truth.avg_tip));
  CHECK(oracle::close(out.subset.avg_miles, truth.avg_miles));
  CHECK(oracle::close(out.pt, truth.pt));
  CHECK(oracle::close(out.gross_fares, truth.gross));
  CHECK(oracle::close(out.driver_fares, truth.driver_fares));
  CHECK(oracle::close(out.tips, truth.tips));
  CHECK(oracle::close(out.paid_miles, truth.paid_miles));
  CHECK(oracle::close(out.total_miles, truth.total_miles));
  CHECK(oracle::close(out.gas_cost, truth.gas));
  CHECK(oracle::close(out.fixed_cost, truth.fixed));
  CHECK(oracle::close(out.net, truth.net));
}

}  // namespace

TEST_CASE("defaults") {
  const PlannerInput in;
  CHECK(in.platform_cut == 0.25);
  CHECK(in.tpc == 0.55);
  CHECK(in.hours_per_week == 40.0);
  CHECK(in.days.size() == 7);
  CHECK(in.hours.size() == 24);
  CHECK(in.precip == Precip::any);
  CHECK_FALSE(in.tips_subject_to_cut);
  CHECK(in.include_deadhead_miles);
  CHECK(validate(in).empty());
}

TEST_CASE("weekly projection anchor") {
  SubsetStats s;
  s.n = 100;
  s.af = 15.0;
  s.atd = 20.0;
  PlannerInput in;
  in.tpc = 0.55;
  in.hours_per_week = 40.0;
  const Projection p = project(s, in);
  // 60 / 20 * 0.55 * 40 trips at $15 each
  CHECK(oracle::close(p.pt, 66.0));
  CHECK(oracle::close(p.gross_fares, 990.0));
}

TEST_CASE("expenses") {
  Projection p;
  p.gross_fares = 1000;
  p.tips = 100;
  p.paid_miles = 220;
  p.total_miles = 400;
  PlannerInput in;
  in.gas_price = 4.0;
  in.mpg = 25.0;
  in.insurance_weekly = 50;
  in.misc_weekly = 20;
  const auto e = expenses(p, in);
  CHECK(e.gas_cost == doctest::Approx(64.0));
  CHECK(e.fixed_cost == 70.0);
  CHECK(e.driver_fares == doctest::Approx(750.0));
  CHECK(e.net == doctest::Approx(750.0 + 100.0 - 64.0 - 70.0));
  in.tips_subject_to_cut = true;
  CHECK(expenses(p, in).net == doctest::Approx(750.0 + 75.0 - 64.0 - 70.0));
}

TEST_CASE("validation names each bad field") {
  PlannerInput in;
  in.tpc = 0.0;
  in.platform_cut = 1.0;
  in.hours_per_week = 0.0;
  in.days.clear();
  in.hours = {25};
  in.mpg = 0;
  in.temp_range_f = TempRange{80, 60};
  in.gas_price = -1;
  const auto errors = validate(in);
  for (const char* f : {"tpc", "platform_cut", "hours_per_week", "days", "hours", "mpg", "temp_range_f", "gas_price"}) {
    CHECK_MESSAGE(errors.count(f) == 1, f);
  }
  PlannerInput edge;
  edge.tpc = 1.0;
  edge.platform_cut = 0.0;
  CHECK(validate(edge).empty());
}

TEST_CASE("filters use the driver's weekday and the wall-clock hour") {
  // 2022-06-07 is a Tuesday; 03:30 belongs to Monday under a 4 AM day start.
  const std::vector<Trip> trips = {trip("2022-06-07T03:30:00", 10, 10), trip("2022-06-07T09:00:00", 10, 20)};
  PlannerInput in;
  in.days = {Weekday::mon};
  CHECK(filter_trips(trips, in, 4).trips.size() == 1);
  CHECK(filter_trips(trips, in, 0).trips.empty());
  in.days = all_weekdays();
  in.hours = {3};
  const auto r = filter_trips(trips, in, 4);
  REQUIRE(r.trips.size() == 1);
  CHECK(r.trips[0]->fare == 10);
}

TEST_CASE("weather filters") {
  std::vector<Trip> trips = {trip("2022-06-07T09:00:00", 10, 10), trip("2022-06-07T10:00:00", 10, 20)};
  PlannerInput in;
  in.precip = Precip::wet;
  const auto ignored = filter_trips(trips, in);
  CHECK(ignored.weather_filter_ignored);
  CHECK(ignored.trips.size() == 2);

  trips[0].temp_f = 70;
  trips[0].precip_in = 0.2;
  const auto applied = filter_trips(trips, in);
  CHECK_FALSE(applied.weather_filter_ignored);
  REQUIRE(applied.trips.size() == 1);
  CHECK(applied.trips[0]->fare == 10);

  trips[1].temp_f = 50;
  trips[1].precip_in = 0.0;
  in.precip = Precip::dry;
  CHECK(filter_trips(trips, in).trips.size() == 1);
  in.precip = Precip::any;
  in.temp_range_f = TempRange{60, 70};
  CHECK(filter_trips(trips, in).trips.size() == 1);
  in.temp_range_f = TempRange{50, 70};
  CHECK(filter_trips(trips, in).trips.size() == 2);
}

TEST_CASE("empty and degenerate subsets") {
  const std::vector<Trip> trips = {trip("2022-06-07T09:00:00", 0, 10)};
  PlannerInput in;
  in.pickup_neighborhoods = {"loop"};
  try {
    simulate(trips, in);
    FAIL("expected NoMatchingTripsError");
  } catch (const NoMatchingTripsError& e) {
    CHECK(e.filters() == in);
  }
  CHECK_THROWS_AS(simulate(trips, PlannerInput{}), InvalidStatsError);
  CHECK_THROWS_AS(subset_stats(std::span<const Trip>{}), NoMatchingTripsError);
}

TEST_CASE("simulate matches the row-scan oracle") {
  std::mt19937_64 rng(41);
  int compared = 0;
  for (int c = 0; c < 200; ++c) {
    const auto trips = oracle::random_corpus(rng, 50 + c * 13 % 2000, kAreas, c % 4 != 0);
    const PlannerInput in = oracle::random_input(rng, kAreas);
    const int offset = c % 5 == 0 ? 4 : 0;
    const auto truth = oracle::naive_simulate(trips, in, offset);
    if (!truth) {
      CHECK_THROWS(simulate(trips, in, offset));
      continue;
    }
    ++compared;
    check_against_oracle(simulate(trips, in, offset), *truth);
  }
  CHECK(compared > 150);
}

TEST_CASE("monotone and linear in the weekly knobs") {
  std::mt19937_64 rng(42);
  for (int c = 0; c < 200; ++c) {
    const auto trips = oracle::random_corpus(rng, 300, kAreas, false);
    PlannerInput in = oracle::random_input(rng, kAreas);
    in.pickup_neighborhoods.clear();
    in.temp_range_f.reset();
    in.precip = Precip::any;
    in.days = all_weekdays();
    const auto base = simulate(trips, in);

    PlannerInput more_hours = in;
    more_hours.hours_per_week = std::min(168.0, in.hours_per_week * 2);
    const auto doubled = simulate(trips, more_hours);
    const double k = more_hours.hours_per_week / in.hours_per_week;
    CHECK(oracle::close(doubled.pt, base.pt * k));
    CHECK(oracle::close(doubled.gross_fares, base.gross_fares * k));
    CHECK(oracle::close(doubled.total_miles, base.total_miles * k));

    PlannerInput pricier = in;
    pricier.gas_price += 1.0;
    CHECK(simulate(trips, pricier).net <= base.net);
    PlannerInput insured = in;
    insured.insurance_weekly += 10.0;
    CHECK(oracle::close(simulate(trips, insured).net, base.net - 10.0));
    PlannerInput bigger_cut = in;
    bigger_cut.platform_cut = std::min(0.99, in.platform_cut + 0.1);
    CHECK(simulate(trips, bigger_cut).net <= base.net);
    PlannerInput busier = in;
    busier.tpc = std::min(1.0, in.tpc + 0.1);
    CHECK(simulate(trips, busier).pt >= base.pt);
    PlannerInput no_deadhead = in;
    no_deadhead.include_deadhead_miles = false;
    CHECK(simulate(trips, no_deadhead).gas_cost <= base.gas_cost);
  }
}

TEST_CASE("summary text") {
  PlannerOutput o;
  o.pt = 66.0;
  o.gross_fares = 990.0;
  o.driver_fares = 742.5;
  o.tips = 40.0;
  o.paid_miles = 330;
  o.total_miles = 600;
  o.gas_cost = 96;
  o.fixed_cost = 70;
  o.net = 616.5;
  o.subset.n = 12;
  const std::string s = render_summary(o);
  CHECK(s.find("about 66 trips per week") != std::string::npos);
  CHECK(s.find("$990.00") != std::string::npos);
  CHECK(s.find("$616.50") != std::string::npos);
  CHECK(s.find("rough guide") != std::string::npos);
  o.subset.n = 1000;
  CHECK(render_summary(o).find("rough guide") == std::string::npos);
  o.weather_filter_ignored = true;
  CHECK(render_summary(o).find("Weather filters were ignored") != std::string::npos);

  CHECK(format_dollars(1234.5) == "$1,234.50");
  CHECK(format_dollars(-5) == "-$5.00");
  CHECK(format_dollars(0.004) == "$0.00");
  CHECK(format_dollars(1234567.891) == "$1,234,567.89");
}

TEST_CASE("planner documents") {
  std::mt19937_64 rng(43);
  for (int c = 0; c < 100; ++c) {
    const PlannerInput in = oracle::random_input(rng, kAreas);
    CHECK(planner_input_from_json(to_json(in)) == in);
  }
  const auto trips = oracle::random_corpus(rng, 400, kAreas, true);
  const auto out = simulate(trips, PlannerInput{});
  CHECK(planner_output_from_json(nlohmann::json::parse(to_json(out).dump())) == out);

  CHECK(planner_input_from_json(nlohmann::json::object()) == PlannerInput{});
  try {
    planner_input_from_json({{"tpc", 0}, {"hours", {8, 30}}, {"bogus", 1}, {"mpg", "lots"}});
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.fields().count("tpc") == 1);
    CHECK(e.fields().count("hours") == 1);
    CHECK(e.fields().count("bogus") == 1);
    CHECK(e.fields().count("mpg") == 1);
  }
  const auto echo = filter_echo(PlannerInput{});
  CHECK(echo.contains("days"));
  CHECK_FALSE(echo.contains("gas_price"));
}
