#include "rideprobe/planner_json.hpp"

#include "rideprobe/error.hpp"

namespace rideprobe {
namespace {

using json = nlohmann::json;

std::string_view precip_name(Precip p) {
  switch (p) {
    case Precip::dry:
      return "dry";
    case Precip::wet:
      return "wet";
    case Precip::any:
      break;
  }
  return "any";
}

void read_number(const json& doc, const char* field, double& out,
                 std::map<std::string, std::string>& errors) {
  if (!doc.contains(field)) return;
  const json& v = doc[field];
  if (!v.is_number()) {
    errors[field] = "must be a number";
    return;
  }
  out = v.get<double>();
}

void read_bool(const json& doc, const char* field, bool& out,
               std::map<std::string, std::string>& errors) {
  if (!doc.contains(field)) return;
  if (!doc[field].is_boolean()) {
    errors[field] = "must be true or false";
    return;
  }
  out = doc[field].get<bool>();
}

}  // namespace

json to_json(const PlannerInput& input) {
  json days = json::array();
  for (Weekday d : input.days) days.push_back(weekday_name(d));
  json temp = nullptr;
  if (input.temp_range_f) temp = {input.temp_range_f->min_f, input.temp_range_f->max_f};
  return {
      {"hours_per_week", input.hours_per_week},
      {"days", std::move(days)},
      {"hours", input.hours},
      {"pickup_neighborhoods", input.pickup_neighborhoods},
      {"temp_range_f", std::move(temp)},
      {"precip", precip_name(input.precip)},
      {"gas_price", input.gas_price},
      {"mpg", input.mpg},
      {"insurance_weekly", input.insurance_weekly},
      {"misc_weekly", input.misc_weekly},
      {"platform_cut", input.platform_cut},
      {"tpc", input.tpc},
      {"tips_subject_to_cut", input.tips_subject_to_cut},
      {"include_deadhead_miles", input.include_deadhead_miles},
  };
}

json to_json(const SubsetStats& s) {
  return {{"n", s.n}, {"af", s.af}, {"atd", s.atd}, {"avg_tip", s.avg_tip}, {"avg_miles", s.avg_miles}};
}

json to_json(const PlannerOutput& o) {
  return {
      {"pt", o.pt},
      {"gross_fares", o.gross_fares},
      {"driver_fares", o.driver_fares},
      {"tips", o.tips},
      {"paid_miles", o.paid_miles},
      {"total_miles", o.total_miles},
      {"gas_cost", o.gas_cost},
      {"fixed_cost", o.fixed_cost},
      {"net", o.net},
      {"subset", to_json(o.subset)},
      {"weather_filter_ignored", o.weather_filter_ignored},
      {"summary", o.summary},
  };
}

PlannerInput planner_input_from_json(const json& doc, const PlannerInput& defaults) {
  if (!doc.is_object()) throw ValidationError("body", "must be a JSON object");

  static const std::set<std::string> known = {
      "hours_per_week", "days",        "hours",           "pickup_neighborhoods",
      "temp_range_f",   "precip",      "gas_price",       "mpg",
      "insurance_weekly", "misc_weekly", "platform_cut",  "tpc",
      "tips_subject_to_cut", "include_deadhead_miles"};

  std::map<std::string, std::string> errors;
  for (const auto& [key, value] : doc.items()) {
    if (known.count(key) == 0) errors[key] = "unknown field";
  }

  PlannerInput input = defaults;
  read_number(doc, "hours_per_week", input.hours_per_week, errors);
  read_number(doc, "gas_price", input.gas_price, errors);
  read_number(doc, "mpg", input.mpg, errors);
  read_number(doc, "insurance_weekly", input.insurance_weekly, errors);
  read_number(doc, "misc_weekly", input.misc_weekly, errors);
  read_number(doc, "platform_cut", input.platform_cut, errors);
  read_number(doc, "tpc", input.tpc, errors);
  read_bool(doc, "tips_subject_to_cut", input.tips_subject_to_cut, errors);
  read_bool(doc, "include_deadhead_miles", input.include_deadhead_miles, errors);

  if (doc.contains("days")) {
    input.days.clear();
    const json& v = doc["days"];
    if (!v.is_array()) {
      errors["days"] = "must be an array of weekday names";
    } else {
      for (const auto& d : v) {
        auto day = d.is_string() ? parse_weekday(d.get<std::string>()) : std::nullopt;
        if (!day) {
          errors["days"] = "unknown weekday " + d.dump();
          break;
        }
        input.days.insert(*day);
      }
    }
  }
  if (doc.contains("hours")) {
    input.hours.clear();
    const json& v = doc["hours"];
    if (!v.is_array()) {
      errors["hours"] = "must be an array of hours 0-23";
    } else {
      for (const auto& h : v) {
        if (!h.is_number_integer() || h.get<int>() < 0 || h.get<int>() > 23) {
          errors["hours"] = "hour " + h.dump() + " is not an integer in 0-23";
          break;
        }
        input.hours.insert(h.get<int>());
      }
    }
  }
  if (doc.contains("pickup_neighborhoods")) {
    input.pickup_neighborhoods.clear();
    const json& v = doc["pickup_neighborhoods"];
    if (!v.is_array()) {
      errors["pickup_neighborhoods"] = "must be an array of neighborhood ids";
    } else {
      for (const auto& id : v) {
        if (!id.is_string()) {
          errors["pickup_neighborhoods"] = "neighborhood ids must be strings";
          break;
        }
        input.pickup_neighborhoods.insert(id.get<std::string>());
      }
    }
  }
  if (doc.contains("temp_range_f")) {
    const json& v = doc["temp_range_f"];
    if (v.is_null()) {
      input.temp_range_f.reset();
    } else if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
      input.temp_range_f = TempRange{v[0].get<double>(), v[1].get<double>()};
    } else {
      errors["temp_range_f"] = "must be null or [min, max]";
    }
  }
  if (doc.contains("precip")) {
    const json& v = doc["precip"];
    const std::string p = v.is_string() ? v.get<std::string>() : "";
    if (p == "any") {
      input.precip = Precip::any;
    } else if (p == "dry") {
      input.precip = Precip::dry;
    } else if (p == "wet") {
      input.precip = Precip::wet;
    } else {
      errors["precip"] = "must be \"any\", \"dry\" or \"wet\"";
    }
  }

  for (auto& [field, message] : validate(input)) errors.emplace(field, message);
  if (!errors.empty()) throw ValidationError(std::move(errors));
  return input;
}

PlannerOutput planner_output_from_json(const json& doc) {
  try {
    PlannerOutput o;
    o.pt = doc.at("pt").get<double>();
    o.gross_fares = doc.at("gross_fares").get<double>();
    o.driver_fares = doc.at("driver_fares").get<double>();
    o.tips = doc.at("tips").get<double>();
    o.paid_miles = doc.at("paid_miles").get<double>();
    o.total_miles = doc.at("total_miles").get<double>();
    o.gas_cost = doc.at("gas_cost").get<double>();
    o.fixed_cost = doc.at("fixed_cost").get<double>();
    o.net = doc.at("net").get<double>();
    const json& s = doc.at("subset");
    o.subset.n = s.at("n").get<std::size_t>();
    o.subset.af = s.at("af").get<double>();
    o.subset.atd = s.at("atd").get<double>();
    o.subset.avg_tip = s.at("avg_tip").get<double>();
    o.subset.avg_miles = s.at("avg_miles").get<double>();
    o.weather_filter_ignored = doc.value("weather_filter_ignored", false);
    o.summary = doc.value("summary", "");
    return o;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("bad planner output document: ") + e.what());
  }
}

json filter_echo(const PlannerInput& filters) {
  const json all = to_json(filters);
  json echo = json::object();
  for (const char* key : {"days", "hours", "pickup_neighborhoods", "temp_range_f", "precip"}) {
    echo[key] = all.at(key);
  }
  return echo;
}

}  // namespace rideprobe
