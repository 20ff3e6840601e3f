#pragma once

#include <json.hpp>

#include "rideprobe/planner.hpp"

namespace rideprobe {

// Request/response documents use the PlannerInput / PlannerOutput field
// names. Days are "mon".."sun", hours are integers, precip is
// "any" | "dry" | "wet", temp_range_f is [min, max] or null.

nlohmann::json to_json(const PlannerInput& input);
nlohmann::json to_json(const SubsetStats& stats);
nlohmann::json to_json(const PlannerOutput& output);

/// Missing fields take PlannerInput defaults. Unknown fields, wrong types
/// and constraint violations throw ValidationError listing every bad field.
PlannerInput planner_input_from_json(const nlohmann::json& doc,
                                     const PlannerInput& defaults = {});

PlannerOutput planner_output_from_json(const nlohmann::json& doc);

/// The subset-selecting fields of `filters`, echoed back on empty results.
nlohmann::json filter_echo(const PlannerInput& filters);

}  // namespace rideprobe
