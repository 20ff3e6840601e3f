#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rideprobe/domain.hpp"

namespace rideprobe {

// Canonical store: one columnar file per entity plus manifest.json.
//
// Column files ("RPCOL1"): magic, u64 row count, u32 column count, then per
// column a length-prefixed name, a type tag and the packed values. Integers
// and doubles are little-endian; strings are u32-length-prefixed; optional
// columns carry a validity byte per row ahead of the values.

inline constexpr const char* kStoreFormat = "rideprobe-store/1";
inline constexpr const char* kManifestFile = "manifest.json";

void write_trips(const std::filesystem::path& path, std::span<const Trip> trips);
std::vector<Trip> read_trips(const std::filesystem::path& path);

void write_weather(const std::filesystem::path& path, const WeatherSeries& weather);
WeatherSeries read_weather(const std::filesystem::path& path);

void write_pings(const std::filesystem::path& path, const PingSeries& pings);
PingSeries read_pings(const std::filesystem::path& path);

nlohmann::json boundaries_to_json(const NeighborhoodSet& set);
NeighborhoodSet boundaries_from_json(const nlohmann::json& doc);

nlohmann::json column_map_to_json(const ColumnMap& map);
ColumnMap column_map_from_json(const nlohmann::json& doc, ColumnMap defaults);

/// Hex SHA-256 of a byte string / file contents.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Everything the probes, planner and service read. Immutable once loaded.
struct Store {
  std::vector<Trip> city_trips;
  std::vector<Trip> personal_trips;
  NeighborhoodSet boundaries;
  WeatherSeries weather;
  std::optional<PingSeries> pings;
  nlohmann::json manifest;

  std::string manifest_hash() const;
};

/// Writes entity files, then `manifest` extended with an "entities" block
/// and its own "manifest_hash" (SHA-256 over the manifest without that key).
/// Returns the hash.
std::string write_store(const std::filesystem::path& dir, const Store& store,
                        nlohmann::json manifest);

/// Throws IoError when the directory or manifest is missing, VersionError
/// on an unknown store format.
Store load_store(const std::filesystem::path& dir);

std::string compute_manifest_hash(nlohmann::json manifest);

}  // namespace rideprobe
