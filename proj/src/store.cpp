#include "rideprobe/store.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <variant>

#include <openssl/evp.h>

#include "rideprobe/error.hpp"

namespace rideprobe {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

static_assert(std::endian::native == std::endian::little, "column files assume little-endian");

constexpr std::string_view kColumnMagic = "RPCOL1\n";

enum class ColumnType : std::uint8_t { f64 = 1, i64 = 2, str = 3, opt_f64 = 4, opt_str = 5, u8 = 6 };

using ColumnData = std::variant<std::vector<double>, std::vector<std::int64_t>,
                                std::vector<std::string>, std::vector<std::optional<double>>,
                                std::vector<std::optional<std::string>>, std::vector<std::uint8_t>>;

class ColumnFileWriter {
 public:
  explicit ColumnFileWriter(std::size_t rows) : rows_(rows) {}

  void add(const std::string& name, std::vector<double> v) { add_column(name, std::move(v)); }
  void add(const std::string& name, std::vector<std::int64_t> v) { add_column(name, std::move(v)); }
  void add(const std::string& name, std::vector<std::string> v) { add_column(name, std::move(v)); }
  void add(const std::string& name, std::vector<std::optional<double>> v) {
    add_column(name, std::move(v));
  }
  void add(const std::string& name, std::vector<std::optional<std::string>> v) {
    add_column(name, std::move(v));
  }
  void add(const std::string& name, std::vector<std::uint8_t> v) { add_column(name, std::move(v)); }

  void write(const fs::path& path) const {
    std::string buf(kColumnMagic);
    put(buf, static_cast<std::uint64_t>(rows_));
    put(buf, static_cast<std::uint32_t>(columns_.size()));
    for (const auto& [name, data] : columns_) {
      put_string(buf, name);
      std::visit([&](const auto& values) { encode(buf, values); }, data);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError("write failed: " + path.string());
  }

 private:
  template <typename T>
  void add_column(const std::string& name, std::vector<T> values) {
    if (values.size() != rows_) throw std::logic_error("column length mismatch: " + name);
    columns_.emplace_back(name, ColumnData(std::move(values)));
  }

  template <typename T>
  static void put(std::string& buf, T value) {
    char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    buf.append(bytes, sizeof(T));
  }
  static void put_string(std::string& buf, const std::string& s) {
    put(buf, static_cast<std::uint32_t>(s.size()));
    buf.append(s);
  }

  static void encode(std::string& buf, const std::vector<double>& v) {
    buf.push_back(static_cast<char>(ColumnType::f64));
    for (double x : v) put(buf, x);
  }
  static void encode(std::string& buf, const std::vector<std::int64_t>& v) {
    buf.push_back(static_cast<char>(ColumnType::i64));
    for (auto x : v) put(buf, x);
  }
  static void encode(std::string& buf, const std::vector<std::string>& v) {
    buf.push_back(static_cast<char>(ColumnType::str));
    for (const auto& x : v) put_string(buf, x);
  }
  static void encode(std::string& buf, const std::vector<std::optional<double>>& v) {
    buf.push_back(static_cast<char>(ColumnType::opt_f64));
    for (const auto& x : v) buf.push_back(x ? 1 : 0);
    for (const auto& x : v) put(buf, x.value_or(0.0));
  }
  static void encode(std::string& buf, const std::vector<std::optional<std::string>>& v) {
    buf.push_back(static_cast<char>(ColumnType::opt_str));
    for (const auto& x : v) buf.push_back(x ? 1 : 0);
    for (const auto& x : v) put_string(buf, x.value_or(std::string{}));
  }
  static void encode(std::string& buf, const std::vector<std::uint8_t>& v) {
    buf.push_back(static_cast<char>(ColumnType::u8));
    buf.append(reinterpret_cast<const char*>(v.data()), v.size());
  }

  std::size_t rows_;
  std::vector<std::pair<std::string, ColumnData>> columns_;
};

class ColumnFile {
 public:
  explicit ColumnFile(const fs::path& path) : path_(path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    buf_ = std::move(ss).str();

    if (buf_.compare(0, kColumnMagic.size(), kColumnMagic) != 0) {
      throw VersionError(path.string() + ": not a column file");
    }
    pos_ = kColumnMagic.size();
    rows_ = get<std::uint64_t>();
    const auto count = get<std::uint32_t>();
    for (std::uint32_t c = 0; c < count; ++c) {
      std::string name = get_string();
      columns_.emplace(std::move(name), decode());
    }
  }

  std::size_t rows() const noexcept { return rows_; }

  template <typename T>
  const std::vector<T>& column(const std::string& name) const {
    auto it = columns_.find(name);
    if (it == columns_.end()) throw SchemaError(path_.string() + ": missing column " + name);
    const auto* values = std::get_if<std::vector<T>>(&it->second);
    if (!values) throw SchemaError(path_.string() + ": column " + name + " has the wrong type");
    return *values;
  }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > buf_.size()) throw SchemaError(path_.string() + ": truncated column file");
  }
  template <typename T>
  T get() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, buf_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  std::string get_string() {
    const auto n = get<std::uint32_t>();
    need(n);
    std::string s = buf_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::vector<std::uint8_t> get_flags() {
    need(rows_);
    std::vector<std::uint8_t> flags(buf_.begin() + static_cast<std::ptrdiff_t>(pos_),
                                    buf_.begin() + static_cast<std::ptrdiff_t>(pos_ + rows_));
    pos_ += rows_;
    return flags;
  }

  ColumnData decode() {
    const auto type = static_cast<ColumnType>(get<std::uint8_t>());
    switch (type) {
      case ColumnType::f64: {
        std::vector<double> v(rows_);
        for (auto& x : v) x = get<double>();
        return v;
      }
      case ColumnType::i64: {
        std::vector<std::int64_t> v(rows_);
        for (auto& x : v) x = get<std::int64_t>();
        return v;
      }
      case ColumnType::str: {
        std::vector<std::string> v(rows_);
        for (auto& x : v) x = get_string();
        return v;
      }
      case ColumnType::opt_f64: {
        auto flags = get_flags();
        std::vector<std::optional<double>> v(rows_);
        for (std::size_t i = 0; i < rows_; ++i) {
          double x = get<double>();
          if (flags[i]) v[i] = x;
        }
        return v;
      }
      case ColumnType::opt_str: {
        auto flags = get_flags();
        std::vector<std::optional<std::string>> v(rows_);
        for (std::size_t i = 0; i < rows_; ++i) {
          std::string x = get_string();
          if (flags[i]) v[i] = std::move(x);
        }
        return v;
      }
      case ColumnType::u8:
        return get_flags();
    }
    throw SchemaError(path_.string() + ": unknown column type");
  }

  fs::path path_;
  std::string buf_;
  std::size_t pos_ = 0;
  std::size_t rows_ = 0;
  std::map<std::string, ColumnData> columns_;
};

std::int64_t to_seconds(LocalTime t) { return t.time_since_epoch().count(); }
LocalTime from_seconds(std::int64_t s) { return LocalTime{std::chrono::seconds{s}}; }

template <typename F>
auto collect(std::span<const Trip> trips, F field) {
  using T = std::decay_t<decltype(field(trips.front()))>;
  std::vector<T> out;
  out.reserve(trips.size());
  for (const auto& t : trips) out.push_back(field(t));
  return out;
}

std::optional<double> lat_of(const std::optional<GeoPoint>& p) {
  return p ? std::optional<double>(p->lat) : std::nullopt;
}
std::optional<double> lon_of(const std::optional<GeoPoint>& p) {
  return p ? std::optional<double>(p->lon) : std::nullopt;
}
std::optional<GeoPoint> point_of(const std::optional<double>& lat, const std::optional<double>& lon) {
  if (!lat || !lon) return std::nullopt;
  return GeoPoint{*lat, *lon};
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

void write_trips(const fs::path& path, std::span<const Trip> trips) {
  if (trips.empty()) {
    ColumnFileWriter(0).write(path);
    return;
  }
  ColumnFileWriter w(trips.size());
  w.add("trip_id", collect(trips, [](const Trip& t) { return t.trip_id; }));
  w.add("start_ts", collect(trips, [](const Trip& t) { return to_seconds(t.start_ts); }));
  w.add("end_ts", collect(trips, [](const Trip& t) { return to_seconds(t.end_ts); }));
  w.add("duration_s", collect(trips, [](const Trip& t) { return t.duration_s; }));
  w.add("miles", collect(trips, [](const Trip& t) { return t.miles; }));
  w.add("fare", collect(trips, [](const Trip& t) { return t.fare; }));
  w.add("tip", collect(trips, [](const Trip& t) { return t.tip; }));
  w.add("additional_charges", collect(trips, [](const Trip& t) { return t.additional_charges; }));
  w.add("total", collect(trips, [](const Trip& t) { return t.total; }));
  w.add("pickup_lat", collect(trips, [](const Trip& t) { return lat_of(t.pickup_point); }));
  w.add("pickup_lon", collect(trips, [](const Trip& t) { return lon_of(t.pickup_point); }));
  w.add("dropoff_lat", collect(trips, [](const Trip& t) { return lat_of(t.dropoff_point); }));
  w.add("dropoff_lon", collect(trips, [](const Trip& t) { return lon_of(t.dropoff_point); }));
  w.add("pickup_area", collect(trips, [](const Trip& t) { return t.pickup_area; }));
  w.add("dropoff_area", collect(trips, [](const Trip& t) { return t.dropoff_area; }));
  w.add("source", collect(trips, [](const Trip& t) {
          return static_cast<std::uint8_t>(t.source == TripSource::personal ? 1 : 0);
        }));
  w.add("shared", collect(trips, [](const Trip& t) { return static_cast<std::uint8_t>(t.shared); }));
  w.add("temp_f", collect(trips, [](const Trip& t) { return t.temp_f; }));
  w.add("precip_in", collect(trips, [](const Trip& t) { return t.precip_in; }));
  w.write(path);
}

std::vector<Trip> read_trips(const fs::path& path) {
  ColumnFile file(path);
  const std::size_t n = file.rows();
  std::vector<Trip> trips(n);
  if (n == 0) return trips;
  const auto& ids = file.column<std::string>("trip_id");
  const auto& start = file.column<std::int64_t>("start_ts");
  const auto& end = file.column<std::int64_t>("end_ts");
  const auto& duration = file.column<double>("duration_s");
  const auto& miles = file.column<double>("miles");
  const auto& fare = file.column<double>("fare");
  const auto& tip = file.column<double>("tip");
  const auto& extra = file.column<double>("additional_charges");
  const auto& total = file.column<double>("total");
  const auto& plat = file.column<std::optional<double>>("pickup_lat");
  const auto& plon = file.column<std::optional<double>>("pickup_lon");
  const auto& dlat = file.column<std::optional<double>>("dropoff_lat");
  const auto& dlon = file.column<std::optional<double>>("dropoff_lon");
  const auto& parea = file.column<std::optional<std::string>>("pickup_area");
  const auto& darea = file.column<std::optional<std::string>>("dropoff_area");
  const auto& source = file.column<std::uint8_t>("source");
  const auto& shared = file.column<std::uint8_t>("shared");
  const auto& temp = file.column<std::optional<double>>("temp_f");
  const auto& precip = file.column<std::optional<double>>("precip_in");
  for (std::size_t i = 0; i < n; ++i) {
    Trip& t = trips[i];
    t.trip_id = ids[i];
    t.start_ts = from_seconds(start[i]);
    t.end_ts = from_seconds(end[i]);
    t.duration_s = duration[i];
    t.miles = miles[i];
    t.fare = fare[i];
    t.tip = tip[i];
    t.additional_charges = extra[i];
    t.total = total[i];
    t.pickup_point = point_of(plat[i], plon[i]);
    t.dropoff_point = point_of(dlat[i], dlon[i]);
    t.pickup_area = parea[i];
    t.dropoff_area = darea[i];
    t.source = source[i] ? TripSource::personal : TripSource::city;
    t.shared = shared[i] != 0;
    t.temp_f = temp[i];
    t.precip_in = precip[i];
  }
  return trips;
}

void write_weather(const fs::path& path, const WeatherSeries& weather) {
  const auto& r = weather.records;
  ColumnFileWriter w(r.size());
  std::vector<std::int64_t> hours;
  std::vector<double> temps, precips;
  for (const auto& rec : r) {
    hours.push_back(to_seconds(rec.hour_ts));
    temps.push_back(rec.temp_f);
    precips.push_back(rec.precip_in);
  }
  w.add("hour_ts", std::move(hours));
  w.add("temp_f", std::move(temps));
  w.add("precip_in", std::move(precips));
  w.write(path);
}

WeatherSeries read_weather(const fs::path& path) {
  ColumnFile file(path);
  WeatherSeries series;
  if (file.rows() == 0) return series;
  const auto& hours = file.column<std::int64_t>("hour_ts");
  const auto& temps = file.column<double>("temp_f");
  const auto& precips = file.column<double>("precip_in");
  for (std::size_t i = 0; i < file.rows(); ++i) {
    series.records.push_back(WeatherRecord{from_seconds(hours[i]), temps[i], precips[i]});
  }
  return series;
}

void write_pings(const fs::path& path, const PingSeries& pings) {
  ColumnFileWriter w(pings.pings.size());
  std::vector<std::int64_t> ts;
  std::vector<double> lats, lons;
  for (const auto& p : pings.pings) {
    ts.push_back(to_seconds(p.ts));
    lats.push_back(p.point.lat);
    lons.push_back(p.point.lon);
  }
  w.add("ts", std::move(ts));
  w.add("lat", std::move(lats));
  w.add("lon", std::move(lons));
  w.write(path);
}

PingSeries read_pings(const fs::path& path) {
  ColumnFile file(path);
  PingSeries series;
  if (file.rows() == 0) return series;
  const auto& ts = file.column<std::int64_t>("ts");
  const auto& lats = file.column<double>("lat");
  const auto& lons = file.column<double>("lon");
  for (std::size_t i = 0; i < file.rows(); ++i) {
    series.pings.push_back(Ping{from_seconds(ts[i]), GeoPoint{lats[i], lons[i]}});
  }
  return series;
}

json boundaries_to_json(const NeighborhoodSet& set) {
  json entries = json::array();
  for (const auto& n : set.entries) {
    json rings = json::array();
    for (const auto& ring : n.rings) {
      json coords = json::array();
      for (const auto& p : ring) coords.push_back({p.lon, p.lat});
      rings.push_back(std::move(coords));
    }
    entries.push_back({{"id", n.id}, {"name", n.name}, {"rings", std::move(rings)}});
  }
  return entries;
}

NeighborhoodSet boundaries_from_json(const json& doc) {
  NeighborhoodSet set;
  try {
    for (const auto& e : doc) {
      Neighborhood n;
      n.id = e.at("id").get<std::string>();
      n.name = e.at("name").get<std::string>();
      for (const auto& ring : e.at("rings")) {
        Ring r;
        for (const auto& p : ring) r.push_back(GeoPoint{p.at(1).get<double>(), p.at(0).get<double>()});
        n.rings.push_back(std::move(r));
      }
      set.entries.push_back(std::move(n));
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("bad boundary document: ") + e.what());
  }
  return set;
}

json column_map_to_json(const ColumnMap& map) {
  return {{"columns", map.columns},
          {"timestamp_format", map.timestamp_format},
          {"timezone", map.timezone},
          {"completed_status", map.completed_status}};
}

ColumnMap column_map_from_json(const json& doc, ColumnMap defaults) {
  if (!doc.is_object()) throw ConfigError("column map must be an object");
  try {
    if (doc.contains("columns")) {
      // Replaces the default mapping wholesale; null entries unmap a field.
      defaults.columns.clear();
      for (const auto& [field, column] : doc["columns"].items()) {
        if (!column.is_null()) defaults.columns[field] = column.get<std::string>();
      }
    }
    if (doc.contains("timestamp_format")) {
      defaults.timestamp_format = doc["timestamp_format"].get<std::string>();
    }
    if (doc.contains("timezone")) defaults.timezone = doc["timezone"].get<std::string>();
    if (doc.contains("completed_status")) {
      defaults.completed_status = doc["completed_status"].get<std::string>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad column map: ") + e.what());
  }
  return defaults;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_text(path)); }

std::string compute_manifest_hash(json manifest) {
  manifest.erase("manifest_hash");
  return sha256_hex(manifest.dump());
}

std::string Store::manifest_hash() const { return manifest.value("manifest_hash", std::string{}); }

std::string write_store(const fs::path& dir, const Store& store, json manifest) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create store directory " + dir.string() + ": " + ec.message());

  json entities = json::object();
  auto record = [&](const std::string& name, const std::string& file, std::size_t rows) {
    entities[name] = {{"file", file}, {"rows", rows}, {"sha256", sha256_file(dir / file)}};
  };

  write_trips(dir / "city_trips.col", store.city_trips);
  record("city_trips", "city_trips.col", store.city_trips.size());
  write_trips(dir / "personal_trips.col", store.personal_trips);
  record("personal_trips", "personal_trips.col", store.personal_trips.size());
  write_weather(dir / "weather.col", store.weather);
  record("weather", "weather.col", store.weather.records.size());
  write_text(dir / "boundaries.json", boundaries_to_json(store.boundaries).dump() + "\n");
  record("boundaries", "boundaries.json", store.boundaries.entries.size());
  if (store.pings) {
    write_pings(dir / "pings.col", *store.pings);
    record("pings", "pings.col", store.pings->pings.size());
  } else {
    fs::remove(dir / "pings.col", ec);
  }

  manifest["format"] = kStoreFormat;
  manifest["entities"] = std::move(entities);
  const std::string hash = compute_manifest_hash(manifest);
  manifest["manifest_hash"] = hash;
  write_text(dir / kManifestFile, manifest.dump(2) + "\n");
  return hash;
}

Store load_store(const fs::path& dir) {
  const fs::path manifest_path = dir / kManifestFile;
  if (!fs::exists(manifest_path)) {
    throw IoError("no store at " + dir.string() + " (missing " + kManifestFile + ")");
  }
  Store store;
  try {
    store.manifest = json::parse(read_text(manifest_path));
  } catch (const json::parse_error& e) {
    throw SchemaError(manifest_path.string() + ": " + e.what());
  }
  if (store.manifest.value("format", "") != kStoreFormat) {
    throw VersionError(manifest_path.string() + ": unsupported store format '" +
                       store.manifest.value("format", "") + "'");
  }
  const json& entities = store.manifest.at("entities");
  auto file_of = [&](const char* name) {
    return dir / entities.at(name).at("file").get<std::string>();
  };
  store.city_trips = read_trips(file_of("city_trips"));
  store.personal_trips = read_trips(file_of("personal_trips"));
  store.weather = read_weather(file_of("weather"));
  store.boundaries = boundaries_from_json(json::parse(read_text(file_of("boundaries"))));
  if (entities.contains("pings")) store.pings = read_pings(file_of("pings"));
  return store;
}

}  // namespace rideprobe
