#include "rideprobe/geo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "rideprobe/error.hpp"

namespace rideprobe {
namespace {

// x = lon, y = lat throughout: planar geometry in degree space.

bool on_segment(GeoPoint p, GeoPoint a, GeoPoint b) {
  const double dx = b.lon - a.lon;
  const double dy = b.lat - a.lat;
  const double len = std::hypot(dx, dy);
  if (len == 0.0) return std::hypot(p.lon - a.lon, p.lat - a.lat) <= kBoundaryTolerance;
  const double cross = dx * (p.lat - a.lat) - dy * (p.lon - a.lon);
  if (std::abs(cross) > kBoundaryTolerance * len) return false;
  return p.lon >= std::min(a.lon, b.lon) - kBoundaryTolerance &&
         p.lon <= std::max(a.lon, b.lon) + kBoundaryTolerance &&
         p.lat >= std::min(a.lat, b.lat) - kBoundaryTolerance &&
         p.lat <= std::max(a.lat, b.lat) + kBoundaryTolerance;
}

void check_ring(const Ring& ring) {
  if (ring.size() < 4) throw GeometryError("ring has fewer than 4 vertices");
}

}  // namespace

bool point_in_polygon(GeoPoint point, std::span<const Ring> rings) {
  for (const auto& ring : rings) check_ring(ring);

  for (const auto& ring : rings) {
    for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
      if (on_segment(point, ring[i], ring[i + 1])) return true;
    }
  }

  bool inside = false;
  for (const auto& ring : rings) {
    // Closed ring: the last vertex repeats the first, so walk n-1 edges.
    for (std::size_t i = 0, j = ring.size() - 2; i + 1 < ring.size(); j = i++) {
      const GeoPoint& a = ring[i];
      const GeoPoint& b = ring[j];
      if ((a.lat > point.lat) != (b.lat > point.lat)) {
        const double x_cross = (b.lon - a.lon) * (point.lat - a.lat) / (b.lat - a.lat) + a.lon;
        if (point.lon < x_cross) inside = !inside;
      }
    }
  }
  return inside;
}

std::optional<std::string> classify_point(GeoPoint point, const NeighborhoodSet& set) {
  const Neighborhood* best = nullptr;
  for (const auto& entry : set.entries) {
    if (best && entry.id >= best->id) continue;
    if (point_in_polygon(point, entry.rings)) best = &entry;
  }
  if (!best) return std::nullopt;
  return best->id;
}

NeighborhoodIndex::NeighborhoodIndex(const NeighborhoodSet& set, double cell_deg)
    : cell_deg_(cell_deg) {
  if (!(cell_deg > 0.0)) throw std::invalid_argument("cell size must be positive");
  for (const auto& entry : set.entries) {
    for (const auto& ring : entry.rings) check_ring(ring);
    sorted_.push_back(&entry);
  }
  std::stable_sort(sorted_.begin(), sorted_.end(),
                   [](const Neighborhood* a, const Neighborhood* b) { return a->id < b->id; });
  if (sorted_.empty()) return;

  constexpr double inf = std::numeric_limits<double>::infinity();
  Box all{inf, -inf, inf, -inf};
  for (const Neighborhood* n : sorted_) {
    Box b{inf, -inf, inf, -inf};
    for (const auto& ring : n->rings) {
      for (const auto& p : ring) {
        b.min_lat = std::min(b.min_lat, p.lat);
        b.max_lat = std::max(b.max_lat, p.lat);
        b.min_lon = std::min(b.min_lon, p.lon);
        b.max_lon = std::max(b.max_lon, p.lon);
      }
    }
    // Widen by the edge tolerance so on-boundary hits are never missed.
    b.min_lat -= kBoundaryTolerance;
    b.max_lat += kBoundaryTolerance;
    b.min_lon -= kBoundaryTolerance;
    b.max_lon += kBoundaryTolerance;
    boxes_.push_back(b);
    all.min_lat = std::min(all.min_lat, b.min_lat);
    all.max_lat = std::max(all.max_lat, b.max_lat);
    all.min_lon = std::min(all.min_lon, b.min_lon);
    all.max_lon = std::max(all.max_lon, b.max_lon);
  }
  origin_lat_ = all.min_lat;
  origin_lon_ = all.min_lon;
  rows_ = static_cast<std::size_t>(std::floor((all.max_lat - origin_lat_) / cell_deg_)) + 1;
  cols_ = static_cast<std::size_t>(std::floor((all.max_lon - origin_lon_) / cell_deg_)) + 1;
  cells_.resize(rows_ * cols_);
  for (std::size_t k = 0; k < sorted_.size(); ++k) {
    const Box& b = boxes_[k];
    const auto r0 = static_cast<std::size_t>(std::floor((b.min_lat - origin_lat_) / cell_deg_));
    const auto r1 = static_cast<std::size_t>(std::floor((b.max_lat - origin_lat_) / cell_deg_));
    const auto c0 = static_cast<std::size_t>(std::floor((b.min_lon - origin_lon_) / cell_deg_));
    const auto c1 = static_cast<std::size_t>(std::floor((b.max_lon - origin_lon_) / cell_deg_));
    for (std::size_t r = r0; r <= std::min(r1, rows_ - 1); ++r) {
      for (std::size_t c = c0; c <= std::min(c1, cols_ - 1); ++c) cells_[r * cols_ + c].push_back(k);
    }
  }
}

const std::string* NeighborhoodIndex::classify(GeoPoint point) const {
  if (cells_.empty()) return nullptr;
  const double fr = std::floor((point.lat - origin_lat_) / cell_deg_);
  const double fc = std::floor((point.lon - origin_lon_) / cell_deg_);
  if (!(fr >= 0.0) || !(fc >= 0.0) || fr >= static_cast<double>(rows_) ||
      fc >= static_cast<double>(cols_)) {
    return nullptr;
  }
  const auto& candidates = cells_[static_cast<std::size_t>(fr) * cols_ + static_cast<std::size_t>(fc)];
  for (std::size_t k : candidates) {  // ascending id order
    if (boxes_[k].contains(point) && point_in_polygon(point, sorted_[k]->rings)) {
      return &sorted_[k]->id;
    }
  }
  return nullptr;
}

namespace {

struct ClassifyCounts {
  std::size_t classified_pickups = 0;
  std::size_t unclassified_pickups = 0;
  std::size_t classified_dropoffs = 0;
  std::size_t unclassified_dropoffs = 0;
};

void classify_end(const NeighborhoodIndex& index, const std::optional<GeoPoint>& point,
                  std::optional<std::string>& area, std::size_t& classified,
                  std::size_t& unclassified) {
  if (!point) return;
  if (!area) {
    if (const std::string* id = index.classify(*point)) area = *id;
  }
  if (area) {
    ++classified;
  } else {
    ++unclassified;
  }
}

ClassifyCounts classify_range(std::span<Trip> trips, const NeighborhoodIndex& index) {
  ClassifyCounts counts;
  for (auto& trip : trips) {
    classify_end(index, trip.pickup_point, trip.pickup_area, counts.classified_pickups,
                 counts.unclassified_pickups);
    classify_end(index, trip.dropoff_point, trip.dropoff_area, counts.classified_dropoffs,
                 counts.unclassified_dropoffs);
  }
  return counts;
}

}  // namespace

ClassificationResult classify_trips(std::vector<Trip> trips, const NeighborhoodSet& set,
                                    unsigned workers) {
  const NeighborhoodIndex index(set);
  ClassificationResult result;
  const std::size_t n = trips.size();
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));

  std::vector<ClassifyCounts> partial(workers);
  if (workers == 1) {
    partial[0] = classify_range(trips, index);
  } else {
    std::vector<std::jthread> threads;
    const std::size_t chunk = (n + workers - 1) / workers;
    std::span<Trip> all(trips);
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t begin = std::min(n, w * chunk);
      const std::size_t end = std::min(n, begin + chunk);
      threads.emplace_back([&, w, begin, end] {
        partial[w] = classify_range(all.subspan(begin, end - begin), index);
      });
    }
  }
  for (const auto& c : partial) {
    result.classified_pickups += c.classified_pickups;
    result.unclassified_pickups += c.unclassified_pickups;
    result.classified_dropoffs += c.classified_dropoffs;
    result.unclassified_dropoffs += c.unclassified_dropoffs;
  }
  result.trips = std::move(trips);
  return result;
}

}  // namespace rideprobe
