#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rideprobe/domain.hpp"

namespace rideprobe {

/// Distance (degrees) within which a point counts as lying on an edge.
inline constexpr double kBoundaryTolerance = 1e-12;

/// Even-odd containment over all rings, so holes subtract. Points on an
/// edge or vertex of any ring count as inside. Throws GeometryError for a
/// ring with fewer than 4 vertices.
bool point_in_polygon(GeoPoint point, std::span<const Ring> rings);

/// Id of the first containing neighborhood in ascending id order.
std::optional<std::string> classify_point(GeoPoint point, const NeighborhoodSet& set);

/// Uniform grid over neighborhood bounding boxes. Gives the same answers
/// as classify_point, with each lookup touching only a few candidates.
class NeighborhoodIndex {
 public:
  explicit NeighborhoodIndex(const NeighborhoodSet& set, double cell_deg = 0.01);

  const std::string* classify(GeoPoint point) const;

 private:
  struct Box {
    double min_lat, max_lat, min_lon, max_lon;
    bool contains(GeoPoint p) const noexcept {
      return p.lat >= min_lat && p.lat <= max_lat && p.lon >= min_lon && p.lon <= max_lon;
    }
  };

  std::vector<const Neighborhood*> sorted_;  // ascending id
  std::vector<Box> boxes_;                   // parallel to sorted_
  std::vector<std::vector<std::size_t>> cells_;
  double cell_deg_;
  double origin_lat_ = 0.0;
  double origin_lon_ = 0.0;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
};

struct ClassificationResult {
  std::vector<Trip> trips;
  std::size_t classified_pickups = 0;
  std::size_t unclassified_pickups = 0;
  std::size_t classified_dropoffs = 0;
  std::size_t unclassified_dropoffs = 0;
};

/// Fills pickup_area / dropoff_area from the points. Ends that already carry
/// an area label are left alone (and count as classified when a point is
/// also present). `workers` > 1 partitions the list across threads; the
/// result does not depend on the partitioning.
ClassificationResult classify_trips(std::vector<Trip> trips, const NeighborhoodSet& set,
                                    unsigned workers = 1);

}  // namespace rideprobe
