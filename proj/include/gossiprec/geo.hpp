#pragma once

#include <cmath>
#include <limits>

namespace gossiprec {

struct GeoPoint {
  double lat = std::numeric_limits<double>::quiet_NaN();
  double lon = std::numeric_limits<double>::quiet_NaN();

  bool known() const noexcept { return std::isfinite(lat) && std::isfinite(lon); }

  /// Two unknown points compare equal.
  bool operator==(const GeoPoint& o) const noexcept {
    if (!known() || !o.known()) return known() == o.known();
    return lat == o.lat && lon == o.lon;
  }
};

/// Great-circle distance in km; 0 when either point has no coordinates.
double haversine_km(const GeoPoint& a, const GeoPoint& b) noexcept;

}  // namespace gossiprec
