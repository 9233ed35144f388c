#include "gossiprec/geo.hpp"

#include <numbers>

namespace gossiprec {

double haversine_km(const GeoPoint& a, const GeoPoint& b) noexcept {
  if (!a.known() || !b.known()) return 0.0;
  constexpr double kEarthRadiusKm = 6371.0088;
  constexpr double kRad = std::numbers::pi / 180.0;
  const double dlat = (b.lat - a.lat) * kRad;
  const double dlon = (b.lon - a.lon) * kRad;
  const double s = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(a.lat * kRad) * std::cos(b.lat * kRad) *
                       std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(std::min(1.0, s)));
}

}  // namespace gossiprec
