#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>

#include "zoi/error.hpp"

namespace zoi {

// A (latitude, longitude) pair in decimal degrees. Construction validates the
// range, so every GeoPoint in flight is a legal coordinate.
class GeoPoint {
public:
    constexpr GeoPoint() = default;

    GeoPoint(double lat_deg, double lon_deg) : lat_(lat_deg), lon_(lon_deg) {
        if (!std::isfinite(lat_deg) || !std::isfinite(lon_deg)) {
            throw DomainError("coordinate is not finite");
        }
        if (lat_deg < -90.0 || lat_deg > 90.0) {
            throw DomainError("latitude " + std::to_string(lat_deg) + " outside [-90, 90]");
        }
        if (lon_deg < -180.0 || lon_deg > 180.0) {
            throw DomainError("longitude " + std::to_string(lon_deg) + " outside [-180, 180]");
        }
    }

    double lat_deg() const noexcept { return lat_; }
    double lon_deg() const noexcept { return lon_; }

    friend bool operator==(const GeoPoint&, const GeoPoint&) = default;

private:
    double lat_ = 0.0;
    double lon_ = 0.0;
};

// Spherical earth. The radius is fixed for the life of a computation.
struct EarthModel {
    static constexpr double kMeanRadiusKm = 6371.0;

    double radius_km = kMeanRadiusKm;

    double half_circumference_km() const noexcept { return std::numbers::pi * radius_km; }
};

inline void validate(const EarthModel& earth) {
    if (!std::isfinite(earth.radius_km) || earth.radius_km <= 0.0) {
        throw DomainError("earth radius must be positive and finite");
    }
}

// Great-circle distance in kilometers.
class DistanceKm {
public:
    constexpr DistanceKm() = default;

    explicit DistanceKm(double km) : value_(km) {
        if (!std::isfinite(km) || km < 0.0) {
            throw DomainError("distance must be finite and non-negative");
        }
    }

    double value() const noexcept { return value_; }

    friend auto operator<=>(const DistanceKm&, const DistanceKm&) = default;

private:
    double value_ = 0.0;
};

inline double degrees_to_radians(double deg) {
    if (!std::isfinite(deg)) {
        throw DomainError("angle is not finite");
    }
    return deg * std::numbers::pi / 180.0;
}

inline double radians_to_degrees(double rad) {
    if (!std::isfinite(rad)) {
        throw DomainError("angle is not finite");
    }
    return rad * 180.0 / std::numbers::pi;
}

// haversin(theta) = sin^2(theta / 2)
inline double haversin(double theta_rad) {
    const double s = std::sin(theta_rad / 2.0);
    return s * s;
}

// d = 2R asin(sqrt(h)),  h = hav(dlat) + cos(lat1) cos(lat2) hav(dlon).
// sqrt(h) is clamped to [0, 1] so rounding near antipodes cannot produce NaN.
inline DistanceKm haversine_distance(const GeoPoint& a, const GeoPoint& b,
                                     const EarthModel& earth = {}) {
    validate(earth);
    const double lat1 = degrees_to_radians(a.lat_deg());
    const double lat2 = degrees_to_radians(b.lat_deg());
    const double dlat = lat2 - lat1;
    const double dlon = degrees_to_radians(b.lon_deg()) - degrees_to_radians(a.lon_deg());
    // hav(-x) == hav(x) and the cos product commutes, so the result is
    // bitwise symmetric in (a, b).
    const double h = haversin(dlat) + std::cos(lat1) * std::cos(lat2) * haversin(dlon);
    const double root = std::clamp(std::sqrt(std::max(h, 0.0)), 0.0, 1.0);
    return DistanceKm(2.0 * earth.radius_km * std::asin(root));
}

// Wraps any finite longitude into [-180, 180).
inline double normalize_longitude(double lon_deg) {
    double wrapped = std::fmod(lon_deg + 180.0, 360.0);
    if (wrapped < 0.0) wrapped += 360.0;
    return wrapped - 180.0;
}

// Point reached by travelling `distance` along the great circle leaving
// `center` at `bearing_deg` (clockwise from north).
inline GeoPoint destination_point(const GeoPoint& center, double bearing_deg, DistanceKm distance,
                                  const EarthModel& earth = {}) {
    validate(earth);
    if (distance.value() == 0.0) {
        return center;
    }
    const double bearing = degrees_to_radians(std::fmod(bearing_deg, 360.0));
    const double delta = distance.value() / earth.radius_km;
    const double lat1 = degrees_to_radians(center.lat_deg());
    const double lon1 = degrees_to_radians(center.lon_deg());

    const double sin_lat2 = std::clamp(
        std::sin(lat1) * std::cos(delta) + std::cos(lat1) * std::sin(delta) * std::cos(bearing),
        -1.0, 1.0);
    const double lat2 = std::asin(sin_lat2);
    const double lon2 = lon1 + std::atan2(std::sin(bearing) * std::sin(delta) * std::cos(lat1),
                                          std::cos(delta) - std::sin(lat1) * sin_lat2);

    const double lat_deg = std::clamp(radians_to_degrees(lat2), -90.0, 90.0);
    return GeoPoint(lat_deg, normalize_longitude(radians_to_degrees(lon2)));
}

// (mean latitude, mean longitude), summed in input order.
inline GeoPoint mean_position(std::span<const GeoPoint> points) {
    if (points.empty()) {
        throw DomainError("mean of an empty point set");
    }
    double lat = 0.0;
    double lon = 0.0;
    for (const auto& p : points) {
        lat += p.lat_deg();
        lon += p.lon_deg();
    }
    const double n = static_cast<double>(points.size());
    return GeoPoint(lat / n, lon / n);
}

}  // namespace zoi
