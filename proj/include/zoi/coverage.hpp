#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "zoi/clustering.hpp"
#include "zoi/error.hpp"
#include "zoi/geo.hpp"

namespace zoi::coverage {

using clustering::Centroid;
using clustering::ClusterId;

struct CoverageSummary {
    ClusterId cluster;
    Centroid centroid;
    GeoPoint point_of_means;
    GeoPoint distant_point;
    DistanceKm radius;
    std::size_t member_count = 0;
};

// Closed ring: ring.front() == ring.back().
struct CoverageCircle {
    ClusterId cluster;
    GeoPoint center;
    DistanceKm radius;
    std::vector<GeoPoint> ring;
};

inline constexpr std::size_t kDefaultVertexCount = 64;

inline GeoPoint point_of_means(std::span<const GeoPoint> members) { return mean_position(members); }

struct FarthestMember {
    GeoPoint distant_point;
    DistanceKm radius;
};

// The member farthest (Haversine) from the point of means; the first such
// member wins ties. An exhaustive scan, no approximation.
inline FarthestMember coverage_radius(std::span<const GeoPoint> members, const EarthModel& earth = {}) {
    const GeoPoint mean = point_of_means(members);
    FarthestMember best{members.front(), haversine_distance(mean, members.front(), earth)};
    for (std::size_t i = 1; i < members.size(); ++i) {
        const DistanceKm d = haversine_distance(mean, members[i], earth);
        if (d > best.radius) best = {members[i], d};
    }
    return best;
}

// Vertices at bearings i * 360 / vertex_count from north, closed by repeating
// vertex 0.
inline CoverageCircle coverage_circle(const Centroid& centroid, DistanceKm radius, std::size_t vertex_count,
                                      const EarthModel& earth = {}) {
    if (vertex_count < 3) {
        throw ConfigError("coverage circle needs at least 3 vertices");
    }
    CoverageCircle circle;
    circle.center = centroid.position;
    circle.radius = radius;
    circle.ring.reserve(vertex_count + 1);
    for (std::size_t i = 0; i < vertex_count; ++i) {
        const double bearing = 360.0 * static_cast<double>(i) / static_cast<double>(vertex_count);
        circle.ring.push_back(destination_point(centroid.position, bearing, radius, earth));
    }
    circle.ring.push_back(circle.ring.front());
    return circle;
}

// One summary per non-empty cluster in ClusterId order; NOISE is ignored.
inline std::vector<CoverageSummary> summarize(const clustering::Labeling& labeling,
                                              std::span<const GeoPoint> points, const EarthModel& earth = {}) {
    if (labeling.assignment.size() != points.size()) {
        throw ConsistencyError("labeling has " + std::to_string(labeling.assignment.size()) +
                               " labels for " + std::to_string(points.size()) + " points");
    }
    std::vector<std::vector<GeoPoint>> members(labeling.centroids.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& label = labeling.assignment[i];
        if (!label) continue;
        if (label->index >= members.size()) {
            throw ConsistencyError("label " + std::to_string(label->index) + " has no centroid");
        }
        members[label->index].push_back(points[i]);
    }
    std::vector<CoverageSummary> out;
    for (std::size_t c = 0; c < members.size(); ++c) {
        if (members[c].empty()) continue;
        const auto far = coverage_radius(members[c], earth);
        out.push_back(CoverageSummary{ClusterId{c}, clustering::centroid_of(members[c]),
                                      point_of_means(members[c]), far.distant_point, far.radius,
                                      members[c].size()});
    }
    return out;
}

inline std::vector<CoverageCircle> circles_for(const std::vector<CoverageSummary>& summaries,
                                               std::size_t vertex_count, const EarthModel& earth = {}) {
    std::vector<CoverageCircle> out;
    out.reserve(summaries.size());
    for (const auto& s : summaries) {
        auto circle = coverage_circle(s.centroid, s.radius, vertex_count, earth);
        circle.cluster = s.cluster;
        out.push_back(std::move(circle));
    }
    return out;
}

}  // namespace zoi::coverage
