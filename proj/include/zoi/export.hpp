#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "zoi/clustering.hpp"
#include "zoi/corpus.hpp"
#include "zoi/coverage.hpp"
#include "zoi/error.hpp"
#include "zoi/text.hpp"

namespace zoi::exporter {

// GeoJSON FeatureCollection of centroid points, coverage polygons and
// (optionally) member points. Keys keep insertion order so output is stable.
struct ZoneDocument {
    nlohmann::ordered_json json;

    std::string dump() const { return json.dump(2) + "\n"; }
};

struct MemberPoint {
    GeoPoint position;
    clustering::ClusterId cluster;
    std::string text;
};

namespace detail {

inline nlohmann::ordered_json position(const GeoPoint& p) {
    return nlohmann::ordered_json::array({p.lon_deg(), p.lat_deg()});
}

inline nlohmann::ordered_json feature(nlohmann::ordered_json geometry, nlohmann::ordered_json properties) {
    nlohmann::ordered_json f;
    f["type"] = "Feature";
    f["geometry"] = std::move(geometry);
    f["properties"] = std::move(properties);
    return f;
}

}  // namespace detail

// Query terms that occur in at least one member text, alphabetically.
inline std::vector<std::string> top_terms(const corpus::KeywordQuery& query, const std::vector<std::string>& texts) {
    std::set<std::string> found;
    for (const auto& t : texts) {
        const std::string folded = text::fold(t);
        for (std::size_t i = 0; i < query.terms().size(); ++i) {
            if (query.matches_term(i, folded)) found.insert(query.terms()[i]);
        }
    }
    return {found.begin(), found.end()};
}

// Feature order: centroids by cluster id, then polygons by cluster id, then
// members in corpus order. Coordinates are [longitude, latitude].
inline ZoneDocument export_geojson(const std::vector<coverage::CoverageSummary>& summaries,
                                   const std::vector<coverage::CoverageCircle>& circles,
                                   const std::vector<MemberPoint>& members, bool include_members,
                                   const corpus::KeywordQuery* query = nullptr) {
    if (summaries.size() != circles.size()) {
        throw ConsistencyError("got " + std::to_string(summaries.size()) + " summaries but " +
                               std::to_string(circles.size()) + " circles");
    }
    for (std::size_t i = 0; i < summaries.size(); ++i) {
        if (summaries[i].cluster != circles[i].cluster) {
            throw ConsistencyError("summary " + std::to_string(summaries[i].cluster.index) +
                                   " is paired with circle " + std::to_string(circles[i].cluster.index));
        }
        if (i > 0 && !(summaries[i - 1].cluster < summaries[i].cluster)) {
            throw ConsistencyError("summaries are not in ascending cluster order");
        }
    }

    std::vector<std::vector<std::string>> texts(summaries.size());
    if (query) {
        for (const auto& m : members) {
            const auto it = std::lower_bound(summaries.begin(), summaries.end(), m.cluster,
                                             [](const auto& s, const auto& id) { return s.cluster < id; });
            if (it != summaries.end() && it->cluster == m.cluster) {
                texts[static_cast<std::size_t>(it - summaries.begin())].push_back(m.text);
            }
        }
    }

    nlohmann::ordered_json features = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < summaries.size(); ++i) {
        const auto& s = summaries[i];
        nlohmann::ordered_json geometry{{"type", "Point"}, {"coordinates", detail::position(s.centroid.position)}};
        nlohmann::ordered_json props;
        props["feature"] = "centroid";
        props["cluster_id"] = s.cluster.index;
        props["radius_km"] = s.radius.value();
        props["member_count"] = s.member_count;
        props["top_terms"] = query ? top_terms(*query, texts[i]) : std::vector<std::string>{};
        features.push_back(detail::feature(std::move(geometry), std::move(props)));
    }
    for (const auto& c : circles) {
        // Circle rings run clockwise (increasing bearing); GeoJSON exterior
        // rings are counterclockwise.
        nlohmann::ordered_json ring = nlohmann::ordered_json::array();
        for (auto it = c.ring.rbegin(); it != c.ring.rend(); ++it) ring.push_back(detail::position(*it));
        nlohmann::ordered_json geometry{{"type", "Polygon"},
                                        {"coordinates", nlohmann::ordered_json::array({std::move(ring)})}};
        nlohmann::ordered_json props;
        props["feature"] = "coverage";
        props["cluster_id"] = c.cluster.index;
        props["radius_km"] = c.radius.value();
        features.push_back(detail::feature(std::move(geometry), std::move(props)));
    }
    if (include_members) {
        for (const auto& m : members) {
            nlohmann::ordered_json geometry{{"type", "Point"}, {"coordinates", detail::position(m.position)}};
            nlohmann::ordered_json props;
            props["feature"] = "member";
            props["cluster_id"] = m.cluster.index;
            props["text"] = m.text;
            features.push_back(detail::feature(std::move(geometry), std::move(props)));
        }
    }

    ZoneDocument doc;
    doc.json["type"] = "FeatureCollection";
    doc.json["features"] = std::move(features);
    return doc;
}

}  // namespace zoi::exporter
