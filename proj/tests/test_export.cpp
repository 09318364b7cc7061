#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "zoi/export.hpp"

using namespace zoi::exporter;
using zoi::DistanceKm;
using zoi::GeoPoint;
using zoi::clustering::Centroid;
using zoi::clustering::ClusterId;
using zoi::coverage::CoverageSummary;

namespace {

CoverageSummary summary(std::size_t id, GeoPoint c, double radius, std::size_t members = 1) {
    return CoverageSummary{ClusterId{id}, Centroid{c}, c, c, DistanceKm(radius), members};
}

struct Built {
    std::vector<CoverageSummary> summaries;
    std::vector<zoi::coverage::CoverageCircle> circles;
    std::vector<MemberPoint> members;
};

Built two_clusters() {
    Built b;
    b.summaries = {summary(0, GeoPoint(6.241243759319632, -75.57945209898037), 3.64, 2),
                   summary(1, GeoPoint(6.18991, -75.58002), 20.5, 1)};
    b.circles = zoi::coverage::circles_for(b.summaries, 8);
    b.members = {{GeoPoint(6.24, -75.58), ClusterId{0}, "Fiesta en Medellín"},
                 {GeoPoint(6.2425, -75.579), ClusterId{0}, "nada"},
                 {GeoPoint(6.19, -75.58), ClusterId{1}, "I'm at 4sq.com/x"}};
    return b;
}

}  // namespace

TEST(Export, CentroidCoordinatesAreLonLat) {
    const auto b = two_clusters();
    const auto doc = export_geojson(b.summaries, b.circles, b.members, false);
    const auto& f0 = doc.json["features"][0];
    EXPECT_EQ(f0["geometry"]["type"], "Point");
    EXPECT_EQ(f0["geometry"]["coordinates"].dump(), "[-75.57945209898037,6.241243759319632]");
    EXPECT_EQ(f0["properties"]["feature"], "centroid");
    EXPECT_EQ(f0["properties"]["cluster_id"], 0);
    EXPECT_EQ(f0["properties"]["member_count"], 2);
}

TEST(Export, NoClustersGivesEmptyCollection) {
    const auto doc = export_geojson({}, {}, {}, true);
    EXPECT_EQ(doc.json["type"], "FeatureCollection");
    EXPECT_TRUE(doc.json["features"].is_array());
    EXPECT_TRUE(doc.json["features"].empty());
    EXPECT_EQ(oracle::geojson_problem(nlohmann::json::parse(doc.dump())), "");
}

TEST(Export, MisalignedInputsThrow) {
    auto b = two_clusters();
    auto circles = b.circles;
    std::swap(circles[0], circles[1]);
    EXPECT_THROW(export_geojson(b.summaries, circles, {}, false), zoi::ConsistencyError);
    circles.pop_back();
    EXPECT_THROW(export_geojson(b.summaries, circles, {}, false), zoi::ConsistencyError);
    auto summaries = b.summaries;
    std::swap(summaries[0], summaries[1]);
    std::swap(b.circles[0], b.circles[1]);
    EXPECT_THROW(export_geojson(summaries, b.circles, {}, false), zoi::ConsistencyError);
}

TEST(Export, FeatureOrderAndStructure) {
    const auto b = two_clusters();
    const auto doc = export_geojson(b.summaries, b.circles, b.members, true);
    const auto parsed = nlohmann::json::parse(doc.dump());
    EXPECT_EQ(oracle::geojson_problem(parsed), "");
    const auto& fs = parsed["features"];
    ASSERT_EQ(fs.size(), 7u);
    const char* kinds[] = {"centroid", "centroid", "coverage", "coverage", "member", "member", "member"};
    for (std::size_t i = 0; i < fs.size(); ++i) EXPECT_EQ(fs[i]["properties"]["feature"], kinds[i]) << i;
    EXPECT_EQ(fs[6]["properties"]["text"], "I'm at 4sq.com/x");
    EXPECT_EQ(fs[6]["properties"]["cluster_id"], 1);
    EXPECT_EQ(export_geojson(b.summaries, b.circles, b.members, false).json["features"].size(), 4u);
}

TEST(Export, PolygonRingIsClosedCounterclockwise) {
    const auto b = two_clusters();
    const auto doc = export_geojson(b.summaries, b.circles, {}, false);
    const auto& ring = doc.json["features"][2]["geometry"]["coordinates"][0];
    ASSERT_EQ(ring.size(), 9u);
    EXPECT_EQ(ring.front(), ring.back());
    // Shoelace area over [lon, lat]: positive means counterclockwise.
    double area2 = 0.0;
    for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
        area2 += ring[i][0].get<double>() * ring[i + 1][1].get<double>() -
                 ring[i + 1][0].get<double>() * ring[i][1].get<double>();
    }
    EXPECT_GT(area2, 0.0);
    // Each vertex sits at the circle radius from the centroid.
    for (const auto& v : ring) {
        const auto d = oracle::slc_distance_km({6.241243759319632, -75.57945209898037},
                                               {v[1].get<double>(), v[0].get<double>()});
        EXPECT_NEAR(static_cast<double>(d), 3.64, 1e-6 * 3.64);
    }
}

TEST(Export, TopTermsPerCluster) {
    const auto b = two_clusters();
    const zoi::corpus::KeywordQuery q({"Medellín", "Fiesta", "4sq.com"});
    const auto doc = export_geojson(b.summaries, b.circles, b.members, false, &q);
    EXPECT_EQ(doc.json["features"][0]["properties"]["top_terms"], nlohmann::ordered_json({"Fiesta", "Medellín"}));
    EXPECT_EQ(doc.json["features"][1]["properties"]["top_terms"], nlohmann::ordered_json({"4sq.com"}));
    const auto plain = export_geojson(b.summaries, b.circles, b.members, false);
    EXPECT_TRUE(plain.json["features"][0]["properties"]["top_terms"].empty());
}

TEST(Export, RandomDocumentsAreStructurallyValid) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> lat(-80, 80), lon(-180, 180), rad(0, 300);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<CoverageSummary> summaries;
        const std::size_t k = rng() % 6;
        for (std::size_t c = 0; c < k; ++c) summaries.push_back(summary(c * 2, GeoPoint(lat(rng), lon(rng)), rad(rng)));
        const auto circles = zoi::coverage::circles_for(summaries, 3 + rng() % 60);
        const auto doc = export_geojson(summaries, circles, {}, false);
        ASSERT_EQ(oracle::geojson_problem(nlohmann::json::parse(doc.dump())), "") << trial;
    }
}
