#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "zoi/geo.hpp"

using zoi::DistanceKm;
using zoi::EarthModel;
using zoi::GeoPoint;

namespace {

// pi * 6371 / 180, the length of one degree of great circle.
constexpr double kOneDegreeKm = 111.19492664455873;

GeoPoint random_point(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> lat(-89.0, 89.0), lon(-180.0, 180.0);
    return GeoPoint(lat(rng), lon(rng));
}

}  // namespace

TEST(GeoPoint, RejectsOutOfRangeAndNonFinite) {
    EXPECT_THROW(GeoPoint(90.5, 0.0), zoi::DomainError);
    EXPECT_THROW(GeoPoint(0.0, -180.01), zoi::DomainError);
    EXPECT_THROW(GeoPoint(NAN, 0.0), zoi::DomainError);
    EXPECT_THROW(GeoPoint(0.0, INFINITY), zoi::DomainError);
    EXPECT_NO_THROW(GeoPoint(-90.0, 180.0));
}

TEST(DegreesToRadians, Examples) {
    EXPECT_DOUBLE_EQ(zoi::degrees_to_radians(180.0), std::numbers::pi);
    EXPECT_EQ(zoi::degrees_to_radians(0.0), 0.0);
    // mpmath at 50 digits: -1.31911112201105432259...
    EXPECT_NEAR(zoi::degrees_to_radians(-75.5795), -1.3191111220110543, 1e-15);
    EXPECT_THROW(zoi::degrees_to_radians(NAN), zoi::DomainError);
}

TEST(Haversine, ClusterTwoRadius) {
    const auto d = zoi::haversine_distance({6.2412, -75.5795}, {6.273949, -75.57941});
    EXPECT_NEAR(d.value(), 3.622, 0.01 * 3.622);
    // mpmath spherical law of cosines, 50 digits: 3.64153624052641...
    EXPECT_NEAR(d.value(), 3.6415362405264103, 1e-9);
}

TEST(Haversine, ClusterSixPairIsTwentyKilometers) {
    const auto d = zoi::haversine_distance({6.18991, -75.58002}, {6.354782, -75.49676});
    // mpmath spherical law of cosines, 50 digits: 20.5130537359131554...
    EXPECT_NEAR(d.value(), 20.513053735913155, 1e-9);
}

TEST(Haversine, IdentityAndHalfGreatCircle) {
    const GeoPoint p(6.2445419, -75.6011771);
    EXPECT_EQ(zoi::haversine_distance(p, p).value(), 0.0);
    const auto half = zoi::haversine_distance({0, 0}, {0, 180});
    EXPECT_NEAR(half.value(), std::numbers::pi * 6371.0, 1e-9);
    EXPECT_NEAR(half.value(), 20015.086796020572, 1e-9);
}

TEST(Haversine, AntipodesDoNotProduceNaN) {
    const auto d = zoi::haversine_distance({45.0, 10.0}, {-45.0, -170.0});
    EXPECT_TRUE(std::isfinite(d.value()));
    EXPECT_LE(d.value(), EarthModel{}.half_circumference_km());
}

TEST(Haversine, RejectsBadEarth) {
    EXPECT_THROW(zoi::haversine_distance({0, 0}, {1, 1}, EarthModel{0.0}), zoi::DomainError);
}

TEST(Haversine, SymmetryRangeTriangleProperties) {
    std::mt19937_64 rng(7);
    const double max_d = EarthModel{}.half_circumference_km();
    for (int i = 0; i < 5000; ++i) {
        const auto a = random_point(rng), b = random_point(rng), c = random_point(rng);
        const double ab = zoi::haversine_distance(a, b).value();
        EXPECT_EQ(ab, zoi::haversine_distance(b, a).value());
        EXPECT_GE(ab, 0.0);
        EXPECT_LE(ab, max_d);
        const double bc = zoi::haversine_distance(b, c).value();
        const double ac = zoi::haversine_distance(a, c).value();
        EXPECT_LE(ac, (ab + bc) * (1.0 + 1e-9) + 1e-9);
    }
}

TEST(Haversine, AgreesWithLawOfCosinesOracle) {
    std::mt19937_64 rng(11);
    int compared = 0;
    for (int i = 0; i < 10000; ++i) {
        const auto a = random_point(rng), b = random_point(rng);
        const double d = zoi::haversine_distance(a, b).value();
        if (d < 1e-3) continue;
        const auto ref = oracle::slc_distance_km({a.lat_deg(), a.lon_deg()}, {b.lat_deg(), b.lon_deg()});
        ASSERT_NEAR(d, static_cast<double>(ref), 1e-6);
        ++compared;
    }
    EXPECT_GT(compared, 9900);

    // Short city-scale pairs, where the cosine form is weakest.
    std::uniform_real_distribution<double> jitter(-0.05, 0.05);
    for (int i = 0; i < 2000; ++i) {
        const GeoPoint a(6.2 + jitter(rng), -75.5 + jitter(rng));
        const GeoPoint b(a.lat_deg() + jitter(rng), a.lon_deg() + jitter(rng));
        const double d = zoi::haversine_distance(a, b).value();
        if (d < 1e-3) continue;
        const auto ref = oracle::slc_distance_km({a.lat_deg(), a.lon_deg()}, {b.lat_deg(), b.lon_deg()});
        ASSERT_NEAR(d, static_cast<double>(ref), 1e-6);
    }
}

TEST(DestinationPoint, UnitArcs) {
    const auto north = zoi::destination_point({0, 0}, 0.0, DistanceKm(kOneDegreeKm));
    EXPECT_NEAR(north.lat_deg(), 1.0, 1e-6);
    EXPECT_NEAR(north.lon_deg(), 0.0, 1e-6);
    const auto east = zoi::destination_point({0, 0}, 90.0, DistanceKm(kOneDegreeKm));
    EXPECT_NEAR(east.lat_deg(), 0.0, 1e-6);
    EXPECT_NEAR(east.lon_deg(), 1.0, 1e-6);
}

TEST(DestinationPoint, ZeroDistanceIsIdentity) {
    const GeoPoint c(6.241243759319632, -75.57945209898037);
    for (double bearing : {0.0, 45.0, 123.4, -720.0}) {
        EXPECT_EQ(zoi::destination_point(c, bearing, DistanceKm(0.0)), c);
    }
}

TEST(DestinationPoint, WrapsLongitude) {
    const auto p = zoi::destination_point({0.0, 179.5}, 90.0, DistanceKm(kOneDegreeKm));
    EXPECT_NEAR(p.lon_deg(), -179.5, 1e-6);
    EXPECT_GE(p.lon_deg(), -180.0);
    EXPECT_LE(p.lon_deg(), 180.0);
}

TEST(DestinationPoint, BearingTakenModulo360) {
    const GeoPoint c(6.2, -75.5);
    const auto a = zoi::destination_point(c, 30.0, DistanceKm(5.0));
    const auto b = zoi::destination_point(c, 390.0, DistanceKm(5.0));
    EXPECT_NEAR(a.lat_deg(), b.lat_deg(), 1e-12);
    EXPECT_NEAR(a.lon_deg(), b.lon_deg(), 1e-12);
}

TEST(DestinationPoint, RoundTripProperty) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> bearing(0.0, 360.0), radius(0.0, 1000.0);
    std::uniform_real_distribution<double> lat(-80.0, 80.0), lon(-180.0, 180.0);
    for (int i = 0; i < 10000; ++i) {
        const GeoPoint c(lat(rng), lon(rng));
        const double r = i % 100 == 0 ? 0.0 : radius(rng);
        const auto p = zoi::destination_point(c, bearing(rng), DistanceKm(r));
        const double back = zoi::haversine_distance(c, p).value();
        ASSERT_LE(std::abs(back - r) / std::max(r, 1e-9), 1e-6) << "r=" << r;
    }
}
