#pragma once

// Synthetic corpora shared by the tests and tools/make_fixture_store.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "zoi/corpus.hpp"
#include "zoi/geo.hpp"
#include "zoi/ingest.hpp"
#include "zoi/store.hpp"

namespace zoi::fixtures {

// Philadelphia coordinates of the sample tweet; outside the study area.
inline const GeoPoint kPhiladelphia{40.05701649, -75.14310264};

inline std::vector<GeoPoint> gaussian_blob(const GeoPoint& center, std::size_t n, double sigma_deg,
                                           std::mt19937_64& rng) {
    std::normal_distribution<double> noise(0.0, sigma_deg);
    std::vector<GeoPoint> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.emplace_back(center.lat_deg() + noise(rng), center.lon_deg() + noise(rng));
    }
    return out;
}

// Blob centers drawn uniformly inside the study area (with a margin), at
// least min_sep_deg apart.
inline std::vector<GeoPoint> blob_centers(std::size_t count, std::uint64_t seed, double min_sep_deg = 0.1) {
    const auto box = corpus::study_area();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> lat(box.min_lat() + 0.05, box.max_lat() - 0.05);
    std::uniform_real_distribution<double> lon(box.min_lon() + 0.05, box.max_lon() - 0.05);
    std::vector<GeoPoint> centers;
    while (centers.size() < count) {
        const GeoPoint c(lat(rng), lon(rng));
        bool far = true;
        for (const auto& o : centers) {
            far = far && std::hypot(o.lat_deg() - c.lat_deg(), o.lon_deg() - c.lon_deg()) >= min_sep_deg;
        }
        if (far) centers.push_back(c);
    }
    return centers;
}

struct TenBlob {
    std::vector<GeoPoint> centers;
    std::vector<GeoPoint> points;  // blob-major order
    std::size_t per_blob = 0;
};

inline constexpr std::uint64_t kTenBlobSeed = 20140518;
inline constexpr double kTenBlobSigma = 0.01;

inline TenBlob ten_blob(std::uint64_t seed = kTenBlobSeed, std::size_t per_blob = 30) {
    TenBlob out;
    out.per_blob = per_blob;
    out.centers = blob_centers(10, seed);
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    for (const auto& c : out.centers) {
        const auto blob = gaussian_blob(c, per_blob, kTenBlobSigma, rng);
        out.points.insert(out.points.end(), blob.begin(), blob.end());
    }
    return out;
}

inline const char* const kSampleTexts[] = {
    "Fiesta en Medellín esta noche",
    "I'm at Parque Lleras (Medellín) http://4sq.com/abc123",
    "medellin es linda",
    "FOURSQUARE: I'm at Centro Comercial 4sq.com/x",
    "La distribución de parques",
};

// Ten-blob store: tweets and photos alternate over the blob points, then the
// Philadelphia tweet and two tweets without coordinates are appended.
inline TenBlob write_ten_blob_store(const std::filesystem::path& dir, std::uint64_t seed = kTenBlobSeed) {
    auto data = ten_blob(seed);
    auto db = store::DocumentStore::open(dir);
    for (std::size_t i = 0; i < data.points.size(); ++i) {
        const std::string text = kSampleTexts[i % std::size(kSampleTexts)];
        if (i % 3 == 2) {
            ingest::RawPhotoGeo geo{"p" + std::to_string(i), data.points[i], 16};
            db.put(store::Collection::photo, store::photo_body(geo, text));
        } else {
            db.put(store::Collection::tweet, store::tweet_body({data.points[i], "web", text}));
        }
    }
    db.put(store::Collection::tweet, store::tweet_body({kPhiladelphia, "Twitter for Mac", "Fiesta bug"}));
    db.put(store::Collection::tweet, store::tweet_body({std::nullopt, "web", "sin coordenadas"}));
    db.put(store::Collection::tweet, store::tweet_body({std::nullopt, "web", "Medellín sin geo"}));
    return data;
}

}  // namespace zoi::fixtures
