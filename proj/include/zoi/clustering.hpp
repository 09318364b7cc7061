#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "zoi/error.hpp"
#include "zoi/geo.hpp"
#include "zoi/text.hpp"

// k-means (Lloyd + k-means++), X-Means model selection, and DBSCAN.
//
// k-means and X-Means measure Euclidean distance on (lat, lon) in degrees.
// DBSCAN uses the Haversine metric because its radius is given in km.
namespace zoi::clustering {

struct ClusterId {
    std::size_t index = 0;

    friend auto operator<=>(const ClusterId&, const ClusterId&) = default;
};

// nullopt marks a NOISE point.
using Label = std::optional<ClusterId>;
inline constexpr Label kNoise = std::nullopt;

struct Centroid {
    GeoPoint position;

    friend bool operator==(const Centroid&, const Centroid&) = default;
};

inline constexpr std::uint64_t kDefaultSeed = 42;

struct KMeansConfig {
    std::size_t k = 1;
    std::size_t max_iterations = 100;
    double tolerance = 1e-7;  // degrees of centroid displacement
    std::uint64_t seed = kDefaultSeed;
    std::size_t restarts = 8;
    unsigned threads = 1;
};

struct XMeansConfig {
    std::size_t k_min = 1;
    std::size_t k_max = 10;
    KMeansConfig inner;  // k is ignored; everything else is inherited
};

struct DbscanConfig {
    double eps_km = 5.0;
    std::size_t min_pts = 5;
    unsigned threads = 1;
    EarthModel earth;
};

struct Labeling {
    std::vector<Label> assignment;
    std::vector<Centroid> centroids;
    double wcss = 0.0;

    std::size_t cluster_count() const noexcept { return centroids.size(); }

    std::vector<std::size_t> members_of(ClusterId id) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < assignment.size(); ++i)
            if (assignment[i] && *assignment[i] == id) out.push_back(i);
        return out;
    }

    std::size_t noise_count() const {
        return static_cast<std::size_t>(std::count(assignment.begin(), assignment.end(), kNoise));
    }
};

inline Centroid centroid_of(std::span<const GeoPoint> members) {
    if (members.empty()) {
        throw DomainError("centroid of an empty cluster");
    }
    return Centroid{mean_position(members)};
}

namespace detail {

using Vec2 = std::array<double, 2>;

inline Vec2 to_vec(const GeoPoint& p) { return {p.lat_deg(), p.lon_deg()}; }

inline double sq_dist(const Vec2& a, const Vec2& b) {
    const double d0 = a[0] - b[0];
    const double d1 = a[1] - b[1];
    return d0 * d0 + d1 * d1;
}

// Runs body(begin, end) over [0, n) split into contiguous chunks. Every index
// is written by exactly one chunk, so results do not depend on thread count.
template <typename Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body) {
    const std::size_t workers = std::min<std::size_t>(std::max(1u, threads), std::max<std::size_t>(n, 1));
    if (workers <= 1 || n < 2 * workers) {
        body(std::size_t{0}, n);
        return;
    }
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t begin = 0; begin < n; begin += chunk) {
        const std::size_t end = std::min(n, begin + chunk);
        pool.emplace_back([&body, begin, end] { body(begin, end); });
    }
}

// Nearest centroid; lowest index wins ties.
inline std::size_t nearest(const Vec2& p, std::span<const Vec2> centroids, double* best_sq = nullptr) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.size(); ++c) {
        const double d = sq_dist(p, centroids[c]);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    if (best_sq) *best_sq = best_d;
    return best;
}

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream_a, std::uint64_t stream_b = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream_a), static_cast<std::uint32_t>(stream_a >> 32),
                      static_cast<std::uint32_t>(stream_b), static_cast<std::uint32_t>(stream_b >> 32)};
    return std::mt19937_64(seq);
}

}  // namespace detail

// One Lloyd run from explicit starting centroids.
struct LloydRun {
    std::vector<std::size_t> labels;
    std::vector<GeoPoint> centroids;
    double wcss = 0.0;
    std::vector<double> wcss_history;  // objective after every update step
    std::size_t iterations = 0;
    bool converged = false;
};

namespace detail {

inline void validate(const KMeansConfig& cfg, std::size_t n) {
    if (n == 0) throw ConfigError("k-means needs at least one point");
    if (cfg.k == 0) throw ConfigError("k must be positive");
    if (cfg.k > n) {
        throw ConfigError("k = " + std::to_string(cfg.k) + " exceeds the number of points (" +
                          std::to_string(n) + ")");
    }
    if (cfg.max_iterations == 0) throw ConfigError("max_iterations must be positive");
    if (cfg.restarts == 0) throw ConfigError("restarts must be positive");
    if (!(cfg.tolerance >= 0.0) || !std::isfinite(cfg.tolerance)) {
        throw ConfigError("tolerance must be finite and non-negative");
    }
}

inline void assign_all(std::span<const Vec2> pts, std::span<const Vec2> centroids,
                       std::vector<std::size_t>& labels, std::vector<double>& sq, unsigned threads) {
    parallel_for(pts.size(), threads, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) labels[i] = nearest(pts[i], centroids, &sq[i]);
    });
}

// Means of the members of each cluster, accumulated in point order. A cluster
// left empty is re-seeded at the point farthest from its own centroid.
// Returns true if any cluster had to be re-seeded.
inline bool update_centroids(std::span<const Vec2> pts, std::span<const std::size_t> labels,
                             std::vector<double> sq, std::vector<Vec2>& centroids) {
    const std::size_t k = centroids.size();
    std::vector<Vec2> sum(k, Vec2{0.0, 0.0});
    std::vector<std::size_t> count(k, 0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        sum[labels[i]][0] += pts[i][0];
        sum[labels[i]][1] += pts[i][1];
        ++count[labels[i]];
    }
    bool reseeded = false;
    for (std::size_t c = 0; c < k; ++c) {
        if (count[c] > 0) {
            centroids[c] = {sum[c][0] / static_cast<double>(count[c]), sum[c][1] / static_cast<double>(count[c])};
            continue;
        }
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (sq[i] > far_d) {
                far_d = sq[i];
                far = i;
            }
        }
        if (far_d > 0.0) {
            centroids[c] = pts[far];
            sq[far] = 0.0;
            reseeded = true;
        }
        // far_d == 0: every point sits on a centroid already; nothing to move.
    }
    return reseeded;
}

inline double objective(std::span<const Vec2> pts, std::span<const std::size_t> labels,
                        std::span<const Vec2> centroids) {
    double total = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) total += sq_dist(pts[i], centroids[labels[i]]);
    return total;
}

inline LloydRun lloyd(std::span<const Vec2> pts, std::vector<Vec2> centroids, const KMeansConfig& cfg) {
    LloydRun run;
    const std::size_t n = pts.size();
    std::vector<std::size_t> labels(n, 0);
    std::vector<double> sq(n, 0.0);

    for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
        assign_all(pts, centroids, labels, sq, cfg.threads);
        const std::vector<Vec2> previous = centroids;
        const bool reseeded = update_centroids(pts, labels, sq, centroids);
        run.wcss_history.push_back(objective(pts, labels, centroids));
        ++run.iterations;

        double shift = 0.0;
        for (std::size_t c = 0; c < centroids.size(); ++c) {
            shift = std::max(shift, std::sqrt(sq_dist(previous[c], centroids[c])));
        }
        if (!reseeded && shift <= cfg.tolerance) {
            run.converged = true;
            break;
        }
    }

    // Leave the labeling consistent: labels are nearest-centroid and every
    // non-empty centroid is the mean of its members.
    std::vector<std::size_t> before = labels;
    assign_all(pts, centroids, labels, sq, cfg.threads);
    if (labels != before) {
        update_centroids(pts, labels, sq, centroids);
        run.wcss_history.push_back(objective(pts, labels, centroids));
    }

    run.labels = std::move(labels);
    run.wcss = objective(pts, run.labels, centroids);
    run.centroids.reserve(centroids.size());
    for (const auto& c : centroids) run.centroids.emplace_back(c[0], c[1]);
    return run;
}

// Greedy k-means++ seeding: each step draws 2 + floor(ln k) D^2-weighted
// candidates and keeps the one that lowers the potential most (first wins
// ties). When every remaining point coincides with a chosen center, the
// lowest-index unchosen point is taken.
inline std::vector<Vec2> seed_plus_plus(std::span<const Vec2> pts, std::size_t k, std::mt19937_64& rng) {
    const std::size_t n = pts.size();
    const std::size_t trials = 2 + static_cast<std::size_t>(std::log(static_cast<double>(k)));
    std::vector<Vec2> centers;
    std::vector<bool> chosen(n, false);
    std::uniform_int_distribution<std::size_t> first(0, n - 1);
    const std::size_t f = first(rng);
    centers.push_back(pts[f]);
    chosen[f] = true;

    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = sq_dist(pts[i], centers[0]);

    auto draw = [&](double total) {
        const double target = std::uniform_real_distribution<double>(0.0, total)(rng);
        double acc = 0.0;
        std::size_t pick = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (d2[i] <= 0.0) continue;
            acc += d2[i];
            pick = i;
            if (acc > target) break;
        }
        return pick;
    };

    while (centers.size() < k) {
        double total = 0.0;
        for (double v : d2) total += v;
        std::size_t pick = n;
        if (total > 0.0) {
            double best_potential = std::numeric_limits<double>::infinity();
            for (std::size_t t = 0; t < trials; ++t) {
                const std::size_t cand = draw(total);
                double potential = 0.0;
                for (std::size_t i = 0; i < n; ++i) potential += std::min(d2[i], sq_dist(pts[i], pts[cand]));
                if (potential < best_potential) {
                    best_potential = potential;
                    pick = cand;
                }
            }
        } else {
            for (std::size_t i = 0; i < n && pick == n; ++i)
                if (!chosen[i]) pick = i;
        }
        centers.push_back(pts[pick]);
        chosen[pick] = true;
        for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], sq_dist(pts[i], centers.back()));
    }
    return centers;
}

inline std::vector<Vec2> to_vecs(std::span<const GeoPoint> points) {
    std::vector<Vec2> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back(to_vec(p));
    return out;
}

inline Labeling to_labeling(const LloydRun& run) {
    Labeling out;
    out.assignment.reserve(run.labels.size());
    for (auto l : run.labels) out.assignment.emplace_back(ClusterId{l});
    for (const auto& c : run.centroids) out.centroids.push_back(Centroid{c});
    out.wcss = run.wcss;
    return out;
}

// Hartigan single-point transfers on top of a Lloyd fixed point: moving x
// from a to b changes the objective by
//   n_b / (n_b + 1) |x - c_b|^2 - n_a / (n_a - 1) |x - c_a|^2.
// Sweeps in point order until no transfer lowers it.
inline void hartigan_refine(std::span<const Vec2> pts, LloydRun& run, std::size_t max_sweeps) {
    const std::size_t k = run.centroids.size();
    if (k < 2) return;
    std::vector<Vec2> cent(k);
    std::vector<double> count(k, 0.0);
    auto recompute = [&] {
        std::vector<Vec2> sum(k, Vec2{0.0, 0.0});
        std::fill(count.begin(), count.end(), 0.0);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            sum[run.labels[i]][0] += pts[i][0];
            sum[run.labels[i]][1] += pts[i][1];
            count[run.labels[i]] += 1.0;
        }
        for (std::size_t c = 0; c < k; ++c) {
            cent[c] = count[c] > 0 ? Vec2{sum[c][0] / count[c], sum[c][1] / count[c]}
                                   : to_vec(run.centroids[c]);
        }
    };
    recompute();
    bool moved_any = false;
    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
        bool moved = false;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const std::size_t a = run.labels[i];
            if (count[a] < 2.0) continue;
            const double remove = count[a] / (count[a] - 1.0) * sq_dist(pts[i], cent[a]);
            std::size_t to = a;
            double best_add = remove;
            for (std::size_t b = 0; b < k; ++b) {
                if (b == a) continue;
                const double add = count[b] / (count[b] + 1.0) * sq_dist(pts[i], cent[b]);
                if (add < best_add * (1.0 - 1e-12)) {
                    best_add = add;
                    to = b;
                }
            }
            if (to == a) continue;
            for (int d = 0; d < 2; ++d) {
                cent[a][d] = (cent[a][d] * count[a] - pts[i][d]) / (count[a] - 1.0);
                cent[to][d] = (cent[to][d] * count[to] + pts[i][d]) / (count[to] + 1.0);
            }
            count[a] -= 1.0;
            count[to] += 1.0;
            run.labels[i] = to;
            moved = moved_any = true;
        }
        if (!moved) break;
        recompute();  // drop drift from the incremental updates
    }
    if (!moved_any) return;
    recompute();
    run.wcss = objective(pts, run.labels, cent);
    run.wcss_history.push_back(run.wcss);
    for (std::size_t c = 0; c < k; ++c) run.centroids[c] = GeoPoint(cent[c][0], cent[c][1]);
}

inline constexpr std::size_t kSwapAttemptsPerPass = 32;
inline constexpr std::size_t kSwapMaxPasses = 8;

// Single-swap local search: move one centroid onto a data point, rerun
// Lloyd + Hartigan, keep the result if the objective drops. A pass tries at
// most kSwapAttemptsPerPass (cluster, point) pairs spread evenly over the
// input and stops at the first improvement.
inline void swap_refine(std::span<const Vec2> pts, LloydRun& run, const KMeansConfig& cfg) {
    const std::size_t n = pts.size();
    const std::size_t k = run.centroids.size();
    if (k < 2 || k >= n) return;
    const std::size_t pairs = k * n;
    const std::size_t attempts = std::min(pairs, kSwapAttemptsPerPass);
    for (std::size_t pass = 0; pass < kSwapMaxPasses; ++pass) {
        bool improved = false;
        for (std::size_t a = 0; a < attempts && !improved; ++a) {
            const std::size_t pair = a * pairs / attempts;
            const std::size_t c = pair % k;
            const std::size_t i = pair / k;
            std::vector<Vec2> start;
            start.reserve(k);
            bool duplicate = false;
            for (const auto& g : run.centroids) {
                start.push_back(to_vec(g));
                duplicate = duplicate || start.back() == pts[i];
            }
            if (duplicate) continue;
            start[c] = pts[i];
            auto candidate = lloyd(pts, std::move(start), cfg);
            hartigan_refine(pts, candidate, cfg.max_iterations);
            if (candidate.wcss < run.wcss * (1.0 - 1e-12)) {
                run = std::move(candidate);
                improved = true;
            }
        }
        if (!improved) break;
    }
}

// Best of cfg.restarts seeded runs (ties keep the earlier restart), then
// swap-refined.
inline LloydRun best_of_restarts(std::span<const Vec2> pts, const KMeansConfig& cfg, std::uint64_t stream) {
    std::optional<LloydRun> best;
    for (std::size_t r = 0; r < cfg.restarts; ++r) {
        auto rng = make_rng(cfg.seed, stream, r);
        auto run = lloyd(pts, seed_plus_plus(pts, cfg.k, rng), cfg);
        hartigan_refine(pts, run, cfg.max_iterations);
        if (!best || run.wcss < best->wcss) best = std::move(run);
    }
    swap_refine(pts, *best, cfg);
    return std::move(*best);
}

}  // namespace detail

// Lloyd's algorithm from caller-chosen starting centroids.
inline LloydRun lloyd(std::span<const GeoPoint> points, std::span<const GeoPoint> initial,
                      const KMeansConfig& cfg) {
    KMeansConfig c = cfg;
    c.k = initial.size();
    detail::validate(c, points.size());
    return detail::lloyd(detail::to_vecs(points), detail::to_vecs(initial), c);
}

inline Labeling kmeans(std::span<const GeoPoint> points, const KMeansConfig& cfg) {
    detail::validate(cfg, points.size());
    const auto pts = detail::to_vecs(points);
    return detail::to_labeling(detail::best_of_restarts(pts, cfg, 0));
}

// ---------------------------------------------------------------------------
// X-Means

inline constexpr double kBicVarianceFloor = 1e-12;  // deg^2

// Spherical-Gaussian BIC of a hard clustering (D = 2):
//   sigma^2 = sum ||x - mu||^2 / (D (n - K))
//   BIC = sum_j [ n_j ln n_j - n_j ln n - (n_j D / 2) ln(2 pi sigma^2) - (n_j - K) / 2 ]
//         - (K (D + 1) / 2) ln n
// -inf when n <= K (variance not estimable). sigma^2 is floored at
// kBicVarianceFloor so coincident points do not yield +inf.
inline double spherical_bic(std::span<const GeoPoint> points, std::span<const std::size_t> labels,
                            std::span<const GeoPoint> centroids) {
    constexpr double D = 2.0;
    const std::size_t n = points.size();
    const std::size_t k = centroids.size();
    if (n <= k) return -std::numeric_limits<double>::infinity();

    std::vector<double> counts(k, 0.0);
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        rss += detail::sq_dist(detail::to_vec(points[i]), detail::to_vec(centroids[labels[i]]));
        counts[labels[i]] += 1.0;
    }
    const double nn = static_cast<double>(n);
    const double kk = static_cast<double>(k);
    const double variance = std::max(rss / (D * (nn - kk)), kBicVarianceFloor);

    double loglik = 0.0;
    for (double nj : counts) {
        if (nj == 0.0) continue;
        loglik += nj * std::log(nj) - nj * std::log(nn) -
                  (nj * D / 2.0) * std::log(2.0 * std::numbers::pi * variance) - (nj - kk) / 2.0;
    }
    const double params = kk * (D + 1.0);
    return loglik - params / 2.0 * std::log(nn);
}

struct XMeansTrace {
    std::size_t rounds = 0;
    std::size_t accepted_splits = 0;
    std::size_t rolled_back_splits = 0;
};

inline Labeling xmeans(std::span<const GeoPoint> points, const XMeansConfig& cfg, XMeansTrace* trace = nullptr) {
    if (cfg.k_min == 0) throw ConfigError("k_min must be positive");
    if (cfg.k_min > cfg.k_max) throw ConfigError("k_min must not exceed k_max");
    if (points.size() < cfg.k_min) {
        throw ConfigError("X-Means needs at least k_min = " + std::to_string(cfg.k_min) + " points");
    }
    KMeansConfig base = cfg.inner;
    base.k = cfg.k_min;
    detail::validate(base, points.size());

    const auto pts = detail::to_vecs(points);
    LloydRun current = detail::best_of_restarts(pts, base, 0);

    for (std::size_t round = 1; current.centroids.size() < cfg.k_max; ++round) {
        const std::size_t k = current.centroids.size();
        struct Split {
            std::size_t cluster;
            double gain;
            std::array<GeoPoint, 2> children;
        };
        std::vector<Split> accepted;

        for (std::size_t c = 0; c < k; ++c) {
            std::vector<GeoPoint> members;
            for (std::size_t i = 0; i < points.size(); ++i)
                if (current.labels[i] == c) members.push_back(points[i]);
            if (members.size() < 2) continue;

            const std::vector<std::size_t> parent_labels(members.size(), 0);
            const GeoPoint parent_centroid = current.centroids[c];
            const double parent_bic = spherical_bic(members, parent_labels, std::span(&parent_centroid, 1));

            KMeansConfig local = cfg.inner;
            local.k = 2;
            const auto member_vecs = detail::to_vecs(members);
            const LloydRun split = detail::best_of_restarts(member_vecs, local, (round << 32) | c);
            const double child_bic = spherical_bic(members, split.labels, split.centroids);
            if (child_bic > parent_bic) {
                accepted.push_back({c, child_bic - parent_bic, {split.centroids[0], split.centroids[1]}});
            }
        }
        if (accepted.empty()) break;

        // Keep the highest-gain splits that fit under k_max.
        const std::size_t room = cfg.k_max - k;
        if (accepted.size() > room) {
            std::stable_sort(accepted.begin(), accepted.end(),
                             [](const Split& a, const Split& b) { return a.gain > b.gain; });
            if (trace) trace->rolled_back_splits += accepted.size() - room;
            accepted.resize(room);
            std::sort(accepted.begin(), accepted.end(),
                      [](const Split& a, const Split& b) { return a.cluster < b.cluster; });
        }
        if (trace) {
            ++trace->rounds;
            trace->accepted_splits += accepted.size();
        }

        std::vector<detail::Vec2> next;
        std::size_t s = 0;
        for (std::size_t c = 0; c < k; ++c) {
            if (s < accepted.size() && accepted[s].cluster == c) {
                next.push_back(detail::to_vec(accepted[s].children[0]));
                next.push_back(detail::to_vec(accepted[s].children[1]));
                ++s;
            } else {
                next.push_back(detail::to_vec(current.centroids[c]));
            }
        }
        KMeansConfig refine = cfg.inner;
        refine.k = next.size();
        current = detail::lloyd(pts, std::move(next), refine);
    }
    return detail::to_labeling(current);
}

// ---------------------------------------------------------------------------
// DBSCAN

namespace detail {

// Candidate generator for eps-neighborhoods. Buckets points on a lat/lon grid
// whose cells are at least eps wide; falls back to scanning everything when
// the data approaches a pole or the antimeridian, where the bound is loose.
class NeighborGrid {
public:
    NeighborGrid(std::span<const GeoPoint> pts, double eps_km, const EarthModel& earth) : pts_(pts) {
        if (pts.empty()) return;
        const double ang = eps_km / earth.radius_km;  // radians
        double max_abs_lat = 0.0;
        min_lat_ = min_lon_ = std::numeric_limits<double>::infinity();
        double max_lon = -std::numeric_limits<double>::infinity();
        for (const auto& p : pts) {
            max_abs_lat = std::max(max_abs_lat, std::abs(p.lat_deg()));
            min_lat_ = std::min(min_lat_, p.lat_deg());
            min_lon_ = std::min(min_lon_, p.lon_deg());
            max_lon = std::max(max_lon, p.lon_deg());
        }
        // |dlat| <= d / R, and sin(d / 2R) >= cos(L) sin(|dlon| / 2) for
        // latitudes within [-L, L].
        const double lat_cell = radians_to_degrees(ang);
        const double cos_l = std::cos(degrees_to_radians(std::min(90.0, max_abs_lat)));
        const double s = std::sin(std::min(ang, std::numbers::pi) / 2.0);
        if (ang >= std::numbers::pi / 2.0 || cos_l <= 0.0 || s / cos_l >= 0.5) return;
        const double lon_cell = radians_to_degrees(2.0 * std::asin(s / cos_l)) * (1.0 + 1e-9);
        if (min_lon_ - lon_cell <= -180.0 || max_lon + lon_cell >= 180.0) return;
        lat_cell_ = lat_cell * (1.0 + 1e-9);
        lon_cell_ = lon_cell;

        cells_.reserve(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) {
            cells_.push_back({cell_of(pts[i]), i});
        }
        std::sort(cells_.begin(), cells_.end());
        gridded_ = true;
    }

    // Calls visit(j) for every candidate j in ascending index order.
    template <typename Visit>
    void candidates(std::size_t i, std::vector<std::size_t>& scratch, Visit&& visit) const {
        if (!gridded_) {
            for (std::size_t j = 0; j < pts_.size(); ++j) visit(j);
            return;
        }
        scratch.clear();
        const auto [ci, cj] = cell_of(pts_[i]);
        for (std::int64_t di = -1; di <= 1; ++di) {
            for (std::int64_t dj = -1; dj <= 1; ++dj) {
                const Cell key{ci + di, cj + dj};
                auto it = std::lower_bound(cells_.begin(), cells_.end(), Entry{key, 0});
                for (; it != cells_.end() && it->cell == key; ++it) scratch.push_back(it->index);
            }
        }
        std::sort(scratch.begin(), scratch.end());
        for (auto j : scratch) visit(j);
    }

private:
    using Cell = std::pair<std::int64_t, std::int64_t>;
    struct Entry {
        Cell cell;
        std::size_t index;
        friend auto operator<=>(const Entry&, const Entry&) = default;
    };

    Cell cell_of(const GeoPoint& p) const {
        return {static_cast<std::int64_t>(std::floor((p.lat_deg() - min_lat_) / lat_cell_)),
                static_cast<std::int64_t>(std::floor((p.lon_deg() - min_lon_) / lon_cell_))};
    }

    std::span<const GeoPoint> pts_;
    bool gridded_ = false;
    double min_lat_ = 0.0, min_lon_ = 0.0, lat_cell_ = 1.0, lon_cell_ = 1.0;
    std::vector<Entry> cells_;
};

inline Labeling labeling_from(std::span<const GeoPoint> points, std::vector<Label> assignment,
                              std::size_t clusters) {
    Labeling out;
    out.assignment = std::move(assignment);
    std::vector<std::vector<GeoPoint>> members(clusters);
    for (std::size_t i = 0; i < points.size(); ++i)
        if (out.assignment[i]) members[out.assignment[i]->index].push_back(points[i]);
    for (const auto& m : members) out.centroids.push_back(centroid_of(m));
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!out.assignment[i]) continue;
        out.wcss += sq_dist(to_vec(points[i]), to_vec(out.centroids[out.assignment[i]->index].position));
    }
    return out;
}

}  // namespace detail

// Core point: at least min_pts points (itself included) within eps_km.
// Clusters are numbered in the order their first core point appears in the
// input. A border point joins the lowest-numbered cluster that reaches it.
inline Labeling dbscan(std::span<const GeoPoint> points, const DbscanConfig& cfg) {
    if (points.empty()) throw ConfigError("DBSCAN needs at least one point");
    if (!std::isfinite(cfg.eps_km) || cfg.eps_km <= 0.0) throw ConfigError("eps_km must be positive");
    if (cfg.min_pts == 0) throw ConfigError("min_pts must be positive");
    validate(cfg.earth);

    const std::size_t n = points.size();
    const detail::NeighborGrid grid(points, cfg.eps_km, cfg.earth);
    auto within = [&](std::size_t i, std::size_t j) {
        return haversine_distance(points[i], points[j], cfg.earth).value() <= cfg.eps_km;
    };

    std::vector<char> core(n, 0);
    detail::parallel_for(n, cfg.threads, [&](std::size_t b, std::size_t e) {
        std::vector<std::size_t> scratch;
        for (std::size_t i = b; i < e; ++i) {
            std::size_t count = 0;
            grid.candidates(i, scratch, [&](std::size_t j) {
                if (count < cfg.min_pts && within(i, j)) ++count;
            });
            core[i] = count >= cfg.min_pts;
        }
    });

    std::vector<Label> assignment(n, kNoise);
    std::size_t clusters = 0;
    std::vector<std::size_t> scratch;
    std::deque<std::size_t> frontier;
    for (std::size_t i = 0; i < n; ++i) {
        if (!core[i] || assignment[i]) continue;
        const ClusterId id{clusters++};
        assignment[i] = id;
        frontier.push_back(i);
        while (!frontier.empty()) {
            const std::size_t p = frontier.front();
            frontier.pop_front();
            grid.candidates(p, scratch, [&](std::size_t q) {
                if (assignment[q] || !within(p, q)) return;
                assignment[q] = id;
                if (core[q]) frontier.push_back(q);
            });
        }
    }
    return detail::labeling_from(points, std::move(assignment), clusters);
}

// "Cluster centers : K centers" followed by "Cluster i\t<lat> <lon>" lines.
inline std::string format_report(const Labeling& labeling) {
    std::string out = "Cluster centers : " + std::to_string(labeling.centroids.size()) + " centers\n";
    for (std::size_t i = 0; i < labeling.centroids.size(); ++i) {
        const auto& p = labeling.centroids[i].position;
        out += "Cluster " + std::to_string(i) + "\t" + text::format_double(p.lat_deg()) + " " +
               text::format_double(p.lon_deg()) + "\n";
    }
    return out;
}

}  // namespace zoi::clustering
