// SPDX-License-Identifier: Apache-2.0
#include "agc/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "agc/error.hpp"
#include "agc/stats.hpp"
#include "agc/text.hpp"

namespace agc {

namespace {

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

// Uniform index in [0, n) from the raw engine output, so draws do not
// depend on the standard library's distribution implementations.
std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }
double uniform_unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

int nearest(const std::vector<double>& p, const FeatureMatrix& centroids, double* dist = nullptr) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.size(); ++c) {
        const double d = squared_distance(p, centroids[c]);
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(c);
        }
    }
    if (dist) *dist = best_d;
    return best;
}

}  // namespace

KMeansResult kmeans(const FeatureMatrix& points, int k, std::uint64_t seed, int max_iterations) {
    if (points.empty()) fail(ErrorCode::InvalidArgument, "k-means needs at least one point");
    if (k < 1) fail(ErrorCode::InvalidArgument, "k must be at least 1");
    if (static_cast<std::size_t>(k) > points.size()) {
        fail(ErrorCode::InvalidArgument, "k = " + std::to_string(k) + " exceeds the number of points (" +
                                             std::to_string(points.size()) + ")");
    }
    const std::size_t dim = points.front().size();
    for (const auto& p : points) {
        if (p.size() != dim) fail(ErrorCode::InvalidArgument, "feature vectors differ in length");
    }
    const std::size_t n = points.size();
    std::mt19937_64 rng(seed);

    // k-means++ seeding.
    KMeansResult res;
    std::vector<char> chosen(n, 0);
    std::size_t first = uniform_index(rng, n);
    res.centroids.push_back(points[first]);
    chosen[first] = 1;
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points[i], points[first]);
    while (res.centroids.size() < static_cast<std::size_t>(k)) {
        const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
        std::size_t pick = n;
        if (total > 0.0) {
            const double target = uniform_unit(rng) * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                acc += d2[i];
                if (d2[i] > 0.0 && acc > target) {
                    pick = i;
                    break;
                }
            }
            if (pick == n) {
                for (std::size_t i = n; i-- > 0;) {
                    if (d2[i] > 0.0) {
                        pick = i;
                        break;
                    }
                }
            }
        } else {
            // Only duplicates remain: take an unused index.
            std::vector<std::size_t> unused;
            for (std::size_t i = 0; i < n; ++i) {
                if (!chosen[i]) unused.push_back(i);
            }
            pick = unused[uniform_index(rng, unused.size())];
        }
        chosen[pick] = 1;
        res.centroids.push_back(points[pick]);
        for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(points[i], points[pick]));
    }

    res.assignment.assign(n, -1);
    for (int it = 0; it < max_iterations; ++it) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            const int c = nearest(points[i], res.centroids);
            if (c != res.assignment[i]) {
                res.assignment[i] = c;
                changed = true;
            }
        }
        res.iterations = it + 1;
        if (!changed && it > 0) break;

        FeatureMatrix sums(static_cast<std::size_t>(k), std::vector<double>(dim, 0.0));
        std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto c = static_cast<std::size_t>(res.assignment[i]);
            ++counts[c];
            for (std::size_t j = 0; j < dim; ++j) sums[c][j] += points[i][j];
        }
        for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
            if (counts[c] == 0) {
                // Re-seed from the point farthest from its current centroid.
                std::size_t far = 0;
                double far_d = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const auto own = static_cast<std::size_t>(res.assignment[i]);
                    if (counts[own] <= 1) continue;
                    const double d = squared_distance(points[i], res.centroids[own]);
                    if (d > far_d) {
                        far_d = d;
                        far = i;
                    }
                }
                --counts[static_cast<std::size_t>(res.assignment[far])];
                res.assignment[far] = static_cast<int>(c);
                counts[c] = 1;
                res.centroids[c] = points[far];
                changed = true;
                continue;
            }
            for (std::size_t j = 0; j < dim; ++j) res.centroids[c][j] = sums[c][j] / static_cast<double>(counts[c]);
        }
    }
    res.inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        res.inertia += squared_distance(points[i], res.centroids[static_cast<std::size_t>(res.assignment[i])]);
    }
    return res;
}

void MixtureCoeffs::validate() const {
    if (terrain < 0.0 || function < 0.0 || landcover < 0.0 || elevation < 0.0) {
        fail(ErrorCode::InvalidArgument, "mixture coefficients must be non-negative");
    }
    const double sum = terrain + function + landcover + elevation;
    if (std::abs(sum - 1.0) > 1e-9) {
        fail(ErrorCode::InvalidArgument, "mixture coefficients must sum to 1 (got " + format_number(sum) + ")");
    }
}

double FactorTables::terrain_at(int t) const {
    if (t < 0 || t >= kWeissClassCount) fail(ErrorCode::Validation, "terrain class out of range");
    return terrain[static_cast<std::size_t>(t)];
}

double FactorTables::landcover_at(int l) const {
    if (l < 0 || l >= kLandCoverClassCount) fail(ErrorCode::Validation, "land-cover class out of range");
    return landcover[static_cast<std::size_t>(l)];
}

double FactorTables::function_at(int f) const {
    const auto it = function.find(f);
    return it == function.end() ? 1.0 : it->second;
}

void FactorTables::validate() const {
    auto check = [](double v) {
        if (!(v >= 0.0) || !std::isfinite(v)) fail(ErrorCode::InvalidArgument, "sampling factors must be >= 0");
    };
    for (double v : terrain) check(v);
    for (double v : landcover) check(v);
    for (const auto& [id, v] : function) check(v);
}

std::vector<double> cluster_weights(const std::vector<ClusterSummary>& clusters, const MixtureCoeffs& coeffs) {
    coeffs.validate();
    std::vector<double> w(clusters.size(), 0.0);
    if (clusters.empty()) return w;
    double total_size = 0.0;
    double e_min = std::numeric_limits<double>::infinity();
    double e_max = -std::numeric_limits<double>::infinity();
    for (const auto& c : clusters) {
        if (c.size < 0.0 || c.omega_terrain < 0.0 || c.omega_function < 0.0 || c.omega_landcover < 0.0) {
            fail(ErrorCode::InvalidArgument, "cluster sizes and factors must be non-negative");
        }
        total_size += c.size;
        e_min = std::min(e_min, c.mean_elevation);
        e_max = std::max(e_max, c.mean_elevation);
    }
    if (!(total_size > 0.0)) fail(ErrorCode::InvalidArgument, "clusters have zero total size");
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        const auto& c = clusters[i];
        const double rho = c.size / total_size;
        const double omega_e = e_max > e_min ? (c.mean_elevation - e_min) / (e_max - e_min) : 1.0;
        w[i] = rho * (coeffs.terrain * c.omega_terrain + coeffs.function * c.omega_function +
                      coeffs.landcover * c.omega_landcover + coeffs.elevation * omega_e);
    }
    return w;
}

std::vector<long> largest_remainder(const std::vector<double>& weights, long total) {
    if (total < 0) fail(ErrorCode::InvalidArgument, "quota total must be non-negative");
    std::vector<long> out(weights.size(), 0);
    if (weights.empty()) return out;
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) fail(ErrorCode::InvalidArgument, "quota weights must be >= 0");
        sum += w;
    }
    std::vector<double> share(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) {
        // Zero total weight: split evenly.
        share[i] = sum > 0.0 ? static_cast<double>(total) * weights[i] / sum
                             : static_cast<double>(total) / static_cast<double>(weights.size());
    }
    long assigned = 0;
    for (std::size_t i = 0; i < share.size(); ++i) {
        out[i] = static_cast<long>(std::floor(share[i] + 1e-9));
        assigned += out[i];
    }
    std::vector<std::size_t> order(share.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return share[a] - static_cast<double>(out[a]) > share[b] - static_cast<double>(out[b]);
    });
    for (std::size_t j = 0; assigned < total; j = (j + 1) % order.size()) {
        ++out[order[j]];
        ++assigned;
    }
    // Floating slack can over-assign by one; take it back from the smallest remainder.
    for (std::size_t j = order.size(); assigned > total && j-- > 0;) {
        if (out[order[j]] > 0) {
            --out[order[j]];
            --assigned;
        }
    }
    return out;
}

CombinationQuotas allocate_combination_quotas(const std::vector<double>& combo_weights, long cluster_quota,
                                              long s_min) {
    if (s_min < 0 || cluster_quota < 0) fail(ErrorCode::InvalidArgument, "quotas must be non-negative");
    CombinationQuotas out;
    const std::size_t m = combo_weights.size();
    out.quotas.assign(m, 0);
    if (m == 0) return out;
    for (double w : combo_weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) fail(ErrorCode::InvalidArgument, "combination weights must be >= 0");
    }
    // Grow the set of combinations pinned at s_min until every remaining
    // proportional share clears the floor.
    std::vector<char> floored(m, 0);
    long budget = cluster_quota;
    while (true) {
        double free_weight = 0.0;
        std::size_t free_count = 0;
        for (std::size_t k = 0; k < m; ++k) {
            if (!floored[k]) {
                free_weight += combo_weights[k];
                ++free_count;
            }
        }
        if (free_count == 0) break;
        bool grew = false;
        for (std::size_t k = 0; k < m; ++k) {
            if (floored[k]) continue;
            const double share = free_weight > 0.0 ? combo_weights[k] / free_weight * static_cast<double>(budget)
                                                   : static_cast<double>(budget) / static_cast<double>(free_count);
            if (share < static_cast<double>(s_min)) {
                floored[k] = 1;
                budget -= s_min;
                grew = true;
            }
        }
        if (!grew) break;
    }
    std::vector<double> free_weights;
    std::vector<std::size_t> free_index;
    for (std::size_t k = 0; k < m; ++k) {
        if (floored[k]) {
            out.quotas[k] = s_min;
        } else {
            free_weights.push_back(combo_weights[k]);
            free_index.push_back(k);
        }
    }
    if (budget < 0) {
        out.overflow = -budget;
    } else if (!free_index.empty()) {
        const auto split = largest_remainder(free_weights, budget);
        for (std::size_t j = 0; j < free_index.size(); ++j) out.quotas[free_index[j]] = split[j];
    } else {
        // Every combination sits at the floor and budget is left over.
        const auto split = largest_remainder(combo_weights, budget);
        for (std::size_t k = 0; k < m; ++k) out.quotas[k] += split[k];
    }
    return out;
}

DrawResult draw_points(const std::vector<std::vector<CandidatePoint>>& groups, const std::vector<long>& quotas,
                       double d_min, std::uint64_t seed, long retry_factor) {
    if (groups.size() != quotas.size()) fail(ErrorCode::InvalidArgument, "one quota per group required");
    if (!(d_min >= 0.0)) fail(ErrorCode::InvalidArgument, "d_min must be non-negative");
    if (retry_factor < 1) fail(ErrorCode::InvalidArgument, "retry factor must be at least 1");
    std::mt19937_64 rng(seed);
    DrawResult res;
    res.points.resize(groups.size());
    res.shortfall.assign(groups.size(), 0);

    // Hash grid of retained points with d_min cells.
    std::unordered_map<std::uint64_t, std::vector<CandidatePoint>> grid;
    auto key = [](long gx, long gy) {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(gx)) << 32) |
               static_cast<std::uint32_t>(gy);
    };
    auto cell = [d_min](double v) { return static_cast<long>(std::floor(v / d_min)); };
    auto admissible = [&](const CandidatePoint& p) {
        if (d_min <= 0.0) return true;
        const long cx = cell(p.x);
        const long cy = cell(p.y);
        for (long dx = -1; dx <= 1; ++dx) {
            for (long dy = -1; dy <= 1; ++dy) {
                const auto it = grid.find(key(cx + dx, cy + dy));
                if (it == grid.end()) continue;
                for (const auto& q : it->second) {
                    if (std::hypot(p.x - q.x, p.y - q.y) < d_min) return false;
                }
            }
        }
        return true;
    };

    for (std::size_t g = 0; g < groups.size(); ++g) {
        if (quotas[g] < 0) fail(ErrorCode::InvalidArgument, "negative quota");
        std::vector<CandidatePoint> pool = groups[g];
        const std::size_t want = static_cast<std::size_t>(quotas[g]);
        const std::size_t attempts = std::min(pool.size(), want * static_cast<std::size_t>(retry_factor));
        auto& kept = res.points[g];
        // Lazy Fisher-Yates: each attempt draws a fresh candidate uniformly.
        for (std::size_t a = 0; a < attempts && kept.size() < want; ++a) {
            const std::size_t j = a + uniform_index(rng, pool.size() - a);
            std::swap(pool[a], pool[j]);
            const auto& p = pool[a];
            if (!admissible(p)) continue;
            kept.push_back(p);
            if (d_min > 0.0) grid[key(cell(p.x), cell(p.y))].push_back(p);
        }
        res.shortfall[g] = static_cast<long>(want - kept.size());
        res.total_shortfall += res.shortfall[g];
    }
    return res;
}

std::vector<double> grid_elevations(const SatelliteGridSpec& spec) {
    if (!(spec.elevation_step > 0.0) || spec.elevation_max < spec.elevation_min) {
        fail(ErrorCode::InvalidArgument, "elevation grid needs step > 0 and max >= min");
    }
    std::vector<double> out;
    const long n = static_cast<long>(std::floor((spec.elevation_max - spec.elevation_min) / spec.elevation_step + 1e-9));
    for (long i = 0; i <= n; ++i) out.push_back(spec.elevation_min + static_cast<double>(i) * spec.elevation_step);
    return out;
}

std::vector<SatGeometry> satellite_grid(const SatelliteGridSpec& spec) {
    if (!(spec.azimuth_step > 0.0) || spec.azimuth_max < spec.azimuth_min) {
        fail(ErrorCode::InvalidArgument, "azimuth grid needs step > 0 and max >= min");
    }
    if (spec.altitudes_km.empty()) fail(ErrorCode::InvalidArgument, "satellite grid needs at least one altitude");
    std::vector<double> azimuths;
    const long n_az = static_cast<long>(std::floor((spec.azimuth_max - spec.azimuth_min) / spec.azimuth_step + 1e-9));
    for (long i = 0; i <= n_az; ++i) azimuths.push_back(spec.azimuth_min + static_cast<double>(i) * spec.azimuth_step);
    std::vector<SatGeometry> out;
    for (double el : grid_elevations(spec)) {
        for (double az : azimuths) {
            for (double alt : spec.altitudes_km) out.push_back({el, az, alt});
        }
    }
    return out;
}

SamplingConfig sampling_preset(const std::string& name) {
    SamplingConfig c;
    if (name == "balanced") return c;
    if (name == "los") {
        c.coeffs = {0.4, 0.1, 0.1, 0.4};
        c.factors.terrain[static_cast<std::size_t>(WeissClass::Ridge)] = 2.0;
        c.factors.terrain[static_cast<std::size_t>(WeissClass::Valley)] = 2.0;
        c.factors.landcover[landcover::kWater] = 0.2;
        return c;
    }
    if (name == "reflection") {
        c.coeffs = {0.1, 0.1, 0.6, 0.2};
        c.factors.landcover[landcover::kWater] = 2.0;
        c.factors.landcover[landcover::kSnowIce] = 2.0;
        return c;
    }
    fail(ErrorCode::InvalidArgument, "unknown sampling preset '" + name + "' (balanced, los, reflection)");
}

PixelFeatures build_features(const SamplingLayers& layers) {
    if (!layers.dem || !layers.slope || !layers.roughness || !layers.weiss || !layers.landcover) {
        fail(ErrorCode::InvalidArgument, "clustering needs dem, slope, roughness, terrain class and land cover");
    }
    const auto& dem = *layers.dem;
    for (const RasterGrid* g : {layers.slope, layers.roughness, layers.weiss, layers.landcover, layers.function}) {
        if (g && !g->same_geometry(dem)) fail(ErrorCode::Geometry, "sampling layers differ in geometry");
    }
    PixelFeatures pf;
    std::vector<double> slope;
    std::vector<double> rough;
    std::vector<double> elev;
    std::set<int> function_ids;
    for (std::size_t i = 0; i < dem.size(); ++i) {
        auto bad = [i](const RasterGrid* g) { return g && g->is_nodata(g->values()[i]); };
        if (bad(layers.dem) || bad(layers.slope) || bad(layers.roughness) || bad(layers.weiss) ||
            bad(layers.landcover) || bad(layers.function)) {
            continue;
        }
        pf.pixels.push_back(i);
        pf.terrain.push_back(static_cast<int>(layers.weiss->values()[i]));
        pf.landcover.push_back(static_cast<int>(layers.landcover->values()[i]));
        const int f = layers.function ? static_cast<int>(layers.function->values()[i]) : 0;
        pf.function.push_back(f);
        function_ids.insert(f);
        slope.push_back(layers.slope->values()[i]);
        rough.push_back(layers.roughness->values()[i]);
        elev.push_back(dem.values()[i]);
    }
    if (pf.pixels.empty()) fail(ErrorCode::Nodata, "no pixel has every sampling layer");

    auto robust = [](const std::vector<double>& v) {
        const double med = median(v);
        double iqr = percentile(v, 75.0) - percentile(v, 25.0);
        if (!(iqr > 0.0)) iqr = 1.0;
        return std::pair{med, iqr};
    };
    const auto [s_med, s_iqr] = robust(slope);
    const auto [r_med, r_iqr] = robust(rough);
    const auto [e_med, e_iqr] = robust(elev);
    const std::vector<int> fids(function_ids.begin(), function_ids.end());
    const std::size_t dim = 3 + kWeissClassCount + kLandCoverClassCount + fids.size();
    pf.features.reserve(pf.pixels.size());
    for (std::size_t j = 0; j < pf.pixels.size(); ++j) {
        std::vector<double> v(dim, 0.0);
        v[0] = (slope[j] - s_med) / s_iqr;
        v[1] = (rough[j] - r_med) / r_iqr;
        v[2] = (elev[j] - e_med) / e_iqr;
        if (pf.terrain[j] < 0 || pf.terrain[j] >= kWeissClassCount) fail(ErrorCode::Validation, "terrain class out of range");
        if (pf.landcover[j] < 0 || pf.landcover[j] >= kLandCoverClassCount) fail(ErrorCode::Validation, "land-cover class out of range");
        v[3 + static_cast<std::size_t>(pf.terrain[j])] = 1.0;
        v[3 + kWeissClassCount + static_cast<std::size_t>(pf.landcover[j])] = 1.0;
        const auto fpos = std::lower_bound(fids.begin(), fids.end(), pf.function[j]) - fids.begin();
        v[3 + kWeissClassCount + kLandCoverClassCount + static_cast<std::size_t>(fpos)] = 1.0;
        pf.features.push_back(std::move(v));
    }
    return pf;
}

std::vector<long> spill_quotas(std::vector<long> quotas, const std::vector<long>& capacity,
                                const std::vector<double>& weights) {
    if (capacity.size() != quotas.size() || weights.size() != quotas.size()) {
        fail(ErrorCode::InvalidArgument, "spill_quotas: size mismatch");
    }
    for (;;) {
        long excess = 0;
        for (std::size_t i = 0; i < quotas.size(); ++i) {
            if (quotas[i] > capacity[i]) {
                excess += quotas[i] - capacity[i];
                quotas[i] = capacity[i];
            }
        }
        std::vector<std::size_t> open;
        for (std::size_t i = 0; i < quotas.size(); ++i) {
            if (quotas[i] < capacity[i]) open.push_back(i);
        }
        if (excess == 0 || open.empty()) return quotas;
        std::vector<double> w;
        for (auto i : open) w.push_back(weights[i]);
        if (std::all_of(w.begin(), w.end(), [](double v) { return v <= 0.0; })) {
            for (std::size_t j = 0; j < open.size(); ++j) w[j] = static_cast<double>(capacity[open[j]] - quotas[open[j]]);
        }
        const auto add = largest_remainder(w, excess);
        for (std::size_t j = 0; j < open.size(); ++j) quotas[open[j]] += add[j];
    }
}

SampleDesign design_samples(const SamplingLayers& layers, const SamplingConfig& config) {
    config.coeffs.validate();
    config.factors.validate();
    if (config.budget < 0) fail(ErrorCode::InvalidArgument, "sample budget must be non-negative");
    if (config.clusters < 1) fail(ErrorCode::InvalidArgument, "cluster count must be at least 1");
    const auto pf = build_features(layers);
    const int k = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(config.clusters), pf.pixels.size()));
    const auto km = kmeans(pf.features, k, config.seed);
    const auto& dem = *layers.dem;

    SampleDesign d;
    d.clusters.assign(static_cast<std::size_t>(k), {});
    d.cluster_map = RasterGrid(dem.origin_x(), dem.origin_y(), dem.cell_size(), dem.width(), dem.height(), -1.0,
                               std::vector<double>(dem.size(), -1.0));
    for (std::size_t j = 0; j < pf.pixels.size(); ++j) d.cluster_map.values()[pf.pixels[j]] = km.assignment[j];
    for (std::size_t j = 0; j < pf.pixels.size(); ++j) {
        auto& c = d.clusters[static_cast<std::size_t>(km.assignment[j])];
        c.size += 1.0;
        c.omega_terrain += config.factors.terrain_at(pf.terrain[j]);
        c.omega_function += config.factors.function_at(pf.function[j]);
        c.omega_landcover += config.factors.landcover_at(pf.landcover[j]);
        c.mean_elevation += dem.values()[pf.pixels[j]];
    }
    for (auto& c : d.clusters) {
        if (c.size > 0.0) {
            c.omega_terrain /= c.size;
            c.omega_function /= c.size;
            c.omega_landcover /= c.size;
            c.mean_elevation /= c.size;
        }
    }
    d.weights = cluster_weights(d.clusters, config.coeffs);
    double w_sum = std::accumulate(d.weights.begin(), d.weights.end(), 0.0);
    std::vector<double> quota_weights = d.weights;
    if (!(w_sum > 0.0)) {
        // Every mixture vanished: fall back to area proportions.
        for (std::size_t i = 0; i < d.clusters.size(); ++i) quota_weights[i] = d.clusters[i].size;
    }
    d.quotas = largest_remainder(quota_weights, config.budget);

    // Feature combinations per cluster, in (cluster, t, f, l) order.
    std::map<std::tuple<int, int, int, int>, std::vector<CandidatePoint>> combos;
    for (std::size_t j = 0; j < pf.pixels.size(); ++j) {
        const auto idx = pf.pixels[j];
        const long row = static_cast<long>(idx / static_cast<std::size_t>(dem.width()));
        const long col = static_cast<long>(idx % static_cast<std::size_t>(dem.width()));
        const auto c = dem.pixel_center(row, col);
        combos[{km.assignment[j], pf.terrain[j], pf.function[j], pf.landcover[j]}].push_back({c.x, c.y});
    }
    std::vector<std::vector<CandidatePoint>> groups;
    std::vector<long> group_quotas;
    for (int ci = 0; ci < k; ++ci) {
        std::vector<double> w;
        std::vector<decltype(combos)::const_iterator> members;
        for (auto it = combos.lower_bound({ci, -1, std::numeric_limits<int>::min(), -1});
             it != combos.end() && std::get<0>(it->first) == ci; ++it) {
            const auto& [cl, t, f, l] = it->first;
            w.push_back(config.factors.terrain_at(t) * config.factors.function_at(f) * config.factors.landcover_at(l));
            members.push_back(it);
        }
        const auto q = allocate_combination_quotas(w, d.quotas[static_cast<std::size_t>(ci)], config.s_min);
        d.overflow += q.overflow;
        std::vector<long> capacity;
        for (const auto& m : members) capacity.push_back(static_cast<long>(m->second.size()));
        const auto quotas = spill_quotas(q.quotas, capacity, w);
        for (std::size_t m = 0; m < members.size(); ++m) {
            const auto& [cl, t, f, l] = members[m]->first;
            d.combinations.push_back({cl, t, f, l, w[m], capacity[m], quotas[m], 0});
            groups.push_back(members[m]->second);
            group_quotas.push_back(quotas[m]);
        }
    }
    const auto drawn = draw_points(groups, group_quotas, config.d_min, config.seed ^ 0x9E3779B97F4A7C15ULL);
    d.shortfall = drawn.total_shortfall;
    long id = 0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        auto& combo = d.combinations[g];
        combo.drawn = static_cast<long>(drawn.points[g].size());
        for (const auto& p : drawn.points[g]) {
            d.points.push_back({id++, p.x, p.y, combo.cluster, combo.terrain, combo.landcover, combo.function});
        }
    }
    d.geometries = satellite_grid(config.satellites);
    return d;
}

void write_manifest(const SampleDesign& design, std::ostream& out) {
    out << "point_id,x,y,cluster,terrain,landcover,function,elev_deg,az_deg,alt_km\n";
    for (std::size_t i = 0; i < design.points.size(); ++i) {
        const auto& p = design.points[i];
        SatGeometry g{};
        if (!design.geometries.empty()) g = design.geometries[i % design.geometries.size()];
        out << p.point_id << ',' << format_number(p.x) << ',' << format_number(p.y) << ',' << p.cluster << ','
            << p.terrain << ',' << p.landcover << ',' << p.function << ',' << format_number(g.elevation_deg) << ','
            << format_number(g.azimuth_deg) << ',' << format_number(g.altitude_km) << '\n';
    }
}

std::vector<ManifestRow> read_manifest(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) fail(ErrorCode::Parse, "empty manifest");
    const auto header = split_csv_line(line);
    auto column = [&](const std::string& name) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        return std::nullopt;
    };
    const auto c_id = column("point_id");
    const auto c_x = column("x");
    const auto c_y = column("y");
    if (!c_id || !c_x || !c_y) fail(ErrorCode::Parse, "manifest header needs point_id, x and y");
    const auto c_cluster = column("cluster");
    const auto c_terrain = column("terrain");
    const auto c_lc = column("landcover");
    const auto c_fn = column("function");
    const auto c_el = column("elev_deg");
    const auto c_az = column("az_deg");
    const auto c_alt = column("alt_km");
    std::vector<ManifestRow> rows;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != header.size()) {
            fail(ErrorCode::Parse, "manifest line " + std::to_string(line_no) + " has " + std::to_string(f.size()) +
                                       " fields, expected " + std::to_string(header.size()));
        }
        const std::string where = "manifest line " + std::to_string(line_no);
        ManifestRow r;
        r.point.point_id = parse_long(f[*c_id], where);
        r.point.x = parse_double(f[*c_x], where);
        r.point.y = parse_double(f[*c_y], where);
        if (c_cluster) r.point.cluster = static_cast<int>(parse_long(f[*c_cluster], where));
        if (c_terrain) r.point.terrain = static_cast<int>(parse_long(f[*c_terrain], where));
        if (c_lc) r.point.landcover = static_cast<int>(parse_long(f[*c_lc], where));
        if (c_fn) r.point.function = static_cast<int>(parse_long(f[*c_fn], where));
        if (c_el) r.geometry.elevation_deg = parse_double(f[*c_el], where);
        if (c_az) r.geometry.azimuth_deg = parse_double(f[*c_az], where);
        if (c_alt) r.geometry.altitude_km = parse_double(f[*c_alt], where);
        rows.push_back(r);
    }
    return rows;
}

}  // namespace agc
