// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The raymakeup Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// Ground truth from the simulator and prediction-versus-truth metrics.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include "raymakeup/channel_sim.hpp"
#include "raymakeup/csv.hpp"
#include "raymakeup/errors.hpp"
#include "raymakeup/geometry.hpp"
#include "raymakeup/predictor.hpp"

namespace raymakeup {

struct OracleRay {
    double angle = 0.0;  ///< direction of travel at the point, radians
    double alpha = 0.0;
    double phase = 0.0;  ///< arg e^{j k l}
    double length = 0.0;
};

/// Object rays arriving at p, straight from the scenario.
inline std::vector<OracleRay> oracle_rays_at(const Scenario& s, Point2 p) {
    const RayMakeup m = oracle_ray_makeup(s, p, {1.0, 0.0});
    std::vector<OracleRay> out;
    for (std::size_t i = 0; i < s.reflectors.size(); ++i) {
        const Point2 v = p - s.reflectors[i].position;
        const ObjectRay& o = m.objects[i];
        out.push_back({normalize_angle(std::atan2(v.y, v.x)), o.amplitude, std::arg(o.phase), *o.length});
    }
    return out;
}

/// Noise-free received power in dB.
inline double oracle_power_db(const Scenario& s, Point2 p) { return to_db(std::norm(simulate_point_signal(s, p))); }

inline csv::Table oracle_grid_table(const Scenario& s, std::span<const Point2> points) {
    csv::Table t{csv::oracle_grid_columns, {}};
    for (Point2 p : points)
        t.rows.push_back({p.x, p.y, oracle_power_db(s, p), static_cast<double>(s.reflectors.size())});
    return t;
}

inline csv::Table oracle_ray_table(const Scenario& s, std::span<const Point2> points) {
    csv::Table t{csv::oracle_ray_columns, {}};
    for (Point2 p : points)
        for (const OracleRay& r : oracle_rays_at(s, p))
            t.rows.push_back({p.x, p.y, rad2deg(r.angle), r.alpha, r.phase, r.length});
    return t;
}

inline std::vector<ProfileRow> oracle_profile(const Scenario& s, std::span<const Point2> route,
                                              const ProfileOptions& opt = {}) {
    std::vector<std::vector<ProfileRay>> rays(route.size());
    for (std::size_t i = 0; i < route.size(); ++i)
        for (const OracleRay& r : oracle_rays_at(s, route[i])) rays[i].push_back({r.angle, r.alpha * r.alpha});
    return bin_profile(route, s.tx, rays, opt);
}

// ---------------------------------------------------------------------------
// Metrics

/// Percentile with linear interpolation between order statistics.
inline double percentile(std::vector<double> v, double q) {
    if (v.empty()) return std::nan("");
    std::sort(v.begin(), v.end());
    const double pos = q / 100.0 * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

struct Summary {
    std::size_t count = 0;
    double median = std::nan("");
    double mean = std::nan("");
    double p90 = std::nan("");
};

inline Summary summarize(const std::vector<double>& v) {
    Summary s;
    s.count = v.size();
    if (v.empty()) return s;
    s.median = percentile(v, 50.0);
    s.p90 = percentile(v, 90.0);
    double sum = 0.0;
    for (double x : v) sum += x;
    s.mean = sum / static_cast<double>(v.size());
    return s;
}

struct PowerMetrics {
    Summary all;        ///< |predicted - oracle| in dB
    Summary no_fades;   ///< same, points with oracle < max - fade_db dropped
    std::size_t excluded = 0;
};

/// Both tables carry (x, y, power_db, ...) rows for the same points in the
/// same order.
inline PowerMetrics compare_power(const csv::Table& predicted, const csv::Table& oracle, double fade_db = 30.0) {
    if (predicted.rows.size() != oracle.rows.size())
        throw Error(Errc::GridMismatch, "prediction and oracle grids have different sizes");
    double top = -std::numeric_limits<double>::infinity();
    for (const csv::Row& r : oracle.rows) top = std::max(top, r[2]);
    std::vector<double> all;
    std::vector<double> kept;
    PowerMetrics m;
    for (std::size_t i = 0; i < oracle.rows.size(); ++i) {
        const csv::Row& p = predicted.rows[i];
        const csv::Row& o = oracle.rows[i];
        if (std::fabs(p[0] - o[0]) > 1e-6 || std::fabs(p[1] - o[1]) > 1e-6)
            throw Error(Errc::GridMismatch, "grid point " + std::to_string(i) + " differs");
        const double err = std::fabs(p[2] - o[2]);
        all.push_back(err);
        if (o[2] >= top - fade_db) kept.push_back(err);
        else ++m.excluded;
    }
    m.all = summarize(all);
    m.no_fades = summarize(kept);
    return m;
}

struct AoaMetrics {
    Summary error_deg; ///< each predicted ray against the nearest oracle ray at its point
    double within_1deg = std::nan("");
    double within_2deg = std::nan("");
};

/// Rows are (x, y, angle_deg, ...); rays are grouped by point.
inline AoaMetrics compare_rays(const csv::Table& predicted, const csv::Table& oracle) {
    std::map<std::pair<long long, long long>, std::vector<double>> truth;
    const auto key = [](const csv::Row& r) {
        return std::make_pair(std::llround(r[0] * 1e6), std::llround(r[1] * 1e6));
    };
    for (const csv::Row& r : oracle.rows) truth[key(r)].push_back(r[2]);
    std::vector<double> err;
    for (const csv::Row& r : predicted.rows) {
        const auto it = truth.find(key(r));
        if (it == truth.end()) throw Error(Errc::GridMismatch, "predicted ray at a point without oracle rays");
        double best = 360.0;
        for (double a : it->second) best = std::min(best, rad2deg(angle_distance(deg2rad(a), deg2rad(r[2]))));
        err.push_back(best);
    }
    AoaMetrics m;
    m.error_deg = summarize(err);
    if (!err.empty()) {
        const auto frac = [&](double tol) {
            return static_cast<double>(std::count_if(err.begin(), err.end(), [&](double e) { return e <= tol; })) /
                   static_cast<double>(err.size());
        };
        m.within_1deg = frac(1.0);
        m.within_2deg = frac(2.0);
    }
    return m;
}

/// Pearson correlation of two profiles over the union of their
/// (arclen, coordinate) cells; missing cells count as zero.
inline double profile_correlation(const std::vector<ProfileRow>& a, const std::vector<ProfileRow>& b) {
    std::map<std::pair<long long, long long>, std::pair<double, double>> cells;
    const auto key = [](const ProfileRow& r) {
        return std::make_pair(std::llround(r.arclen * 1e6), std::llround(r.coordinate * 1e6));
    };
    for (const ProfileRow& r : a) cells[key(r)].first += r.power;
    for (const ProfileRow& r : b) cells[key(r)].second += r.power;
    if (cells.size() < 2) return std::nan("");
    double ma = 0.0, mb = 0.0;
    for (const auto& [k, v] : cells) {
        ma += v.first;
        mb += v.second;
    }
    const auto n = static_cast<double>(cells.size());
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (const auto& [k, v] : cells) {
        sab += (v.first - ma) * (v.second - mb);
        saa += (v.first - ma) * (v.first - ma);
        sbb += (v.second - mb) * (v.second - mb);
    }
    return saa > 0.0 && sbb > 0.0 ? sab / std::sqrt(saa * sbb) : std::nan("");
}

/// Fraction of route samples whose predicted rays are all within tol of
/// some oracle ray; samples with no predicted ray count as misses.
inline double ridge_match_fraction(const std::vector<std::vector<double>>& predicted_angles,
                                   const std::vector<std::vector<double>>& oracle_angles, double tol) {
    if (predicted_angles.size() != oracle_angles.size())
        throw Error(Errc::GridMismatch, "route sample counts differ");
    if (predicted_angles.empty()) return std::nan("");
    std::size_t good = 0;
    for (std::size_t i = 0; i < predicted_angles.size(); ++i) {
        const auto& pred = predicted_angles[i];
        const bool ok = !pred.empty() && std::all_of(pred.begin(), pred.end(), [&](double a) {
            return std::any_of(oracle_angles[i].begin(), oracle_angles[i].end(),
                               [&](double o) { return angle_distance(a, o) <= tol; });
        });
        good += ok ? 1 : 0;
    }
    return static_cast<double>(good) / static_cast<double>(predicted_angles.size());
}

} // namespace raymakeup
