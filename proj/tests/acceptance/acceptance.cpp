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

// Acceptance run: one PASS/FAIL line per criterion, fixed seeds throughout.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "raymakeup/config.hpp"
#include "raymakeup/evaluation.hpp"
#include "raymakeup/pipeline.hpp"
#include "support/random_scenes.hpp"

using namespace raymakeup;
namespace rt = raymakeup::testing;

namespace {

int failures = 0;

void report(int n, bool ok, const std::string& detail, std::chrono::steady_clock::time_point t0) {
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %d: %s  %s  [%.1f s]\n", n, ok ? "PASS" : "FAIL", detail.c_str(), s);
    std::fflush(stdout);
    failures += ok ? 0 : 1;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

void ground_frequency_bound() {
    const auto t0 = std::chrono::steady_clock::now();
    const ArrayWindow w{{5.0, 0.0}, {1.0, 0.0}, 0.125 / 8.0, 1};
    const GroundFrequency g = appendix_psi_g({0.0, 0.0}, w, 0.5);
    const bool ok = std::fabs(g.bound - 0.0194) <= 1e-4 && std::fabs(std::fabs(g.psi_g) - g.bound) < 1e-12;
    report(1, ok, fmt("max |psi_g| = %.6f at h = 0.5 m, l = 5 m (target 0.0194 +- 1e-4)", g.bound), t0);
}

void amplitude_identity() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(2001);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    bool endpoints = true;
    for (int i = 0; i < 1000; ++i) {
        const Point2 r1{20.0 * u(rng) - 10.0, 20.0 * u(rng) - 10.0};
        const Point2 r2 = r1 + unit_from_angle(two_pi * u(rng)) * (0.2 + 8.0 * u(rng));
        const double a1 = std::pow(10.0, -4.0 * u(rng));
        const double a2 = std::pow(10.0, -4.0 * u(rng));
        const double t = u(rng);
        const Point2 rp = r1 + (r2 - r1) * t;
        const double got = predict_amplitude(a1, a2, r1, r2, rp);
        // 1 / alpha linear in arc length between the two boundary estimates
        const double d12 = distance(r1, r2);
        const double want = 1.0 / (1.0 / a1 + (1.0 / a2 - 1.0 / a1) * distance(r1, rp) / d12);
        worst = std::max(worst, std::fabs(got - want) / want);
        endpoints = endpoints && predict_amplitude(a1, a2, r1, r2, r1) == a1 &&
                    predict_amplitude(a1, a2, r1, r2, r2) == a2;
    }
    report(2, worst <= 1e-12 && endpoints,
           fmt("1000 draws, max relative error %.2e (<= 1e-12), endpoints %s", worst, endpoints ? "exact" : "off"),
           t0);
}

void phase_round_trip() {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    int used = 0;
    for (std::uint64_t seed = 3000; used < 200; ++seed) {
        const rt::RandomScene sc = rt::random_scene(seed);
        const Scenario& s = sc.scenario;
        const Point2 q = s.reflectors[0].position;
        const RayLine ray(sc.point, rt::oracle_travel_angle(q, sc.point));
        const auto chord = find_chord(ray, sc.enclosure);
        if (std::holds_alternative<Errc>(chord)) continue;
        const Point2 r1 = std::get<Chord>(chord).upstream.point;
        const double k = two_pi / s.wavelength;
        const double l_tx1 = distance(s.tx, r1);
        const double l_c1 = distance(s.tx, q) + distance(q, r1);
        const cplx got = predict_phase(k * (l_tx1 - l_c1), l_tx1, r1, sc.point, s.wavelength);
        const cplx want = oracle_ray_makeup(s, sc.point, {1.0, 0.0}).objects[0].phase;
        worst = std::max(worst, std::fabs(std::arg(got / want)));
        ++used;
    }
    report(3, worst <= 1e-6, fmt("200 scenes, max phase error %.2e rad (<= 1e-6)", worst), t0);
}

void ground_fit_grid() {
    const auto t0 = std::chrono::steady_clock::now();
    const Enclosure e = rt::rectangle(5.0, 2.0);
    double worst_eps = 0.0;
    double worst_g = 0.0;
    for (double eps : {2.0, 4.0, 9.0, 15.0})
        for (double g : {0.5, 1.0, 2.0}) {
            Scenario s;
            s.tx = {-4.0, -3.0};
            s.permittivity = eps;
            s.gain = g;
            const RouteMeasurements m = simulate_route_power(s, perimeter_route(e, s.wavelength / 8.0));
            const GroundFitResult f = fit_ground_params(m, s.tx, s.antenna_height, s.wavelength);
            worst_eps = std::max(worst_eps, std::fabs(f.permittivity - eps));
            worst_g = std::max(worst_g, std::fabs(f.gain / g - 1.0));
        }
    report(4, worst_eps <= 0.1 && worst_g <= 0.02,
           fmt("12 combinations, max |eps error| %.4f (<= 0.1), max G error %.3f%% (<= 2%%)", worst_eps,
               100.0 * worst_g),
           t0);
}

void aoa_random_scenes() {
    const auto t0 = std::chrono::steady_clock::now();
    constexpr int n = 200;
    PredictorOptions po;
    po.noise_floor_factor = RunConfig::default_noise_floor_factor;
    const auto trial = [&](std::uint64_t seed, std::size_t reflectors) {
        rt::RandomSceneOptions o;
        o.reflectors = reflectors;
        rt::RandomScene sc = rt::random_scene(seed, o);
        sc.scenario.snr_db = 30.0;
        const BoundaryData data = rt::boundary_for(sc.scenario, sc.enclosure, po);
        const std::vector<CandidateRay> rays = scan_candidate_rays(sc.point, data, po.scan_step);
        if (reflectors == 0) return rays.empty();
        const double truth = rt::oracle_travel_angle(sc.scenario.reflectors[0].position, sc.point);
        if (rays.empty()) return false;
        for (const CandidateRay& c : rays)
            if (rad2deg(angle_distance(c.angle, truth)) > 1.0) return false;
        return true;
    };
    std::atomic<int> hit{0};
    std::atomic<int> quiet{0};
    detail::parallel_for(n, [&](std::size_t i) { hit += trial(1000 + i, 1) ? 1 : 0; });
    detail::parallel_for(n, [&](std::size_t i) { quiet += trial(5000 + i, 0) ? 1 : 0; });
    const double a = static_cast<double>(hit) / n;
    const double b = static_cast<double>(quiet) / n;
    report(5, a >= 0.95 && b >= 0.99,
           fmt("SNR 30 dB: %d/%d single-reflector scenes within 1 deg (%.1f%%, >= 95%%), "
               "%d/%d reflector-free scenes with no ray (%.1f%%, >= 99%%)",
               hit.load(), n, 100.0 * a, quiet.load(), n, 100.0 * b),
           t0);
}

RunConfig scene(int i) {
    return load_config(std::string(RAYMAKEUP_SCENES_DIR) + "/area" + std::to_string(i) + ".cfg");
}

void end_to_end_power() {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    std::string detail;
    for (int i = 1; i <= 3; ++i) {
        const RunConfig cfg = scene(i);
        const BoundaryData data = prepare_boundary(cfg, simulate_boundary(cfg));
        const std::vector<Point2> grid = prediction_grid(cfg);
        const std::vector<PredictionResult> pred = predict_grid(grid, data);
        csv::Table baseline{csv::prediction_columns, {}};
        for (Point2 p : grid)
            baseline.rows.push_back(
                {p.x, p.y, to_db(std::norm(reconstruct_signal(two_ray_makeup(p, data), cfg.scenario.wavelength))), 0.0});
        const csv::Table oracle = oracle_grid_table(cfg.scenario, grid);
        const PowerMetrics m = compare_power(csv::prediction_table(pred), oracle);
        const PowerMetrics b = compare_power(baseline, oracle);
        const bool pass = m.no_fades.median <= 1.0 && m.no_fades.p90 <= 3.0;
        ok = ok && pass;
        detail += fmt("%sscene %d: median %.2f dB, p90 %.2f dB over %zu points (two-ray only: %.2f / %.2f) %s",
                      i == 1 ? "" : "; ", i, m.no_fades.median, m.no_fades.p90, m.no_fades.count, b.no_fades.median,
                      b.no_fades.p90, pass ? "ok" : "over");
    }
    report(6, ok, detail + " (median <= 1.0, p90 <= 3.0)", t0);
}

void profile_ridges() {
    const auto t0 = std::chrono::steady_clock::now();
    const RunConfig cfg = scene(2);
    const BoundaryData data = prepare_boundary(cfg, simulate_boundary(cfg));
    const std::vector<Point2> route = cfg.route_points();
    const std::vector<PredictionResult> pred = predict_grid(route, data);
    std::vector<std::vector<double>> predicted(route.size());
    std::vector<std::vector<double>> truth(route.size());
    for (std::size_t i = 0; i < route.size(); ++i) {
        for (const RayDiagnostics& r : pred[i].rays) predicted[i].push_back(r.angle);
        for (const OracleRay& r : oracle_rays_at(cfg.scenario, route[i])) truth[i].push_back(r.angle);
    }
    const double f = ridge_match_fraction(predicted, truth, deg2rad(2.0));
    report(7, f >= 0.9, fmt("scene 2 route, %zu samples: ridge match within 2 deg %.1f%% (>= 90%%)", route.size(),
                            100.0 * f),
           t0);
}

void approximation_bound() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(8008);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double lam = 0.125;
    std::size_t samples = 0;
    std::size_t violations = 0;
    double tightest = 0.0;
    for (int i = 0; i < 1000; ++i) {
        Scenario s;
        s.tx = unit_from_angle(two_pi * u(rng)) * (3.0 + 10.0 * u(rng));
        s.permittivity = 1.0 + 29.0 * u(rng);
        s.antenna_height = 0.2 + 1.5 * u(rng);
        const int nref = static_cast<int>(6.0 * u(rng));
        for (int j = 0; j < nref; ++j)
            s.reflectors.push_back({unit_from_angle(two_pi * u(rng)) * (2.0 + 8.0 * u(rng)), 0.1 + 0.9 * u(rng),
                                    u(rng) < 0.5 ? std::nullopt : std::optional<double>(0.3 * u(rng))});
        const Point2 axis = unit_from_angle(two_pi * u(rng));
        const Point2 start{u(rng) - 0.5, u(rng) - 0.5};
        const RayMakeup m = oracle_ray_makeup(s, start, axis);
        const double bound = neglected_cross_term_bound(m);
        for (int k = 0; k <= 64; ++k) {
            const double d = k * lam / 8.0;
            const double err = std::fabs(std::norm(array_signal(m, d, lam)) - power_approximation(m, d, lam));
            ++samples;
            if (err > bound * (1.0 + 1e-12) + 1e-18) ++violations;
            if (bound > 0.0) tightest = std::max(tightest, err / bound);
        }
    }
    report(8, violations == 0,
           fmt("1000 makeups, %zu samples, %zu above the bound (max error / bound %.3f)", samples, violations,
               tightest),
           t0);
}

} // namespace

int main() {
    ground_frequency_bound();
    amplitude_identity();
    phase_round_trip();
    ground_fit_grid();
    aoa_random_scenes();
    end_to_end_power();
    profile_ridges();
    approximation_bound();
    std::printf("%d of 8 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
