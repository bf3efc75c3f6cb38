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

// Randomized scene generators shared by the unit tests and the acceptance run.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "raymakeup/channel_sim.hpp"
#include "raymakeup/geometry.hpp"
#include "raymakeup/ground_fit.hpp"
#include "raymakeup/predictor.hpp"

namespace raymakeup::testing {

struct RandomScene {
    Scenario scenario;
    Enclosure enclosure;
    Point2 point; ///< prediction point
};

struct RandomSceneOptions {
    double width = 4.0;
    double height = 3.0;
    double tx_min = 6.0;
    double tx_max = 10.0;
    double reflector_min = 3.5;
    double reflector_max = 6.0;
    double reflector_margin = 1.5; ///< kept this far outside the enclosure
    double min_observable_psi = 0.3;
    double clearance = 0.5;
    std::size_t reflectors = 1;
    /// Object path strength relative to the direct path at the enclosure
    /// centre, drawn uniformly in dB.
    double relative_db_min = -25.0;
    double relative_db_max = -12.0;
};

inline Enclosure rectangle(double w, double h) { return Enclosure({{0.0, 0.0}, {w, 0.0}, {w, h}, {0.0, h}}); }

/// |cos(phi_Tx) - cos(phi)| of the reflector's ray at both ends of its chord
/// through p; infinite-like sentinel when the chord is degenerate.
inline double weakest_end_psi(const Scenario& s, const Enclosure& e, Point2 p, Point2 q) {
    const Point2 v = p - q;
    const RayLine ray(p, std::atan2(v.y, v.x));
    const auto c = find_chord(ray, e);
    if (std::holds_alternative<Errc>(c)) return 0.0;
    const Chord& ch = std::get<Chord>(c);
    double w = 2.0;
    for (const BoundaryHit* h : {&ch.upstream, &ch.downstream}) {
        const Point2 u = e.edge(h->edge).direction();
        const Point2 to_tx = normalized(s.tx - h->point);
        w = std::min(w, std::fabs(dot(u, to_tx) + dot(u, ray.direction())));
    }
    return w;
}

/// Transmitter and reflectors placed around a rectangular enclosure. The
/// prediction point is redrawn until the first reflector's ray is visible
/// (outside the ground-path band) at both boundary windows.
inline RandomScene random_scene(std::uint64_t seed, const RandomSceneOptions& o = {}) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto uni = [&](double a, double b) { return a + (b - a) * unit(rng); };
    const Point2 ctr{0.5 * o.width, 0.5 * o.height};
    for (;;) {
        RandomScene r{Scenario{}, rectangle(o.width, o.height), {}};
        Scenario& s = r.scenario;
        s.tx = ctr + unit_from_angle(uni(0.0, two_pi)) * uni(o.tx_min, o.tx_max);
        s.permittivity = uni(2.0, 15.0);
        s.seed = seed;
        while (s.reflectors.size() < o.reflectors) {
            const Point2 q = ctr + unit_from_angle(uni(0.0, two_pi)) * uni(o.reflector_min, o.reflector_max);
            const bool outside = q.x < -o.reflector_margin || q.x > o.width + o.reflector_margin ||
                                 q.y < -o.reflector_margin || q.y > o.height + o.reflector_margin;
            if (!outside || distance(q, s.tx) <= 2.0) continue;
            const double rel = std::pow(10.0, uni(o.relative_db_min, o.relative_db_max) / 20.0);
            // alpha_n / alpha_Tx = R * l_Tx / |q - c| at the centre c
            s.reflectors.push_back({q, 1.0, rel * distance(q, ctr) / distance(s.tx, ctr)});
        }
        for (int tries = 0; tries < 50; ++tries) {
            r.point = {uni(o.clearance, o.width - o.clearance), uni(o.clearance, o.height - o.clearance)};
            if (s.reflectors.empty() ||
                weakest_end_psi(s, r.enclosure, r.point, s.reflectors[0].position) >= o.min_observable_psi)
                return r;
        }
    }
}

/// Simulated boundary, fitted ground and windows for a scene.
inline BoundaryData boundary_for(const Scenario& s, const Enclosure& e, const PredictorOptions& opt = {},
                                 double spacing_fraction = 0.125) {
    const auto route = perimeter_route(e, spacing_fraction * s.wavelength);
    const RouteMeasurements m = simulate_route_power(s, route);
    const GroundFitResult fit = fit_ground_params(m, s.tx, s.antenna_height, s.wavelength);
    return BoundaryData(e, m, fit, s.tx, s.antenna_height, s.wavelength, opt);
}

/// Direction of travel of the reflector's ray at p.
inline double oracle_travel_angle(Point2 q, Point2 p) {
    const Point2 v = p - q;
    return normalize_angle(std::atan2(v.y, v.x));
}

} // namespace raymakeup::testing
