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

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "raymakeup/errors.hpp"
#include "raymakeup/geometry.hpp"

namespace raymakeup {

using cplx = std::complex<double>;

/// Unit phasor e^{j theta}.
inline cplx phasor(double theta) noexcept { return {std::cos(theta), std::sin(theta)}; }

/// Point scatterer outside the prediction region. A single bounce is assumed
/// unless an explicit attenuation is given.
struct Reflector {
    Point2 position;
    double gamma = 1.0;                ///< reflection coefficient in (0, 1]
    std::optional<double> attenuation; ///< overrides the single-bounce attenuation R_n
};

/// Complete ground-truth world for the simulator.
struct Scenario {
    Point2 tx;
    double wavelength = 0.125;    ///< meters
    double antenna_height = 0.5;  ///< Tx and Rx share this height, meters
    double permittivity = 4.0;    ///< relative ground permittivity
    double gain = 1.0;            ///< P_t * G_t * G_r
    std::vector<Reflector> reflectors;
    std::optional<double> snr_db; ///< noise off when empty
    std::uint64_t seed = 0;

    void validate() const {
        if (!is_finite(tx)) throw Error(Errc::InvalidArgument, "tx position is not finite");
        if (!(wavelength > 0.0)) throw Error(Errc::InvalidArgument, "wavelength must be positive");
        if (!(antenna_height >= 0.0)) throw Error(Errc::InvalidArgument, "antenna height must be >= 0");
        if (!(permittivity >= 1.0)) throw Error(Errc::InvalidArgument, "permittivity must be >= 1");
        if (!(gain > 0.0)) throw Error(Errc::InvalidArgument, "gain product must be positive");
        for (const Reflector& r : reflectors) {
            if (!is_finite(r.position)) throw Error(Errc::InvalidArgument, "reflector position is not finite");
            if (!(r.gamma > 0.0 && r.gamma <= 1.0))
                throw Error(Errc::InvalidArgument, "reflection coefficient must lie in (0, 1]");
            if (r.attenuation && !(*r.attenuation >= 0.0))
                throw Error(Errc::InvalidArgument, "attenuation override must be >= 0");
        }
    }
};

// ---------------------------------------------------------------------------
// Two-ray ground model

/// Length of the ground-bounce path between antennas of equal height.
inline double ground_path_length(double l_tx, double antenna_height) {
    if (!(l_tx > 0.0)) throw Error(Errc::NonPositiveDistance, "direct path length must be positive");
    if (!(antenna_height >= 0.0)) throw Error(Errc::InvalidArgument, "antenna height must be >= 0");
    return 2.0 * std::sqrt(0.25 * l_tx * l_tx + antenna_height * antenna_height);
}

/// Grazing angle between the ground plane and the bounced ray.
inline double ground_grazing_angle(double l_tx, double antenna_height) noexcept {
    return std::atan2(2.0 * antenna_height, l_tx);
}

/// gamma_g = (sin t - Z) / (sin t + Z),  Z = sqrt(eps - cos^2 t) / eps.
inline double ground_reflection_coeff(double theta, double permittivity) {
    if (!(theta > 0.0 && theta <= 0.5 * pi)) throw Error(Errc::InvalidAngle, "grazing angle must lie in (0, pi/2]");
    if (!(permittivity >= 1.0)) throw Error(Errc::InvalidArgument, "permittivity must be >= 1");
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const double z = std::sqrt(std::max(permittivity - c * c, 0.0)) / permittivity;
    return (s - z) / (s + z);
}

namespace detail {

// Flat-ground limit (h = 0) of the reflection coefficient.
inline double ground_coeff_or_limit(double theta, double permittivity) {
    if (theta > 0.0) return ground_reflection_coeff(theta, permittivity);
    return permittivity > 1.0 ? -1.0 : 0.0;
}

} // namespace detail

/// Direct and ground path amplitudes/lengths for a Tx-Rx separation.
struct TwoRayTerms {
    double alpha_tx = 0.0;
    double l_tx = 0.0;
    double alpha_g = 0.0; ///< signed: carries the sign of gamma_g
    double l_g = 0.0;
    double gamma_g = 0.0;
};

inline TwoRayTerms two_ray_terms(double l_tx, double antenna_height, double permittivity, double gain,
                                 double wavelength) {
    TwoRayTerms t;
    t.l_tx = l_tx;
    t.l_g = ground_path_length(l_tx, antenna_height);
    t.gamma_g = detail::ground_coeff_or_limit(ground_grazing_angle(l_tx, antenna_height), permittivity);
    t.alpha_tx = wavelength * gain / (4.0 * pi * l_tx);
    t.alpha_g = wavelength * gain * t.gamma_g / (4.0 * pi * t.l_g);
    return t;
}

// ---------------------------------------------------------------------------
// Ray makeup

struct DirectRay {
    double amplitude = 0.0;
    double length = 0.0;
    double aoa = 0.0;
};

struct GroundRay {
    double amplitude = 0.0; ///< signed (gamma_g < 0 near grazing)
    double length = 0.0;
    double aoa = 0.0; ///< arrival angle of the ground path projected on the array
};

struct ObjectRay {
    double amplitude = 0.0;
    double aoa = 0.0;            ///< relative to the array axis, [0, pi]
    cplx phase{1.0, 0.0};        ///< e^{j 2 pi l / lambda}
    std::optional<double> length;
};

/// Every path arriving at one point.
struct RayMakeup {
    DirectRay direct;
    GroundRay ground;
    std::vector<ObjectRay> objects;
};

/// Noise-free complex baseband signal assembled from a makeup.
inline cplx reconstruct_signal(const RayMakeup& m, double wavelength) {
    const double k = two_pi / wavelength;
    cplx c = m.direct.amplitude * phasor(k * m.direct.length) + m.ground.amplitude * phasor(k * m.ground.length);
    for (const ObjectRay& o : m.objects) c += o.amplitude * o.phase;
    return c;
}

/// Signal at distance d along an array whose first antenna carries the makeup,
/// with every path modelled as a plane wave across the array.
inline cplx array_signal(const RayMakeup& m, double d, double wavelength) {
    const double k = two_pi / wavelength;
    const double c_tx = std::cos(m.direct.aoa);
    cplx c = m.direct.amplitude * phasor(k * (m.direct.length - d * c_tx));
    c += m.ground.amplitude * phasor(k * (m.ground.length - d * std::cos(m.ground.aoa)));
    for (const ObjectRay& o : m.objects) c += o.amplitude * o.phase * phasor(-k * d * std::cos(o.aoa));
    return c;
}

/// Received power keeping only the self terms and the cross terms with the
/// direct path; object-object and ground-object products are dropped.
inline double power_approximation(const RayMakeup& m, double d, double wavelength) {
    const double k = two_pi / wavelength;
    const double a_tx = m.direct.amplitude;
    const double a_g = m.ground.amplitude;
    const double c_tx = std::cos(m.direct.aoa);
    const double l_g_d = m.ground.length - d * std::cos(m.ground.aoa);
    double p = a_tx * a_tx + a_g * a_g;
    p += 2.0 * a_tx * a_g * std::cos(k * (m.direct.length - d * c_tx - l_g_d));
    const cplx tx_phase = phasor(k * m.direct.length);
    for (const ObjectRay& o : m.objects) {
        p += o.amplitude * o.amplitude;
        // e^{j k (l_tx - l_n)} with the unit phase factor standing in for l_n
        const double mu = std::arg(tx_phase * std::conj(o.phase));
        const double psi = c_tx - std::cos(o.aoa);
        p += 2.0 * a_tx * o.amplitude * std::cos(mu - k * d * psi);
    }
    return p;
}

/// Upper bound on |exact power - power_approximation| from the dropped terms.
inline double neglected_cross_term_bound(const RayMakeup& m) {
    double sum = 0.0;
    double sum_sq = 0.0;
    for (const ObjectRay& o : m.objects) {
        sum += o.amplitude;
        sum_sq += o.amplitude * o.amplitude;
    }
    // 2 * sum_{m<n} a_m a_n = sum^2 - sum of squares
    return (sum * sum - sum_sq) + 2.0 * std::fabs(m.ground.amplitude) * sum;
}

/// True path parameters at a receiver, for evaluation only.
inline RayMakeup oracle_ray_makeup(const Scenario& s, Point2 rx, Point2 array_direction) {
    const double lam = s.wavelength;
    const double k = two_pi / lam;
    const Point2 u = normalized(array_direction);
    const Point2 to_tx = s.tx - rx;
    const double l_tx = norm(to_tx);
    if (!(l_tx > 0.0)) throw Error(Errc::CoincidentPoints, "receiver coincides with the transmitter");

    RayMakeup m;
    const TwoRayTerms t = two_ray_terms(l_tx, s.antenna_height, s.permittivity, s.gain, lam);
    m.direct = {t.alpha_tx, l_tx, aoa_relative_to_array(to_tx / l_tx, u)};
    // Image source below ground: dl_g/dd = (l_tx / l_g) * dl_tx/dd.
    const double cos_ground = std::clamp((l_tx / t.l_g) * std::cos(m.direct.aoa), -1.0, 1.0);
    m.ground = {t.alpha_g, t.l_g, std::acos(cos_ground)};

    for (const Reflector& r : s.reflectors) {
        const double d1 = distance(s.tx, r.position);
        const Point2 to_refl = r.position - rx;
        const double d2 = norm(to_refl);
        if (!(d2 > 0.0) || !(d1 > 0.0))
            throw Error(Errc::CoincidentPoints, "reflector coincides with the receiver or transmitter");
        const double att = r.attenuation ? *r.attenuation : r.gamma / (4.0 * pi * d1);
        ObjectRay o;
        o.amplitude = lam * s.gain * att / (4.0 * pi * d2);
        o.aoa = aoa_relative_to_array(to_refl / d2, u);
        o.length = d1 + d2;
        o.phase = phasor(k * (d1 + d2));
        m.objects.push_back(o);
    }
    return m;
}

// ---------------------------------------------------------------------------
// Signal and route simulation

/// Noise standard deviation giving the scenario SNR relative to alpha_ref^2.
inline double noise_sigma(const Scenario& s, double alpha_ref) noexcept {
    if (!s.snr_db) return 0.0;
    return alpha_ref * std::pow(10.0, -*s.snr_db / 20.0);
}

/// Circularly-symmetric complex Gaussian draw keyed by (seed, key), so each
/// sample is reproducible independently of evaluation order.
inline cplx noise_sample(std::uint64_t seed, std::uint64_t key, double sigma) {
    if (sigma == 0.0) return {0.0, 0.0};
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)};
    std::mt19937_64 gen(seq);
    std::normal_distribution<double> n(0.0, sigma / std::sqrt(2.0));
    const double re = n(gen);
    const double im = n(gen);
    return {re, im};
}

/// Exact noise-free complex baseband signal at a receiver.
inline cplx simulate_point_signal(const Scenario& s, Point2 rx) {
    const double lam = s.wavelength;
    const double k = two_pi / lam;
    const double l_tx = distance(s.tx, rx);
    if (!(l_tx > 0.0)) throw Error(Errc::CoincidentTxRx, "receiver coincides with the transmitter");
    const TwoRayTerms t = two_ray_terms(l_tx, s.antenna_height, s.permittivity, s.gain, lam);
    cplx c = t.alpha_tx * phasor(k * t.l_tx) + t.alpha_g * phasor(k * t.l_g);
    for (const Reflector& r : s.reflectors) {
        const double d1 = distance(s.tx, r.position);
        const double d2 = distance(r.position, rx);
        if (!(d2 > 0.0)) throw Error(Errc::CoincidentPoints, "receiver coincides with a reflector");
        const double att = r.attenuation ? *r.attenuation : r.gamma / (4.0 * pi * d1);
        c += lam * s.gain * att / (4.0 * pi * d2) * phasor(k * (d1 + d2));
    }
    return c;
}

inline cplx simulate_point_signal(const Scenario& s, Point2 rx, double sigma, std::uint64_t key) {
    return simulate_point_signal(s, rx) + noise_sample(s.seed, key, sigma);
}

struct RoutePoint {
    Point2 position;
    double arclen = 0.0;
};

struct RouteSample {
    Point2 position;
    double arclen = 0.0;
    double power = 0.0;    ///< linear
    double power_db = 0.0; ///< 10 log10(power)
};

struct RouteMeasurements {
    std::vector<RouteSample> samples;
};

inline double to_db(double linear) noexcept { return 10.0 * std::log10(linear); }
inline double from_db(double db) noexcept { return std::pow(10.0, db / 10.0); }

/// Samples the closed perimeter counter-clockwise from vertex 0. Each edge is
/// split into equal steps no longer than `spacing`; vertices appear once and
/// the route closes on its starting vertex.
inline std::vector<RoutePoint> perimeter_route(const Enclosure& e, double spacing) {
    if (!(spacing > 0.0)) throw Error(Errc::InvalidArgument, "sample spacing must be positive");
    std::vector<RoutePoint> route;
    route.push_back({e.vertices().front(), 0.0});
    for (std::size_t i = 0; i < e.size(); ++i) {
        const Segment seg = e.edge(i);
        const double len = seg.length();
        const auto steps = static_cast<std::size_t>(std::ceil(len / spacing - 1e-9));
        for (std::size_t j = 1; j <= steps; ++j) {
            const double t = static_cast<double>(j) / static_cast<double>(steps);
            route.push_back({seg.a + (seg.b - seg.a) * t, e.edge_start_arclen(i) + t * len});
        }
    }
    return route;
}

/// Received power along a route using the exact complex sum.
inline RouteMeasurements simulate_route_power(const Scenario& s, std::span<const RoutePoint> route) {
    s.validate();
    const double max_step = s.wavelength / 4.0 * (1.0 + 1e-9);
    for (std::size_t i = 1; i < route.size(); ++i)
        if (distance(route[i].position, route[i - 1].position) > max_step)
            throw Error(Errc::UndersampledRoute, "route spacing exceeds lambda/4 at sample " + std::to_string(i));
    RouteMeasurements out;
    if (route.empty()) return out;
    const double sigma = noise_sigma(
        s, s.wavelength * s.gain / (4.0 * pi * distance(s.tx, route.front().position)));
    out.samples.reserve(route.size());
    for (std::size_t i = 0; i < route.size(); ++i) {
        const double p = std::norm(simulate_point_signal(s, route[i].position, sigma, i));
        out.samples.push_back({route[i].position, route[i].arclen, p, to_db(p)});
    }
    return out;
}

} // namespace raymakeup
