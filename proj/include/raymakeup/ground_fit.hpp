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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "raymakeup/channel_sim.hpp"
#include "raymakeup/errors.hpp"
#include "raymakeup/geometry.hpp"

namespace raymakeup {

struct GroundFitResult {
    double permittivity = 1.0;       ///< estimated eps_r
    double gain = 1.0;               ///< estimated G = P_t G_t G_r
    double residual_mse_db2 = 0.0;   ///< objective at the optimum, dB^2
    double permittivity_resolution = 0.0;
    double gain_resolution_db = 0.0;
};

struct GroundFitOptions {
    double permittivity_min = 1.0;
    double permittivity_max = 30.0;
    double permittivity_step = 0.25;
    double gain_span = 100.0; ///< gain is confined to [G0 / span, G0 * span]
    double permittivity_resolution = 0.01;
    bool smooth = false;          ///< moving-average the measurements first
    double smooth_length = 1.0;   ///< meters of route per average
};

/// Slowly varying direct + ground power at a boundary point.
inline double theoretical_mean_power(Point2 rb, double permittivity, double gain, Point2 tx,
                                     double antenna_height, double wavelength) {
    const double l_tx = distance(rb, tx);
    if (!(l_tx > 0.0)) throw Error(Errc::CoincidentPoints, "boundary point coincides with the transmitter");
    const TwoRayTerms t = two_ray_terms(l_tx, antenna_height, permittivity, gain, wavelength);
    return t.alpha_tx * t.alpha_tx + t.alpha_g * t.alpha_g +
           2.0 * t.alpha_tx * t.alpha_g * std::cos(two_pi * (t.l_tx - t.l_g) / wavelength);
}

namespace detail {

// Linear-power moving average over +-half_length of arc length, then dB.
inline std::vector<double> smoothed_db(const RouteMeasurements& m, double length) {
    const auto& s = m.samples;
    std::vector<double> out(s.size());
    std::size_t lo = 0;
    std::size_t hi = 0;
    double acc = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        while (hi < s.size() && s[hi].arclen <= s[i].arclen + 0.5 * length) acc += s[hi++].power;
        while (s[lo].arclen < s[i].arclen - 0.5 * length) acc -= s[lo++].power;
        out[i] = to_db(acc / static_cast<double>(hi - lo));
    }
    return out;
}

class GroundObjective {
public:
    GroundObjective(const RouteMeasurements& m, Point2 tx, double h, double lam, const GroundFitOptions& opt)
        : h_(h), lam_(lam) {
        l_tx_.reserve(m.samples.size());
        for (const RouteSample& s : m.samples) {
            const double l = distance(s.position, tx);
            if (!(l > 0.0)) throw Error(Errc::CoincidentPoints, "boundary sample coincides with the transmitter");
            l_tx_.push_back(l);
        }
        if (opt.smooth) {
            measured_db_ = smoothed_db(m, opt.smooth_length);
        } else {
            for (const RouteSample& s : m.samples) measured_db_.push_back(s.power_db);
        }
    }

    // Model power in dB at unit gain; the gain adds 20 log10 G uniformly.
    [[nodiscard]] std::vector<double> unit_gain_db(double eps) const {
        std::vector<double> out(l_tx_.size());
        for (std::size_t i = 0; i < l_tx_.size(); ++i) {
            const TwoRayTerms t = two_ray_terms(l_tx_[i], h_, eps, 1.0, lam_);
            const double p = t.alpha_tx * t.alpha_tx + t.alpha_g * t.alpha_g +
                             2.0 * t.alpha_tx * t.alpha_g * std::cos(two_pi * (t.l_tx - t.l_g) / lam_);
            out[i] = to_db(std::max(p, std::numeric_limits<double>::min()));
        }
        return out;
    }

    [[nodiscard]] double mse(const std::vector<double>& unit_db, double gain_db) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < unit_db.size(); ++i) {
            const double r = measured_db_[i] - unit_db[i] - gain_db;
            acc += r * r;
        }
        return acc / static_cast<double>(unit_db.size());
    }

    [[nodiscard]] double mse(double eps, double gain_db) const { return mse(unit_gain_db(eps), gain_db); }

    /// Least-squares gain (dB) for a fixed model shape: the mean residual.
    [[nodiscard]] double best_gain_db(const std::vector<double>& unit_db) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < unit_db.size(); ++i) acc += measured_db_[i] - unit_db[i];
        return acc / static_cast<double>(unit_db.size());
    }

private:
    double h_;
    double lam_;
    std::vector<double> l_tx_;
    std::vector<double> measured_db_;
};

} // namespace detail

/// Least-squares (in dB) fit of ground permittivity and gain product to the
/// boundary measurements. The gain enters the dB model as a constant offset,
/// so it is solved exactly for each permittivity; the permittivity is found
/// on a coarse grid and then refined by step halving around the best node.
inline GroundFitResult fit_ground_params(const RouteMeasurements& boundary, Point2 tx, double antenna_height,
                                         double wavelength, const GroundFitOptions& opt = {}) {
    const auto& s = boundary.samples;
    if (s.size() < 100) throw Error(Errc::InsufficientSamples, "ground fit needs at least 100 boundary samples");
    double l_min = std::numeric_limits<double>::infinity();
    double l_max = 0.0;
    std::size_t strongest = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double l = distance(s[i].position, tx);
        l_min = std::min(l_min, l);
        l_max = std::max(l_max, l);
        if (s[i].power > s[strongest].power) strongest = i;
    }
    if (l_max - l_min < 1e-6) throw Error(Errc::DegenerateGeometry, "all boundary samples share one Tx distance");

    const detail::GroundObjective obj(boundary, tx, antenna_height, wavelength, opt);

    // Free-space back-solve at the strongest sample anchors the gain range.
    const double g0 = std::sqrt(s[strongest].power) * 4.0 * pi * distance(s[strongest].position, tx) / wavelength;
    const double g0_db = 20.0 * std::log10(g0);
    const double span_db = 20.0 * std::log10(opt.gain_span);

    struct Eval {
        double eps;
        double g_db;
        double mse;
    };
    const auto eval = [&](double eps) {
        const std::vector<double> unit = obj.unit_gain_db(eps);
        const double g = std::clamp(obj.best_gain_db(unit), g0_db - span_db, g0_db + span_db);
        return Eval{eps, g, obj.mse(unit, g)};
    };

    Eval best = eval(opt.permittivity_min);
    const auto n_eps =
        static_cast<std::size_t>(std::floor((opt.permittivity_max - opt.permittivity_min) / opt.permittivity_step + 1e-9)) + 1;
    for (std::size_t ie = 1; ie < n_eps; ++ie) {
        const Eval e = eval(opt.permittivity_min + static_cast<double>(ie) * opt.permittivity_step);
        if (e.mse < best.mse) best = e; // strict: ties keep the lowest eps
    }

    double step = opt.permittivity_step;
    while (step > opt.permittivity_resolution) {
        step = std::max(0.5 * step, opt.permittivity_resolution);
        for (;;) {
            bool moved = false;
            for (const double dir : {-1.0, 1.0}) {
                const double cand = std::clamp(best.eps + dir * step, opt.permittivity_min, opt.permittivity_max);
                if (cand == best.eps) continue;
                const Eval e = eval(cand);
                if (e.mse < best.mse) {
                    best = e;
                    moved = true;
                    break;
                }
            }
            if (!moved) break;
        }
    }

    GroundFitResult r;
    r.permittivity = best.eps;
    r.gain = std::pow(10.0, best.g_db / 20.0);
    r.residual_mse_db2 = best.mse;
    r.permittivity_resolution = step;
    r.gain_resolution_db = 0.0; // solved in closed form
    return r;
}

struct PathAmplitudes {
    double alpha_tx = 0.0;
    double alpha_g = 0.0; ///< signed, see GroundRay
};

/// Direct and ground amplitudes anywhere, from the fitted ground parameters.
inline PathAmplitudes path_amplitudes_at(Point2 r, const GroundFitResult& fit, Point2 tx, double antenna_height,
                                         double wavelength) {
    const double l_tx = distance(r, tx);
    if (!(l_tx > 0.0)) throw Error(Errc::CoincidentPoints, "point coincides with the transmitter");
    const TwoRayTerms t = two_ray_terms(l_tx, antenna_height, fit.permittivity, fit.gain, wavelength);
    return {t.alpha_tx, t.alpha_g};
}

/// Complex sum of the direct and ground paths at r. Object paths beat
/// against this sum, not against the direct path alone, so peak magnitudes
/// and phases are referenced to it.
inline cplx line_of_sight_phasor(Point2 r, const GroundFitResult& fit, Point2 tx, double antenna_height,
                                 double wavelength) {
    const double l_tx = distance(r, tx);
    if (!(l_tx > 0.0)) throw Error(Errc::CoincidentPoints, "point coincides with the transmitter");
    const TwoRayTerms t = two_ray_terms(l_tx, antenna_height, fit.permittivity, fit.gain, wavelength);
    const double k = two_pi / wavelength;
    return t.alpha_tx * phasor(k * t.l_tx) + t.alpha_g * phasor(k * t.l_g);
}

struct GroundFrequency {
    double psi_g = 0.0; ///< normalized frequency of the direct x ground cross term
    double bound = 0.0; ///< 1 - cos(atan(2 h / l_tx)), the largest |psi_g| possible
};

/// Spatial frequency of the direct/ground interference across an array.
inline GroundFrequency appendix_psi_g(Point2 tx, const ArrayWindow& window, double antenna_height) {
    const DirectPathGeometry g = direct_path_geometry(tx, window);
    const double l_g = ground_path_length(g.length, antenna_height);
    const double cos_tx = std::cos(g.aoa);
    const double cos_ground = (g.length / l_g) * cos_tx;
    return {cos_tx - cos_ground, 1.0 - std::cos(std::atan(2.0 * antenna_height / g.length))};
}

} // namespace raymakeup
