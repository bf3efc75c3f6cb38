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

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>

#include "raymakeup/ground_fit.hpp"

using namespace raymakeup;

namespace {

Scenario open_field(double eps, double gain) {
    Scenario s;
    s.tx = {-4.0, -3.0};
    s.permittivity = eps;
    s.gain = gain;
    return s;
}

RouteMeasurements boundary_of(const Scenario& s) {
    const Enclosure e({{0, 0}, {5, 0}, {5, 2}, {0, 2}});
    return simulate_route_power(s, perimeter_route(e, s.wavelength / 8.0));
}

} // namespace

TEST(MeanPower, MatchesComplexSum) {
    const Scenario s = open_field(7.0, 1.4);
    for (Point2 r : {Point2{0, 0}, Point2{3, 1}, Point2{10, -2}}) {
        const double got = theoretical_mean_power(r, s.permittivity, s.gain, s.tx, s.antenna_height, s.wavelength);
        EXPECT_NEAR(got / std::norm(simulate_point_signal(s, r)), 1.0, 1e-12);
    }
}

TEST(MeanPower, NoGroundAndHomogeneity) {
    const Point2 tx{0, 0};
    // eps = 1 at normal incidence: no reflection, only the direct path remains
    const double lam = 0.125;
    const double l = 0.3;
    const double h = 1e6; // grazing angle -> pi/2
    const double p = theoretical_mean_power({l, 0.0}, 1.0, 1.0, tx, h, lam);
    EXPECT_NEAR(p, std::pow(lam / (4.0 * pi * l), 2.0), 1e-18);
    const double a = theoretical_mean_power({3, 4}, 9.0, 1.0, tx, 0.5, lam);
    EXPECT_NEAR(theoretical_mean_power({3, 4}, 9.0, 3.0, tx, 0.5, lam), 9.0 * a, 1e-15);
    EXPECT_THROW(theoretical_mean_power(tx, 9.0, 1.0, tx, 0.5, lam), Error);
}

TEST(MeanPower, ConstructiveWhenPathDifferenceIsWholeWavelengths) {
    // Pick l so that l_g - l = lambda exactly; the ground term is negative
    // near grazing, so the sum is the destructive extreme |a_tx| - |a_g|.
    const double lam = 0.125, h = 0.5;
    const double l = (4.0 * h * h - lam * lam) / (2.0 * lam);
    const TwoRayTerms t = two_ray_terms(l, h, 4.0, 1.0, lam);
    ASSERT_NEAR(t.l_g - t.l_tx, lam, 1e-12);
    const double p = theoretical_mean_power({l, 0.0}, 4.0, 1.0, {0, 0}, h, lam);
    EXPECT_NEAR(p, std::pow(t.alpha_tx + t.alpha_g, 2.0), 1e-15);
    EXPECT_LT(t.alpha_g, 0.0);
}

TEST(Fit, RecoversPermittivityAndGain) {
    const GroundFitResult r = fit_ground_params(boundary_of(open_field(4.0, 1.0)), {-4.0, -3.0}, 0.5, 0.125);
    EXPECT_NEAR(r.permittivity, 4.0, 0.1);
    EXPECT_NEAR(r.gain, 1.0, 0.02);
    EXPECT_LT(r.residual_mse_db2, 1e-3);
    EXPECT_GE(r.permittivity, 1.0);
    EXPECT_LE(r.permittivity_resolution, 0.01 + 1e-12);
}

TEST(Fit, GainScales) {
    const GroundFitResult a = fit_ground_params(boundary_of(open_field(4.0, 1.0)), {-4.0, -3.0}, 0.5, 0.125);
    const GroundFitResult b = fit_ground_params(boundary_of(open_field(4.0, 2.0)), {-4.0, -3.0}, 0.5, 0.125);
    EXPECT_NEAR(b.gain / a.gain, 2.0, 0.04);
    EXPECT_NEAR(20.0 * std::log10(b.gain / a.gain), 6.02, 0.1);
}

TEST(Fit, ExactModelDataGivesZeroResidual) {
    const Scenario s = open_field(9.0, 0.5);
    RouteMeasurements m = boundary_of(s);
    for (RouteSample& x : m.samples) {
        x.power = theoretical_mean_power(x.position, 9.0, 0.5, s.tx, s.antenna_height, s.wavelength);
        x.power_db = to_db(x.power);
    }
    const GroundFitResult r = fit_ground_params(m, s.tx, s.antenna_height, s.wavelength);
    EXPECT_NEAR(r.permittivity, 9.0, 0.02);
    EXPECT_NEAR(r.gain, 0.5, 0.5 * 0.012);
    EXPECT_LT(r.residual_mse_db2, 1e-4);
}

TEST(Fit, SmoothingOptionRuns) {
    GroundFitOptions opt;
    opt.smooth = true;
    const GroundFitResult r = fit_ground_params(boundary_of(open_field(4.0, 1.0)), {-4.0, -3.0}, 0.5, 0.125, opt);
    // averaging flattens the slow ground ripple, so only the gain stays tight
    EXPECT_GE(r.permittivity, 1.0);
    EXPECT_LE(r.permittivity, 30.0);
    EXPECT_NEAR(r.gain, 1.0, 0.05);
}

TEST(Fit, Errors) {
    const Scenario s = open_field(4.0, 1.0);
    RouteMeasurements few = boundary_of(s);
    few.samples.resize(50);
    try {
        (void)fit_ground_params(few, s.tx, 0.5, 0.125);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::InsufficientSamples);
    }
    // every sample on a circle around the Tx
    RouteMeasurements ring;
    for (int i = 0; i < 200; ++i) {
        const Point2 p = s.tx + unit_from_angle(0.01 * i) * 5.0;
        ring.samples.push_back({p, 0.0, 1e-6, -60.0});
    }
    try {
        (void)fit_ground_params(ring, s.tx, 0.5, 0.125);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::DegenerateGeometry);
    }
}

TEST(PathAmplitudes, FromFit) {
    GroundFitResult f;
    f.permittivity = 1.0;
    f.gain = 2.0;
    const PathAmplitudes a = path_amplitudes_at({3, 4}, f, {0, 0}, 1e6, 0.125);
    const PathAmplitudes b = path_amplitudes_at({6, 8}, f, {0, 0}, 1e6, 0.125);
    EXPECT_NEAR(b.alpha_tx, 0.5 * a.alpha_tx, 1e-15);
    EXPECT_NEAR(a.alpha_g, 0.0, 1e-12);
    f.permittivity = 15.0;
    const Scenario s = open_field(15.0, 2.0);
    const RayMakeup m = oracle_ray_makeup(s, {1, 1}, {1, 0});
    const PathAmplitudes c = path_amplitudes_at({1, 1}, f, s.tx, s.antenna_height, s.wavelength);
    EXPECT_NEAR(c.alpha_tx, m.direct.amplitude, 1e-15);
    EXPECT_NEAR(c.alpha_g, m.ground.amplitude, 1e-15);
    const cplx los = line_of_sight_phasor({1, 1}, f, s.tx, s.antenna_height, s.wavelength);
    EXPECT_NEAR(std::abs(los - simulate_point_signal(s, {1, 1})), 0.0, 1e-15);
    EXPECT_THROW(path_amplitudes_at(s.tx, f, s.tx, 0.5, 0.125), Error);
}

TEST(GroundFrequency, StatedBound) {
    // Tx 5 m away along the array axis: the bound is 1 - cos(atan(2h/l)).
    const ArrayWindow w{{5.0, 0.0}, {1.0, 0.0}, 0.125 / 8.0, 1};
    const GroundFrequency g = appendix_psi_g({0.0, 0.0}, w, 0.5);
    EXPECT_NEAR(g.bound, 1.0 - std::cos(std::atan(0.2)), 1e-15);
    EXPECT_NEAR(g.bound, 0.0194, 1e-4);
    EXPECT_NEAR(std::fabs(g.psi_g), g.bound, 1e-12); // end-fire reaches it
}

TEST(GroundFrequency, NeverExceedsBound) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-10.0, 10.0), ang(0.0, two_pi), h(0.1, 2.0);
    for (int i = 0; i < 1000; ++i) {
        const Point2 first{u(rng), u(rng)};
        if (norm(first) < 0.5) continue;
        const ArrayWindow w{first, unit_from_angle(ang(rng)), 0.125 / 8.0, 1};
        const GroundFrequency g = appendix_psi_g({0, 0}, w, h(rng));
        EXPECT_LE(std::fabs(g.psi_g), g.bound + 1e-12);
    }
}
