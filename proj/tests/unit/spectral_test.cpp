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
#include <array>
#include <complex>
#include <random>
#include <vector>

#include "raymakeup/channel_sim.hpp"
#include "raymakeup/spectral.hpp"

using namespace raymakeup;

namespace {

constexpr double lam = 0.125;

ArrayWindow window_of(std::size_t n, double spacing = lam / 8.0) {
    return {{0.0, 0.0}, {1.0, 0.0}, spacing, n};
}

// 1 + sum 2 a_i cos(theta_i - 2 pi psi_i d / lambda)
std::vector<double> tones(const ArrayWindow& w, const std::vector<std::array<double, 3>>& t) {
    std::vector<double> p(w.sample_count, 1.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = static_cast<double>(i) * w.sample_spacing;
        for (const auto& [a, psi, theta] : t) p[i] += 2.0 * a * std::cos(theta - two_pi * psi * d / lam);
    }
    return p;
}

} // namespace

TEST(Spectrum, ExcludedBand) {
    EXPECT_DOUBLE_EQ(excluded_band(0.0194, lam, 1.0), 1.5 * lam);
    EXPECT_DOUBLE_EQ(excluded_band(0.2, lam, 1.0), 0.4);
}

TEST(Spectrum, HannWeights) {
    const auto w = taper_weights(Taper::Hann, 65);
    EXPECT_NEAR(w.front(), 0.0, 1e-15);
    EXPECT_NEAR(w[32], 1.0, 1e-15);
    double sum = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        EXPECT_NEAR(w[i], w[w.size() - 1 - i], 1e-15);
        sum += w[i];
    }
    EXPECT_NEAR(sum, 32.0, 1e-12);
    for (double x : taper_weights(Taper::Rectangular, 10)) EXPECT_EQ(x, 1.0);
}

TEST(Spectrum, MatchesDirectSumAndIsHermitian) {
    const ArrayWindow w = window_of(65);
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g;
    std::vector<double> p(65);
    for (double& x : p) x = g(rng);
    SpectrumOptions opt;
    opt.taper = Taper::Rectangular;
    opt.detrend = Detrend::Mean;
    const Spectrum s = window_spectrum(p, w, lam, 0.1, opt);
    double mean = 0.0;
    for (double x : p) mean += x / 65.0;
    for (std::size_t k = 0; k < s.psi.size(); k += 37) {
        std::complex<double> want;
        for (std::size_t i = 0; i < 65; ++i)
            want += (p[i] - mean) * std::polar(1.0, two_pi * s.psi[k] * static_cast<double>(i) * w.sample_spacing / lam);
        EXPECT_NEAR(std::abs(s.values[k] - want), 0.0, 1e-9);
        EXPECT_NEAR(std::abs(s.values[s.psi.size() - 1 - k] - std::conj(s.values[k])), 0.0, 1e-12);
    }
    EXPECT_NEAR(s.psi.back(), 2.0, lam / (65.0 * w.sample_spacing * 16.0));
}

TEST(Spectrum, SingleToneRecovered) {
    const ArrayWindow w = window_of(65);
    const double a = 0.1, psi = 0.731, theta = 1.1;
    const Spectrum s = window_spectrum(tones(w, {{a, psi, theta}}), w, lam, excluded_band(0.02, lam, w.length()));
    const PeakTable t = detect_peaks(s, 0.15);
    ASSERT_EQ(t.peaks.size(), 1u);
    EXPECT_NEAR(t.peaks[0].psi, psi, 0.003);
    EXPECT_NEAR(t.peaks[0].magnitude / t.weight_sum, a, 0.01 * a);
    EXPECT_NEAR(std::remainder(t.peaks[0].phase - theta, two_pi), 0.0, 0.02);
    EXPECT_NEAR(path_gain(t.peaks[0], t.weight_sum, 1.0), a, 0.01 * a);
    EXPECT_NEAR(estimate_path_gains(t, 0.5)[0], 2.0 * a, 0.02 * a);
}

TEST(Spectrum, PeakPhaseMovesAlongArray) {
    const Peak p{0.5, 1.0, 0.3};
    EXPECT_NEAR(peak_phase_at(p, lam, lam), 0.3 - pi, 1e-15);
}

TEST(Peaks, ResolvesTwoTonesAndRespectsBand) {
    const ArrayWindow w = window_of(65);
    const double psi_min = excluded_band(0.05, lam, w.length());
    const auto p = tones(w, {{0.08, 0.5, 0.0}, {0.05, 1.2, 2.0}, {0.3, 0.05, 0.0}});
    const PeakTable t = detect_peaks(window_spectrum(p, w, lam, psi_min), 0.15);
    ASSERT_EQ(t.peaks.size(), 2u);
    EXPECT_NEAR(t.peaks[0].psi, 0.5, 0.005);
    EXPECT_NEAR(t.peaks[1].psi, 1.2, 0.005);
    for (const Peak& pk : t.peaks) EXPECT_GT(pk.psi, psi_min);
}

TEST(Peaks, BetaIsMonotone) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const ArrayWindow w = window_of(129);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::array<double, 3>> t;
        for (int i = 0; i < 4; ++i) t.push_back({0.1 * u(rng), 0.2 + 1.7 * u(rng), two_pi * u(rng)});
        const Spectrum s = window_spectrum(tones(w, t), w, lam, 0.1);
        const PeakTable lo = detect_peaks(s, 0.1);
        const PeakTable hi = detect_peaks(s, 0.4);
        for (const Peak& q : hi.peaks) {
            bool found = false;
            for (const Peak& r : lo.peaks) found |= r.psi == q.psi;
            EXPECT_TRUE(found);
        }
        EXPECT_LE(hi.peaks.size(), lo.peaks.size());
        for (std::size_t i = 1; i < lo.peaks.size(); ++i) {
            EXPECT_LT(lo.peaks[i - 1].psi, lo.peaks[i].psi);
            EXPECT_GE(lo.peaks[i].psi - lo.peaks[i - 1].psi, lo.natural_bin);
        }
    }
}

TEST(Peaks, FlatOrLinearInputHasNone) {
    const ArrayWindow w = window_of(65);
    std::vector<double> p(65);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = 3.0 + 0.01 * static_cast<double>(i);
    EXPECT_TRUE(detect_peaks(window_spectrum(p, w, lam, 0.1), 0.15).peaks.empty());
}

TEST(Peaks, NoiseGateSuppressesNoise) {
    const ArrayWindow w = window_of(129);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 0.01);
    std::vector<double> p(129, 1.0);
    for (double& x : p) x += g(rng);
    const Spectrum s = window_spectrum(p, w, lam, 0.1);
    EXPECT_FALSE(detect_peaks(s, 0.15).peaks.empty());
    PeakOptions opt;
    opt.noise_floor_factor = 5.0;
    opt.noise_quantile = 0.25;
    EXPECT_TRUE(detect_peaks(s, opt).peaks.empty());
    auto q = p;
    const auto tone = tones(w, {{0.05, 0.9, 0.0}});
    for (std::size_t i = 0; i < q.size(); ++i) q[i] += tone[i] - 1.0;
    EXPECT_EQ(detect_peaks(window_spectrum(q, w, lam, 0.1), opt).peaks.size(), 1u);
}

TEST(Spectrum, SimulatedReflectorGain) {
    Scenario s;
    s.tx = {-40.0, 0.0};
    s.permittivity = 1.0;
    s.antenna_height = 0.0;
    s.reflectors.push_back({{3.0, 30.0}, 1.0, 0.3});
    const ArrayWindow w{{0.0, 0.0}, {1.0, 0.0}, lam / 8.0, 65};
    std::vector<double> p;
    for (std::size_t i = 0; i < w.sample_count; ++i)
        p.push_back(std::norm(simulate_point_signal(s, w.position(static_cast<double>(i) * w.sample_spacing))));
    const RayMakeup m = oracle_ray_makeup(s, w.center(), w.direction);
    const double psi = std::cos(m.direct.aoa) - std::cos(m.objects[0].aoa);
    const PeakTable t = detect_peaks(window_spectrum(p, w, lam, 0.1), 0.15);
    ASSERT_EQ(t.peaks.size(), 1u);
    EXPECT_NEAR(t.peaks[0].psi, std::fabs(psi), 0.01);
    const double a_tx = oracle_ray_makeup(s, w.center(), w.direction).direct.amplitude;
    EXPECT_NEAR(path_gain(t.peaks[0], t.weight_sum, a_tx) / m.objects[0].amplitude, 1.0, 0.05);
}

TEST(Spectrum, Errors) {
    const std::vector<double> p(10, 1.0);
    const auto code = [](auto&& f) {
        try {
            f();
        } catch (const Error& e) {
            return e.code();
        }
        return Errc::InvalidArgument;
    };
    EXPECT_EQ(code([&] { (void)window_spectrum(p, window_of(10), lam, 0.1); }), Errc::WindowTooShort);
    const std::vector<double> q(20, 1.0);
    EXPECT_EQ(code([&] { (void)window_spectrum(q, window_of(20, lam / 3.0), lam, 0.1); }), Errc::UndersampledWindow);
    EXPECT_THROW((void)window_spectrum(q, window_of(21), lam, 0.1), Error);
    EXPECT_THROW((void)detect_peaks(Spectrum{}, 0.15), Error);
    EXPECT_THROW((void)detect_peaks(window_spectrum(q, window_of(20), lam, 0.1), 1.5), Error);
    EXPECT_THROW((void)path_gain(Peak{}, 1.0, 0.0), Error);
}
