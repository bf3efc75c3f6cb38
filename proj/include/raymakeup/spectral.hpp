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
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "raymakeup/channel_sim.hpp"
#include "raymakeup/errors.hpp"
#include "raymakeup/geometry.hpp"

namespace raymakeup {

enum class Taper { Rectangular, Hann };

/// Trend removed from the window's power before the transform.
enum class Detrend { Mean, Linear };

struct SpectrumOptions {
    std::size_t zero_pad = 16;
    Taper taper = Taper::Hann;
    Detrend detrend = Detrend::Linear;
    double psi_max = 2.0;
};

/// Lowest |psi| kept in a window's spectrum: twice the largest ground-path
/// frequency, and never less than 1.5 natural bins.
inline double excluded_band(double psi_g_bound, double wavelength, double window_length) {
    return std::max(2.0 * psi_g_bound, 1.5 * wavelength / window_length);
}

/// Fourier spectrum of the power across one virtual array, indexed by the
/// lambda-normalized spatial frequency psi. Phases are referenced to the
/// window's first antenna and use the kernel e^{+j 2 pi psi d / lambda}, so a
/// path with psi_n = cos(phi_Tx) - cos(phi_n) > 0 shows up at +psi_n carrying
/// phase +2 pi (l_Tx - l_n) / lambda.
struct Spectrum {
    std::vector<double> psi; ///< ascending, symmetric about 0
    std::vector<cplx> values;
    double psi_min = 0.0;    ///< |psi| <= psi_min is excluded
    double wavelength = 0.0;
    double weight_sum = 0.0; ///< sum of taper weights
    double level = 0.0;      ///< mean |power| of the input, before detrending
    ArrayWindow window;
    std::vector<double> weighted; ///< detrended, tapered samples

    [[nodiscard]] bool retained(std::size_t i) const noexcept {
        const double a = std::fabs(psi[i]);
        return a > psi_min && a <= psi.back() + 1e-12;
    }

    /// Transform at an arbitrary (off-grid) psi.
    [[nodiscard]] cplx evaluate(double at_psi) const {
        const cplx z = phasor(two_pi * at_psi * window.sample_spacing / wavelength);
        cplx acc{0.0, 0.0};
        for (std::size_t n = weighted.size(); n-- > 0;) acc = acc * z + weighted[n];
        return acc;
    }
};

inline std::vector<double> taper_weights(Taper taper, std::size_t n) {
    std::vector<double> w(n, 1.0);
    if (taper == Taper::Hann && n > 1)
        for (std::size_t i = 0; i < n; ++i)
            w[i] = 0.5 - 0.5 * std::cos(two_pi * static_cast<double>(i) / static_cast<double>(n - 1));
    return w;
}

inline Spectrum window_spectrum(std::span<const double> power, const ArrayWindow& window, double wavelength,
                                double psi_min, const SpectrumOptions& opt = {}) {
    const std::size_t n = window.sample_count;
    if (power.size() != n) throw Error(Errc::InvalidArgument, "power sample count does not match the window");
    if (n < 16) throw Error(Errc::WindowTooShort, "a window needs at least 16 samples");
    if (!(window.sample_spacing > 0.0) || window.sample_spacing > wavelength / 4.0 * (1.0 + 1e-9))
        throw Error(Errc::UndersampledWindow, "window spacing must lie in (0, lambda/4]");
    if (opt.zero_pad < 1) throw Error(Errc::InvalidArgument, "zero padding factor must be >= 1");

    Spectrum s;
    s.wavelength = wavelength;
    s.window = window;
    s.psi_min = psi_min;

    std::vector<double> y(power.begin(), power.end());
    const double nn = static_cast<double>(n);
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= nn;
    for (double v : y) s.level += std::fabs(v) / nn;
    if (opt.detrend == Detrend::Mean) {
        for (double& v : y) v -= mean;
    } else {
        // least-squares line over sample index
        const double xm = 0.5 * (nn - 1.0);
        double sxy = 0.0;
        double sxx = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double dx = static_cast<double>(i) - xm;
            sxy += dx * (y[i] - mean);
            sxx += dx * dx;
        }
        const double slope = sxy / sxx;
        for (std::size_t i = 0; i < n; ++i) y[i] -= mean + slope * (static_cast<double>(i) - xm);
    }
    const std::vector<double> w = taper_weights(opt.taper, n);
    s.weighted.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        s.weighted[i] = w[i] * y[i];
        s.weight_sum += w[i];
    }

    // Zero-padded DFT grid restricted to |psi| <= psi_max.
    const double step = wavelength / (nn * window.sample_spacing * static_cast<double>(opt.zero_pad));
    const auto half = static_cast<std::size_t>(std::floor(opt.psi_max / step + 1e-9));
    s.psi.resize(2 * half + 1);
    s.values.resize(2 * half + 1);
    for (std::size_t k = 0; k <= half; ++k) {
        const double p = static_cast<double>(k) * step;
        const cplx v = s.evaluate(p);
        s.psi[half + k] = p;
        s.values[half + k] = v;
        s.psi[half - k] = -p;
        s.values[half - k] = std::conj(v);
    }
    s.values[half] = {s.values[half].real(), 0.0};
    return s;
}

struct Peak {
    double psi = 0.0;       ///< |psi|, interpolated
    double magnitude = 0.0; ///< |C| at psi
    double phase = 0.0;     ///< arg C at +psi, referenced to the first antenna
};

struct PeakOptions {
    double beta = 0.15;
    /// Peaks must also exceed noise_floor_factor times the noise_quantile
    /// magnitude over the retained band (factor 0 disables the noise gate).
    double noise_floor_factor = 0.0;
    double noise_quantile = 0.1;
    /// Absolute magnitude floor (0 disables).
    double min_magnitude = 0.0;
};

struct PeakTable {
    std::vector<Peak> peaks; ///< ascending psi
    double beta = 0.15;
    double psi_min = 0.0;
    double natural_bin = 0.0; ///< lambda / window length
    double weight_sum = 0.0;
    double wavelength = 0.0;
    ArrayWindow window;
};

/// Phase of a positive-frequency peak moved from the first antenna to an
/// offset d along the array.
inline double peak_phase_at(const Peak& p, double offset, double wavelength) noexcept {
    return p.phase - two_pi * p.psi * offset / wavelength;
}

inline PeakTable detect_peaks(const Spectrum& s, const PeakOptions& opt) {
    if (s.values.empty()) throw Error(Errc::EmptySpectrum, "spectrum has no bins");
    if (!(opt.beta > 0.0 && opt.beta < 1.0)) throw Error(Errc::InvalidArgument, "beta must lie in (0, 1)");
    PeakTable t;
    t.beta = opt.beta;
    t.psi_min = s.psi_min;
    t.natural_bin = s.wavelength / s.window.length();
    t.weight_sum = s.weight_sum;
    t.wavelength = s.wavelength;
    t.window = s.window;

    const std::size_t half = s.psi.size() / 2;
    const std::size_t last = s.psi.size() - 1;
    std::vector<double> mag(s.values.size());
    for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = std::abs(s.values[i]);

    std::vector<double> band;
    for (std::size_t i = half; i <= last; ++i)
        if (s.retained(i)) band.push_back(mag[i]);
    if (band.empty()) return t;
    const double max_mag = *std::max_element(band.begin(), band.end());
    // rounding residue of a detrended flat or linear input is not a peak
    if (!(max_mag > 1e-10 * s.level * s.weight_sum)) return t;
    double threshold = std::max(opt.beta * max_mag, opt.min_magnitude);
    if (opt.noise_floor_factor > 0.0) {
        const auto q = static_cast<std::size_t>(opt.noise_quantile * static_cast<double>(band.size() - 1));
        auto mid = band.begin() + static_cast<std::ptrdiff_t>(std::min(q, band.size() - 1));
        std::nth_element(band.begin(), mid, band.end());
        threshold = std::max(threshold, opt.noise_floor_factor * *mid);
    }

    const double step = s.psi[half + 1] - s.psi[half];
    std::vector<Peak> found;
    for (std::size_t i = half + 1; i <= last; ++i) {
        if (!s.retained(i) || mag[i] < threshold) continue;
        if (mag[i] < mag[i - 1]) continue;
        if (i < last && !(mag[i] > mag[i + 1])) continue;
        double psi = s.psi[i];
        if (i < last) {
            const double a = mag[i - 1];
            const double b = mag[i];
            const double c = mag[i + 1];
            const double den = a - 2.0 * b + c;
            if (den < 0.0) psi += std::clamp(0.5 * (a - c) / den, -0.5, 0.5) * step;
        }
        psi = std::min(psi, s.psi.back());
        const cplx v = s.evaluate(psi);
        found.push_back({psi, std::abs(v), std::arg(v)});
    }

    // Merge peaks closer than one natural bin, keeping the stronger.
    std::sort(found.begin(), found.end(), [](const Peak& a, const Peak& b) {
        return a.magnitude != b.magnitude ? a.magnitude > b.magnitude : a.psi < b.psi;
    });
    for (const Peak& p : found) {
        const bool near = std::any_of(t.peaks.begin(), t.peaks.end(), [&](const Peak& q) {
            return std::fabs(q.psi - p.psi) < t.natural_bin;
        });
        if (!near) t.peaks.push_back(p);
    }
    std::sort(t.peaks.begin(), t.peaks.end(), [](const Peak& a, const Peak& b) { return a.psi < b.psi; });
    return t;
}

inline PeakTable detect_peaks(const Spectrum& s, double beta) {
    PeakOptions opt;
    opt.beta = beta;
    return detect_peaks(s, opt);
}

/// Amplitude of the object path behind a peak. The cross term with the direct
/// path is 2 a_Tx a_n cos(.), whose transform peaks at a_Tx a_n * sum(w).
inline double path_gain(const Peak& p, double weight_sum, double alpha_tx) {
    if (!(alpha_tx > 0.0)) throw Error(Errc::ZeroDirectPath, "direct path amplitude must be positive");
    return p.magnitude / (alpha_tx * weight_sum);
}

inline std::vector<double> estimate_path_gains(const PeakTable& table, double alpha_tx) {
    if (!(alpha_tx > 0.0)) throw Error(Errc::ZeroDirectPath, "direct path amplitude must be positive");
    std::vector<double> out;
    out.reserve(table.peaks.size());
    for (const Peak& p : table.peaks) out.push_back(path_gain(p, table.weight_sum, alpha_tx));
    return out;
}

} // namespace raymakeup
