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
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "raymakeup/channel_sim.hpp"
#include "raymakeup/detail/parallel.hpp"
#include "raymakeup/errors.hpp"
#include "raymakeup/geometry.hpp"
#include "raymakeup/ground_fit.hpp"
#include "raymakeup/spectral.hpp"

namespace raymakeup {

struct PredictorOptions {
    double window_length = 1.0;
    double beta = 0.15;
    PeakOptions peaks;            ///< beta here is overridden by `beta`
    double min_path_gain = 0.0;   ///< absolute floor on a peak's path gain
    /// Peaks must exceed this multiple of the boundary-wide noise floor,
    /// estimated from the noise_quantile magnitude of every window (0 disables).
    double noise_floor_factor = 0.0;
    double noise_quantile = 0.25;
    double psi_tolerance = 0.06;
    double scan_step = deg2rad(0.5);
    double clearance = -1.0;      ///< negative: half the window length
    /// Reject candidates whose upstream path gain is below this multiple of
    /// the downstream one (0 disables). A real source lies upstream, so the
    /// amplitude must decay along the ray.
    double upstream_ratio = 1.0;
    /// Clamped windows near a vertex are centred away from the intersection;
    /// the peak is extrapolated there using a second window this far inward.
    double track_step = 0.25;
    double track_tolerance = 0.2;
    /// Largest allowed disagreement (radians) between the phases measured at
    /// the two ends once the path length between them is accounted for
    /// (0 disables).
    double phase_tolerance = 1.0;
    /// Refine each cluster's angle between scan steps by least squares on
    /// the two end frequency errors.
    bool refine_angle = true;
    /// Allowed gap (per metre) between the measured drift of |psi| along an
    /// edge and the drift of a point source at the amplitude-implied
    /// distance, scaled up or down by source_range (tolerance 0 disables).
    double drift_tolerance = 0.08;
    double source_range = 2.5;
    /// Largest angular gap inside one cluster; negative means lambda / L.
    double cluster_gap = -1.0;
    SpectrumOptions spectrum;
    ChordTolerances chord;

    [[nodiscard]] double min_clearance() const noexcept {
        return clearance < 0.0 ? 0.5 * window_length : clearance;
    }
    void validate() const {
        if (!(window_length > 0.0)) throw Error(Errc::InvalidArgument, "window length must be positive");
        if (!(beta > 0.0 && beta < 1.0)) throw Error(Errc::InvalidArgument, "beta must lie in (0, 1)");
        if (!(psi_tolerance > 0.0)) throw Error(Errc::InvalidArgument, "psi tolerance must be positive");
        if (!(scan_step > 0.0) || scan_step > deg2rad(1.0) + 1e-12)
            throw Error(Errc::InvalidArgument, "scan step must lie in (0, 1] degree");
    }
};

/// Spectral summary of one boundary window.
struct WindowRecord {
    ArrayWindow window;
    Spectrum spectrum;
    PeakTable peaks;
    double alpha_tx = 0.0;      ///< fitted direct amplitude at the window centre
    double alpha_los = 0.0;     ///< |direct + ground| at the window centre
    double center_offset = 0.0; ///< window centre, distance from the edge start
};

/// Measurements along one enclosure edge on a uniform grid.
struct EdgeData {
    Segment segment;
    Point2 direction;
    bool covered = false;
    double spacing = 0.0;
    std::vector<double> power; ///< linear, at offsets k * spacing
    std::size_t window_samples = 0;
    std::vector<WindowRecord> windows; ///< indexed by first sample
};

/// Boundary measurements cut into windows with precomputed peak tables.
class BoundaryData {
public:
    BoundaryData(Enclosure enclosure, const RouteMeasurements& route, const GroundFitResult& fit, Point2 tx,
                 double antenna_height, double wavelength, PredictorOptions options = {})
        : enclosure_(std::move(enclosure)), fit_(fit), tx_(tx), height_(antenna_height), wavelength_(wavelength),
          options_(std::move(options)) {
        options_.validate();
        options_.peaks.beta = options_.beta;
        const double max_gap = 0.25 * wavelength_ * (1.0 + 1e-6) + 1e-9;
        for (std::size_t e = 0; e < enclosure_.size(); ++e) {
            EdgeData ed;
            ed.segment = enclosure_.edge(e);
            ed.direction = ed.segment.direction();
            const double len = ed.segment.length();
            const double tol = 1e-6 + 1e-9 * len;

            std::vector<std::pair<double, double>> pts;
            for (const RouteSample& s : route.samples) {
                if (distance_to_segment(s.position, ed.segment.a, ed.segment.b) > tol) continue;
                pts.emplace_back(std::clamp(dot(s.position - ed.segment.a, ed.direction), 0.0, len), s.power);
            }
            std::sort(pts.begin(), pts.end());
            pts.erase(std::unique(pts.begin(), pts.end(),
                                  [](const auto& a, const auto& b) { return std::fabs(a.first - b.first) < 1e-9; }),
                      pts.end());
            ed.covered = pts.size() >= 2 && pts.front().first <= max_gap && len - pts.back().first <= max_gap;
            std::vector<double> gaps;
            for (std::size_t i = 1; i < pts.size(); ++i) {
                gaps.push_back(pts[i].first - pts[i - 1].first);
                if (gaps.back() > max_gap) ed.covered = false;
            }
            if (ed.covered) {
                resample(ed, pts, gaps, len);
                build_windows(ed);
            }
            edges_.push_back(std::move(ed));
        }
        detect_all_peaks();
    }

    [[nodiscard]] const Enclosure& enclosure() const noexcept { return enclosure_; }
    [[nodiscard]] const GroundFitResult& ground_fit() const noexcept { return fit_; }
    [[nodiscard]] Point2 tx() const noexcept { return tx_; }
    [[nodiscard]] double antenna_height() const noexcept { return height_; }
    [[nodiscard]] double wavelength() const noexcept { return wavelength_; }
    [[nodiscard]] const PredictorOptions& options() const noexcept { return options_; }
    [[nodiscard]] const EdgeData& edge(std::size_t i) const { return edges_.at(i); }
    [[nodiscard]] std::size_t edge_count() const noexcept { return edges_.size(); }

    /// Median spectral floor over all windows, relative to alpha_Tx (zero
    /// when the noise gate is off).
    [[nodiscard]] double noise_level() const noexcept { return noise_level_; }

    [[nodiscard]] bool fully_covered() const noexcept {
        return std::all_of(edges_.begin(), edges_.end(), [](const EdgeData& e) { return e.covered; });
    }

    /// Window serving a boundary point: centred on it when possible, shifted
    /// inward so it stays on the edge. Null if the edge is too short to hold
    /// a usable window.
    [[nodiscard]] const WindowRecord* window_at(std::size_t edge, double offset) const {
        const EdgeData& ed = edges_.at(edge);
        if (!ed.covered) throw Error(Errc::NoBoundaryCoverage, "edge " + std::to_string(edge) + " is not measured");
        if (ed.windows.empty()) return nullptr;
        const auto m = static_cast<long>(ed.power.size());
        const auto n = static_cast<long>(ed.window_samples);
        const long j = std::clamp(std::lround(offset / ed.spacing), 0L, m - 1);
        const long lo = std::clamp(j - (n - 1) / 2, 0L, m - n);
        return &ed.windows[static_cast<std::size_t>(lo)];
    }

    /// Every window on every edge, for export.
    [[nodiscard]] std::vector<const WindowRecord*> all_windows() const {
        std::vector<const WindowRecord*> out;
        for (const EdgeData& e : edges_)
            for (const WindowRecord& w : e.windows) out.push_back(&w);
        return out;
    }

private:
    static void resample(EdgeData& ed, const std::vector<std::pair<double, double>>& pts, std::vector<double> gaps,
                         double len) {
        auto mid = gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2);
        std::nth_element(gaps.begin(), mid, gaps.end());
        const auto intervals = std::max<long>(1, std::lround(len / *mid));
        ed.spacing = len / static_cast<double>(intervals);
        ed.power.resize(static_cast<std::size_t>(intervals) + 1);
        std::size_t k = 0;
        for (std::size_t i = 0; i < ed.power.size(); ++i) {
            const double x = static_cast<double>(i) * ed.spacing;
            while (k + 2 < pts.size() && pts[k + 1].first <= x) ++k;
            const auto& [x0, p0] = pts[k];
            const auto& [x1, p1] = pts[k + 1];
            const double t = std::clamp((x - x0) / (x1 - x0), 0.0, 1.0);
            ed.power[i] = p0 + t * (p1 - p0);
        }
    }

    void build_windows(EdgeData& ed) const {
        const std::size_t m = ed.power.size();
        const auto want = static_cast<std::size_t>(std::lround(options_.window_length / ed.spacing)) + 1;
        const std::size_t n = std::min(want, m);
        ed.window_samples = n;
        if (n < 16) return;
        const std::size_t count = m - n + 1;
        ed.windows.resize(count);
        detail::parallel_for(count, [&](std::size_t lo) {
            WindowRecord& rec = ed.windows[lo];
            rec.window = {ed.segment.a + ed.direction * (static_cast<double>(lo) * ed.spacing), ed.direction,
                          ed.spacing, n};
            rec.center_offset = (static_cast<double>(lo) + 0.5 * static_cast<double>(n - 1)) * ed.spacing;
            ArrayWindow tail = rec.window;
            tail.first_antenna = rec.window.position(rec.window.length());
            const double bound = std::max(appendix_psi_g(tx_, rec.window, height_).bound,
                                          appendix_psi_g(tx_, tail, height_).bound);
            const double psi_min = excluded_band(bound, wavelength_, rec.window.length());
            rec.spectrum = window_spectrum(std::span<const double>(ed.power).subspan(lo, n), rec.window,
                                           wavelength_, psi_min, options_.spectrum);
            rec.alpha_tx = path_amplitudes_at(rec.window.center(), fit_, tx_, height_, wavelength_).alpha_tx;
            rec.alpha_los = std::abs(line_of_sight_phasor(rec.window.center(), fit_, tx_, height_, wavelength_));
        });
    }

    // Noise in power scales with the direct amplitude, so each window's
    // spectral floor is compared after dividing by alpha_Tx. The median over
    // all windows is a stable estimate even when single windows hold strong
    // peaks.
    void detect_all_peaks() {
        std::vector<WindowRecord*> all;
        for (EdgeData& e : edges_)
            for (WindowRecord& w : e.windows) all.push_back(&w);
        if (options_.noise_floor_factor > 0.0 && !all.empty()) {
            std::vector<double> level;
            for (const WindowRecord* w : all) {
                std::vector<double> band;
                const Spectrum& s = w->spectrum;
                for (std::size_t i = s.psi.size() / 2; i < s.psi.size(); ++i)
                    if (s.retained(i)) band.push_back(std::abs(s.values[i]));
                if (band.empty()) continue;
                const auto q = static_cast<std::size_t>(options_.noise_quantile * static_cast<double>(band.size() - 1));
                std::nth_element(band.begin(), band.begin() + static_cast<std::ptrdiff_t>(q), band.end());
                level.push_back(band[q] / w->alpha_los);
            }
            if (!level.empty()) {
                auto mid = level.begin() + static_cast<std::ptrdiff_t>(level.size() / 2);
                std::nth_element(level.begin(), mid, level.end());
                noise_level_ = *mid;
            }
        }
        detail::parallel_for(all.size(), [&](std::size_t i) {
            WindowRecord& rec = *all[i];
            PeakOptions po = options_.peaks;
            po.min_magnitude = std::max({po.min_magnitude, options_.min_path_gain * rec.alpha_los * rec.spectrum.weight_sum,
                                         options_.noise_floor_factor * noise_level_ * rec.alpha_los});
            rec.peaks = detect_peaks(rec.spectrum, po);
        });
    }

    Enclosure enclosure_;
    GroundFitResult fit_;
    Point2 tx_;
    double height_;
    double wavelength_;
    PredictorOptions options_;
    std::vector<EdgeData> edges_;
    double noise_level_ = 0.0;
};

/// A peak matched to one end of a candidate ray.
struct PeakMatch {
    std::size_t edge = 0;
    double offset = 0.0;    ///< intersection, distance from the edge start
    Peak peak;              ///< as detected in the serving window
    double psi = 0.0;       ///< peak frequency carried to the intersection
    double psi_slope = 0.0; ///< d|psi|/d(offset) used for that
    double psi_signed = 0.0; ///< expected cos(phi_Tx) - cos(phi_c) at the intersection
    double alpha = 0.0;     ///< path gain estimate
    double mu = 0.0;        ///< reference phase minus k l_c at the intersection
    double reference_phase = 0.0; ///< arg of the direct + ground sum at the intersection
    Point2 window_center;

    [[nodiscard]] double residual() const noexcept { return std::fabs(psi - std::fabs(psi_signed)); }
};

struct CandidateRay {
    double angle = 0.0; ///< direction of travel, radians in [0, 2 pi)
    Point2 r1;          ///< upstream intersection
    Point2 r2;          ///< downstream intersection
    double psi_c1 = 0.0;
    double psi_c2 = 0.0;
    std::optional<std::pair<PeakMatch, PeakMatch>> matched_peaks;
    double phase_mismatch = 0.0; ///< radians, wrapped to [-pi, pi]

    [[nodiscard]] double residual() const noexcept {
        return matched_peaks ? matched_peaks->first.residual() + matched_peaks->second.residual() : 0.0;
    }
    [[nodiscard]] double magnitude() const noexcept {
        return matched_peaks ? matched_peaks->first.peak.magnitude + matched_peaks->second.peak.magnitude : 0.0;
    }
};

enum class ScanOrder { Ascending, Descending };

namespace detail {

enum class ScanState { Invalid, Valid, Skipped };

inline std::optional<PeakMatch> match_end(const BoundaryData& data, const BoundaryHit& hit, Point2 travel) {
    const PredictorOptions& opt = data.options();
    const double lam = data.wavelength();
    const WindowRecord* rec = data.window_at(hit.edge, hit.edge_offset);
    if (rec == nullptr) return std::nullopt;
    const Point2 u = rec->window.direction;
    const Point2 to_tx = data.tx() - hit.point;
    const double cos_tx = dot(u, to_tx) / norm(to_tx);
    const double psi_signed = cos_tx - dot(u, travel * -1.0);
    const double psi_expected = std::fabs(psi_signed);
    if (psi_expected <= rec->peaks.psi_min) return std::nullopt;

    const double delta = hit.edge_offset - rec->center_offset;
    const double reference =
        std::arg(line_of_sight_phasor(hit.point, data.ground_fit(), data.tx(), data.antenna_height(), lam));
    const WindowRecord* inner = nullptr;
    if (std::fabs(delta) > data.edge(hit.edge).spacing) {
        inner = data.window_at(hit.edge, rec->center_offset - std::copysign(opt.track_step, delta));
        if (inner == rec) inner = nullptr;
    }

    std::optional<PeakMatch> best;
    for (const Peak& pk : rec->peaks.peaks) {
        double slope = 0.0;
        if (inner != nullptr) {
            const Peak* near = nullptr;
            for (const Peak& q : inner->peaks.peaks)
                if (std::fabs(q.psi - pk.psi) <= opt.track_tolerance &&
                    (near == nullptr || std::fabs(q.psi - pk.psi) < std::fabs(near->psi - pk.psi)))
                    near = &q;
            if (near != nullptr) slope = (pk.psi - near->psi) / (rec->center_offset - inner->center_offset);
        }
        const double psi = pk.psi + slope * delta;
        const double res = std::fabs(psi - psi_expected);
        if (res > opt.psi_tolerance || (best && res >= best->residual())) continue;
        PeakMatch m;
        m.edge = hit.edge;
        m.offset = hit.edge_offset;
        m.peak = pk;
        m.psi = psi;
        m.psi_slope = slope;
        m.psi_signed = psi_signed;
        m.window_center = rec->window.center();
        m.alpha = path_gain(pk, rec->peaks.weight_sum, rec->alpha_los);
        m.reference_phase = reference;
        // Phase at the window centre, then carried along the (possibly
        // drifting) frequency to the intersection.
        const double half = 0.5 * rec->window.length();
        const double at_center = peak_phase_at(pk, half, lam);
        const double at_hit = at_center - two_pi * (pk.psi + 0.5 * slope * delta) * delta / lam;
        m.mu = psi_signed < 0.0 ? -at_hit : at_hit;
        best = m;
    }
    return best;
}

/// d|psi|/d(offset) of the peak nearest `psi`, from the windows a quarter
/// track step either side of the offset.
inline std::optional<double> measured_slope(const BoundaryData& data, std::size_t edge, double offset, double psi) {
    const PredictorOptions& opt = data.options();
    const WindowRecord* a = data.window_at(edge, offset - opt.track_step);
    const WindowRecord* b = data.window_at(edge, offset + opt.track_step);
    if (a == nullptr || b == nullptr || a == b) return std::nullopt;
    const auto nearest = [&](const WindowRecord* w) -> std::optional<double> {
        std::optional<double> best;
        for (const Peak& pk : w->peaks.peaks)
            if (std::fabs(pk.psi - psi) <= opt.track_tolerance && (!best || std::fabs(pk.psi - psi) < std::fabs(*best - psi)))
                best = pk.psi;
        return best;
    };
    const auto pa = nearest(a);
    const auto pb = nearest(b);
    if (!pa || !pb) return std::nullopt;
    return (*pb - *pa) / (b->center_offset - a->center_offset);
}

/// Checks how |psi| drifts along each edge against a point source placed
/// upstream at the distance implied by the amplitude decay. Sources within
/// a factor source_range of that distance are accepted.
inline bool drift_consistent(const BoundaryData& data, const CandidateRay& c) {
    const PredictorOptions& opt = data.options();
    const PeakMatch& m1 = c.matched_peaks->first;
    const PeakMatch& m2 = c.matched_peaks->second;
    const double span = distance(c.r1, c.r2);
    const double ratio = m1.alpha / m2.alpha;
    // 1/alpha grows linearly from the source: rho / (rho + D) = alpha2 / alpha1
    const double rho = ratio > 1.0 ? span / (ratio - 1.0) : std::numeric_limits<double>::infinity();
    const Point2 d = unit_from_angle(c.angle);
    std::size_t i = 0;
    for (const PeakMatch* m : {&m1, &m2}) {
        const Point2 r = i == 0 ? c.r1 : c.r2;
        const double extra = i == 0 ? 0.0 : span;
        ++i;
        const auto meas = measured_slope(data, m->edge, m->offset, m->psi);
        if (!meas) continue;
        const Point2 u = data.edge(m->edge).direction;
        const Point2 to_tx = data.tx() - r;
        const double l_tx = norm(to_tx);
        const double c_tx = dot(u, to_tx) / l_tx;
        const double c_c = -dot(u, d);
        const double sign = m->psi_signed < 0.0 ? -1.0 : 1.0;
        // d(cos phi)/dx = -sin^2(phi) / distance for a point source
        const auto slope = [&](double dist) {
            return sign * (-(1.0 - c_tx * c_tx) / l_tx + (1.0 - c_c * c_c) / dist);
        };
        const double near = slope(rho / opt.source_range + extra);
        const double far = std::isfinite(rho) ? slope(rho * opt.source_range + extra) : slope(1e300);
        const double lo = std::min(near, far);
        const double hi = std::max(near, far);
        if (*meas < lo - opt.drift_tolerance || *meas > hi + opt.drift_tolerance) return false;
    }
    return true;
}

/// Candidate at one travel angle; fills `out` and reports whether both ends
/// validate.
inline ScanState evaluate_candidate(Point2 p, const BoundaryData& data, double angle, CandidateRay& out) {
    const PredictorOptions& opt = data.options();
    const RayLine ray(p, angle);
    const auto chord = find_chord(ray, data.enclosure(), opt.chord);
    if (const Errc* err = std::get_if<Errc>(&chord)) {
        if (*err == Errc::OriginOutside) throw Error(*err, "prediction point is outside the enclosure");
        return ScanState::Skipped;
    }
    const Chord& c = std::get<Chord>(chord);
    const Point2 d = ray.direction();
    out = CandidateRay{};
    out.angle = ray.angle;
    out.r1 = c.upstream.point;
    out.r2 = c.downstream.point;
    const auto psi_at = [&](const BoundaryHit& h) {
        const Point2 u = data.edge(h.edge).direction;
        const Point2 to_tx = data.tx() - h.point;
        return std::fabs(dot(u, to_tx) / norm(to_tx) + dot(u, d));
    };
    out.psi_c1 = psi_at(c.upstream);
    out.psi_c2 = psi_at(c.downstream);
    auto m1 = match_end(data, c.upstream, d);
    if (!m1) return ScanState::Invalid;
    auto m2 = match_end(data, c.downstream, d);
    if (!m2) return ScanState::Invalid;
    if (opt.upstream_ratio > 0.0 && m1->alpha <= opt.upstream_ratio * m2->alpha) return ScanState::Invalid;
    // Along one ray l_c2 = l_c1 + |r2 - r1|, which ties the two peak phases.
    const double k = two_pi / data.wavelength();
    out.phase_mismatch = std::remainder(
        m1->reference_phase - m2->reference_phase + k * distance(out.r1, out.r2) - m1->mu + m2->mu,
        two_pi);
    if (opt.phase_tolerance > 0.0 && std::fabs(out.phase_mismatch) > opt.phase_tolerance) return ScanState::Invalid;
    out.matched_peaks = std::make_pair(*m1, *m2);
    if (opt.drift_tolerance > 0.0 && !drift_consistent(data, out)) {
        out.matched_peaks.reset();
        return ScanState::Invalid;
    }
    return ScanState::Valid;
}

/// Signed frequency errors (estimated minus expected) at both ends.
inline std::array<double, 2> signed_errors(const CandidateRay& c) {
    const PeakMatch& a = c.matched_peaks->first;
    const PeakMatch& b = c.matched_peaks->second;
    return {a.psi - std::fabs(a.psi_signed), b.psi - std::fabs(b.psi_signed)};
}

/// One Gauss-Newton step on the sum of squared end errors, using the
/// neighbouring scan angles for the derivative. Returns the refined
/// candidate when it still validates.
inline CandidateRay refine_angle(Point2 p, const BoundaryData& data, const CandidateRay& c, double step) {
    CandidateRay lo;
    CandidateRay hi;
    const bool has_lo = evaluate_candidate(p, data, c.angle - 0.5 * step, lo) == ScanState::Valid;
    const bool has_hi = evaluate_candidate(p, data, c.angle + 0.5 * step, hi) == ScanState::Valid;
    if (!has_lo && !has_hi) return c;
    const CandidateRay& a = has_lo ? lo : c;
    const CandidateRay& b = has_hi ? hi : c;
    const double span = (has_lo ? 0.5 * step : 0.0) + (has_hi ? 0.5 * step : 0.0);
    const auto ea = signed_errors(a);
    const auto eb = signed_errors(b);
    const auto e0 = signed_errors(c);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
        const double g = (eb[i] - ea[i]) / span;
        num += e0[i] * g;
        den += g * g;
    }
    if (!(den > 0.0)) return c;
    const double delta = std::clamp(-num / den, -step, step);
    CandidateRay r;
    if (evaluate_candidate(p, data, c.angle + delta, r) != ScanState::Valid) return c;
    return r;
}

} // namespace detail

inline void check_prediction_point(Point2 p, const BoundaryData& data) {
    if (!data.enclosure().contains(p)) throw Error(Errc::OriginOutside, "prediction point is outside the enclosure");
    if (data.enclosure().distance_to_boundary(p) < data.options().min_clearance() - 1e-12)
        throw Error(Errc::InsufficientClearance, "prediction point is closer to the boundary than the clearance");
}

/// Validated candidate rays through p, one per cluster of adjacent angles.
inline std::vector<CandidateRay> scan_candidate_rays(Point2 p, const BoundaryData& data, double scan_step,
                                                     ScanOrder order = ScanOrder::Ascending) {
    if (!(scan_step > 0.0) || scan_step > deg2rad(1.0) + 1e-12)
        throw Error(Errc::InvalidArgument, "scan step must lie in (0, 1] degree");
    check_prediction_point(p, data);
    const PredictorOptions& opt = data.options();
    const auto n = static_cast<std::size_t>(std::lround(two_pi / scan_step));
    const double step = two_pi / static_cast<double>(n);

    std::vector<detail::ScanState> state(n, detail::ScanState::Invalid);
    std::vector<CandidateRay> cand(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = order == ScanOrder::Ascending ? k : n - 1 - k;
        state[i] = detail::evaluate_candidate(p, data, static_cast<double>(i) * step, cand[i]);
    }

    // Cluster valid angles around the circle: neighbours closer than one
    // spectral peak width (lambda / L radians by default) share a cluster.
    const double gap = opt.cluster_gap < 0.0 ? data.wavelength() / opt.window_length : opt.cluster_gap;
    const auto max_step = static_cast<std::size_t>(std::floor(gap / step + 1e-9)) + 1;
    const auto better = [&](std::size_t a, std::size_t b) {
        const double ra = cand[a].residual();
        const double rb = cand[b].residual();
        if (ra != rb) return ra < rb;
        if (cand[a].magnitude() != cand[b].magnitude()) return cand[a].magnitude() > cand[b].magnitude();
        return a < b;
    };
    std::vector<std::size_t> valid;
    for (std::size_t i = 0; i < n; ++i)
        if (state[i] == detail::ScanState::Valid) valid.push_back(i);
    std::vector<CandidateRay> out;
    if (valid.empty()) return out;
    const auto forward = [&](std::size_t j) { // steps from valid[j] to the next valid index
        const std::size_t a = valid[j];
        const std::size_t b = valid[(j + 1) % valid.size()];
        return b > a ? b - a : b + n - a;
    };
    // Start right after a wide gap so no cluster straddles the start.
    std::optional<std::size_t> first;
    for (std::size_t j = 0; j < valid.size(); ++j)
        if (forward(j) > max_step) {
            first = (j + 1) % valid.size();
            break;
        }
    if (!first) {
        std::size_t best = valid[0];
        for (std::size_t i : valid)
            if (better(i, best)) best = i;
        out.push_back(cand[best]);
    } else {
        std::size_t best = valid[*first];
        for (std::size_t k = 0; k < valid.size(); ++k) {
            const std::size_t j = (*first + k) % valid.size();
            if (better(valid[j], best)) best = valid[j];
            if (forward(j) > max_step || k + 1 == valid.size()) {
                out.push_back(cand[best]);
                best = valid[(j + 1) % valid.size()];
            }
        }
    }
    if (opt.refine_angle)
        for (CandidateRay& c : out) c = detail::refine_angle(p, data, c, step);
    std::sort(out.begin(), out.end(), [](const CandidateRay& a, const CandidateRay& b) { return a.angle < b.angle; });
    return out;
}

/// Path amplitude at r_p from the two boundary estimates, modelling the ray
/// as spreading from a virtual source behind r_1: 1/alpha is linear in arc
/// length along the ray.
inline double predict_amplitude(double alpha_c1, double alpha_c2, Point2 r1, Point2 r2, Point2 rp) {
    if (!(alpha_c1 > 0.0) || !(alpha_c2 > 0.0))
        throw Error(Errc::ZeroAmplitude, "path amplitudes must be positive");
    if (distance_to_segment(rp, r1, r2) > 1e-6)
        throw Error(Errc::PointOffRay, "prediction point is not on the segment r1-r2");
    const double d1 = distance(r1, rp);
    const double d2 = distance(r2, rp);
    if (d1 == 0.0) return alpha_c1;
    if (d2 == 0.0) return alpha_c2;
    return alpha_c1 * alpha_c2 * distance(r1, r2) / (alpha_c1 * d1 + alpha_c2 * d2);
}

/// Unit phase factor e^{j k l} of a path at r_p, where mu_c1 = k (l_Tx1 - l_c1)
/// is the peak phase measured at r_1.
inline cplx predict_phase(double mu_c1, double l_tx1, Point2 r1, Point2 rp, double wavelength) {
    const double k = two_pi / wavelength;
    return phasor(-mu_c1) * phasor(k * l_tx1) * phasor(k * distance(r1, rp));
}

/// Same as predict_phase with the direct-path phase k l_Tx1 replaced by an
/// arbitrary reference phase at r_1.
inline cplx predict_phase_from_reference(double mu_c1, double reference_phase, Point2 r1, Point2 rp,
                                         double wavelength) {
    return phasor(reference_phase - mu_c1) * phasor(two_pi / wavelength * distance(r1, rp));
}

struct RayDiagnostics {
    double angle = 0.0; ///< direction of travel, radians
    double alpha = 0.0;
    double phase = 0.0; ///< arg of the predicted phase factor
    double psi1 = 0.0;
    double psi2 = 0.0;
    double residual = 0.0;
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    Point2 r1;
    Point2 r2;
    Point2 window1;
    Point2 window2;
};

struct PredictionResult {
    Point2 point;
    double predicted_power_db = 0.0;
    RayMakeup makeup; ///< angles relative to the +x axis
    std::vector<RayDiagnostics> rays;
};

/// Direct and ground paths at p from the fitted ground parameters, angles
/// relative to the given axis.
inline RayMakeup two_ray_makeup(Point2 p, const BoundaryData& data, Point2 axis = {1.0, 0.0}) {
    const DirectPathGeometry g = direct_path_geometry(data.tx(), p, axis);
    const PathAmplitudes a = path_amplitudes_at(p, data.ground_fit(), data.tx(), data.antenna_height(),
                                                data.wavelength());
    RayMakeup m;
    m.direct = {a.alpha_tx, g.length, g.aoa};
    const double l_g = ground_path_length(g.length, data.antenna_height());
    m.ground = {a.alpha_g, l_g, std::acos(std::clamp(g.length / l_g * std::cos(g.aoa), -1.0, 1.0))};
    return m;
}

inline PredictionResult predict_channel(Point2 p, const BoundaryData& data, double scan_step) {
    const double lam = data.wavelength();
    PredictionResult r;
    r.point = p;
    const std::vector<CandidateRay> rays = scan_candidate_rays(p, data, scan_step);
    r.makeup = two_ray_makeup(p, data);
    for (const CandidateRay& c : rays) {
        const PeakMatch& m1 = c.matched_peaks->first;
        const PeakMatch& m2 = c.matched_peaks->second;
        ObjectRay o;
        o.amplitude = predict_amplitude(m1.alpha, m2.alpha, c.r1, c.r2, p);
        o.phase = predict_phase_from_reference(m1.mu, m1.reference_phase, c.r1, p, lam);
        o.aoa = aoa_relative_to_array(unit_from_angle(c.angle) * -1.0, {1.0, 0.0});
        r.makeup.objects.push_back(o);
        r.rays.push_back({c.angle, o.amplitude, std::arg(o.phase), m1.psi, m2.psi, c.residual(), m1.alpha, m2.alpha,
                          c.r1, c.r2, m1.window_center, m2.window_center});
    }
    r.predicted_power_db = to_db(std::norm(reconstruct_signal(r.makeup, lam)));
    return r;
}

inline PredictionResult predict_channel(Point2 p, const BoundaryData& data) {
    return predict_channel(p, data, data.options().scan_step);
}

/// Predictions at many points, evaluated in parallel; output order follows input.
inline std::vector<PredictionResult> predict_grid(std::span<const Point2> points, const BoundaryData& data) {
    std::vector<PredictionResult> out(points.size());
    detail::parallel_for(points.size(), [&](std::size_t i) { out[i] = predict_channel(points[i], data); });
    return out;
}

/// Regular grid of points inside the enclosure that keep the clearance.
inline std::vector<Point2> interior_grid(const Enclosure& e, double spacing, double clearance) {
    if (!(spacing > 0.0)) throw Error(Errc::InvalidArgument, "grid spacing must be positive");
    double x0 = e.vertices()[0].x, x1 = x0, y0 = e.vertices()[0].y, y1 = y0;
    for (Point2 v : e.vertices()) {
        x0 = std::min(x0, v.x);
        x1 = std::max(x1, v.x);
        y0 = std::min(y0, v.y);
        y1 = std::max(y1, v.y);
    }
    std::vector<Point2> out;
    const auto nx = static_cast<long>(std::floor((x1 - x0) / spacing + 1e-9));
    const auto ny = static_cast<long>(std::floor((y1 - y0) / spacing + 1e-9));
    for (long j = 0; j <= ny; ++j)
        for (long i = 0; i <= nx; ++i) {
            const Point2 p{x0 + static_cast<double>(i) * spacing, y0 + static_cast<double>(j) * spacing};
            if (e.contains(p) && e.distance_to_boundary(p) >= clearance - 1e-12) out.push_back(p);
        }
    return out;
}

// ---------------------------------------------------------------------------
// Power per angle

enum class ProfileAxis { Angle, Psi };

struct ProfileRay {
    double angle = 0.0; ///< direction of travel, radians
    double power = 0.0; ///< alpha^2
};

struct ProfileRow {
    double arclen = 0.0;
    double coordinate = 0.0; ///< degrees, or |psi|
    double power = 0.0;      ///< normalized to the strongest bin at that point
};

struct ProfileOptions {
    ProfileAxis axis = ProfileAxis::Angle;
    double angle_bin_deg = 1.0;
    double psi_bin = 0.01;
};

/// Cumulative distance along an ordered list of points.
inline std::vector<double> route_arclength(std::span<const Point2> route) {
    std::vector<double> s(route.size(), 0.0);
    for (std::size_t i = 1; i < route.size(); ++i) s[i] = s[i - 1] + distance(route[i - 1], route[i]);
    return s;
}

/// Unit route direction at sample i (central difference).
inline Point2 route_direction(std::span<const Point2> route, std::size_t i) {
    if (route.size() < 2) return {1.0, 0.0};
    const std::size_t a = i == 0 ? 0 : i - 1;
    const std::size_t b = i + 1 < route.size() ? i + 1 : i;
    return normalized(route[b] - route[a]);
}

/// Bins the rays seen at each route point by arrival angle (or by |psi|
/// against the route axis) and normalizes each point to its strongest bin.
inline std::vector<ProfileRow> bin_profile(std::span<const Point2> route, Point2 tx,
                                           const std::vector<std::vector<ProfileRay>>& rays,
                                           const ProfileOptions& opt = {}) {
    const std::vector<double> arclen = route_arclength(route);
    std::vector<ProfileRow> out;
    for (std::size_t i = 0; i < route.size(); ++i) {
        std::map<long, double> bins;
        const Point2 u = route_direction(route, i);
        const Point2 to_tx = normalized(tx - route[i]);
        const double bw = opt.axis == ProfileAxis::Angle ? opt.angle_bin_deg : opt.psi_bin;
        for (const ProfileRay& r : rays[i]) {
            double coord = 0.0;
            if (opt.axis == ProfileAxis::Angle) {
                coord = rad2deg(normalize_angle(r.angle));
            } else {
                coord = std::fabs(dot(u, to_tx) + dot(u, unit_from_angle(r.angle)));
            }
            long key = std::lround(coord / bw);
            if (opt.axis == ProfileAxis::Angle) key %= std::lround(360.0 / bw);
            bins[key] += r.power;
        }
        double peak = 0.0;
        for (const auto& [k, v] : bins) peak = std::max(peak, v);
        for (const auto& [k, v] : bins)
            out.push_back({arclen[i], static_cast<double>(k) * bw, peak > 0.0 ? v / peak : 0.0});
    }
    return out;
}

inline std::vector<ProfileRow> power_per_angle_profile(std::span<const Point2> route, const BoundaryData& data,
                                                       const ProfileOptions& opt = {}) {
    const std::vector<PredictionResult> pred = predict_grid(route, data);
    std::vector<std::vector<ProfileRay>> rays(route.size());
    for (std::size_t i = 0; i < route.size(); ++i)
        for (const RayDiagnostics& r : pred[i].rays) rays[i].push_back({r.angle, r.alpha * r.alpha});
    return bin_profile(route, data.tx(), rays, opt);
}

} // namespace raymakeup
