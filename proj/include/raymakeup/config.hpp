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

// Line-based scene and run configuration.
//
//   # comment
//   [tx]          position = x, y; wavelength; gain
//   [ground]      antenna_height; permittivity
//   [reflector]   position = x, y; gamma; attenuation   (repeatable)
//   [enclosure]   vertex = x, y                          (repeatable, in order)
//   [sampling]    spacing (m) or spacing_fraction (of lambda); window (m)
//   [noise]       snr_db; seed
//   [prediction]  grid_spacing; clearance; beta; scan_step_deg; psi_tolerance;
//                 noise_floor_factor; route = x, y (repeatable); route_spacing
//
// Keys are `name = value`; blank lines and text after '#' are ignored.

#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "raymakeup/channel_sim.hpp"
#include "raymakeup/errors.hpp"
#include "raymakeup/geometry.hpp"
#include "raymakeup/predictor.hpp"

namespace raymakeup {

struct RunConfig {
    Scenario scenario;
    std::vector<Point2> vertices;
    double spacing = 0.0; ///< boundary sample spacing; 0 means lambda / 8
    PredictorOptions predictor;
    double grid_spacing = 0.1;
    std::vector<Point2> route; ///< waypoints of the profile route
    double route_spacing = 0.05;
    bool noise_gate_explicit = false; ///< noise_floor_factor given in the file

    /// Noise gate used when the run simulates noise and the file is silent.
    static constexpr double default_noise_floor_factor = 5.0;

    void apply_noise_default() noexcept {
        if (!noise_gate_explicit)
            predictor.noise_floor_factor = scenario.snr_db ? default_noise_floor_factor : 0.0;
    }

    [[nodiscard]] double sample_spacing() const noexcept {
        return spacing > 0.0 ? spacing : scenario.wavelength / 8.0;
    }
    [[nodiscard]] Enclosure enclosure() const { return Enclosure(vertices); }

    void validate() const {
        scenario.validate();
        predictor.validate();
        if (vertices.size() < 3) throw Error(Errc::ConfigParse, "enclosure needs at least 3 vertices");
        if (!(sample_spacing() > 0.0) || sample_spacing() > scenario.wavelength / 4.0 * (1.0 + 1e-9))
            throw Error(Errc::ConfigParse, "sample spacing must lie in (0, lambda/4]");
        if (!(grid_spacing > 0.0)) throw Error(Errc::ConfigParse, "grid spacing must be positive");
        if (!(route_spacing > 0.0)) throw Error(Errc::ConfigParse, "route spacing must be positive");
    }

    /// Points along the route polyline at route_spacing, endpoints included.
    [[nodiscard]] std::vector<Point2> route_points() const {
        std::vector<Point2> out;
        for (std::size_t i = 0; i + 1 < route.size(); ++i) {
            const Point2 a = route[i];
            const Point2 b = route[i + 1];
            const auto n = std::max<long>(1, std::lround(distance(a, b) / route_spacing));
            for (long k = i == 0 ? 0 : 1; k <= n; ++k)
                out.push_back(a + (b - a) * (static_cast<double>(k) / static_cast<double>(n)));
        }
        return out;
    }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_double(std::string_view s, std::size_t line) {
    s = trim(s);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
        throw Error(Errc::ConfigParse, "line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
    return v;
}

inline Point2 parse_point(std::string_view s, std::size_t line) {
    const auto comma = s.find(',');
    if (comma == std::string_view::npos)
        throw Error(Errc::ConfigParse, "line " + std::to_string(line) + ": expected 'x, y'");
    return {parse_double(s.substr(0, comma), line), parse_double(s.substr(comma + 1), line)};
}

} // namespace detail

inline RunConfig parse_config(std::istream& in) {
    RunConfig cfg;
    std::string section;
    std::string raw;
    std::size_t line = 0;
    bool have_tx = false;
    while (std::getline(in, raw)) {
        ++line;
        std::string_view s = raw;
        if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
        s = detail::trim(s);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw Error(Errc::ConfigParse, "line " + std::to_string(line) + ": bad section");
            section = std::string(detail::trim(s.substr(1, s.size() - 2)));
            if (section == "reflector") cfg.scenario.reflectors.emplace_back();
            else if (section != "tx" && section != "ground" && section != "enclosure" && section != "sampling" &&
                     section != "noise" && section != "prediction")
                throw Error(Errc::ConfigParse, "line " + std::to_string(line) + ": unknown section [" + section + "]");
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string_view::npos)
            throw Error(Errc::ConfigParse, "line " + std::to_string(line) + ": expected key = value");
        const std::string key(detail::trim(s.substr(0, eq)));
        const std::string_view val = detail::trim(s.substr(eq + 1));
        const auto num = [&] { return detail::parse_double(val, line); };
        const auto pt = [&] { return detail::parse_point(val, line); };
        bool known = true;
        Scenario& sc = cfg.scenario;
        PredictorOptions& po = cfg.predictor;
        if (section == "tx") {
            if (key == "position") sc.tx = pt(), have_tx = true;
            else if (key == "wavelength") sc.wavelength = num();
            else if (key == "gain") sc.gain = num();
            else known = false;
        } else if (section == "ground") {
            if (key == "antenna_height") sc.antenna_height = num();
            else if (key == "permittivity") sc.permittivity = num();
            else known = false;
        } else if (section == "reflector") {
            Reflector& r = sc.reflectors.back();
            if (key == "position") r.position = pt();
            else if (key == "gamma") r.gamma = num();
            else if (key == "attenuation") r.attenuation = num();
            else known = false;
        } else if (section == "enclosure") {
            if (key == "vertex") cfg.vertices.push_back(pt());
            else known = false;
        } else if (section == "sampling") {
            if (key == "spacing") cfg.spacing = num();
            else if (key == "spacing_fraction") cfg.spacing = -num();
            else if (key == "window") po.window_length = num();
            else known = false;
        } else if (section == "noise") {
            if (key == "snr_db") sc.snr_db = num();
            else if (key == "seed") sc.seed = static_cast<std::uint64_t>(num());
            else known = false;
        } else if (section == "prediction") {
            if (key == "grid_spacing") cfg.grid_spacing = num();
            else if (key == "clearance") po.clearance = num();
            else if (key == "beta") po.beta = num();
            else if (key == "scan_step_deg") po.scan_step = deg2rad(num());
            else if (key == "psi_tolerance") po.psi_tolerance = num();
            else if (key == "noise_floor_factor") po.noise_floor_factor = num(), cfg.noise_gate_explicit = true;
            else if (key == "route") cfg.route.push_back(pt());
            else if (key == "route_spacing") cfg.route_spacing = num();
            else known = false;
        } else {
            throw Error(Errc::ConfigParse, "line " + std::to_string(line) + ": key outside any section");
        }
        if (!known)
            throw Error(Errc::ConfigParse,
                        "line " + std::to_string(line) + ": unknown key '" + key + "' in [" + section + "]");
    }
    if (!have_tx) throw Error(Errc::ConfigParse, "missing [tx] position");
    // spacing_fraction is stored negative until the wavelength is known
    if (cfg.spacing < 0.0) cfg.spacing = -cfg.spacing * cfg.scenario.wavelength;
    cfg.apply_noise_default();
    try {
        cfg.validate();
    } catch (const Error& e) {
        if (e.code() == Errc::ConfigParse) throw;
        throw Error(Errc::ConfigParse, e.what());
    }
    return cfg;
}

inline RunConfig parse_config_string(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::Io, "cannot open " + path.string());
    return parse_config(in);
}

} // namespace raymakeup
