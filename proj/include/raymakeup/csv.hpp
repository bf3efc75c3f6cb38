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

// CSV files exchanged between the commands. Values are written with 17
// significant digits so reading a file back reproduces the doubles.

#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "raymakeup/channel_sim.hpp"
#include "raymakeup/errors.hpp"
#include "raymakeup/geometry.hpp"
#include "raymakeup/predictor.hpp"

namespace raymakeup::csv {

using Row = std::vector<double>;

struct Table {
    std::vector<std::string> header;
    std::vector<Row> rows;
};

inline std::string format(double v) {
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return ec == std::errc{} ? std::string(buf, end) : std::string("nan");
}

inline void write(std::ostream& out, const Table& t) {
    for (std::size_t i = 0; i < t.header.size(); ++i) out << (i ? "," : "") << t.header[i];
    out << '\n';
    for (const Row& r : t.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << format(r[i]);
        out << '\n';
    }
}

inline void write_file(const std::filesystem::path& path, const Table& t) {
    std::ofstream out(path);
    if (!out) throw Error(Errc::Io, "cannot write " + path.string());
    write(out, t);
    if (!out) throw Error(Errc::Io, "write failed for " + path.string());
}

/// Reads a table and checks its header against the expected column names.
inline Table read(std::istream& in, const std::vector<std::string>& expected, const std::string& name = "csv") {
    Table t;
    std::string line;
    if (!std::getline(in, line)) throw Error(Errc::Io, name + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::stringstream hs(line);
    for (std::string col; std::getline(hs, col, ',');) t.header.push_back(col);
    if (t.header != expected) throw Error(Errc::Io, name + ": unexpected header '" + line + "'");
    std::size_t ln = 1;
    while (std::getline(in, line)) {
        ++ln;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        Row r;
        std::string_view rest = line;
        for (;;) {
            const auto comma = rest.find(',');
            const std::string_view cell = rest.substr(0, comma);
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc{} || ptr != cell.data() + cell.size())
                throw Error(Errc::Io, name + ": line " + std::to_string(ln) + ": bad value '" + std::string(cell) + "'");
            r.push_back(v);
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (r.size() != expected.size())
            throw Error(Errc::Io, name + ": line " + std::to_string(ln) + ": wrong column count");
        t.rows.push_back(std::move(r));
    }
    return t;
}

inline Table read_file(const std::filesystem::path& path, const std::vector<std::string>& expected) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::Io, "cannot open " + path.string());
    return read(in, expected, path.string());
}

// ---------------------------------------------------------------------------
// Column sets

inline const std::vector<std::string> boundary_columns{"x_m", "y_m", "arclen_m", "power_db"};
inline const std::vector<std::string> oracle_grid_columns{"x_m", "y_m", "oracle_power_db", "n_rays"};
inline const std::vector<std::string> oracle_ray_columns{"x_m", "y_m", "angle_deg", "alpha", "phase_rad", "length_m"};
inline const std::vector<std::string> prediction_columns{"x_m", "y_m", "predicted_power_db", "n_rays"};
inline const std::vector<std::string> prediction_ray_columns{"x_m",       "y_m",  "angle_deg", "alpha",
                                                             "phase_rad", "psi1", "psi2",      "residual"};
inline const std::vector<std::string> peak_columns{"window_center_x_m", "window_center_y_m", "psi_abs", "magnitude",
                                                   "phase_rad"};
inline const std::vector<std::string> spectrum_columns{"arclen_m", "psi", "normalized_power"};
inline const std::vector<std::string> angle_profile_columns{"arclen_m", "angle_deg", "normalized_power"};
inline const std::vector<std::string> psi_profile_columns{"arclen_m", "psi_abs", "normalized_power"};

// ---------------------------------------------------------------------------
// Typed conversions

inline Table boundary_table(const RouteMeasurements& m) {
    Table t{boundary_columns, {}};
    for (const RouteSample& s : m.samples) t.rows.push_back({s.position.x, s.position.y, s.arclen, s.power_db});
    return t;
}

inline RouteMeasurements boundary_from(const Table& t) {
    RouteMeasurements m;
    for (const Row& r : t.rows) m.samples.push_back({{r[0], r[1]}, r[2], from_db(r[3]), r[3]});
    return m;
}

inline Table prediction_table(const std::vector<PredictionResult>& pred) {
    Table t{prediction_columns, {}};
    for (const PredictionResult& p : pred)
        t.rows.push_back({p.point.x, p.point.y, p.predicted_power_db, static_cast<double>(p.rays.size())});
    return t;
}

inline Table prediction_ray_table(const std::vector<PredictionResult>& pred) {
    Table t{prediction_ray_columns, {}};
    for (const PredictionResult& p : pred)
        for (const RayDiagnostics& r : p.rays)
            t.rows.push_back({p.point.x, p.point.y, rad2deg(r.angle), r.alpha, r.phase, r.psi1, r.psi2, r.residual});
    return t;
}

inline Table profile_table(const std::vector<ProfileRow>& rows, ProfileAxis axis) {
    Table t{axis == ProfileAxis::Angle ? angle_profile_columns : psi_profile_columns, {}};
    for (const ProfileRow& r : rows) t.rows.push_back({r.arclen, r.coordinate, r.power});
    return t;
}

inline std::vector<ProfileRow> profile_from(const Table& t) {
    std::vector<ProfileRow> out;
    for (const Row& r : t.rows) out.push_back({r[0], r[1], r[2]});
    return out;
}

} // namespace raymakeup::csv
