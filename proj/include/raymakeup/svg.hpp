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

// Bare-bones SVG output for quick looks at the CSV data. Not a plotting
// library: fixed size, linear axes, no legends beyond series labels.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "raymakeup/errors.hpp"

namespace raymakeup::svg {

struct Series {
    std::vector<double> x;
    std::vector<double> y;
    std::string label;
};

struct Frame {
    std::string title;
    std::string x_label;
    std::string y_label;
};

namespace detail {

constexpr double width = 640.0;
constexpr double height = 420.0;
constexpr double left = 70.0;
constexpr double right = 20.0;
constexpr double top = 36.0;
constexpr double bottom = 50.0;

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

inline std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else if (c == '&') out += "&amp;";
        else out += c;
    }
    return out;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void add(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void settle() {
        if (!(lo <= hi)) lo = 0.0, hi = 1.0;
        if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;
    }
};

inline void open_doc(std::ofstream& out, const Frame& f) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(f.title)
        << "</text>\n"
        << "<text x=\"" << left + (width - left - right) / 2 << "\" y=\"" << height - 10
        << "\" text-anchor=\"middle\">" << escape(f.x_label) << "</text>\n"
        << "<text transform=\"translate(16," << top + (height - top - bottom) / 2
        << ") rotate(-90)\" text-anchor=\"middle\">" << escape(f.y_label) << "</text>\n";
}

inline void axes(std::ofstream& out, const Range& xr, const Range& yr) {
    const double pw = width - left - right;
    const double ph = height - top - bottom;
    out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double fx = left + pw * i / 4.0;
        const double fy = top + ph - ph * i / 4.0;
        out << "<text x=\"" << fx << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\">"
            << num(xr.lo + (xr.hi - xr.lo) * i / 4.0) << "</text>\n";
        out << "<text x=\"" << left - 6 << "\" y=\"" << fy + 4 << "\" text-anchor=\"end\">"
            << num(yr.lo + (yr.hi - yr.lo) * i / 4.0) << "</text>\n";
    }
}

// Piecewise-linear dark blue -> teal -> yellow ramp.
inline std::string color(double t) {
    static constexpr std::array<std::array<double, 3>, 4> stops{
        {{68, 1, 84}, {49, 104, 142}, {53, 183, 121}, {253, 231, 37}}};
    t = std::clamp(t, 0.0, 1.0) * 3.0;
    const auto i = std::min<std::size_t>(static_cast<std::size_t>(t), 2);
    const double f = t - static_cast<double>(i);
    char buf[16];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(stops[i][0] + f * (stops[i + 1][0] - stops[i][0])),
                  static_cast<int>(stops[i][1] + f * (stops[i + 1][1] - stops[i][1])),
                  static_cast<int>(stops[i][2] + f * (stops[i + 1][2] - stops[i][2])));
    return buf;
}

inline std::ofstream open_file(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(Errc::Io, "cannot write " + path.string());
    return out;
}

} // namespace detail

inline void line_plot(const std::filesystem::path& path, const Frame& f, const std::vector<Series>& series) {
    static constexpr std::array<const char*, 6> palette{"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                                        "#17becf"};
    detail::Range xr;
    detail::Range yr;
    for (const Series& s : series) {
        for (double v : s.x) xr.add(v);
        for (double v : s.y) yr.add(v);
    }
    xr.settle();
    yr.settle();
    const double pw = detail::width - detail::left - detail::right;
    const double ph = detail::height - detail::top - detail::bottom;
    std::ofstream out = detail::open_file(path);
    detail::open_doc(out, f);
    detail::axes(out, xr, yr);
    for (std::size_t k = 0; k < series.size(); ++k) {
        const Series& s = series[k];
        const char* col = palette[k % palette.size()];
        out << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.2\" points=\"";
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            out << detail::num(detail::left + pw * (s.x[i] - xr.lo) / (xr.hi - xr.lo)) << ','
                << detail::num(detail::top + ph - ph * (s.y[i] - yr.lo) / (yr.hi - yr.lo)) << ' ';
        }
        out << "\"/>\n";
        if (!s.label.empty())
            out << "<text x=\"" << detail::width - detail::right - 6 << "\" y=\"" << detail::top + 16 + 14.0 * k
                << "\" text-anchor=\"end\" fill=\"" << col << "\">" << detail::escape(s.label) << "</text>\n";
    }
    out << "</svg>\n";
}

/// Heatmap of scattered (x, y, value) cells on a regular lattice; x and y
/// values are snapped to the distinct coordinates present.
inline void heatmap(const std::filesystem::path& path, const Frame& f, const std::vector<double>& x,
                    const std::vector<double>& y, const std::vector<double>& value) {
    const auto key = [](double v) { return std::llround(v * 1e6); };
    std::map<long long, std::size_t> xs;
    std::map<long long, std::size_t> ys;
    detail::Range xr;
    detail::Range yr;
    detail::Range vr;
    for (std::size_t i = 0; i < value.size(); ++i) {
        xs.emplace(key(x[i]), 0);
        ys.emplace(key(y[i]), 0);
        xr.add(x[i]);
        yr.add(y[i]);
        vr.add(value[i]);
    }
    std::size_t n = 0;
    for (auto& [k, v] : xs) v = n++;
    n = 0;
    for (auto& [k, v] : ys) v = n++;
    xr.settle();
    yr.settle();
    vr.settle();
    const double pw = detail::width - detail::left - detail::right;
    const double ph = detail::height - detail::top - detail::bottom;
    const double cw = pw / static_cast<double>(std::max<std::size_t>(xs.size(), 1));
    const double ch = ph / static_cast<double>(std::max<std::size_t>(ys.size(), 1));
    std::ofstream out = detail::open_file(path);
    detail::open_doc(out, f);
    for (std::size_t i = 0; i < value.size(); ++i) {
        if (!std::isfinite(value[i])) continue;
        const double cx = detail::left + cw * static_cast<double>(xs[key(x[i])]);
        const double cy = detail::top + ph - ch * static_cast<double>(ys[key(y[i])] + 1);
        out << "<rect x=\"" << detail::num(cx) << "\" y=\"" << detail::num(cy) << "\" width=\""
            << detail::num(cw + 0.3) << "\" height=\"" << detail::num(ch + 0.3) << "\" fill=\""
            << detail::color((value[i] - vr.lo) / (vr.hi - vr.lo)) << "\"/>\n";
    }
    detail::axes(out, xr, yr);
    out << "<text x=\"" << detail::width - detail::right << "\" y=\"" << detail::top - 6
        << "\" text-anchor=\"end\">" << detail::num(vr.lo) << " .. " << detail::num(vr.hi) << "</text>\n";
    out << "</svg>\n";
}

} // namespace raymakeup::svg
