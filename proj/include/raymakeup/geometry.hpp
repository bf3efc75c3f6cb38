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
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "raymakeup/errors.hpp"

namespace raymakeup {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

constexpr double deg2rad(double deg) noexcept { return deg * pi / 180.0; }
constexpr double rad2deg(double rad) noexcept { return rad * 180.0 / pi; }

/// Wraps an angle into [0, 2*pi).
inline double normalize_angle(double a) noexcept {
    double r = std::fmod(a, two_pi);
    if (r < 0.0) r += two_pi;
    if (r >= two_pi) r = 0.0;
    return r;
}

/// Smallest absolute difference between two angles, in [0, pi].
inline double angle_distance(double a, double b) noexcept {
    double d = std::fabs(normalize_angle(a) - normalize_angle(b));
    return d > pi ? two_pi - d : d;
}

/// A point (or free vector) in the horizontal plane, meters.
struct Point2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Point2& operator+=(Point2 o) noexcept { x += o.x; y += o.y; return *this; }
    constexpr Point2& operator-=(Point2 o) noexcept { x -= o.x; y -= o.y; return *this; }
    constexpr Point2& operator*=(double s) noexcept { x *= s; y *= s; return *this; }

    friend constexpr Point2 operator+(Point2 a, Point2 b) noexcept { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Point2 operator-(Point2 a, Point2 b) noexcept { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Point2 operator-(Point2 a) noexcept { return {-a.x, -a.y}; }
    friend constexpr Point2 operator*(Point2 a, double s) noexcept { return {a.x * s, a.y * s}; }
    friend constexpr Point2 operator*(double s, Point2 a) noexcept { return {a.x * s, a.y * s}; }
    friend constexpr Point2 operator/(Point2 a, double s) noexcept { return {a.x / s, a.y / s}; }
    friend constexpr bool operator==(Point2, Point2) noexcept = default;
};

constexpr double dot(Point2 a, Point2 b) noexcept { return a.x * b.x + a.y * b.y; }
constexpr double cross(Point2 a, Point2 b) noexcept { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) noexcept { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) noexcept { return norm(a - b); }
inline bool is_finite(Point2 a) noexcept { return std::isfinite(a.x) && std::isfinite(a.y); }

inline Point2 unit_from_angle(double a) noexcept { return {std::cos(a), std::sin(a)}; }

inline Point2 normalized(Point2 a) {
    const double n = norm(a);
    if (!(n > 0.0)) throw Error(Errc::InvalidArgument, "cannot normalize a zero vector");
    return a / n;
}

/// Distance from p to the closed segment [a, b].
inline double distance_to_segment(Point2 p, Point2 a, Point2 b) noexcept {
    const Point2 e = b - a;
    const double len2 = dot(e, e);
    if (len2 == 0.0) return distance(p, a);
    const double t = std::clamp(dot(p - a, e) / len2, 0.0, 1.0);
    return distance(p, a + e * t);
}

struct Segment {
    Point2 a;
    Point2 b;

    [[nodiscard]] double length() const noexcept { return distance(a, b); }
    [[nodiscard]] Point2 direction() const { return normalized(b - a); }
};

/// Simple polygon bounding the prediction region. Vertices are stored
/// counter-clockwise regardless of the input orientation.
class Enclosure {
public:
    explicit Enclosure(std::vector<Point2> vertices) : vertices_(std::move(vertices)) {
        if (vertices_.size() < 3)
            throw Error(Errc::InvalidArgument, "enclosure needs at least 3 vertices");
        for (const Point2& v : vertices_)
            if (!is_finite(v)) throw Error(Errc::InvalidArgument, "enclosure vertex is not finite");
        const double area = signed_area(vertices_);
        if (std::fabs(area) < 1e-12)
            throw Error(Errc::InvalidArgument, "enclosure has an empty interior");
        if (area < 0.0) std::reverse(vertices_.begin(), vertices_.end());
        check_simple();
        cumulative_.resize(vertices_.size() + 1, 0.0);
        for (std::size_t i = 0; i < vertices_.size(); ++i)
            cumulative_[i + 1] = cumulative_[i] + edge(i).length();
    }

    [[nodiscard]] const std::vector<Point2>& vertices() const noexcept { return vertices_; }
    [[nodiscard]] std::size_t size() const noexcept { return vertices_.size(); }
    [[nodiscard]] Segment edge(std::size_t i) const noexcept {
        return {vertices_[i], vertices_[(i + 1) % vertices_.size()]};
    }
    [[nodiscard]] double perimeter() const noexcept { return cumulative_.back(); }
    /// Arc length along the counter-clockwise perimeter at which edge i starts.
    [[nodiscard]] double edge_start_arclen(std::size_t i) const noexcept { return cumulative_[i]; }
    [[nodiscard]] double area() const noexcept { return signed_area(vertices_); }

    [[nodiscard]] double distance_to_boundary(Point2 p) const noexcept {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < size(); ++i) {
            const Segment s = edge(i);
            best = std::min(best, distance_to_segment(p, s.a, s.b));
        }
        return best;
    }

    /// True when p lies strictly inside (boundary points are outside).
    [[nodiscard]] bool contains(Point2 p) const noexcept {
        if (distance_to_boundary(p) <= 1e-12) return false;
        bool inside = false;
        const std::size_t n = size();
        for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
            const Point2 a = vertices_[i];
            const Point2 b = vertices_[j];
            if ((a.y > p.y) != (b.y > p.y)) {
                const double x = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
                if (p.x < x) inside = !inside;
            }
        }
        return inside;
    }

private:
    static double signed_area(const std::vector<Point2>& v) noexcept {
        double s = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) s += cross(v[i], v[(i + 1) % v.size()]);
        return 0.5 * s;
    }

    static bool segments_touch(Segment p, Segment q) noexcept {
        const auto orient = [](Point2 a, Point2 b, Point2 c) { return cross(b - a, c - a); };
        const double d1 = orient(q.a, q.b, p.a);
        const double d2 = orient(q.a, q.b, p.b);
        const double d3 = orient(p.a, p.b, q.a);
        const double d4 = orient(p.a, p.b, q.b);
        if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
            return true;
        constexpr double eps = 1e-12;
        return distance_to_segment(p.a, q.a, q.b) < eps || distance_to_segment(p.b, q.a, q.b) < eps ||
               distance_to_segment(q.a, p.a, p.b) < eps || distance_to_segment(q.b, p.a, p.b) < eps;
    }

    void check_simple() const {
        const std::size_t n = size();
        for (std::size_t i = 0; i < n; ++i) {
            if (edge(i).length() <= 0.0) throw Error(Errc::InvalidArgument, "enclosure has a zero-length edge");
            for (std::size_t j = i + 1; j < n; ++j) {
                const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
                if (adjacent) {
                    // neighbours share exactly one vertex; reject folding back onto each other
                    const Segment a = edge(i);
                    const Segment b = edge(j);
                    const Point2 shared = (j == i + 1) ? a.b : a.a;
                    const Point2 far_a = (j == i + 1) ? a.a : a.b;
                    const Point2 far_b = (j == i + 1) ? b.b : b.a;
                    if (std::fabs(cross(far_a - shared, far_b - shared)) < 1e-12 &&
                        dot(far_a - shared, far_b - shared) > 0.0)
                        throw Error(Errc::InvalidArgument, "enclosure edges overlap");
                    continue;
                }
                if (segments_touch(edge(i), edge(j)))
                    throw Error(Errc::InvalidArgument, "enclosure is self-intersecting");
            }
        }
    }

    std::vector<Point2> vertices_;
    std::vector<double> cumulative_;
};

/// Candidate ray through a prediction point; angle is the direction of travel.
struct RayLine {
    Point2 origin;
    double angle = 0.0;

    RayLine() = default;
    RayLine(Point2 o, double a) : origin(o), angle(normalize_angle(a)) {}

    [[nodiscard]] Point2 direction() const noexcept { return unit_from_angle(angle); }
};

struct BoundaryHit {
    Point2 point;
    std::size_t edge = 0;
    double edge_offset = 0.0; ///< distance from the edge's start vertex
    double distance = 0.0;    ///< distance from the ray origin
};

/// The two boundary crossings bracketing the ray origin. The ray travels
/// upstream -> origin -> downstream.
struct Chord {
    BoundaryHit upstream;
    BoundaryHit downstream;
};

struct ChordTolerances {
    double parallel = deg2rad(1.0); ///< near-parallel rejection angle
    double vertex = 1e-3;           ///< vertex-hit rejection radius, meters
};

/// Non-throwing form of enclosure_intersections; returns the error code
/// instead of raising it so angular scans can skip bad candidates cheaply.
inline std::variant<Chord, Errc> find_chord(const RayLine& ray, const Enclosure& boundary,
                                            const ChordTolerances& tol = {}) {
    if (!boundary.contains(ray.origin)) return Errc::OriginOutside;
    const Point2 d = ray.direction();
    std::optional<BoundaryHit> up;
    std::optional<BoundaryHit> down;
    for (std::size_t i = 0; i < boundary.size(); ++i) {
        const Segment seg = boundary.edge(i);
        const Point2 e = seg.b - seg.a;
        const double len = norm(e);
        const double denom = cross(d, e);
        if (std::fabs(denom) <= 1e-15 * len) continue;
        const Point2 w = seg.a - ray.origin;
        const double s = cross(w, e) / denom;
        const double t = cross(w, d) / denom;
        const double slack = tol.vertex / len;
        if (t < -slack || t > 1.0 + slack) continue;
        BoundaryHit hit{ray.origin + d * s, i, std::clamp(t, 0.0, 1.0) * len, std::fabs(s)};
        auto& side = s > 0.0 ? down : up;
        if (!side || hit.distance < side->distance) side = hit;
    }
    if (!up || !down) return Errc::OriginOutside;
    for (const BoundaryHit* h : {&*up, &*down}) {
        const Segment seg = boundary.edge(h->edge);
        if (distance(h->point, seg.a) < tol.vertex || distance(h->point, seg.b) < tol.vertex)
            return Errc::VertexHit;
        if (std::fabs(cross(d, seg.direction())) < std::sin(tol.parallel)) return Errc::DegenerateRay;
    }
    return Chord{*up, *down};
}

/// The two boundary intersections of a ray through an interior point, one on
/// each side; for non-convex boundaries the nearest crossing per side is used.
inline Chord enclosure_intersections(const RayLine& ray, const Enclosure& boundary,
                                     const ChordTolerances& tol = {}) {
    auto r = find_chord(ray, boundary, tol);
    if (const Errc* err = std::get_if<Errc>(&r))
        throw Error(*err, "ray at angle " + std::to_string(ray.angle) + " rad");
    return std::get<Chord>(r);
}

/// Angle between the direction a ray arrives from and the array axis, in [0, pi].
inline double aoa_relative_to_array(Point2 ray_direction, Point2 array_direction) {
    constexpr double tol = 1e-9;
    if (std::fabs(norm(ray_direction) - 1.0) > tol || std::fabs(norm(array_direction) - 1.0) > tol)
        throw Error(Errc::NonUnitInput, "aoa inputs must be unit vectors");
    return std::acos(std::clamp(dot(ray_direction, array_direction), -1.0, 1.0));
}

/// A virtual linear array formed by consecutive route samples.
struct ArrayWindow {
    Point2 first_antenna;
    Point2 direction{1.0, 0.0}; ///< unit vector along the route
    double sample_spacing = 0.0;
    std::size_t sample_count = 0;

    [[nodiscard]] double length() const noexcept {
        return sample_count > 0 ? static_cast<double>(sample_count - 1) * sample_spacing : 0.0;
    }
    [[nodiscard]] Point2 position(double d) const noexcept { return first_antenna + direction * d; }
    [[nodiscard]] Point2 center() const noexcept { return position(0.5 * length()); }
};

struct DirectPathGeometry {
    double length = 0.0; ///< l_Tx, meters
    double aoa = 0.0;    ///< phi_Tx, radians in [0, pi]
};

/// Direct-path length and arrival angle at a point on an array of the given axis.
inline DirectPathGeometry direct_path_geometry(Point2 tx, Point2 at, Point2 array_direction) {
    const Point2 v = tx - at;
    const double l = norm(v);
    if (!(l > 0.0)) throw Error(Errc::CoincidentPoints, "transmitter coincides with the array");
    return {l, aoa_relative_to_array(v / l, array_direction)};
}

inline DirectPathGeometry direct_path_geometry(Point2 tx, const ArrayWindow& window) {
    return direct_path_geometry(tx, window.first_antenna, window.direction);
}

} // namespace raymakeup
