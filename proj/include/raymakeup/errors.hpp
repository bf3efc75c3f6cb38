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

#include <stdexcept>
#include <string>
#include <string_view>

namespace raymakeup {

enum class Errc {
    InvalidArgument,
    // geometry
    OriginOutside,
    DegenerateRay,
    VertexHit,
    NonUnitInput,
    CoincidentPoints,
    // channel simulation
    NonPositiveDistance,
    InvalidAngle,
    CoincidentTxRx,
    UndersampledRoute,
    // spectral
    WindowTooShort,
    UndersampledWindow,
    EmptySpectrum,
    ZeroDirectPath,
    // ground fit
    InsufficientSamples,
    DegenerateGeometry,
    // predictor
    ZeroAmplitude,
    PointOffRay,
    InsufficientClearance,
    NoBoundaryCoverage,
    // io / cli
    ConfigParse,
    Io,
    CoverageGap,
    GridMismatch,
};

constexpr std::string_view to_string(Errc code) noexcept {
    switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::OriginOutside: return "OriginOutside";
    case Errc::DegenerateRay: return "DegenerateRay";
    case Errc::VertexHit: return "VertexHit";
    case Errc::NonUnitInput: return "NonUnitInput";
    case Errc::CoincidentPoints: return "CoincidentPoints";
    case Errc::NonPositiveDistance: return "NonPositiveDistance";
    case Errc::InvalidAngle: return "InvalidAngle";
    case Errc::CoincidentTxRx: return "CoincidentTxRx";
    case Errc::UndersampledRoute: return "UndersampledRoute";
    case Errc::WindowTooShort: return "WindowTooShort";
    case Errc::UndersampledWindow: return "UndersampledWindow";
    case Errc::EmptySpectrum: return "EmptySpectrum";
    case Errc::ZeroDirectPath: return "ZeroDirectPath";
    case Errc::InsufficientSamples: return "InsufficientSamples";
    case Errc::DegenerateGeometry: return "DegenerateGeometry";
    case Errc::ZeroAmplitude: return "ZeroAmplitude";
    case Errc::PointOffRay: return "PointOffRay";
    case Errc::InsufficientClearance: return "InsufficientClearance";
    case Errc::NoBoundaryCoverage: return "NoBoundaryCoverage";
    case Errc::ConfigParse: return "ConfigParse";
    case Errc::Io: return "Io";
    case Errc::CoverageGap: return "CoverageGap";
    case Errc::GridMismatch: return "GridMismatch";
    }
    return "Unknown";
}

/// Exception carrying one of the library error codes.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    [[nodiscard]] Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace raymakeup
