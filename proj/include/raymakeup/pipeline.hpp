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

// Glue used by the command-line tool and the end-to-end checks.

#pragma once

#include <vector>

#include "raymakeup/channel_sim.hpp"
#include "raymakeup/config.hpp"
#include "raymakeup/errors.hpp"
#include "raymakeup/ground_fit.hpp"
#include "raymakeup/predictor.hpp"

namespace raymakeup {

/// Power along the enclosure perimeter at the configured spacing.
inline RouteMeasurements simulate_boundary(const RunConfig& cfg) {
    return simulate_route_power(cfg.scenario, perimeter_route(cfg.enclosure(), cfg.sample_spacing()));
}

/// Fits the ground model and cuts the boundary into analysed windows.
/// Throws CoverageGap when some edge is not measured densely enough.
inline BoundaryData prepare_boundary(const RunConfig& cfg, const RouteMeasurements& boundary,
                                     const GroundFitOptions& fit_options = {}) {
    const Scenario& s = cfg.scenario;
    const GroundFitResult fit = fit_ground_params(boundary, s.tx, s.antenna_height, s.wavelength, fit_options);
    BoundaryData data(cfg.enclosure(), boundary, fit, s.tx, s.antenna_height, s.wavelength, cfg.predictor);
    for (std::size_t e = 0; e < data.edge_count(); ++e)
        if (!data.edge(e).covered)
            throw Error(Errc::CoverageGap, "boundary samples leave a gap wider than lambda/4 on edge " +
                                               std::to_string(e));
    return data;
}

inline std::vector<Point2> prediction_grid(const RunConfig& cfg) {
    return interior_grid(cfg.enclosure(), cfg.grid_spacing, cfg.predictor.min_clearance());
}

} // namespace raymakeup
