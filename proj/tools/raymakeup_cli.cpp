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

// raymakeup: simulate boundary measurements, fit the ground model, extract
// spectral peaks, predict the channel inside the enclosure and score it.
//
// Exit codes: 0 ok, 2 config / io / usage error, 3 coverage or
// precondition error, 1 anything else.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "raymakeup/config.hpp"
#include "raymakeup/csv.hpp"
#include "raymakeup/evaluation.hpp"
#include "raymakeup/pipeline.hpp"
#include "raymakeup/svg.hpp"

namespace fs = std::filesystem;
using namespace raymakeup;

namespace {

struct Common {
    std::string config;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    std::optional<double> snr_db;
    std::optional<double> beta;
    std::optional<double> window_m;
    std::optional<double> scan_step_deg;
    std::string boundary;
    bool by_psi = false;
    bool smooth = false;
    bool svg = false;
};

RunConfig load(const Common& c) {
    RunConfig cfg = load_config(c.config);
    if (c.seed) cfg.scenario.seed = *c.seed;
    if (c.snr_db) {
        cfg.scenario.snr_db = *c.snr_db;
        cfg.apply_noise_default();
    }
    if (c.beta) cfg.predictor.beta = *c.beta;
    if (c.window_m) cfg.predictor.window_length = *c.window_m;
    if (c.scan_step_deg) cfg.predictor.scan_step = deg2rad(*c.scan_step_deg);
    try {
        cfg.validate();
    } catch (const Error& e) {
        throw Error(Errc::ConfigParse, e.what());
    }
    return cfg;
}

fs::path out_dir(const Common& c) {
    const fs::path p(c.out);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw Error(Errc::Io, "cannot create " + p.string());
    return p;
}

RouteMeasurements read_boundary(const Common& c) {
    if (c.boundary.empty()) throw Error(Errc::ConfigParse, "--boundary is required");
    return csv::boundary_from(csv::read_file(c.boundary, csv::boundary_columns));
}

GroundFitOptions fit_options(const Common& c) {
    GroundFitOptions o;
    o.smooth = c.smooth;
    return o;
}

ProfileOptions profile_options(const Common& c) {
    ProfileOptions o;
    o.axis = c.by_psi ? ProfileAxis::Psi : ProfileAxis::Angle;
    return o;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw Error(Errc::Io, "cannot write " + path.string());
    out << text;
}

std::string kv(const std::string& key, double v) { return key + " = " + csv::format(v) + "\n"; }

void profile_svg(const fs::path& path, const std::string& title, const std::vector<ProfileRow>& rows, bool by_psi) {
    std::vector<double> x, y, v;
    for (const ProfileRow& r : rows) {
        x.push_back(r.arclen);
        y.push_back(r.coordinate);
        v.push_back(r.power);
    }
    svg::heatmap(path, {title, "route arclength (m)", by_psi ? "|psi|" : "angle (deg)"}, x, y, v);
}

void grid_svg(const fs::path& path, const std::string& title, const csv::Table& t) {
    std::vector<double> x, y, v;
    for (const csv::Row& r : t.rows) {
        x.push_back(r[0]);
        y.push_back(r[1]);
        v.push_back(r[2]);
    }
    svg::heatmap(path, {title, "x (m)", "y (m)"}, x, y, v);
}

int run_simulate(const Common& c) {
    const RunConfig cfg = load(c);
    const fs::path dir = out_dir(c);
    const RouteMeasurements m = simulate_boundary(cfg);
    const std::vector<Point2> grid = prediction_grid(cfg);
    csv::write_file(dir / "boundary.csv", csv::boundary_table(m));
    const csv::Table og = oracle_grid_table(cfg.scenario, grid);
    csv::write_file(dir / "oracle_grid.csv", og);
    csv::write_file(dir / "oracle_rays.csv", oracle_ray_table(cfg.scenario, grid));
    const std::vector<Point2> route = cfg.route_points();
    std::vector<ProfileRow> prof;
    if (!route.empty()) {
        prof = oracle_profile(cfg.scenario, route, profile_options(c));
        csv::write_file(dir / "oracle_profile.csv", csv::profile_table(prof, profile_options(c).axis));
    }
    if (c.svg) {
        svg::Series s{{}, {}, "boundary"};
        for (const RouteSample& r : m.samples) {
            s.x.push_back(r.arclen);
            s.y.push_back(r.power_db);
        }
        svg::line_plot(dir / "boundary.svg", {"boundary power", "arclength (m)", "power (dB)"}, {s});
        grid_svg(dir / "oracle_grid.svg", "oracle power (dB)", og);
        if (!prof.empty()) profile_svg(dir / "oracle_profile.svg", "oracle power per angle", prof, c.by_psi);
    }
    std::printf("boundary samples %zu, grid points %zu\n", m.samples.size(), grid.size());
    return 0;
}

int run_fit_ground(const Common& c) {
    const RunConfig cfg = load(c);
    const fs::path dir = out_dir(c);
    const RouteMeasurements m = read_boundary(c);
    const Scenario& s = cfg.scenario;
    const GroundFitResult f = fit_ground_params(m, s.tx, s.antenna_height, s.wavelength, fit_options(c));
    const std::string text = kv("eps_r_hat", f.permittivity) + kv("G_hat", f.gain) +
                             kv("residual_mse_db2", f.residual_mse_db2);
    write_text(dir / "ground_fit.txt", text);
    std::cout << text;
    return 0;
}

int run_estimate(const Common& c) {
    const RunConfig cfg = load(c);
    const fs::path dir = out_dir(c);
    const BoundaryData data = prepare_boundary(cfg, read_boundary(c), fit_options(c));
    csv::Table peaks{csv::peak_columns, {}};
    csv::Table spec{csv::spectrum_columns, {}};
    // One spectrum every ~5 cm of perimeter keeps the heatmap file small.
    const double every = 0.05;
    for (std::size_t e = 0; e < data.edge_count(); ++e) {
        const EdgeData& ed = data.edge(e);
        const double start = cfg.enclosure().edge_start_arclen(e);
        double next = 0.0;
        for (const WindowRecord& w : ed.windows) {
            const Point2 ctr = w.window.center();
            for (const Peak& p : w.peaks.peaks) peaks.rows.push_back({ctr.x, ctr.y, p.psi, p.magnitude, p.phase});
            if (w.center_offset + 1e-9 < next) continue;
            next = w.center_offset + every;
            const Spectrum& s = w.spectrum;
            double top = 0.0;
            for (std::size_t i = s.psi.size() / 2; i < s.psi.size(); ++i)
                if (s.retained(i)) top = std::max(top, std::norm(s.values[i]));
            for (std::size_t i = s.psi.size() / 2; i < s.psi.size(); ++i)
                if (s.retained(i))
                    spec.rows.push_back({start + w.center_offset, s.psi[i], top > 0.0 ? std::norm(s.values[i]) / top : 0.0});
        }
    }
    csv::write_file(dir / "peaks.csv", peaks);
    csv::write_file(dir / "spectrum.csv", spec);
    if (c.svg) {
        std::vector<double> x, y, v;
        for (const csv::Row& r : spec.rows) {
            x.push_back(r[0]);
            y.push_back(r[1]);
            v.push_back(r[2]);
        }
        svg::heatmap(dir / "spectrum.svg", {"boundary spectra", "arclength (m)", "|psi|"}, x, y, v);
    }
    std::printf("windows %zu, peaks %zu\n", data.all_windows().size(), peaks.rows.size());
    return 0;
}

int run_predict(const Common& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const RunConfig cfg = load(c);
    const fs::path dir = out_dir(c);
    const BoundaryData data = prepare_boundary(cfg, read_boundary(c), fit_options(c));
    const std::vector<Point2> grid = prediction_grid(cfg);
    const std::vector<PredictionResult> pred = predict_grid(grid, data);
    const csv::Table pt = csv::prediction_table(pred);
    csv::write_file(dir / "prediction.csv", pt);
    csv::write_file(dir / "prediction_rays.csv", csv::prediction_ray_table(pred));
    const std::vector<Point2> route = cfg.route_points();
    std::vector<ProfileRow> prof;
    if (!route.empty()) {
        prof = power_per_angle_profile(route, data, profile_options(c));
        csv::write_file(dir / "profile.csv", csv::profile_table(prof, profile_options(c).axis));
    }
    std::size_t rays = 0;
    std::size_t empty = 0;
    for (const PredictionResult& r : pred) {
        rays += r.rays.size();
        empty += r.rays.empty() ? 1 : 0;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const GroundFitResult& f = data.ground_fit();
    const std::string text = kv("eps_r_hat", f.permittivity) + kv("G_hat", f.gain) +
                             kv("residual_mse_db2", f.residual_mse_db2) + kv("grid_points", grid.size()) +
                             kv("object_rays", rays) + kv("points_without_rays", empty) +
                             kv("mean_rays_per_point", grid.empty() ? 0.0 : double(rays) / double(grid.size())) +
                             kv("noise_level", data.noise_level()) + kv("elapsed_s", secs);
    write_text(dir / "report.txt", text);
    if (c.svg) {
        grid_svg(dir / "prediction.svg", "predicted power (dB)", pt);
        if (!prof.empty()) profile_svg(dir / "profile.svg", "predicted power per angle", prof, c.by_psi);
    }
    std::cout << text;
    return 0;
}

struct EvalPaths {
    std::string prediction;
    std::string oracle;
    std::string prediction_rays;
    std::string oracle_rays;
    std::string profile;
    std::string oracle_profile;
};

int run_evaluate(const Common& c, const EvalPaths& p) {
    const fs::path dir = out_dir(c);
    const csv::Table pred = csv::read_file(p.prediction, csv::prediction_columns);
    const csv::Table orac = csv::read_file(p.oracle, csv::oracle_grid_columns);
    const PowerMetrics pm = compare_power(pred, orac);
    std::string text;
    text += kv("power_abs_err_db_median", pm.all.median) + kv("power_abs_err_db_mean", pm.all.mean) +
            kv("power_abs_err_db_p90", pm.all.p90) + kv("power_abs_err_db_median_no_fades", pm.no_fades.median) +
            kv("power_abs_err_db_mean_no_fades", pm.no_fades.mean) + kv("power_abs_err_db_p90_no_fades", pm.no_fades.p90) +
            kv("points", pm.all.count) + kv("deep_fade_points", pm.excluded);
    if (!p.prediction_rays.empty() && !p.oracle_rays.empty()) {
        const AoaMetrics am = compare_rays(csv::read_file(p.prediction_rays, csv::prediction_ray_columns),
                                           csv::read_file(p.oracle_rays, csv::oracle_ray_columns));
        text += kv("aoa_rays", am.error_deg.count) + kv("aoa_err_deg_median", am.error_deg.median) +
                kv("aoa_err_deg_p90", am.error_deg.p90) + kv("aoa_within_1deg", am.within_1deg) +
                kv("aoa_within_2deg", am.within_2deg);
    }
    if (!p.profile.empty() && !p.oracle_profile.empty()) {
        const auto& cols = c.by_psi ? csv::psi_profile_columns : csv::angle_profile_columns;
        text += kv("profile_correlation",
                   profile_correlation(csv::profile_from(csv::read_file(p.profile, cols)),
                                       csv::profile_from(csv::read_file(p.oracle_profile, cols))));
    }
    write_text(dir / "metrics.txt", text);
    std::cout << text;
    return 0;
}

int run_profile(const Common& c) {
    const RunConfig cfg = load(c);
    const fs::path dir = out_dir(c);
    const std::vector<Point2> route = cfg.route_points();
    if (route.empty()) throw Error(Errc::ConfigParse, "config has no [prediction] route");
    const BoundaryData data = prepare_boundary(cfg, read_boundary(c), fit_options(c));
    const ProfileOptions po = profile_options(c);
    const std::vector<ProfileRow> pred = power_per_angle_profile(route, data, po);
    const std::vector<ProfileRow> orac = oracle_profile(cfg.scenario, route, po);
    csv::write_file(dir / "profile.csv", csv::profile_table(pred, po.axis));
    csv::write_file(dir / "oracle_profile.csv", csv::profile_table(orac, po.axis));
    if (c.svg) {
        profile_svg(dir / "profile.svg", "predicted power per angle", pred, c.by_psi);
        profile_svg(dir / "oracle_profile.svg", "oracle power per angle", orac, c.by_psi);
    }
    std::cout << kv("route_points", route.size()) << kv("profile_correlation", profile_correlation(pred, orac));
    return 0;
}

int exit_code(Errc e) {
    switch (e) {
    case Errc::ConfigParse:
    case Errc::Io: return 2;
    case Errc::CoverageGap:
    case Errc::NoBoundaryCoverage:
    case Errc::InsufficientClearance:
    case Errc::OriginOutside:
    case Errc::UndersampledRoute:
    case Errc::UndersampledWindow:
    case Errc::WindowTooShort:
    case Errc::InsufficientSamples:
    case Errc::GridMismatch: return 3;
    default: return 1;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ray makeup and power prediction from power-only boundary measurements"};
    app.require_subcommand(1);
    Common c;
    EvalPaths ep;

    const auto config_opts = [&](CLI::App* s) {
        s->add_option("--config", c.config, "scene / run configuration")->required()->check(CLI::ExistingFile);
        s->add_option("--out", c.out, "output directory");
    };
    const auto predictor_opts = [&](CLI::App* s) {
        s->add_option("--boundary", c.boundary, "boundary.csv from simulate")->required();
        s->add_option("--beta-th", c.beta, "relative peak threshold");
        s->add_option("--window-m", c.window_m, "virtual array length in meters");
        s->add_flag("--smooth", c.smooth, "smooth the boundary trace before the ground fit");
        s->add_flag("--svg", c.svg, "also write SVG plots");
    };

    CLI::App* sim = app.add_subcommand("simulate", "boundary power and oracle outputs");
    config_opts(sim);
    sim->add_option("--seed", c.seed, "noise seed");
    sim->add_option("--snr-db", c.snr_db, "add noise at this SNR");
    sim->add_flag("--by-psi", c.by_psi, "bin the oracle profile by |psi|");
    sim->add_flag("--svg", c.svg, "also write SVG plots");

    CLI::App* fit = app.add_subcommand("fit-ground", "estimate ground permittivity and gain");
    config_opts(fit);
    fit->add_option("--boundary", c.boundary, "boundary.csv")->required();
    fit->add_flag("--smooth", c.smooth, "smooth the boundary trace first");

    CLI::App* est = app.add_subcommand("estimate", "per-window spectra and peaks");
    config_opts(est);
    predictor_opts(est);

    CLI::App* pre = app.add_subcommand("predict", "predict power and rays on the interior grid");
    config_opts(pre);
    predictor_opts(pre);
    pre->add_option("--scan-step-deg", c.scan_step_deg, "candidate angle step");
    pre->add_flag("--by-psi", c.by_psi, "bin the route profile by |psi|");

    CLI::App* ev = app.add_subcommand("evaluate", "compare predictions with the oracle");
    ev->add_option("--prediction", ep.prediction, "prediction.csv")->required();
    ev->add_option("--oracle", ep.oracle, "oracle_grid.csv")->required();
    ev->add_option("--prediction-rays", ep.prediction_rays, "prediction_rays.csv");
    ev->add_option("--oracle-rays", ep.oracle_rays, "oracle_rays.csv");
    ev->add_option("--profile", ep.profile, "profile.csv");
    ev->add_option("--oracle-profile", ep.oracle_profile, "oracle_profile.csv");
    ev->add_flag("--by-psi", c.by_psi, "profiles are binned by |psi|");
    ev->add_option("--out", c.out, "output directory");

    CLI::App* prof = app.add_subcommand("profile", "power per angle along the configured route");
    config_opts(prof);
    predictor_opts(prof);
    prof->add_option("--scan-step-deg", c.scan_step_deg, "candidate angle step");
    prof->add_flag("--by-psi", c.by_psi, "bin by |psi| instead of angle");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (sim->parsed()) return run_simulate(c);
        if (fit->parsed()) return run_fit_ground(c);
        if (est->parsed()) return run_estimate(c);
        if (pre->parsed()) return run_predict(c);
        if (ev->parsed()) return run_evaluate(c, ep);
        if (prof->parsed()) return run_profile(c);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
