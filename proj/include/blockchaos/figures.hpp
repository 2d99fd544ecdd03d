// Copyright 2026 The blockchaos Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Plot-ready CSV + JSON sidecars from finished runs, with reference overlays
// (Poisson / GOE / GUE constants, densities and Delta_3 curves).

#pragma once

#include <algorithm>
#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "blockchaos/classical.hpp"
#include "blockchaos/ensembles.hpp"
#include "blockchaos/errors.hpp"
#include "blockchaos/io.hpp"
#include "blockchaos/runner.hpp"

namespace blockchaos::figures {

namespace fs = std::filesystem;
using json = nlohmann::json;
using io::format_double;

enum class FigureKind { nns, r_curve, delta3, portrait, noise_sweep };

inline FigureKind parse_figure_kind(std::string_view s) {
    if (s == "nns") return FigureKind::nns;
    if (s == "r_curve") return FigureKind::r_curve;
    if (s == "delta3") return FigureKind::delta3;
    if (s == "portrait") return FigureKind::portrait;
    if (s == "noise_sweep") return FigureKind::noise_sweep;
    throw ValidationError("unknown figure kind '" + std::string(s) + "'");
}

inline std::string_view to_string(FigureKind k) {
    switch (k) {
    case FigureKind::nns: return "nns";
    case FigureKind::r_curve: return "r_curve";
    case FigureKind::delta3: return "delta3";
    case FigureKind::portrait: return "portrait";
    case FigureKind::noise_sweep: return "noise_sweep";
    }
    return "?";
}

struct PortraitOptions {
    double alpha = 0.0;
    double tau = 0.0;
    std::size_t steps = 10000;
    std::vector<std::array<double, 3>> initial = default_portrait_initial_conditions();
};

struct FigureFiles {
    fs::path csv;
    fs::path sidecar;
};

inline json reference_lines() {
    return {{"poisson", kRPoisson}, {"goe", kRGoe}, {"gue", kRGue}};
}

namespace detail {

inline std::string num(const json &v) { return v.is_number() ? format_double(v.get<double>()) : std::string(); }

/// Every record set must be noiseless (nns, r_curve, delta3) or every one
/// noisy (noise_sweep).
inline void check_kinds(FigureKind kind, const std::vector<runner::LoadedRun> &runs) {
    if (runs.empty()) throw ValidationError("figure: no records given");
    const bool want_noise = kind == FigureKind::noise_sweep;
    for (const auto &r : runs) {
        if (r.manifest.noise.has_value() != want_noise) {
            throw ValidationError("figure " + std::string(to_string(kind)) + ": record set " + r.dir.string() +
                                  (want_noise ? " has no noise sweep" : " is a noise sweep"));
        }
    }
}

inline FigureFiles write(const fs::path &out_dir, std::string_view stem, const io::CsvWriter &csv, const json &sidecar) {
    FigureFiles f{out_dir / (std::string(stem) + ".csv"), out_dir / (std::string(stem) + ".json")};
    io::atomic_write(f.csv, csv.str());
    io::atomic_write(f.sidecar, io::dump_json(sidecar));
    return f;
}

inline std::vector<json> all_stats(const std::vector<runner::LoadedRun> &runs) {
    std::vector<json> out;
    for (const auto &r : runs) {
        for (auto &s : r.config_statistics()) out.push_back(std::move(s));
    }
    return out;
}

}  // namespace detail

/// Writes <kind>.csv and <kind>.json (plus delta3_reference.* for delta3).
inline std::vector<FigureFiles> emit_figure_data(FigureKind kind, const std::vector<runner::LoadedRun> &runs,
                                                 const fs::path &out_dir, const PortraitOptions &portrait = {}) {
    std::vector<FigureFiles> files;
    const std::string stem(to_string(kind));
    json sidecar = {{"kind", stem}, {"code_version", kCodeVersion}};

    if (kind == FigureKind::portrait) {
        if (!runs.empty()) throw ValidationError("figure portrait takes no records");
        io::CsvWriter csv({"trajectory_id", "step", "Jx", "Jz"});
        for (const auto &p : phase_portrait(portrait.initial, portrait.alpha, portrait.tau, portrait.steps)) {
            csv.row({std::to_string(p.trajectory), std::to_string(p.step), format_double(p.jx), format_double(p.jz)});
        }
        json ics = json::array();
        for (const auto &ic : portrait.initial) ics.push_back(ic);
        sidecar["columns"] = {"trajectory_id", "step", "Jx", "Jz"};
        sidecar["alpha"] = portrait.alpha;
        sidecar["tau"] = portrait.tau;
        sidecar["steps"] = portrait.steps;
        sidecar["initial_conditions"] = ics;
        files.push_back(detail::write(out_dir, stem, csv, sidecar));
        return files;
    }

    detail::check_kinds(kind, runs);
    const std::vector<json> stats = detail::all_stats(runs);
    json configs = json::array();
    for (const auto &s : stats) {
        json meta = s;
        meta.erase("nns");
        meta.erase("delta3");
        configs.push_back(meta);
    }
    sidecar["configs"] = configs;
    sidecar["reference_r"] = reference_lines();

    switch (kind) {
    case FigureKind::nns: {
        const std::vector<std::string> cols{"config", "J_over_Jmax", "bin_lo", "bin_hi", "density", "poisson", "goe", "gue"};
        io::CsvWriter csv(cols);
        for (const auto &s : stats) {
            if (!s.contains("nns")) continue;
            const auto edges = s.at("nns").at("edges").get<std::vector<double>>();
            const auto dens = s.at("nns").at("densities").get<std::vector<double>>();
            for (std::size_t k = 0; k < dens.size(); ++k) {
                const double mid = 0.5 * (edges[k] + edges[k + 1]);
                csv.row({s.at("config").get<std::string>(), detail::num(s.at("J_over_Jmax")), format_double(edges[k]),
                         format_double(edges[k + 1]), format_double(dens[k]),
                         format_double(spacing_density(ReferenceKind::poisson, mid)),
                         format_double(spacing_density(ReferenceKind::goe, mid)),
                         format_double(spacing_density(ReferenceKind::gue, mid))});
            }
        }
        sidecar["columns"] = cols;
        sidecar["reference_densities"] = {{"poisson", "exp(-s)"},
                                          {"goe", "(pi/2) s exp(-pi s^2 / 4)"},
                                          {"gue", "(32/pi^2) s^2 exp(-4 s^2 / pi)"}};
        files.push_back(detail::write(out_dir, stem, csv, sidecar));
        break;
    }
    case FigureKind::r_curve: {
        const std::vector<std::string> cols{"config", "J_over_Jmax", "j", "j_max", "r", "stderr", "samples"};
        io::CsvWriter csv(cols);
        for (const auto &s : stats) {
            if (!s.contains("r")) continue;
            csv.row({s.at("config").get<std::string>(), detail::num(s.at("J_over_Jmax")), detail::num(s.at("j")),
                     detail::num(s.at("j_max")), detail::num(s.at("r").at("mean")), detail::num(s.at("r").at("stderr")),
                     std::to_string(s.at("r").at("samples").get<std::size_t>())});
        }
        sidecar["columns"] = cols;
        files.push_back(detail::write(out_dir, stem, csv, sidecar));
        break;
    }
    case FigureKind::delta3: {
        const std::vector<std::string> cols{"config", "J_over_Jmax", "L", "delta3"};
        io::CsvWriter csv(cols);
        std::vector<double> grid;
        for (const auto &s : stats) {
            if (!s.contains("delta3")) continue;
            for (const auto &p : s.at("delta3")) {
                csv.row({s.at("config").get<std::string>(), detail::num(s.at("J_over_Jmax")), detail::num(p.at("L")),
                         detail::num(p.at("delta3"))});
                const double L = p.at("L").get<double>();
                if (std::find(grid.begin(), grid.end(), L) == grid.end()) grid.push_back(L);
            }
        }
        std::sort(grid.begin(), grid.end());
        sidecar["columns"] = cols;
        files.push_back(detail::write(out_dir, stem, csv, sidecar));

        const std::vector<std::string> rcols{"reference", "L", "delta3"};
        io::CsvWriter ref(rcols);
        const auto mc_poisson = reference_delta3(ReferenceKind::poisson, grid);
        const auto mc_goe = reference_delta3(ReferenceKind::goe, grid);
        for (std::size_t k = 0; k < grid.size(); ++k) {
            ref.row({"poisson_L_over_15", format_double(grid[k]), format_double(delta3_reference(ReferenceKind::poisson, grid[k]))});
            ref.row({"goe_asymptotic", format_double(grid[k]), format_double(delta3_reference(ReferenceKind::goe, grid[k]))});
            ref.row({"poisson_monte_carlo", format_double(grid[k]), format_double(mc_poisson[k].value)});
            ref.row({"goe_monte_carlo", format_double(grid[k]), format_double(mc_goe[k].value)});
        }
        json rside = {{"kind", "delta3_reference"},
                      {"columns", rcols},
                      {"monte_carlo", {{"poisson", "8 circular spectra of 500 iid uniform phases"},
                                       {"goe", "8 unfolded GOE spectra, dim 500"}}}};
        files.push_back(detail::write(out_dir, "delta3_reference", ref, rside));
        break;
    }
    case FigureKind::noise_sweep: {
        const std::vector<std::string> cols{"J_over_Jmax", "norm", "r", "stderr", "noise_kind", "j", "j_max",
                                            "n_spins", "achieved_norm", "config"};
        io::CsvWriter csv(cols);
        for (const auto &s : stats) {
            if (!s.contains("r")) continue;
            csv.row({detail::num(s.at("J_over_Jmax")), detail::num(s.at("norm")), detail::num(s.at("r").at("mean")),
                     detail::num(s.at("r").at("stderr")), s.at("noise_kind").get<std::string>(), detail::num(s.at("j")),
                     detail::num(s.at("j_max")), s.contains("n_spins") ? std::to_string(s.at("n_spins").get<int>()) : "",
                     s.contains("achieved_norm_mean") ? detail::num(s.at("achieved_norm_mean")) : "",
                     s.at("config").get<std::string>()});
        }
        sidecar["columns"] = cols;
        files.push_back(detail::write(out_dir, stem, csv, sidecar));
        break;
    }
    case FigureKind::portrait: break;
    }
    return files;
}

}  // namespace blockchaos::figures
