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

#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "blockchaos.hpp"

namespace {

namespace fs = std::filesystem;
namespace bc = blockchaos;

struct Flags {
    std::string scale;
    std::optional<std::uint64_t> seed;
    std::string out;
    int threads = 1;
    bool force = false;
    bool verbose = false;
};

int cmd_run(const std::string &manifest_path, const Flags &f) {
    bc::runner::RunOptions opt;
    if (!f.out.empty()) opt.out_dir = f.out;
    if (!f.scale.empty()) opt.scale = bc::runner::parse_scale(f.scale);
    opt.seed = f.seed;
    opt.threads = f.threads;
    opt.force = f.force;
    opt.verbose = f.verbose;
    const auto result = bc::runner::run(bc::runner::load_manifest(manifest_path), opt);
    std::cout << "jobs " << result.records.size() << ", cached " << result.cached << ", failed " << result.failures
              << "\n";
    for (const auto &c : result.statistics.at("configs")) {
        std::cout << "  " << std::left << std::setw(48) << c.at("config").get<std::string>();
        if (c.contains("r")) {
            std::cout << " r = " << std::fixed << std::setprecision(4) << c.at("r").at("mean").get<double>() << " +- "
                      << c.at("r").at("stderr").get<double>() << std::defaultfloat;
        } else {
            std::cout << " " << c.value("error", std::string("no statistics"));
        }
        std::cout << "\n";
    }
    std::cout << "outputs in " << result.out_dir.string() << "\n";
    return result.failures == 0 ? 0 : 3;
}

int cmd_stats(const std::vector<std::string> &records, const Flags &f) {
    nlohmann::json all = nlohmann::json::array();
    for (const auto &path : records) {
        const auto run = bc::runner::load_run(path);
        for (auto &s : bc::runner::recompute_statistics(run)) {
            std::cout << std::left << std::setw(48) << s.at("config").get<std::string>() << " sets "
                      << std::setw(6) << s.at("sets").get<std::size_t>();
            if (s.contains("r")) {
                std::cout << " r = " << std::fixed << std::setprecision(4) << s.at("r").at("mean").get<double>()
                          << " +- " << s.at("r").at("stderr").get<double>() << std::defaultfloat;
            }
            std::cout << "\n";
            all.push_back(std::move(s));
        }
    }
    if (!f.out.empty()) bc::io::atomic_write(f.out, bc::io::dump_json({{"configs", all}}));
    return 0;
}

int cmd_figure(const std::string &kind_name, const std::vector<std::string> &records, const Flags &f,
               const bc::figures::PortraitOptions &portrait) {
    const auto kind = bc::figures::parse_figure_kind(kind_name);
    std::vector<bc::runner::LoadedRun> runs;
    for (const auto &r : records) runs.push_back(bc::runner::load_run(r));
    const fs::path out = f.out.empty() ? fs::path("figures") : fs::path(f.out);
    for (const auto &file : bc::figures::emit_figure_data(kind, runs, out, portrait)) {
        std::cout << file.csv.string() << "\n" << file.sidecar.string() << "\n";
    }
    return 0;
}

int cmd_oracle(int n_spins, int draws, const Flags &f) {
    const auto report = bc::check_block_equivalence(n_spins, draws, f.seed.value_or(20260101));
    std::cout << "N = " << n_spins << ", draws = " << draws << ", max aligned phase error = " << std::scientific
              << report.max_error() << "\n";
    const bool ok = report.max_error() < 1e-9;
    std::cout << (ok ? "PASS" : "FAIL") << "\n";
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Kicked-top and all-to-all Ising Floquet spectra, resolved into spin blocks"};
    app.set_version_flag("--version", std::string(bc::kCodeVersion));
    app.require_subcommand(1);
    app.fallthrough();

    Flags flags;
    app.add_option("--scale", flags.scale, "Scale preset: smoke, desk or paper")->check(CLI::IsMember({"smoke", "desk", "paper"}));
    app.add_option("--seed", flags.seed, "Master seed (overrides the manifest)");
    app.add_option("--out", flags.out, "Output directory (run, figure) or file (stats)");
    app.add_option("--threads", flags.threads, "Worker threads")->check(CLI::PositiveNumber);
    app.add_flag("--force", flags.force, "Recompute spectra even when cached");
    app.add_flag("-v,--verbose", flags.verbose, "Progress on stderr");

    std::string manifest;
    auto *run = app.add_subcommand("run", "Run a sweep manifest");
    run->add_option("manifest", manifest, "Manifest JSON")->required()->check(CLI::ExistingFile);

    std::vector<std::string> stats_records;
    auto *stats = app.add_subcommand("stats", "Recompute pooled statistics from run records");
    stats->add_option("records", stats_records, "Run directories or records.json files")->required();

    std::string figure_kind;
    std::vector<std::string> figure_records;
    bc::figures::PortraitOptions portrait;
    auto *figure = app.add_subcommand("figure", "Emit plot-ready CSV and JSON");
    figure->add_option("kind", figure_kind, "nns, r_curve, delta3, noise_sweep or portrait")
        ->required()
        ->check(CLI::IsMember({"nns", "r_curve", "delta3", "noise_sweep", "portrait"}));
    figure->add_option("records", figure_records, "Run directories or records.json files");
    figure->add_option("--alpha", portrait.alpha, "portrait: kick angle");
    figure->add_option("--tau", portrait.tau, "portrait: twist strength");
    figure->add_option("--steps", portrait.steps, "portrait: periods per trajectory");

    int oracle_n = 0;
    int oracle_draws = 50;
    auto *oracle = app.add_subcommand("oracle-check", "Compare full-space ATA sectors with mapped kicked tops");
    oracle->add_option("N", oracle_n, "Number of spins")->required()->check(CLI::Range(1, bc::kDefaultFullSpaceCap));
    oracle->add_option("--draws", oracle_draws, "Random (tau_A, b_x) draws")->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(manifest, flags);
        if (*stats) return cmd_stats(stats_records, flags);
        if (*figure) {
            if (figure_kind == "portrait" && (!figure->count("--alpha") || !figure->count("--tau"))) {
                throw bc::ValidationError("figure portrait needs --alpha and --tau");
            }
            return cmd_figure(figure_kind, figure_records, flags, portrait);
        }
        if (*oracle) return cmd_oracle(oracle_n, oracle_draws, flags);
    } catch (const bc::ResourceError &e) {
        std::cerr << "resource limit: " << e.what() << "\n";
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
