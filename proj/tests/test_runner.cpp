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

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "blockchaos/figures.hpp"
#include "blockchaos/runner.hpp"

namespace bc = blockchaos;
namespace rn = blockchaos::runner;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

json smoke_doc() {
    return json::parse(R"({
      "schema_version": 1,
      "name": "smoke",
      "model": "ATA-block",
      "alpha": 1.7,
      "tau_range": {"lo": 10.0, "hi": 10.5},
      "j_max": 25,
      "blocks": [3, 12, 24],
      "seed": 7,
      "scale": "smoke"
    })");
}

json noise_doc() {
    return json::parse(R"({
      "schema_version": 1,
      "name": "noise",
      "model": "ATA-block",
      "alpha": 1.7,
      "tau_range": {"lo": 10.0, "hi": 10.5, "count": 3},
      "blocks": [{"j_max": 20, "j": 5}],
      "noise": {"kind": "goe", "norms": [0.0, 0.5, 5.0], "realizations": 2},
      "seed": 11,
      "scale": "smoke"
    })");
}

class TempDir {
  public:
    TempDir() {
        const auto *info = testing::UnitTest::GetInstance()->current_test_info();
        path_ = fs::temp_directory_path() / ("blockchaos_" + std::string(info->test_suite_name()) + "_" + info->name());
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path &path() const { return path_; }

  private:
    fs::path path_;
};

rn::RunOptions to(const fs::path &dir) {
    rn::RunOptions o;
    o.out_dir = dir;
    return o;
}

}  // namespace

TEST(Manifest, ParsesPlainAndObjectBlocks) {
    const auto m = rn::parse_manifest(smoke_doc());
    EXPECT_EQ(m.model, rn::Model::ata_block);
    ASSERT_EQ(m.blocks.size(), 3U);
    EXPECT_EQ(m.blocks[1].j.twice(), 24);
    EXPECT_EQ(m.blocks[1].j_max.twice(), 50);
    EXPECT_EQ(m.symmetry, rn::SymmetryMode::parity);
    EXPECT_EQ(m.tau.count, 0);  // filled in from the scale preset

    const auto n = rn::parse_manifest(noise_doc());
    EXPECT_EQ(n.symmetry, rn::SymmetryMode::none);
    ASSERT_TRUE(n.noise);
    EXPECT_EQ(n.noise->realizations, 2);
}

TEST(Manifest, HalfIntegerLabels) {
    json d = smoke_doc();
    d["j_max"] = 12.5;
    d["blocks"] = {0.5, 7.5};
    const auto m = rn::parse_manifest(d);
    EXPECT_EQ(m.blocks[0].j.twice(), 1);
    EXPECT_EQ(rn::config_name(m, m.blocks[1], 0.0), "ata-block_jmax25_2_j15_2");
    d["blocks"] = {0.3};
    EXPECT_THROW(rn::parse_manifest(d), bc::ValidationError);
}

TEST(Manifest, UnknownFieldsAreRejectedEverywhere) {
    json d = smoke_doc();
    d["colour"] = "red";
    EXPECT_THROW(rn::parse_manifest(d), bc::ValidationError);
    d = smoke_doc();
    d["tau_range"]["step"] = 0.1;
    EXPECT_THROW(rn::parse_manifest(d), bc::ValidationError);
    d = noise_doc();
    d["noise"]["sigma"] = 1;
    EXPECT_THROW(rn::parse_manifest(d), bc::ValidationError);
    d = noise_doc();
    d["blocks"][0]["n"] = 1;
    EXPECT_THROW(rn::parse_manifest(d), bc::ValidationError);
}

TEST(Manifest, Validation) {
    auto bad = [](auto edit) {
        json d = smoke_doc();
        edit(d);
        return d;
    };
    EXPECT_THROW(rn::parse_manifest(bad([](json &d) { d["schema_version"] = 2; })), bc::ValidationError);
    EXPECT_THROW(rn::parse_manifest(bad([](json &d) { d.erase("schema_version"); })), bc::ValidationError);
    EXPECT_THROW(rn::parse_manifest(bad([](json &d) { d["model"] = "XY"; })), bc::ValidationError);
    EXPECT_THROW(rn::parse_manifest(bad([](json &d) { d["blocks"] = {26}; })), bc::ValidationError);
    EXPECT_THROW(rn::parse_manifest(bad([](json &d) { d["blocks"] = json::array(); })), bc::ValidationError);
    EXPECT_THROW(rn::parse_manifest(bad([](json &d) { d["tau_range"]["hi"] = 1.0; })), bc::ValidationError);
    EXPECT_THROW(rn::parse_manifest(bad([](json &d) { d["alpha"] = "1.7"; })), bc::ValidationError);
    EXPECT_THROW(rn::make_plan(rn::parse_manifest(bad([](json &d) { d["blocks"] = {3, 3}; }))), bc::ValidationError);
    EXPECT_THROW(rn::parse_manifest(bad([](json &d) { d["noise"] = {{"kind", "random_chain"}, {"norms", {1.0}}}; })),
                 bc::ValidationError);
    EXPECT_THROW(rn::parse_manifest(bad([](json &d) { d["n_spins"] = 8; })), bc::ValidationError);
    EXPECT_THROW(rn::parse_manifest(bad([](json &d) { d["projection"] = "pooled"; })), bc::ValidationError);
}

TEST(Manifest, FullSpaceBlocks) {
    json d = json::parse(R"({"schema_version": 1, "model": "ATA-full", "alpha": 1.7,
        "tau_range": {"lo": 1, "hi": 2, "count": 2}, "n_spins": 6, "blocks": [1, 3]})");
    auto m = rn::parse_manifest(d);
    EXPECT_EQ(m.symmetry, rn::SymmetryMode::none);
    EXPECT_EQ(m.blocks[0].j_max.twice(), 6);
    d["blocks"] = {1.5};
    EXPECT_THROW(rn::parse_manifest(d), bc::ValidationError);
    d["blocks"] = {2};
    d["symmetry"] = "parity";
    EXPECT_THROW(rn::parse_manifest(d), bc::ValidationError);
}

TEST(Manifest, RoundTripsThroughJson) {
    for (const json &d : {smoke_doc(), noise_doc()}) {
        const auto m = rn::parse_manifest(d);
        const auto back = rn::parse_manifest(rn::to_json(m));
        EXPECT_EQ(rn::to_json(back), rn::to_json(m));
    }
}

TEST(Scale, PresetsShrinkAndCap) {
    json d = smoke_doc();
    d["j_max"] = 201;
    d["blocks"] = {25, 100, 191};
    std::vector<std::string> notes;
    const auto m = rn::apply_scale(rn::parse_manifest(d), rn::Scale::smoke, &notes);
    EXPECT_EQ(m.tau.count, 11);
    for (const auto &b : m.blocks) EXPECT_LE(b.j_max.dim(), 51);
    EXPECT_NEAR(m.blocks[1].ratio(), 100.0 / 201.0, 0.05);
    EXPECT_FALSE(notes.empty());

    const auto desk = rn::apply_scale(rn::parse_manifest(d), rn::Scale::desk);
    EXPECT_EQ(desk.tau.count, 101);
    EXPECT_EQ(desk.blocks[2].j.twice(), 382);  // untouched, dim 403 fits

    d["tau_range"]["count"] = 1000;
    EXPECT_EQ(rn::apply_scale(rn::parse_manifest(d), rn::Scale::desk).tau.count, 101);
    EXPECT_EQ(rn::apply_scale(rn::parse_manifest(d), rn::Scale::paper).tau.count, 1000);
}

TEST(Plan, JobIdsAreStableAndSeedOnlyMattersWithNoise) {
    const auto m = rn::apply_scale(rn::parse_manifest(smoke_doc()), rn::Scale::smoke);
    const auto a = rn::make_plan(m);
    EXPECT_EQ(a.jobs.size(), 33U);
    EXPECT_EQ(a.configs.size(), 3U);
    auto other_seed = m;
    other_seed.seed = 12345;
    const auto b = rn::make_plan(other_seed);
    for (std::size_t k = 0; k < a.jobs.size(); ++k) EXPECT_EQ(a.jobs[k].id, b.jobs[k].id);
    std::set<std::string> ids;
    for (const auto &j : a.jobs) ids.insert(j.id);
    EXPECT_EQ(ids.size(), a.jobs.size());

    const auto n = rn::apply_scale(rn::parse_manifest(noise_doc()), rn::Scale::smoke);
    auto n2 = n;
    n2.seed = 12;
    const auto pn = rn::make_plan(n), pn2 = rn::make_plan(n2);
    EXPECT_EQ(pn.jobs.size(), 18U);
    EXPECT_NE(pn.jobs[0].id, pn2.jobs[0].id);
    EXPECT_NE(pn.jobs[0].noise_seed, pn2.jobs[0].noise_seed);
}

TEST(Plan, NoiseRealizationIsSharedAlongTheNormGrid) {
    const auto p = rn::make_plan(rn::apply_scale(rn::parse_manifest(noise_doc()), rn::Scale::smoke));
    std::map<std::pair<int, int>, std::set<std::uint64_t>> seeds;
    for (const auto &j : p.jobs) seeds[{j.tau_index, j.realization}].insert(j.noise_seed);
    for (const auto &[key, s] : seeds) EXPECT_EQ(s.size(), 1U);
    EXPECT_EQ(seeds.size(), 6U);
}

TEST(Plan, ConfigNames) {
    const auto m = rn::parse_manifest(noise_doc());
    EXPECT_EQ(rn::config_name(m, m.blocks[0], 0.5), "ata-block_jmax20_j5_goe_norm0.5");
}

TEST(Jobs, AtaBlockSharesTheSystemTwist) {
    const auto m = rn::apply_scale(rn::parse_manifest(smoke_doc()), rn::Scale::smoke);
    const auto plan = rn::make_plan(m);
    const auto out = rn::compute_job(m, plan.jobs[0]);
    ASSERT_EQ(out.sets.size(), 2U);
    EXPECT_EQ(out.sets[0].label, "even");
    EXPECT_EQ(out.sets[0].set.size() + out.sets[1].set.size(), 7U);
    const auto &spec = *out.sets[0].set.spec;
    EXPECT_DOUBLE_EQ(spec.twist_coefficient(), 10.0 / 51.0);
    EXPECT_DOUBLE_EQ(spec.alpha, 1.7);
}

TEST(Jobs, AtaFullMatchesAtaBlock) {
    // The same system analysed in the full space and through its blocks.
    json full = json::parse(R"({"schema_version": 1, "model": "ATA-full", "alpha": 1.7,
        "tau_range": {"lo": 3.0, "hi": 3.0, "count": 1}, "n_spins": 6, "blocks": [3, 2]})");
    json block = json::parse(R"({"schema_version": 1, "model": "ATA-block", "alpha": 1.7,
        "tau_range": {"lo": 3.0, "hi": 3.0, "count": 1}, "j_max": 3, "blocks": [3, 2], "symmetry": "none"})");
    const auto mf = rn::parse_manifest(full), mb = rn::parse_manifest(block);
    const auto pf = rn::make_plan(mf), pb = rn::make_plan(mb);
    ASSERT_EQ(pf.jobs.size(), 1U);
    const auto of = rn::compute_job(mf, pf.jobs[0]);
    ASSERT_EQ(of.sets.size(), 2U);
    for (std::size_t t = 0; t < 2; ++t) {
        const auto ob = rn::compute_job(mb, pb.jobs[t]);
        const std::uint64_t mult = t == 0 ? 1 : 5;
        EXPECT_LT(bc::aligned_phase_error(of.sets[t].set.phases, bc::replicate_phases(ob.sets[0].set.phases, mult)), 1e-9);
    }
}

TEST(Jobs, ReportedNormHitsTheTarget) {
    const auto m = rn::apply_scale(rn::parse_manifest(noise_doc()), rn::Scale::smoke);
    for (const auto &job : rn::make_plan(m).jobs) {
        const auto o = rn::compute_job(m, job);
        EXPECT_NEAR(o.perturbation_norm, job.norm, 1e-12 * std::max(1.0, job.norm));
    }
}

TEST(Jobs, ChainNoiseNormHitsTheTarget) {
    json d = json::parse(R"({"schema_version": 1, "model": "ATA-full", "alpha": 1.7,
        "tau_range": {"lo": 3.0, "hi": 3.5, "count": 2}, "n_spins": 5, "blocks": [0.5, 2.5],
        "noise": {"kind": "random_chain", "norms": [0.0, 2.0]}})");
    const auto m = rn::parse_manifest(d);
    for (const auto &job : rn::make_plan(m).jobs) {
        const auto o = rn::compute_job(m, job);
        EXPECT_NEAR(o.perturbation_norm, job.norm, 1e-12);
        EXPECT_EQ(o.symmetry_broken, job.norm > 0.0);
        ASSERT_EQ(o.sets.size(), 2U);
        EXPECT_EQ(o.sets[0].set.size(), 5U * 2U);  // j = 1/2 occurs 5 times
        EXPECT_EQ(o.sets[1].set.size(), 6U);
    }
}

TEST(Io, BinaryRoundTripIsBitExact) {
    const std::vector<double> v{0.0, -0.0, 1.0 / 3.0, -bc::kPi, 1e-300, std::numeric_limits<double>::max()};
    const std::string bytes = bc::io::encode_doubles_le(v);
    ASSERT_EQ(bytes.size(), 48U);
    EXPECT_EQ(static_cast<unsigned char>(bytes[16]), 0x55U);  // 1/3 = 0x3FD5555555555555, low byte first
    EXPECT_EQ(static_cast<unsigned char>(bytes[23]), 0x3FU);
    const auto back = bc::io::decode_doubles_le(bytes);
    for (std::size_t k = 0; k < v.size(); ++k) EXPECT_EQ(std::bit_cast<std::uint64_t>(back[k]), std::bit_cast<std::uint64_t>(v[k]));
    EXPECT_THROW(bc::io::decode_doubles_le("abc"), bc::ValidationError);
}

TEST(Io, CsvFollowsRfc4180) {
    bc::io::CsvWriter w({"a", "b"});
    w.row({"plain", "with,comma"});
    w.row({"say \"hi\"", "line\nbreak"});
    EXPECT_EQ(w.str(), "a,b\r\nplain,\"with,comma\"\r\n\"say \"\"hi\"\"\",\"line\nbreak\"\r\n");
    EXPECT_THROW(w.row({"x"}), bc::ValidationError);
}

TEST(Io, HashesAndFormatting) {
    EXPECT_EQ(bc::io::fnv1a64(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(bc::io::fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
    EXPECT_EQ(bc::io::hex64(255), "00000000000000ff");
    EXPECT_EQ(bc::io::format_double(0.1), "0.1");
    EXPECT_NE(bc::io::derive_seed(1, "x"), bc::io::derive_seed(2, "x"));
    EXPECT_NE(bc::io::derive_seed(1, "x"), bc::io::derive_seed(1, "y"));
}

TEST(Run, SmokeRunIsFastAndComplete) {
    TempDir dir;
    const auto t0 = std::chrono::steady_clock::now();
    const auto res = rn::run(rn::parse_manifest(smoke_doc()), to(dir.path()));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EXPECT_LT(secs, 10.0);
    EXPECT_EQ(res.failures, 0U);
    EXPECT_EQ(res.records.size(), 33U);
    EXPECT_TRUE(fs::exists(dir.path() / "statistics.json"));
    EXPECT_TRUE(fs::exists(dir.path() / "records.json"));
    for (const auto &c : res.plan.configs) EXPECT_TRUE(fs::exists(dir.path() / "stats" / (c.name + ".json")));
    const auto &first = res.statistics.at("configs").at(0);
    EXPECT_EQ(first.at("sets").get<int>(), 22);
    EXPECT_GT(first.at("r").at("samples").get<int>(), 0);
    for (const auto &job : res.plan.jobs) EXPECT_TRUE(fs::exists(rn::spectrum_files(dir.path(), job.id).bin));
}

TEST(Run, RerunIsByteIdenticalAndCached) {
    TempDir dir;
    const auto m = rn::parse_manifest(noise_doc());
    const auto first = rn::run(m, to(dir.path()));
    const std::string stats1 = bc::io::read_file(dir.path() / "statistics.json");
    const auto second = rn::run(m, to(dir.path()));
    EXPECT_EQ(second.cached, second.records.size());
    EXPECT_EQ(bc::io::read_file(dir.path() / "statistics.json"), stats1);
    auto forced = to(dir.path());
    forced.force = true;
    forced.threads = 2;
    const auto third = rn::run(m, forced);
    EXPECT_EQ(third.cached, 0U);
    EXPECT_EQ(bc::io::read_file(dir.path() / "statistics.json"), stats1);
}

TEST(Run, SeedOverrideChangesNoisyStatistics) {
    TempDir dir;
    const auto m = rn::parse_manifest(noise_doc());
    rn::run(m, to(dir.path() / "a"));
    auto o = to(dir.path() / "b");
    o.seed = 999;
    rn::run(m, o);
    EXPECT_NE(bc::io::read_file(dir.path() / "a" / "statistics.json"), bc::io::read_file(dir.path() / "b" / "statistics.json"));
}

TEST(Run, CorruptCacheIsRecomputed) {
    TempDir dir;
    const auto m = rn::parse_manifest(smoke_doc());
    const auto first = rn::run(m, to(dir.path()));
    const auto files = rn::spectrum_files(dir.path(), first.plan.jobs[0].id);
    bc::io::atomic_write(files.bin, "short");
    const auto second = rn::run(m, to(dir.path()));
    EXPECT_FALSE(second.records[0].cached);
    EXPECT_EQ(second.failures, 0U);
}

TEST(Run, FailedJobIsIsolatedAndRecorded) {
    TempDir dir;
    const auto m = rn::parse_manifest(smoke_doc());
    const auto plan = rn::make_plan(rn::apply_scale(m, rn::Scale::smoke));
    // A directory where the spectrum file belongs makes the write fail.
    fs::create_directories(rn::spectrum_files(dir.path(), plan.jobs[0].id).bin / "blocker");
    const auto res = rn::run(m, to(dir.path()));
    EXPECT_EQ(res.failures, 1U);
    EXPECT_EQ(res.records[0].status, "failed");
    EXPECT_FALSE(res.records[0].error.empty());
    const auto &stats = res.statistics.at("configs").at(0);
    EXPECT_EQ(stats.at("failed_jobs").get<int>(), 1);
    EXPECT_EQ(stats.at("sets").get<int>(), 20);
    const json rec = bc::io::read_json(dir.path() / "records.json");
    EXPECT_EQ(rec.at("jobs").at(0).at("status"), "failed");
    EXPECT_EQ(rec.at("failures").get<int>(), 1);
}

TEST(Run, StatisticsRecomputeFromStoredSpectra) {
    TempDir dir;
    const auto res = rn::run(rn::parse_manifest(noise_doc()), to(dir.path()));
    const auto loaded = rn::load_run(dir.path() / "records.json");
    const auto again = rn::recompute_statistics(loaded);
    ASSERT_EQ(again.size(), res.statistics.at("configs").size());
    for (std::size_t k = 0; k < again.size(); ++k) EXPECT_EQ(again[k], res.statistics.at("configs").at(k));
}

TEST(Figures, CsvAndSidecarsFromRuns) {
    TempDir dir;
    rn::run(rn::parse_manifest(smoke_doc()), to(dir.path() / "run"));
    const std::vector<rn::LoadedRun> runs{rn::load_run(dir.path() / "run")};
    for (auto kind : {bc::figures::FigureKind::nns, bc::figures::FigureKind::r_curve, bc::figures::FigureKind::delta3}) {
        const auto files = bc::figures::emit_figure_data(kind, runs, dir.path() / "fig");
        for (const auto &f : files) {
            const std::string csv = bc::io::read_file(f.csv);
            EXPECT_NE(csv.find("\r\n"), std::string::npos);
            const json side = bc::io::read_json(f.sidecar);
            EXPECT_TRUE(side.contains("columns"));
        }
    }
    const std::string r = bc::io::read_file(dir.path() / "fig" / "r_curve.csv");
    EXPECT_EQ(r.substr(0, r.find("\r\n")), "config,J_over_Jmax,j,j_max,r,stderr,samples");
    EXPECT_EQ(std::count(r.begin(), r.end(), '\n'), 4);
    EXPECT_THROW(bc::figures::emit_figure_data(bc::figures::FigureKind::noise_sweep, runs, dir.path() / "fig"),
                 bc::ValidationError);
}

TEST(Figures, NoiseSweepAndPortrait) {
    TempDir dir;
    rn::run(rn::parse_manifest(noise_doc()), to(dir.path() / "run"));
    const std::vector<rn::LoadedRun> runs{rn::load_run(dir.path() / "run")};
    EXPECT_THROW(bc::figures::emit_figure_data(bc::figures::FigureKind::nns, runs, dir.path()), bc::ValidationError);
    bc::figures::emit_figure_data(bc::figures::FigureKind::noise_sweep, runs, dir.path() / "fig");
    const std::string csv = bc::io::read_file(dir.path() / "fig" / "noise_sweep.csv");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);

    bc::figures::PortraitOptions p;
    p.alpha = 1.7;
    p.tau = 3.0;
    p.steps = 10;
    bc::figures::emit_figure_data(bc::figures::FigureKind::portrait, {}, dir.path() / "fig", p);
    const std::string pc = bc::io::read_file(dir.path() / "fig" / "portrait.csv");
    EXPECT_EQ(std::count(pc.begin(), pc.end(), '\n'), 61);
    EXPECT_THROW(bc::figures::emit_figure_data(bc::figures::FigureKind::portrait, runs, dir.path() / "fig", p),
                 bc::ValidationError);
}
