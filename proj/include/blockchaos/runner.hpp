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

// Sweep orchestration: a JSON manifest expands into jobs (one unitary per
// tau value, noise strength and realization), each job's eigenphases are
// cached on disk under a hash of its parameters, and the spectra are pooled
// per configuration into statistics files.
//
// Output directory layout:
//   spectra/<job id>.bin   eigenphases, 8-byte little-endian doubles
//   spectra/<job id>.json  sidecar: parameters, set sizes, labels
//   stats/<config>.json    pooled statistics of one configuration
//   statistics.json        all configurations; byte-stable across reruns
//   records.json           per-job records with wall times and failures

#pragma once

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"

#include "blockchaos/errors.hpp"
#include "blockchaos/floquet.hpp"
#include "blockchaos/io.hpp"
#include "blockchaos/noise.hpp"
#include "blockchaos/noise_spec.hpp"
#include "blockchaos/oracle.hpp"
#include "blockchaos/random_matrix.hpp"
#include "blockchaos/spin.hpp"
#include "blockchaos/stats.hpp"
#include "blockchaos/version.hpp"

namespace blockchaos::runner {

namespace fs = std::filesystem;
using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// KT       : every block is an independent kicked top, twist tau / (2j+1).
/// ATA-block: the blocks of one ATA system with spin label J_max; all share
///            the twist tau / (2 J_max + 1) and the kick angle alpha.
/// ATA-full : N spins in the full 2^N space, projected onto J^2 sectors.
enum class Model { kt, ata_block, ata_full };
enum class Scale { smoke, desk, paper };
enum class SymmetryMode { parity, none };

inline std::string_view to_string(Model m) {
    switch (m) {
    case Model::kt: return "KT";
    case Model::ata_block: return "ATA-block";
    case Model::ata_full: return "ATA-full";
    }
    return "?";
}

inline Model parse_model(std::string_view s) {
    if (s == "KT") return Model::kt;
    if (s == "ATA-block") return Model::ata_block;
    if (s == "ATA-full") return Model::ata_full;
    throw ValidationError("unknown model '" + std::string(s) + "' (expected KT, ATA-block or ATA-full)");
}

inline std::string_view to_string(Scale s) {
    switch (s) {
    case Scale::smoke: return "smoke";
    case Scale::desk: return "desk";
    case Scale::paper: return "paper";
    }
    return "?";
}

inline Scale parse_scale(std::string_view s) {
    if (s == "smoke") return Scale::smoke;
    if (s == "desk") return Scale::desk;
    if (s == "paper") return Scale::paper;
    throw ValidationError("unknown scale '" + std::string(s) + "' (expected smoke, desk or paper)");
}

struct ScalePreset {
    int max_block_dim = 0;  // 0: no cap
    int max_tau_count = 0;  // 0: no cap
    int default_tau_count = 0;
    int max_full_spins = 12;
    int max_realizations = 0;  // 0: no cap
};

inline ScalePreset preset(Scale s) {
    switch (s) {
    case Scale::smoke: return ScalePreset{51, 11, 11, 8, 2};
    case Scale::desk: return ScalePreset{403, 101, 101, 12, 0};
    case Scale::paper: return ScalePreset{0, 0, 501, 12, 0};
    }
    return {};
}

struct TauRange {
    double lo = 0.0;
    double hi = 0.0;
    int count = 1;

    double at(int k) const { return count == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / (count - 1); }
};

/// One analysed block. For ATA-full n_spins > 0 and j_max = N/2.
struct BlockTarget {
    TwiceSpin j_max;
    TwiceSpin j;
    int n_spins = 0;

    double ratio() const { return j_max.twice() == 0 ? 0.0 : j.j() / j_max.j(); }
};

struct NoiseGrid {
    NoiseKind kind = NoiseKind::goe;
    std::vector<double> norms;  // target ||delta H'||
    int realizations = 1;
    ChainWeights weights = ChainWeights::gaussian;
};

struct RunManifest {
    int schema_version = kSchemaVersion;
    std::string name = "run";
    Model model = Model::kt;
    double alpha = 0.0;
    TauRange tau{};
    std::vector<BlockTarget> blocks;
    SymmetryMode symmetry = SymmetryMode::parity;
    Projection projection = Projection::pooled;
    std::optional<NoiseGrid> noise;
    std::uint64_t seed = 0;
    std::string outputs = "out";
    Scale scale = Scale::desk;
    std::vector<double> delta3_L{1.0, 2.0, 5.0, 10.0, 15.0, 20.0};
    int histogram_bins = 50;
};

namespace detail {

inline void reject_unknown(const json &obj, std::initializer_list<std::string_view> allowed, std::string_view where) {
    if (!obj.is_object()) throw ValidationError(std::string(where) + " must be a JSON object");
    for (const auto &[key, value] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ValidationError("unknown field '" + key + "' in " + std::string(where));
        }
    }
}

template <typename T>
T get(const json &obj, std::string_view key, std::string_view where) {
    const auto it = obj.find(std::string(key));
    if (it == obj.end()) throw ValidationError("missing field '" + std::string(key) + "' in " + std::string(where));
    try {
        return it->get<T>();
    } catch (const json::exception &) {
        throw ValidationError("field '" + std::string(key) + "' in " + std::string(where) + " has the wrong type");
    }
}

inline TwiceSpin spin_field(const json &v, std::string_view what) {
    if (!v.is_number()) throw ValidationError(std::string(what) + " must be a number");
    return TwiceSpin::from_j(v.get<double>());
}

inline std::string spin_tag(TwiceSpin s) { return s.is_integer() ? std::to_string(s.twice() / 2) : std::to_string(s.twice()) + "_2"; }

}  // namespace detail

/// Parses and validates a manifest; unknown fields anywhere are errors.
inline RunManifest parse_manifest(const json &doc) {
    using detail::get;
    detail::reject_unknown(doc,
                           {"schema_version", "name", "model", "alpha", "tau_range", "j_max", "n_spins", "blocks",
                            "symmetry", "projection", "noise", "seed", "outputs", "scale", "delta3_L", "histogram_bins"},
                           "manifest");
    RunManifest m;
    m.schema_version = get<int>(doc, "schema_version", "manifest");
    if (m.schema_version != kSchemaVersion) {
        throw ValidationError("unsupported schema_version " + std::to_string(m.schema_version) + " (expected " +
                              std::to_string(kSchemaVersion) + ")");
    }
    if (doc.contains("name")) m.name = get<std::string>(doc, "name", "manifest");
    m.model = parse_model(get<std::string>(doc, "model", "manifest"));
    m.alpha = get<double>(doc, "alpha", "manifest");

    const json &tr = doc.at("tau_range");
    detail::reject_unknown(tr, {"lo", "hi", "count"}, "tau_range");
    m.tau.lo = get<double>(tr, "lo", "tau_range");
    m.tau.hi = get<double>(tr, "hi", "tau_range");
    m.tau.count = tr.contains("count") ? get<int>(tr, "count", "tau_range") : 0;  // 0: preset default
    if (m.tau.count < 0) throw ValidationError("tau_range.count must be >= 1");
    if (!(m.tau.lo <= m.tau.hi)) throw ValidationError("tau_range needs lo <= hi");

    if (doc.contains("scale")) m.scale = parse_scale(get<std::string>(doc, "scale", "manifest"));
    if (doc.contains("seed")) m.seed = get<std::uint64_t>(doc, "seed", "manifest");
    if (doc.contains("outputs")) m.outputs = get<std::string>(doc, "outputs", "manifest");
    if (doc.contains("delta3_L")) m.delta3_L = get<std::vector<double>>(doc, "delta3_L", "manifest");
    if (doc.contains("histogram_bins")) m.histogram_bins = get<int>(doc, "histogram_bins", "manifest");
    if (m.histogram_bins < 1) throw ValidationError("histogram_bins must be >= 1");

    const bool full = m.model == Model::ata_full;
    if (full && doc.contains("j_max")) throw ValidationError("ATA-full manifests take n_spins, not j_max");
    if (!full && doc.contains("n_spins")) throw ValidationError("n_spins applies to ATA-full manifests only");
    std::optional<TwiceSpin> top_j_max;
    std::optional<int> top_n;
    if (doc.contains("j_max")) top_j_max = detail::spin_field(doc.at("j_max"), "j_max");
    if (doc.contains("n_spins")) top_n = get<int>(doc, "n_spins", "manifest");

    const json &blocks = doc.at("blocks");
    if (!blocks.is_array() || blocks.empty()) throw ValidationError("blocks must be a nonempty array");
    for (const json &b : blocks) {
        BlockTarget t;
        if (b.is_number()) {
            t.j = detail::spin_field(b, "block j");
            if (full) {
                if (!top_n) throw ValidationError("plain block labels need a top-level n_spins");
                t.n_spins = *top_n;
            } else {
                if (!top_j_max) throw ValidationError("plain block labels need a top-level j_max");
                t.j_max = *top_j_max;
            }
        } else {
            if (full) {
                detail::reject_unknown(b, {"n_spins", "j"}, "block");
                t.n_spins = get<int>(b, "n_spins", "block");
            } else {
                detail::reject_unknown(b, {"j_max", "j"}, "block");
                t.j_max = detail::spin_field(b.at("j_max"), "block j_max");
            }
            t.j = detail::spin_field(b.at("j"), "block j");
        }
        if (full) {
            if (t.n_spins < 1) throw ValidationError("n_spins must be >= 1");
            t.j_max = TwiceSpin::from_twice(t.n_spins);
            if ((t.n_spins - t.j.twice()) % 2 != 0) {
                throw ValidationError("spin " + t.j.label() + " does not occur for N = " + std::to_string(t.n_spins));
            }
        }
        if (t.j > t.j_max) throw ValidationError("block j = " + t.j.label() + " exceeds J_max = " + t.j_max.label());
        m.blocks.push_back(t);
    }

    if (doc.contains("noise") && !doc.at("noise").is_null()) {
        const json &n = doc.at("noise");
        detail::reject_unknown(n, {"kind", "norms", "realizations", "chain_weights"}, "noise");
        NoiseGrid g;
        g.kind = parse_noise_kind(get<std::string>(n, "kind", "noise"));
        g.norms = get<std::vector<double>>(n, "norms", "noise");
        if (g.norms.empty()) throw ValidationError("noise.norms must be nonempty");
        for (double x : g.norms) {
            if (!std::isfinite(x) || x < 0.0) throw ValidationError("noise norms must be finite and >= 0");
        }
        if (n.contains("realizations")) g.realizations = get<int>(n, "realizations", "noise");
        if (g.realizations < 1) throw ValidationError("noise.realizations must be >= 1");
        if (n.contains("chain_weights")) g.weights = parse_chain_weights(get<std::string>(n, "chain_weights", "noise"));
        if (g.kind == NoiseKind::goe && full) throw ValidationError("GOE noise acts on blocks; use KT or ATA-block");
        if (g.kind == NoiseKind::random_chain && !full) throw ValidationError("chain noise needs the ATA-full model");
        m.noise = g;
    }

    // Noiseless kicked tops carry the m <-> -m parity and are analysed per
    // parity sector. GOE noise breaks it; ATA-full projections are pooled.
    m.symmetry = (full || m.noise) ? SymmetryMode::none : SymmetryMode::parity;
    if (doc.contains("symmetry")) {
        const auto s = get<std::string>(doc, "symmetry", "manifest");
        if (s == "parity") {
            if (full || m.noise) throw ValidationError("symmetry 'parity' is only valid for noiseless KT/ATA-block runs");
            m.symmetry = SymmetryMode::parity;
        } else if (s == "none") {
            m.symmetry = SymmetryMode::none;
        } else {
            throw ValidationError("unknown symmetry '" + s + "' (expected parity or none)");
        }
    }
    if (doc.contains("projection")) {
        if (!full) throw ValidationError("projection applies to ATA-full manifests only");
        const auto p = get<std::string>(doc, "projection", "manifest");
        if (p == "pooled") m.projection = Projection::pooled;
        else if (p == "single_copy") m.projection = Projection::single_copy;
        else throw ValidationError("unknown projection '" + p + "' (expected pooled or single_copy)");
    }
    if (!std::isfinite(m.alpha)) throw ValidationError("alpha must be finite");
    return m;
}

inline RunManifest load_manifest(const fs::path &path) { return parse_manifest(io::read_json(path)); }

inline json to_json(const RunManifest &m) {
    json blocks = json::array();
    for (const auto &b : m.blocks) {
        if (m.model == Model::ata_full) blocks.push_back({{"n_spins", b.n_spins}, {"j", b.j.j()}});
        else blocks.push_back({{"j_max", b.j_max.j()}, {"j", b.j.j()}});
    }
    json doc = {{"schema_version", m.schema_version},
                {"name", m.name},
                {"model", to_string(m.model)},
                {"alpha", m.alpha},
                {"tau_range", {{"lo", m.tau.lo}, {"hi", m.tau.hi}, {"count", m.tau.count}}},
                {"blocks", blocks},
                {"symmetry", m.symmetry == SymmetryMode::parity ? "parity" : "none"},
                {"seed", m.seed},
                {"outputs", m.outputs},
                {"scale", to_string(m.scale)},
                {"delta3_L", m.delta3_L},
                {"histogram_bins", m.histogram_bins}};
    if (m.model == Model::ata_full) doc["projection"] = m.projection == Projection::pooled ? "pooled" : "single_copy";
    if (m.noise) {
        doc["noise"] = {{"kind", to_string(m.noise->kind)},
                        {"norms", m.noise->norms},
                        {"realizations", m.noise->realizations},
                        {"chain_weights", to_string(m.noise->weights)}};
    }
    return doc;
}

/// Applies the scale preset: fills in the default tau count, caps tau count
/// and realizations, and shrinks systems whose blocks are larger than the
/// preset allows while keeping each block's j / J_max.
inline RunManifest apply_scale(RunManifest m, Scale scale, std::vector<std::string> *notes = nullptr) {
    m.scale = scale;
    const ScalePreset p = preset(scale);
    auto note = [&](std::string s) {
        if (notes) notes->push_back(std::move(s));
    };
    if (m.tau.count == 0) m.tau.count = p.default_tau_count;
    if (p.max_tau_count && m.tau.count > p.max_tau_count) {
        note("tau count " + std::to_string(m.tau.count) + " capped to " + std::to_string(p.max_tau_count));
        m.tau.count = p.max_tau_count;
    }
    if (m.noise && p.max_realizations && m.noise->realizations > p.max_realizations) {
        note("noise realizations capped to " + std::to_string(p.max_realizations));
        m.noise->realizations = p.max_realizations;
    }
    // A KT/ATA-block system is shrunk as a whole when any of its blocks is
    // larger than the preset allows, so blocks of one J_max stay comparable.
    std::set<int> oversized;
    for (const auto &b : m.blocks) {
        if (m.model != Model::ata_full && p.max_block_dim && b.j.dim() > p.max_block_dim) oversized.insert(b.j_max.twice());
    }
    for (auto &b : m.blocks) {
        if (m.model == Model::ata_full) {
            if (b.n_spins > p.max_full_spins) {
                // Keep the parity of N so half-integer labels stay half-integer.
                const int n = (p.max_full_spins - b.n_spins) % 2 == 0 ? p.max_full_spins : p.max_full_spins - 1;
                const double r = b.ratio();
                int twice = static_cast<int>(std::lround(r * n));
                if ((n - twice) % 2 != 0) --twice;
                note("N = " + std::to_string(b.n_spins) + " reduced to " + std::to_string(n));
                b.n_spins = n;
                b.j_max = TwiceSpin::from_twice(n);
                b.j = TwiceSpin::from_twice(std::max(twice, n % 2));
            }
        } else if (oversized.contains(b.j_max.twice())) {
            const int twice_max = p.max_block_dim - 1;
            const double r = b.ratio();
            const int twice_j = 2 * static_cast<int>(std::lround(0.5 * r * twice_max));
            note("J_max = " + b.j_max.label() + " reduced to " + std::to_string(twice_max / 2));
            b.j_max = TwiceSpin::from_twice(twice_max);
            b.j = TwiceSpin::from_twice(std::min(twice_j, twice_max));
        }
    }
    return m;
}

/// One pooled configuration: a block at one noise strength.
struct Config {
    std::string name;
    BlockTarget target;
    double norm = 0.0;  // target ||delta H'||, 0 when noiseless
};

/// One unitary. ATA-full jobs cover every requested block of their N.
struct Job {
    std::string id;
    json params;
    std::vector<std::size_t> configs;  // indices into Plan::configs, one per target
    std::vector<BlockTarget> targets;
    int tau_index = 0;
    double tau = 0.0;
    double norm = 0.0;
    int realization = 0;
    std::uint64_t noise_seed = 0;
};

struct Plan {
    RunManifest manifest;
    std::vector<Config> configs;
    std::vector<Job> jobs;
};

inline std::string noise_tag(const RunManifest &m) { return m.noise ? std::string(to_string(m.noise->kind)) : "none"; }

inline std::string config_name(const RunManifest &m, const BlockTarget &t, double norm) {
    std::string s = std::string(to_string(m.model));
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (m.model == Model::ata_full) s += "_N" + std::to_string(t.n_spins);
    else s += "_jmax" + detail::spin_tag(t.j_max);
    s += "_j" + detail::spin_tag(t.j);
    if (m.noise) s += "_" + noise_tag(m) + "_norm" + io::format_double(norm);
    return s;
}

/// Expands a (scaled) manifest into configurations and jobs. Job ids are the
/// FNV-1a hash of the canonical JSON of everything that determines the
/// unitary; the seed only enters for noisy jobs.
inline Plan make_plan(const RunManifest &m) {
    Plan plan;
    plan.manifest = m;
    const std::vector<double> norms = m.noise ? m.noise->norms : std::vector<double>{0.0};
    const int realizations = m.noise ? m.noise->realizations : 1;

    std::map<std::pair<std::size_t, std::size_t>, std::size_t> config_index;  // (block, norm) -> config
    for (std::size_t ni = 0; ni < norms.size(); ++ni) {
        for (std::size_t bi = 0; bi < m.blocks.size(); ++bi) {
            config_index[{bi, ni}] = plan.configs.size();
            plan.configs.push_back(Config{config_name(m, m.blocks[bi], norms[ni]), m.blocks[bi], norms[ni]});
        }
    }
    {
        std::set<std::string> names;
        for (const auto &c : plan.configs) {
            if (!names.insert(c.name).second) throw ValidationError("duplicate block in manifest: " + c.name);
        }
    }

    // Group blocks into unitaries: one per block, or one per N for ATA-full.
    std::vector<std::vector<std::size_t>> groups;
    if (m.model == Model::ata_full) {
        std::map<int, std::vector<std::size_t>> by_n;
        for (std::size_t bi = 0; bi < m.blocks.size(); ++bi) by_n[m.blocks[bi].n_spins].push_back(bi);
        for (auto &[n, list] : by_n) groups.push_back(list);
    } else {
        for (std::size_t bi = 0; bi < m.blocks.size(); ++bi) groups.push_back({bi});
    }

    for (const auto &group : groups) {
        for (std::size_t ni = 0; ni < norms.size(); ++ni) {
            for (int k = 0; k < m.tau.count; ++k) {
                for (int r = 0; r < realizations; ++r) {
                    Job job;
                    job.tau_index = k;
                    job.tau = m.tau.at(k);
                    job.norm = norms[ni];
                    job.realization = r;
                    json targets = json::array();
                    for (std::size_t bi : group) {
                        job.targets.push_back(m.blocks[bi]);
                        job.configs.push_back(config_index.at({bi, ni}));
                        targets.push_back({{"j_max_twice", m.blocks[bi].j_max.twice()},
                                           {"j_twice", m.blocks[bi].j.twice()},
                                           {"n_spins", m.blocks[bi].n_spins}});
                    }
                    json params = {{"model", to_string(m.model)},
                                   {"alpha", m.alpha},
                                   {"tau", job.tau},
                                   {"targets", targets},
                                   {"symmetry", m.symmetry == SymmetryMode::parity ? "parity" : "none"}};
                    if (m.model == Model::ata_full) {
                        params["projection"] = m.projection == Projection::pooled ? "pooled" : "single_copy";
                    }
                    if (m.noise) {
                        // The perturbation matrix depends on (system, tau index, realization), not on
                        // the norm, so one realization is rescaled along the norm grid.
                        std::string stream = std::string(to_string(m.noise->kind)) + "|";
                        if (m.model == Model::ata_full) stream += "N=" + std::to_string(group.size() ? job.targets[0].n_spins : 0);
                        else stream += "jmax2=" + std::to_string(job.targets[0].j_max.twice()) + "|j2=" + std::to_string(job.targets[0].j.twice());
                        stream += "|tau=" + std::to_string(k) + "|real=" + std::to_string(r);
                        job.noise_seed = io::derive_seed(m.seed, stream);
                        params["noise"] = {{"kind", to_string(m.noise->kind)},
                                           {"norm", job.norm},
                                           {"seed", job.noise_seed},
                                           {"chain_weights", to_string(m.noise->weights)}};
                    }
                    job.params = params;
                    job.id = io::hex64(io::fnv1a64(params.dump()));
                    plan.jobs.push_back(std::move(job));
                }
            }
        }
    }
    return plan;
}

struct LabeledSet {
    std::size_t target = 0;  // index into Job::targets
    std::string label;       // "even", "odd", "full", "pooled", "single_copy"
    EigenphaseSet set;
};

struct JobOutput {
    std::vector<LabeledSet> sets;
    double perturbation_norm = 0.0;
    bool symmetry_broken = false;
    double commutator_norm = 0.0;
};

/// Builds the unitary of one job and extracts its eigenphases.
inline JobOutput compute_job(const RunManifest &m, const Job &job) {
    JobOutput out;
    if (m.model == Model::ata_full) {
        const int n = job.targets.front().n_spins;
        const double tau_A = job.tau / (2.0 * (n + 1));
        const double b_x = 0.5 * m.alpha;
        RandomChain chain = random_chain_from_weights(n, std::vector<double>(static_cast<std::size_t>(n), 0.0));
        if (m.noise && job.norm > 0.0) {
            const RandomChain unit = random_chain_from_weights(n, sample_chain_weights(n, 1.0, job.noise_seed, m.noise->weights));
            if (unit.norm() == 0.0) throw Error("sampled chain perturbation vanishes");
            const double delta = job.norm / unit.norm();
            std::vector<double> w = unit.weights;
            for (double &x : w) x *= delta;
            chain = random_chain_from_weights(n, std::move(w));
            out.perturbation_norm = chain.norm();
        }
        BlockProjectionOptions opt;
        opt.policy = m.noise ? SymmetryPolicy::allow_broken : SymmetryPolicy::require;
        opt.projection = m.projection;
        std::vector<TwiceSpin> only;
        for (const auto &t : job.targets) only.push_back(t.j);
        opt.only = only;
        const BlockProjection proj = block_project_spectrum(perturbed_full_factors(n, tau_A, b_x, chain), opt);
        out.symmetry_broken = proj.symmetry_broken;
        out.commutator_norm = proj.commutator_norm;
        for (std::size_t t = 0; t < job.targets.size(); ++t) {
            for (const auto &pb : proj.blocks) {
                if (pb.spin == job.targets[t].j) {
                    out.sets.push_back(LabeledSet{t, m.projection == Projection::pooled ? "pooled" : "single_copy", pb.phases});
                }
            }
        }
        return out;
    }

    const BlockTarget &t = job.targets.front();
    FloquetSpec spec;
    spec.block = SpinBlock::single(t.j);
    if (m.model == Model::kt) {
        spec = FloquetSpec{m.alpha, job.tau, SpinBlock::single(t.j), TwistConvention::kicked_top, std::nullopt};
    } else {
        // Twist tau / (2 J_max + 1) = 2 tau_A on every block of the system.
        spec = FloquetSpec{m.alpha, job.tau / (2.0 * t.j_max.dim()), SpinBlock::single(t.j), TwistConvention::ata_derived,
                           std::nullopt};
    }
    CMatrix u;
    if (m.noise) {
        const RMatrix h = sample_goe(t.j.dim(), job.noise_seed);
        const double hn = hermitian_spectral_norm(h);
        spec.noise = NoiseSpec{NoiseKind::goe, hn > 0.0 ? job.norm / hn : 0.0, job.noise_seed, 0, ChainWeights::gaussian};
        PerturbedUnitary pu = perturbed_kicked_top(spec, h);
        u = std::move(pu.unitary);
        out.perturbation_norm = pu.perturbation_norm;
    } else {
        u = build_kicked_top(spec);
    }
    if (m.symmetry == SymmetryMode::parity) {
        const auto sets = parity_resolved_eigenphases(u);
        const char *labels[] = {"even", "odd"};
        for (std::size_t k = 0; k < sets.size(); ++k) out.sets.push_back(LabeledSet{0, labels[k], sets[k]});
    } else {
        out.sets.push_back(LabeledSet{0, "full", eigenphases(u)});
    }
    for (auto &s : out.sets) s.set.spec = spec;
    return out;
}

/// Cache files of one job.
struct SpectrumFiles {
    fs::path bin;
    fs::path sidecar;
};

inline SpectrumFiles spectrum_files(const fs::path &out_dir, const std::string &id) {
    return {out_dir / "spectra" / (id + ".bin"), out_dir / "spectra" / (id + ".json")};
}

inline void write_job_output(const SpectrumFiles &f, const Job &job, const JobOutput &o) {
    std::vector<double> flat;
    json sets = json::array();
    for (const auto &s : o.sets) {
        flat.insert(flat.end(), s.set.phases.begin(), s.set.phases.end());
        sets.push_back({{"target", s.target}, {"label", s.label}, {"size", s.set.phases.size()}});
    }
    json side = {{"id", job.id},
                 {"code_version", kCodeVersion},
                 {"params", job.params},
                 {"format", "float64-le"},
                 {"sets", sets},
                 {"perturbation_norm", o.perturbation_norm},
                 {"symmetry_broken", o.symmetry_broken},
                 {"commutator_norm", o.commutator_norm}};
    io::write_doubles(f.bin, flat);
    io::atomic_write(f.sidecar, io::dump_json(side));
}

/// Cached output if the sidecar matches this job and code version.
inline std::optional<JobOutput> read_job_output(const SpectrumFiles &f, const Job *job = nullptr) {
    if (!fs::exists(f.bin) || !fs::exists(f.sidecar)) return std::nullopt;
    json side;
    try {
        side = io::read_json(f.sidecar);
    } catch (const Error &) {
        return std::nullopt;
    }
    if (side.value("code_version", std::string()) != kCodeVersion) return std::nullopt;
    if (job && side.value("params", json()) != job->params) return std::nullopt;
    std::vector<double> flat;
    try {
        flat = io::read_doubles(f.bin);
    } catch (const Error &) {
        return std::nullopt;
    }
    JobOutput o;
    std::size_t offset = 0;
    for (const auto &s : side.at("sets")) {
        const auto n = s.at("size").get<std::size_t>();
        if (offset + n > flat.size()) return std::nullopt;
        LabeledSet ls;
        ls.target = s.at("target").get<std::size_t>();
        ls.label = s.at("label").get<std::string>();
        ls.set.phases.assign(flat.begin() + static_cast<std::ptrdiff_t>(offset), flat.begin() + static_cast<std::ptrdiff_t>(offset + n));
        offset += n;
        o.sets.push_back(std::move(ls));
    }
    if (offset != flat.size()) return std::nullopt;
    o.perturbation_norm = side.value("perturbation_norm", 0.0);
    o.symmetry_broken = side.value("symmetry_broken", false);
    o.commutator_norm = side.value("commutator_norm", 0.0);
    return o;
}

struct RunOptions {
    std::optional<fs::path> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<Scale> scale;
    int threads = 1;
    bool force = false;
    bool verbose = false;
};

struct JobRecord {
    std::string id;
    std::string status = "ok";  // ok | failed
    std::string error;
    bool cached = false;
    double wall_time_s = 0.0;
    double perturbation_norm = 0.0;
};

inline json to_json(const RStatistic &r) {
    return {{"mean", r.mean}, {"stderr", r.std_error}, {"samples", r.samples}, {"excluded_degenerate", r.excluded_degenerate}};
}

inline json to_json(const Histogram &h) {
    return {{"edges", h.edges}, {"densities", h.densities}, {"counts", h.counts}, {"overflow", h.overflow}, {"total", h.total}};
}

inline json to_json(const std::vector<Delta3Point> &curve) {
    json a = json::array();
    for (const auto &p : curve) a.push_back({{"L", p.L}, {"delta3", p.value}, {"windows", p.windows}});
    return a;
}

inline json config_meta(const RunManifest &m, const Config &c) {
    json j = {{"config", c.name},
              {"model", to_string(m.model)},
              {"j", c.target.j.j()},
              {"j_max", c.target.j_max.j()},
              {"dim", c.target.j.dim()},
              {"J_over_Jmax", c.target.ratio()},
              {"noise_kind", noise_tag(m)},
              {"norm", c.norm},
              {"alpha", m.alpha},
              {"tau_range", {{"lo", m.tau.lo}, {"hi", m.tau.hi}, {"count", m.tau.count}}}};
    if (m.model == Model::ata_full) j["n_spins"] = c.target.n_spins;
    return j;
}

/// Pools the sets of one configuration (in job order) into statistics JSON.
inline json config_statistics(const RunManifest &m, const Config &c, const std::vector<EigenphaseSet> &sets,
                              const std::vector<double> &achieved_norms, std::size_t failed_jobs) {
    json j = config_meta(m, c);
    j["sets"] = sets.size();
    j["failed_jobs"] = failed_jobs;
    if (!achieved_norms.empty()) {
        double s = 0.0;
        for (double x : achieved_norms) s += x;
        j["achieved_norm_mean"] = s / static_cast<double>(achieved_norms.size());
    }
    if (sets.empty()) {
        j["error"] = "no spectra";
        return j;
    }
    try {
        StatisticOptions opt;
        opt.histogram.bins = m.histogram_bins;
        opt.L_grid = m.delta3_L;
        const StatisticReport rep = summarize(sets, opt);
        j["r"] = to_json(rep.r);
        j["r_set_spread"] = rep.r_set_spread;
        j["nns"] = to_json(rep.nns);
        j["delta3"] = to_json(rep.delta3_curve);
    } catch (const Error &e) {
        j["error"] = e.what();
    }
    return j;
}

struct RunResult {
    fs::path out_dir;
    Plan plan;
    std::vector<JobRecord> records;
    json statistics;  // contents of statistics.json
    std::size_t failures = 0;
    std::size_t cached = 0;
};

/// Runs every job (bounded worker pool, per-job failure isolation), then
/// pools statistics and writes all outputs.
inline RunResult run(RunManifest manifest, const RunOptions &opt = {}) {
    if (opt.seed) manifest.seed = *opt.seed;
    std::vector<std::string> notes;
    manifest = apply_scale(std::move(manifest), opt.scale.value_or(manifest.scale), &notes);

    RunResult result;
    result.out_dir = opt.out_dir.value_or(fs::path(manifest.outputs));
    result.plan = make_plan(manifest);
    const Plan &plan = result.plan;
    fs::create_directories(result.out_dir / "spectra");
    fs::create_directories(result.out_dir / "stats");

    const std::size_t n_jobs = plan.jobs.size();
    std::vector<std::optional<JobOutput>> outputs(n_jobs);
    result.records.resize(n_jobs);

    const int threads = std::max(1, opt.threads);
    if (threads > 1) limit_blas_threads(1);
    std::atomic<std::size_t> next{0}, done{0};
    auto worker = [&] {
        for (std::size_t k = next.fetch_add(1); k < n_jobs; k = next.fetch_add(1)) {
            const Job &job = plan.jobs[k];
            JobRecord &rec = result.records[k];
            rec.id = job.id;
            const auto start = std::chrono::steady_clock::now();
            try {
                const SpectrumFiles files = spectrum_files(result.out_dir, job.id);
                std::optional<JobOutput> o;
                if (!opt.force) o = read_job_output(files, &job);
                if (o) {
                    rec.cached = true;
                } else {
                    o = compute_job(plan.manifest, job);
                    write_job_output(files, job, *o);
                }
                rec.perturbation_norm = o->perturbation_norm;
                outputs[k] = std::move(o);
            } catch (const std::exception &e) {
                rec.status = "failed";
                rec.error = e.what();
            }
            rec.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            const std::size_t finished = done.fetch_add(1) + 1;
            if (opt.verbose && (finished % 50 == 0 || finished == n_jobs)) {
                std::clog << "[" << plan.manifest.name << "] " << finished << "/" << n_jobs << " jobs\n";
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    }

    // Pool per configuration in job order (tau, realization), independent of
    // which worker finished first.
    std::vector<std::vector<EigenphaseSet>> sets(plan.configs.size());
    std::vector<std::vector<double>> norms(plan.configs.size());
    std::vector<std::size_t> failed(plan.configs.size(), 0);
    for (std::size_t k = 0; k < n_jobs; ++k) {
        const Job &job = plan.jobs[k];
        if (!outputs[k]) {
            for (std::size_t c : job.configs) ++failed[c];
            continue;
        }
        for (const auto &ls : outputs[k]->sets) {
            const std::size_t c = job.configs.at(ls.target);
            sets[c].push_back(ls.set);
        }
        if (plan.manifest.noise) {
            for (std::size_t c : job.configs) norms[c].push_back(outputs[k]->perturbation_norm);
        }
    }

    json configs = json::array();
    json config_index = json::array();
    for (std::size_t c = 0; c < plan.configs.size(); ++c) {
        json stats = config_statistics(plan.manifest, plan.configs[c], sets[c], norms[c], failed[c]);
        const fs::path rel = fs::path("stats") / (plan.configs[c].name + ".json");
        io::atomic_write(result.out_dir / rel, io::dump_json(stats));
        configs.push_back(stats);
        json idx = config_meta(plan.manifest, plan.configs[c]);
        idx["stats_file"] = rel.generic_string();
        json ids = json::array();
        for (const auto &job : plan.jobs) {
            if (std::find(job.configs.begin(), job.configs.end(), c) != job.configs.end()) ids.push_back(job.id);
        }
        idx["jobs"] = ids;
        config_index.push_back(idx);
    }

    result.statistics = {{"schema_version", kSchemaVersion},
                         {"code_version", kCodeVersion},
                         {"manifest", to_json(plan.manifest)},
                         {"scale_notes", notes},
                         {"configs", configs}};
    io::atomic_write(result.out_dir / "statistics.json", io::dump_json(result.statistics));

    json jobs = json::array();
    for (std::size_t k = 0; k < n_jobs; ++k) {
        const auto &rec = result.records[k];
        if (rec.status != "ok") ++result.failures;
        if (rec.cached) ++result.cached;
        const SpectrumFiles f = spectrum_files(fs::path("."), rec.id);
        json configs_of_job = json::array();
        for (std::size_t c : plan.jobs[k].configs) configs_of_job.push_back(plan.configs[c].name);
        jobs.push_back({{"id", rec.id},
                        {"spectrum", f.bin.lexically_normal().generic_string()},
                        {"sidecar", f.sidecar.lexically_normal().generic_string()},
                        {"configs", configs_of_job},
                        {"tau", plan.jobs[k].tau},
                        {"realization", plan.jobs[k].realization},
                        {"norm", plan.jobs[k].norm},
                        {"status", rec.status},
                        {"error", rec.error},
                        {"cached", rec.cached},
                        {"wall_time_s", rec.wall_time_s},
                        {"perturbation_norm", rec.perturbation_norm},
                        {"code_version", kCodeVersion}});
    }
    json records = {{"schema_version", kSchemaVersion},
                    {"code_version", kCodeVersion},
                    {"manifest", to_json(plan.manifest)},
                    {"configs", config_index},
                    {"jobs", jobs},
                    {"failures", result.failures},
                    {"cached", result.cached}};
    io::atomic_write(result.out_dir / "records.json", io::dump_json(records));
    return result;
}

/// A finished run loaded back from disk.
struct LoadedRun {
    fs::path dir;
    json records;
    RunManifest manifest;

    /// stats/<config>.json of every configuration, in manifest order.
    std::vector<json> config_statistics() const {
        std::vector<json> out;
        for (const auto &c : records.at("configs")) out.push_back(io::read_json(dir / c.at("stats_file").get<std::string>()));
        return out;
    }
};

/// Accepts a run directory or the path of its records.json.
inline LoadedRun load_run(const fs::path &path) {
    LoadedRun r;
    r.dir = fs::is_directory(path) ? path : path.parent_path();
    if (r.dir.empty()) r.dir = ".";
    r.records = io::read_json(r.dir / "records.json");
    if (r.records.value("schema_version", 0) != kSchemaVersion) throw ValidationError(path.string() + ": unsupported records schema");
    r.manifest = parse_manifest(r.records.at("manifest"));
    return r;
}

/// Recomputes every configuration's statistics from the stored spectra.
inline std::vector<json> recompute_statistics(const LoadedRun &run) {
    std::map<std::string, std::vector<EigenphaseSet>> sets;
    std::map<std::string, std::vector<double>> norms;
    std::map<std::string, std::size_t> failed;
    for (const auto &job : run.records.at("jobs")) {
        const auto id = job.at("id").get<std::string>();
        const auto configs = job.at("configs").get<std::vector<std::string>>();
        std::optional<JobOutput> o;
        if (job.at("status") == "ok") o = read_job_output(spectrum_files(run.dir, id));
        if (!o) {
            for (const auto &c : configs) ++failed[c];
            continue;
        }
        for (const auto &ls : o->sets) sets[configs.at(ls.target)].push_back(ls.set);
        if (run.manifest.noise) {
            for (const auto &c : configs) norms[c].push_back(o->perturbation_norm);
        }
    }
    const Plan plan = make_plan(run.manifest);
    std::vector<json> out;
    for (const auto &c : plan.configs) out.push_back(config_statistics(run.manifest, c, sets[c.name], norms[c.name], failed[c.name]));
    return out;
}

}  // namespace blockchaos::runner
