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

// Reference spectra (Poisson, GOE, GUE) and their textbook statistics.
//
// GOE/GUE eigenvalues are unfolded through the empirical level CDF of a
// calibration sample drawn once per (kind, dim) from a fixed seed. The CDF is
// piecewise linear with roughly two mean spacings between knots, which keeps
// calibration noise well below the spacing scale.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "blockchaos/errors.hpp"
#include "blockchaos/floquet.hpp"
#include "blockchaos/linalg.hpp"
#include "blockchaos/random_matrix.hpp"
#include "blockchaos/stats.hpp"

namespace blockchaos {

enum class ReferenceKind { poisson, goe, gue };

inline std::string_view to_string(ReferenceKind k) {
    switch (k) {
    case ReferenceKind::poisson: return "poisson";
    case ReferenceKind::goe: return "goe";
    case ReferenceKind::gue: return "gue";
    }
    return "?";
}

inline ReferenceKind parse_reference_kind(std::string_view s) {
    if (s == "poisson" || s == "Poisson") return ReferenceKind::poisson;
    if (s == "goe" || s == "GOE") return ReferenceKind::goe;
    if (s == "gue" || s == "GUE") return ReferenceKind::gue;
    throw ValidationError("unknown reference ensemble '" + std::string(s) + "'");
}

/// <r> for Poisson and for the 3x3 Wigner-like surmises of GOE and GUE.
inline const double kRPoisson = 2.0 * std::numbers::ln2 - 1.0;
inline const double kRGoe = 4.0 - 2.0 * std::numbers::sqrt3;
inline const double kRGue = 2.0 * std::numbers::sqrt3 / std::numbers::pi - 0.5;

inline double reference_r(ReferenceKind k) {
    switch (k) {
    case ReferenceKind::poisson: return kRPoisson;
    case ReferenceKind::goe: return kRGoe;
    case ReferenceKind::gue: return kRGue;
    }
    return 0.0;
}

/// Nearest-neighbour spacing density: exp(-s) or the Wigner surmise.
inline double spacing_density(ReferenceKind k, double s) {
    constexpr double pi = std::numbers::pi;
    switch (k) {
    case ReferenceKind::poisson: return std::exp(-s);
    case ReferenceKind::goe: return 0.5 * pi * s * std::exp(-0.25 * pi * s * s);
    case ReferenceKind::gue: return 32.0 / (pi * pi) * s * s * std::exp(-4.0 * s * s / pi);
    }
    return 0.0;
}

/// Integral of spacing_density from 0 to s.
inline double spacing_cdf(ReferenceKind k, double s) {
    constexpr double pi = std::numbers::pi;
    switch (k) {
    case ReferenceKind::poisson: return 1.0 - std::exp(-s);
    case ReferenceKind::goe: return 1.0 - std::exp(-0.25 * pi * s * s);
    case ReferenceKind::gue: {
        const double a = 4.0 / pi;
        return std::erf(std::sqrt(a) * s) - 2.0 * std::sqrt(a / pi) * s * std::exp(-a * s * s);
    }
    }
    return 0.0;
}

/// Delta_3(L): exact L/15 for Poisson, large-L asymptotics for GOE and GUE.
inline double delta3_reference(ReferenceKind k, double L) {
    constexpr double pi = std::numbers::pi;
    constexpr double gamma = std::numbers::egamma;
    switch (k) {
    case ReferenceKind::poisson: return L / 15.0;
    case ReferenceKind::goe: return (std::log(2.0 * pi * L) + gamma - 1.25 - pi * pi / 8.0) / (pi * pi);
    case ReferenceKind::gue: return (std::log(2.0 * pi * L) + gamma - 1.25) / (2.0 * pi * pi);
    }
    return 0.0;
}

struct ReferenceSpectrum {
    ReferenceKind kind = ReferenceKind::poisson;
    std::vector<double> levels;  // sorted
    Topology topology = Topology::line;

    /// Poisson phases reinterpreted as an eigenphase set.
    EigenphaseSet as_eigenphases() const {
        if (topology != Topology::circular) throw ValidationError("as_eigenphases: line spectrum");
        return EigenphaseSet{levels, std::nullopt};
    }
};

/// Raw eigenvalues of one sampled GOE/GUE matrix, ascending.
inline std::vector<double> gaussian_ensemble_eigenvalues(ReferenceKind kind, Eigen::Index dim, std::uint64_t seed) {
    RVector ev;
    if (kind == ReferenceKind::goe) {
        ev = Eigen::SelfAdjointEigenSolver<RMatrix>(sample_goe(dim, seed), Eigen::EigenvaluesOnly).eigenvalues();
    } else if (kind == ReferenceKind::gue) {
        ev = Eigen::SelfAdjointEigenSolver<CMatrix>(sample_gue(dim, seed), Eigen::EigenvaluesOnly).eigenvalues();
    } else {
        throw ValidationError("gaussian_ensemble_eigenvalues: not a Gaussian ensemble");
    }
    return std::vector<double>(ev.data(), ev.data() + ev.size());
}

/// Smoothed empirical level CDF of a Gaussian ensemble at fixed dimension.
class LevelCdf {
  public:
    static constexpr std::uint64_t kCalibrationSeed = 0x6b1c9e37a5d20f41ULL;

    LevelCdf(ReferenceKind kind, Eigen::Index dim) {
        const auto matrices = std::max<Eigen::Index>(8, (50000 + dim - 1) / dim);
        std::vector<double> all;
        all.reserve(static_cast<std::size_t>(matrices * dim));
        for (Eigen::Index k = 0; k < matrices; ++k) {
            const auto ev = gaussian_ensemble_eigenvalues(kind, dim, kCalibrationSeed + static_cast<std::uint64_t>(k));
            all.insert(all.end(), ev.begin(), ev.end());
        }
        std::sort(all.begin(), all.end());
        const auto total = static_cast<double>(all.size());
        const auto step = static_cast<std::size_t>(2 * matrices);
        for (std::size_t i = 0; i < all.size(); i += step) {
            x_.push_back(all[i]);
            f_.push_back((static_cast<double>(i) + 0.5) / total);
        }
        x_.push_back(all.back());
        f_.push_back((total - 0.5) / total);
    }

    /// Fraction of levels below x, clamped to [0, 1].
    double operator()(double x) const {
        if (x <= x_.front()) return 0.0;
        if (x >= x_.back()) return 1.0;
        const auto it = std::upper_bound(x_.begin(), x_.end(), x);
        const std::size_t hi = static_cast<std::size_t>(it - x_.begin());
        const std::size_t lo = hi - 1;
        const double t = (x - x_[lo]) / (x_[hi] - x_[lo]);
        return f_[lo] + t * (f_[hi] - f_[lo]);
    }

    static std::shared_ptr<const LevelCdf> cached(ReferenceKind kind, Eigen::Index dim) {
        static std::mutex mutex;
        static std::map<std::pair<int, Eigen::Index>, std::shared_ptr<const LevelCdf>> cache;
        std::lock_guard lock(mutex);
        auto &slot = cache[{static_cast<int>(kind), dim}];
        if (!slot) slot = std::make_shared<const LevelCdf>(kind, dim);
        return slot;
    }

  private:
    std::vector<double> x_, f_;
};

/// Poisson: dim iid uniform phases on [-pi, pi), sorted, circular.
/// GOE/GUE: matrix eigenvalues mapped to dim * CDF(lambda), a line spectrum
/// with unit mean spacing.
inline ReferenceSpectrum sample_reference_ensemble(ReferenceKind kind, Eigen::Index dim, std::uint64_t seed) {
    if (dim < 2) throw ValidationError("sample_reference_ensemble: dim must be >= 2");
    ReferenceSpectrum out;
    out.kind = kind;
    if (kind == ReferenceKind::poisson) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(-kPi, kPi);
        out.levels.resize(static_cast<std::size_t>(dim));
        for (double &x : out.levels) x = u(rng);
        std::sort(out.levels.begin(), out.levels.end());
        out.topology = Topology::circular;
        return out;
    }
    const auto cdf = LevelCdf::cached(kind, dim);
    out.levels = gaussian_ensemble_eigenvalues(kind, dim, seed);
    for (double &x : out.levels) x = static_cast<double>(dim) * (*cdf)(x);
    out.topology = Topology::line;
    return out;
}

/// Delta_3 of sampled reference spectra: Poisson on circles of `dim` levels,
/// GOE/GUE as unfolded line spectra.
inline std::vector<Delta3Point> reference_delta3(ReferenceKind kind, std::span<const double> L_grid, int samples = 8,
                                                 Eigen::Index dim = 500, std::uint64_t seed = 0x0d3f00d5eedULL) {
    if (kind == ReferenceKind::poisson) {
        std::vector<EigenphaseSet> sets;
        for (int k = 0; k < samples; ++k) {
            sets.push_back(sample_reference_ensemble(kind, dim, seed + static_cast<std::uint64_t>(k)).as_eigenphases());
        }
        return delta3(sets, L_grid);
    }
    std::vector<std::vector<double>> spectra;
    for (int k = 0; k < samples; ++k) spectra.push_back(sample_reference_ensemble(kind, dim, seed + static_cast<std::uint64_t>(k)).levels);
    return delta3_line(spectra, L_grid);
}

}  // namespace blockchaos
