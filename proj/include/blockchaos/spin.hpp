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

// Collective spin operators on a spin-j irrep and the SU(2) decomposition
// bookkeeping of N spin-1/2 particles.
//
// Conventions used throughout the library:
//   * irrep basis |j, m> ordered m = j, j-1, ..., -j (row/column k has m = j - k);
//   * computational basis of N spins: bit i of the index is spin i, bit value 0
//     is spin up (sigma^z = +1).

#pragma once

#include <bit>
#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "blockchaos/errors.hpp"
#include "blockchaos/linalg.hpp"

namespace blockchaos {

/// Spin label stored as the integer 2j so half-integers stay exact.
class TwiceSpin {
  public:
    constexpr TwiceSpin() = default;

    static TwiceSpin from_twice(int twice_j) {
        if (twice_j < 0) throw ValidationError("spin label must be nonnegative, got 2j = " + std::to_string(twice_j));
        TwiceSpin s;
        s.twice_ = twice_j;
        return s;
    }

    /// Accepts j as a real number; rejects anything that is not a multiple of 1/2.
    static TwiceSpin from_j(double j) {
        const double twice = 2.0 * j;
        if (!std::isfinite(twice) || std::abs(twice - std::round(twice)) > 1e-9 || twice < -1e-9) {
            throw ValidationError("spin label must be a nonnegative multiple of 1/2, got j = " + std::to_string(j));
        }
        return from_twice(static_cast<int>(std::lround(twice)));
    }

    constexpr int twice() const noexcept { return twice_; }
    constexpr double j() const noexcept { return 0.5 * twice_; }
    constexpr int dim() const noexcept { return twice_ + 1; }
    constexpr bool is_integer() const noexcept { return twice_ % 2 == 0; }
    /// j(j+1)
    constexpr double casimir() const noexcept { return 0.25 * twice_ * (twice_ + 2); }

    std::string label() const {
        return is_integer() ? std::to_string(twice_ / 2) : std::to_string(twice_) + "/2";
    }

    constexpr auto operator<=>(const TwiceSpin &) const = default;

  private:
    int twice_ = 0;
};

/// One SU(2) irrep together with how often it occurs in a decomposition.
struct SpinBlock {
    TwiceSpin spin;
    std::uint64_t multiplicity = 1;

    constexpr int dim() const noexcept { return spin.dim(); }
    constexpr double j() const noexcept { return spin.j(); }

    static SpinBlock single(TwiceSpin s) { return SpinBlock{s, 1}; }

    bool operator==(const SpinBlock &) const = default;
};

enum class SpinComponent { x, y, z, z_squared, casimir };

inline std::string_view to_string(SpinComponent c) {
    switch (c) {
    case SpinComponent::x: return "Jx";
    case SpinComponent::y: return "Jy";
    case SpinComponent::z: return "Jz";
    case SpinComponent::z_squared: return "Jz^2";
    case SpinComponent::casimir: return "J^2";
    }
    return "?";
}

struct SpinOperator {
    SpinBlock block;
    SpinComponent kind;
    CMatrix matrix;
};

/// Magnetic quantum numbers in basis order, m = j, ..., -j.
inline RVector magnetic_numbers(TwiceSpin s) {
    RVector m(s.dim());
    for (int k = 0; k < s.dim(); ++k) m(k) = s.j() - k;
    return m;
}

/// J_+ in the |j, m> basis; real, strictly upper bidiagonal.
inline RMatrix raising_operator(TwiceSpin s) {
    const int d = s.dim();
    const double jj = s.casimir();
    RMatrix jp = RMatrix::Zero(d, d);
    for (int k = 1; k < d; ++k) {
        const double m = s.j() - k;  // J_+ |m> = sqrt(j(j+1) - m(m+1)) |m+1>
        jp(k - 1, k) = std::sqrt(jj - m * (m + 1.0));
    }
    return jp;
}

/// Jx as a real symmetric tridiagonal matrix; the kick generator.
inline RMatrix jx_real(TwiceSpin s) {
    const RMatrix jp = raising_operator(s);
    return 0.5 * (jp + jp.transpose());
}

inline SpinOperator build_spin_operator(SpinBlock block, SpinComponent kind) {
    const TwiceSpin s = block.spin;
    const int d = s.dim();
    const RMatrix jp = raising_operator(s);
    const RVector m = magnetic_numbers(s);
    const CMatrix jx = (0.5 * (jp + jp.transpose())).cast<Complex>();
    const CMatrix jy = (jp - jp.transpose()).cast<Complex>() / (2.0 * kI);
    const CMatrix jz = m.cast<Complex>().asDiagonal();

    CMatrix out(d, d);
    switch (kind) {
    case SpinComponent::x: out = jx; break;
    case SpinComponent::y: out = jy; break;
    case SpinComponent::z: out = jz; break;
    case SpinComponent::z_squared: out = m.array().square().matrix().cast<Complex>().asDiagonal(); break;
    case SpinComponent::casimir: out = jx * jx + jy * jy + jz * jz; break;
    }
    return SpinOperator{block, kind, std::move(out)};
}

/// Irreps of (1/2)^{(x)N}, largest j first. Multiplicities come from coupling
/// one spin-1/2 at a time (j -> j +- 1/2) in exact 64-bit integer arithmetic.
inline std::vector<SpinBlock> block_multiplicities(int n_spins) {
    if (n_spins < 1) throw ValidationError("block_multiplicities: need at least one spin");
    if (n_spins > 62) throw ResourceError("block_multiplicities: multiplicities overflow 64 bits", n_spins, 62);
    std::map<int, std::uint64_t> mult{{1, 1}};  // keyed by 2j
    for (int n = 2; n <= n_spins; ++n) {
        std::map<int, std::uint64_t> next;
        for (const auto &[twice_j, count] : mult) {
            next[twice_j + 1] += count;
            if (twice_j > 0) next[twice_j - 1] += count;
        }
        mult = std::move(next);
    }
    std::vector<SpinBlock> out;
    for (auto it = mult.rbegin(); it != mult.rend(); ++it) {
        out.push_back(SpinBlock{TwiceSpin::from_twice(it->first), it->second});
    }
    return out;
}

inline constexpr int kDefaultFullSpaceCap = 12;

inline void check_full_space_cap(int n_spins, int cap, const char *who) {
    if (n_spins < 1) throw ValidationError(std::string(who) + ": need at least one spin");
    if (n_spins > cap) throw ResourceError(std::string(who) + ": full Hilbert space too large", n_spins, cap);
}

/// sigma^z_i eigenvalue (+1 / -1) of spin i in computational basis state b.
constexpr int z_value(std::uint64_t b, int i) noexcept { return ((b >> i) & 1U) ? -1 : 1; }

/// (1/2) sum_i sigma^q_i on the 2^N computational basis.
inline CMatrix full_space_collective(int n_spins, SpinComponent kind, int cap = kDefaultFullSpaceCap) {
    check_full_space_cap(n_spins, cap, "full_space_collective");
    const Eigen::Index dim = Eigen::Index{1} << n_spins;

    CMatrix jx = CMatrix::Zero(dim, dim);
    CMatrix jy = CMatrix::Zero(dim, dim);
    RVector jz(dim);
    for (Eigen::Index b = 0; b < dim; ++b) {
        const auto ub = static_cast<std::uint64_t>(b);
        jz(b) = 0.5 * (n_spins - 2 * std::popcount(ub));
        for (int i = 0; i < n_spins; ++i) {
            const auto flipped = static_cast<Eigen::Index>(ub ^ (std::uint64_t{1} << i));
            jx(flipped, b) += 0.5;
            // sigma^y |up> = i |down>, sigma^y |down> = -i |up>
            jy(flipped, b) += z_value(ub, i) > 0 ? 0.5 * kI : -0.5 * kI;
        }
    }
    switch (kind) {
    case SpinComponent::x: return jx;
    case SpinComponent::y: return jy;
    case SpinComponent::z: return jz.cast<Complex>().asDiagonal();
    case SpinComponent::z_squared: return jz.array().square().matrix().cast<Complex>().asDiagonal();
    case SpinComponent::casimir: {
        const CMatrix z = jz.cast<Complex>().asDiagonal();
        return jx * jx + jy * jy + z * z;
    }
    }
    throw ValidationError("full_space_collective: unknown component");
}

}  // namespace blockchaos
