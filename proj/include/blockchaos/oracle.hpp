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

// Brute-force full Hilbert space of N spin-1/2 (N <= 12): the all-to-all
// kicked Ising Floquet operator, the J^2 eigenspace decomposition, and the
// projection of a full-space unitary onto fixed-j sectors.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "blockchaos/errors.hpp"
#include "blockchaos/floquet.hpp"
#include "blockchaos/linalg.hpp"
#include "blockchaos/spin.hpp"

namespace blockchaos {

struct FullSpaceOperator {
    int n_spins = 0;
    CMatrix matrix;

    Eigen::Index dim() const noexcept { return matrix.rows(); }
};

inline Eigen::Index full_dim(int n_spins) { return Eigen::Index{1} << n_spins; }

/// sum_i sigma^z_i on basis state b.
constexpr int total_z(std::uint64_t b, int n_spins) noexcept { return n_spins - 2 * std::popcount(b); }

/// Diagonal of tau_A sum_{i<k} sigma^z_i sigma^z_k = tau_A ((sum z)^2 - N) / 2.
inline RVector ata_diagonal(int n_spins, double tau_A) {
    const Eigen::Index d = full_dim(n_spins);
    RVector h(d);
    for (Eigen::Index b = 0; b < d; ++b) {
        const int z = total_z(static_cast<std::uint64_t>(b), n_spins);
        h(b) = 0.5 * tau_A * (z * z - n_spins);
    }
    return h;
}

inline FullSpaceOperator build_ata_hamiltonian(int n_spins, double tau_A, int cap = kDefaultFullSpaceCap) {
    check_full_space_cap(n_spins, cap, "build_ata_hamiltonian");
    return FullSpaceOperator{n_spins, ata_diagonal(n_spins, tau_A).cast<Complex>().asDiagonal()};
}

/// U = exp(-i b_x sum_i sigma^x_i) diag(phases), kept in factored form so it
/// can be applied in O(N 2^N) instead of O(4^N).
class KickedDiagonalOperator {
  public:
    KickedDiagonalOperator(int n_spins, CVector diagonal, double b_x)
        : n_(n_spins), diag_(std::move(diagonal)), b_x_(b_x) {
        if (diag_.size() != full_dim(n_)) throw ValidationError("KickedDiagonalOperator: diagonal has wrong length");
    }

    int n_spins() const noexcept { return n_; }
    Eigen::Index dim() const noexcept { return diag_.size(); }
    const CVector &diagonal() const noexcept { return diag_; }
    double b_x() const noexcept { return b_x_; }

    CVector apply(const CVector &v) const {
        CVector w = diag_.cwiseProduct(v);
        kick_in_place(w, b_x_);
        return w;
    }

    CVector apply_adjoint(const CVector &v) const {
        CVector w = v;
        kick_in_place(w, -b_x_);
        return diag_.conjugate().cwiseProduct(w);
    }

    /// Columns are U applied to the columns of `x`.
    CMatrix apply(const CMatrix &x) const {
        CMatrix w = diag_.asDiagonal() * x;
        for (Eigen::Index c = 0; c < w.cols(); ++c) {
            CVector col = w.col(c);
            kick_in_place(col, b_x_);
            w.col(c) = col;
        }
        return w;
    }

    /// Dense matrix: U[a, b] = cos(b_x)^(N-h) (-i sin b_x)^h d_b, h = popcount(a ^ b).
    CMatrix dense() const {
        const Eigen::Index d = dim();
        std::vector<Complex> amp(static_cast<std::size_t>(n_) + 1);
        const Complex c = std::cos(b_x_), s = -kI * std::sin(b_x_);
        for (int h = 0; h <= n_; ++h) amp[h] = std::pow(c, n_ - h) * std::pow(s, h);
        CMatrix u(d, d);
        for (Eigen::Index b = 0; b < d; ++b) {
            for (Eigen::Index a = 0; a < d; ++a) {
                u(a, b) = amp[std::popcount(static_cast<std::uint64_t>(a ^ b))] * diag_(b);
            }
        }
        return u;
    }

  private:
    void kick_in_place(CVector &v, double angle) const {
        const double c = std::cos(angle);
        const Complex s = -kI * std::sin(angle);
        const Eigen::Index d = v.size();
        for (int i = 0; i < n_; ++i) {
            const Eigen::Index bit = Eigen::Index{1} << i;
            for (Eigen::Index a = 0; a < d; ++a) {
                if (a & bit) continue;
                const Complex x = v(a), y = v(a | bit);
                v(a) = c * x + s * y;
                v(a | bit) = s * x + c * y;
            }
        }
    }

    int n_;
    CVector diag_;
    double b_x_;
};

inline KickedDiagonalOperator ata_floquet_factors(int n_spins, double tau_A, double b_x,
                                                  int cap = kDefaultFullSpaceCap) {
    check_full_space_cap(n_spins, cap, "build_ata_floquet");
    const RVector h = ata_diagonal(n_spins, tau_A);
    return KickedDiagonalOperator(n_spins, h.unaryExpr([](double x) { return std::polar(1.0, -x); }), b_x);
}

/// U_KA = exp(-i b_x sum_i sigma^x_i) exp(-i H_A), dense.
inline FullSpaceOperator build_ata_floquet(int n_spins, double tau_A, double b_x, int cap = kDefaultFullSpaceCap) {
    return FullSpaceOperator{n_spins, ata_floquet_factors(n_spins, tau_A, b_x, cap).dense()};
}

/// Orthonormal basis of one J^2 eigenspace. Each basis vector lives in a
/// single Jz sector, so the basis is stored sector by sector.
struct CasimirBlock {
    struct Piece {
        std::vector<std::uint32_t> states;  // computational basis states of the Jz sector
        RMatrix vectors;                    // states.size() x (columns contributed by this sector)
    };

    TwiceSpin spin;
    std::uint64_t multiplicity = 0;
    std::vector<Piece> pieces;

    Eigen::Index columns() const {
        Eigen::Index c = 0;
        for (const auto &p : pieces) c += p.vectors.cols();
        return c;
    }

    /// Dense 2^N x columns() isometry.
    RMatrix dense(int n_spins) const {
        RMatrix out = RMatrix::Zero(full_dim(n_spins), columns());
        Eigen::Index col = 0;
        for (const auto &p : pieces) {
            for (std::size_t r = 0; r < p.states.size(); ++r) {
                out.row(p.states[r]).segment(col, p.vectors.cols()) = p.vectors.row(static_cast<Eigen::Index>(r));
            }
            col += p.vectors.cols();
        }
        return out;
    }

    /// P^T X for a 2^N x k matrix X.
    CMatrix project_rows(const CMatrix &x) const {
        CMatrix out(columns(), x.cols());
        Eigen::Index row = 0;
        for (const auto &p : pieces) {
            CMatrix gathered(static_cast<Eigen::Index>(p.states.size()), x.cols());
            for (std::size_t r = 0; r < p.states.size(); ++r) gathered.row(static_cast<Eigen::Index>(r)) = x.row(p.states[r]);
            out.middleRows(row, p.vectors.cols()) = p.vectors.transpose().cast<Complex>() * gathered;
            row += p.vectors.cols();
        }
        return out;
    }
};

/// (J^2 v) via J^2 = 3N/4 - N(N-1)/4 + sum_{i<k} SWAP_ik.
inline CVector apply_casimir(int n_spins, const CVector &v) {
    const double shift = 0.75 * n_spins - 0.25 * n_spins * (n_spins - 1);
    CVector out = shift * v;
    const Eigen::Index d = v.size();
    for (int i = 0; i < n_spins; ++i) {
        for (int k = i + 1; k < n_spins; ++k) {
            for (Eigen::Index b = 0; b < d; ++b) {
                const auto ub = static_cast<std::uint64_t>(b);
                const bool bi = (ub >> i) & 1U, bk = (ub >> k) & 1U;
                const auto swapped = bi == bk ? ub : ub ^ ((std::uint64_t{1} << i) | (std::uint64_t{1} << k));
                out(b) += v(static_cast<Eigen::Index>(swapped));
            }
        }
    }
    return out;
}

/// J^2 eigenspaces of N spins, largest j first. Built by diagonalising the
/// swap-sum form of J^2 inside each Jz sector.
class CasimirDecomposition {
  public:
    explicit CasimirDecomposition(int n_spins, int cap = kDefaultFullSpaceCap) : n_(n_spins) {
        check_full_space_cap(n_spins, cap, "CasimirDecomposition");
        std::map<int, CasimirBlock> by_twice_j;
        for (const SpinBlock &b : block_multiplicities(n_spins)) {
            by_twice_j[b.spin.twice()] = CasimirBlock{b.spin, b.multiplicity, {}};
        }
        const double shift = 0.75 * n_ - 0.25 * n_ * (n_ - 1);
        for (int down = 0; down <= n_; ++down) {
            std::vector<std::uint32_t> states;
            for (std::uint32_t b = 0; b < (1U << n_); ++b) {
                if (std::popcount(b) == down) states.push_back(b);
            }
            std::map<std::uint32_t, Eigen::Index> index;
            for (std::size_t r = 0; r < states.size(); ++r) index[states[r]] = static_cast<Eigen::Index>(r);
            const auto d = static_cast<Eigen::Index>(states.size());
            RMatrix j2 = RMatrix::Identity(d, d) * shift;
            for (Eigen::Index r = 0; r < d; ++r) {
                for (int i = 0; i < n_; ++i) {
                    for (int k = i + 1; k < n_; ++k) {
                        const std::uint32_t s = states[r];
                        const bool bi = (s >> i) & 1U, bk = (s >> k) & 1U;
                        const std::uint32_t t = bi == bk ? s : s ^ ((1U << i) | (1U << k));
                        j2(index[t], r) += 1.0;
                    }
                }
            }
            Eigen::SelfAdjointEigenSolver<RMatrix> es(j2);
            // Eigenvalues are j(j+1) exactly up to rounding; collect columns per j.
            std::map<int, std::vector<Eigen::Index>> cols;
            for (Eigen::Index c = 0; c < d; ++c) {
                const double jj = es.eigenvalues()(c);
                const int twice = static_cast<int>(std::lround(std::sqrt(4.0 * jj + 1.0) - 1.0));
                if (std::abs(0.25 * twice * (twice + 2) - jj) > 1e-6) {
                    throw Error("CasimirDecomposition: non-integral J^2 eigenvalue");
                }
                cols[twice].push_back(c);
            }
            for (const auto &[twice, list] : cols) {
                RMatrix v(d, static_cast<Eigen::Index>(list.size()));
                for (std::size_t c = 0; c < list.size(); ++c) v.col(static_cast<Eigen::Index>(c)) = es.eigenvectors().col(list[c]);
                by_twice_j.at(twice).pieces.push_back(CasimirBlock::Piece{states, std::move(v)});
            }
        }
        for (auto it = by_twice_j.rbegin(); it != by_twice_j.rend(); ++it) {
            if (it->second.columns() != static_cast<Eigen::Index>(it->second.multiplicity) * it->second.spin.dim()) {
                throw Error("CasimirDecomposition: eigenspace dimension does not match multiplicity");
            }
            blocks_.push_back(std::move(it->second));
        }
    }

    int n_spins() const noexcept { return n_; }
    const std::vector<CasimirBlock> &blocks() const noexcept { return blocks_; }

    const CasimirBlock &block(TwiceSpin s) const {
        for (const auto &b : blocks_) {
            if (b.spin == s) return b;
        }
        throw ValidationError("no spin-" + s.label() + " sector for N = " + std::to_string(n_));
    }

    static std::shared_ptr<const CasimirDecomposition> cached(int n_spins) {
        static std::mutex mutex;
        static std::map<int, std::shared_ptr<const CasimirDecomposition>> cache;
        std::lock_guard lock(mutex);
        auto &slot = cache[n_spins];
        if (!slot) slot = std::make_shared<const CasimirDecomposition>(n_spins);
        return slot;
    }

  private:
    int n_;
    std::vector<CasimirBlock> blocks_;
};

/// Orthonormal basis of one canonical copy of spin j: singlets on the pairs
/// (0,1), (2,3), ... for the first N - 2j spins, the rest all up, then
/// lowered with J_- and normalised. Columns ordered m = j, ..., -j.
inline RMatrix canonical_copy_basis(int n_spins, TwiceSpin s, int cap = kDefaultFullSpaceCap) {
    check_full_space_cap(n_spins, cap, "canonical_copy_basis");
    const int pairs = (n_spins - s.twice()) / 2;
    if (s.twice() > n_spins || (n_spins - s.twice()) % 2 != 0) {
        throw ValidationError("canonical_copy_basis: spin " + s.label() + " does not occur for N = " + std::to_string(n_spins));
    }
    const Eigen::Index d = full_dim(n_spins);
    RVector hw = RVector::Zero(d);
    // Expand prod_p (|01> - |10>)/sqrt2 over the paired spins; unpaired spins up (bit 0).
    for (std::uint64_t choice = 0; choice < (std::uint64_t{1} << pairs); ++choice) {
        std::uint64_t state = 0;
        double sign = 1.0;
        for (int p = 0; p < pairs; ++p) {
            if ((choice >> p) & 1U) {
                state |= std::uint64_t{1} << (2 * p);  // spin 2p down, 2p+1 up
                sign = -sign;
            } else {
                state |= std::uint64_t{1} << (2 * p + 1);
            }
        }
        hw(static_cast<Eigen::Index>(state)) = sign;
    }
    hw.normalize();

    RMatrix out(d, s.dim());
    out.col(0) = hw;
    for (int k = 1; k < s.dim(); ++k) {
        RVector next = RVector::Zero(d);
        const RVector &prev = out.col(k - 1);
        for (Eigen::Index b = 0; b < d; ++b) {
            if (prev(b) == 0.0) continue;
            for (int i = 0; i < n_spins; ++i) {
                if (((b >> i) & 1) == 0) next(b | (Eigen::Index{1} << i)) += prev(b);
            }
        }
        out.col(k) = next.normalized();
    }
    return out;
}

enum class SymmetryPolicy { require, allow_broken };

/// Which subspace a j-sector spectrum is taken from.
///   pooled     : the full J^2 eigenspace, all multiplicity copies together.
///   single_copy: one canonical copy of the irrep.
enum class Projection { pooled, single_copy };

struct ProjectedBlock {
    TwiceSpin spin;
    std::uint64_t multiplicity = 0;
    EigenphaseSet phases;  // pooled: multiplicity * (2j+1) phases
};

struct BlockProjection {
    std::vector<ProjectedBlock> blocks;
    double commutator_norm = 0.0;
    bool symmetry_broken = false;
};

inline constexpr double kCommutatorTolerance = 1e-8;

struct BlockProjectionOptions {
    SymmetryPolicy policy = SymmetryPolicy::require;
    Projection projection = Projection::pooled;
    std::optional<std::vector<TwiceSpin>> only;  // restrict to these sectors
};

namespace detail {

inline EigenphaseSet phases_of_compression(const CMatrix &c, bool broken) {
    if (!broken) return eigenphases(c);
    // The compression of a symmetry-broken unitary is a contraction, not a
    // unitary; its eigenvalue arguments are the phases used for statistics.
    EigenphaseSet out;
    for (const Complex &z : general_eigenvalues(c)) out.phases.push_back(wrap_phase(std::arg(z)));
    std::sort(out.phases.begin(), out.phases.end());
    return out;
}

template <typename ApplyMatrix>
BlockProjection project_with(int n_spins, double comm, const BlockProjectionOptions &opt, ApplyMatrix &&apply) {
    if (opt.policy == SymmetryPolicy::require && !(comm <= kCommutatorTolerance)) {
        throw SymmetryError("block_project_spectrum: U does not commute with J^2", comm);
    }
    BlockProjection out;
    out.commutator_norm = comm;
    out.symmetry_broken = comm > kCommutatorTolerance;
    const auto decomposition = CasimirDecomposition::cached(n_spins);
    for (const CasimirBlock &block : decomposition->blocks()) {
        if (opt.only && std::find(opt.only->begin(), opt.only->end(), block.spin) == opt.only->end()) continue;
        CMatrix compressed;
        if (opt.projection == Projection::pooled) {
            compressed = block.project_rows(apply(block.dense(n_spins).template cast<Complex>()));
        } else {
            const CMatrix p = canonical_copy_basis(n_spins, block.spin).cast<Complex>();
            compressed = p.adjoint() * apply(p);
        }
        out.blocks.push_back(ProjectedBlock{block.spin, block.multiplicity, phases_of_compression(compressed, out.symmetry_broken)});
    }
    return out;
}

}  // namespace detail

/// ||[U, J^2]|| by power iteration; J^2 is applied in its swap-sum form.
template <typename ApplyVector, typename ApplyAdjointVector>
double casimir_commutator_norm(int n_spins, ApplyVector &&apply, ApplyAdjointVector &&apply_adjoint) {
    const Eigen::Index d = full_dim(n_spins);
    return spectral_norm_estimate(
        [&](const CVector &v) { return CVector(apply(apply_casimir(n_spins, v)) - apply_casimir(n_spins, apply(v))); },
        [&](const CVector &v) {
            return CVector(apply_casimir(n_spins, apply_adjoint(v)) - apply_adjoint(apply_casimir(n_spins, v)));
        },
        d);
}

/// Per-j eigenphases of the restriction of a dense full-space unitary to the
/// J^2 eigenspaces.
inline BlockProjection block_project_spectrum(const FullSpaceOperator &u, const BlockProjectionOptions &opt = {}) {
    if (u.dim() != full_dim(u.n_spins) || u.matrix.cols() != u.dim()) {
        throw ValidationError("block_project_spectrum: matrix is not 2^N x 2^N");
    }
    const double comm = casimir_commutator_norm(
        u.n_spins, [&](const CVector &v) { return CVector(u.matrix * v); },
        [&](const CVector &v) { return CVector(u.matrix.adjoint() * v); });
    return detail::project_with(u.n_spins, comm, opt, [&](const CMatrix &x) { return CMatrix(u.matrix * x); });
}

/// Same projection for an operator kept in kick-times-diagonal form.
inline BlockProjection block_project_spectrum(const KickedDiagonalOperator &u, const BlockProjectionOptions &opt = {}) {
    const double comm = casimir_commutator_norm(
        u.n_spins(), [&](const CVector &v) { return u.apply(v); }, [&](const CVector &v) { return u.apply_adjoint(v); });
    return detail::project_with(u.n_spins(), comm, opt, [&](const CMatrix &x) { return u.apply(x); });
}

/// Largest circular distance between two phase multisets after the best
/// constant offset: both sorted, every cyclic relabeling tried, and the
/// offset taken at the mid-range of the wrapped differences.
inline double aligned_phase_error(std::vector<double> a, std::vector<double> b) {
    if (a.size() != b.size()) throw ValidationError("aligned_phase_error: multisets differ in size");
    if (a.empty()) return 0.0;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const std::size_t n = a.size();
    double best = kPi;
    for (std::size_t shift = 0; shift < n; ++shift) {
        const double d0 = wrap_phase(b[shift] - a[0]);
        double lo = 0.0, hi = 0.0;
        for (std::size_t k = 1; k < n && hi - lo < 2.0 * best; ++k) {
            const double e = wrap_phase(wrap_phase(b[(k + shift) % n] - a[k]) - d0);
            lo = std::min(lo, e);
            hi = std::max(hi, e);
        }
        best = std::min(best, 0.5 * (hi - lo));
    }
    return best;
}

/// Each phase repeated `copies` times.
inline std::vector<double> replicate_phases(const std::vector<double> &phases, std::uint64_t copies) {
    std::vector<double> out;
    out.reserve(phases.size() * copies);
    for (double p : phases) out.insert(out.end(), copies, p);
    return out;
}

struct OracleDraw {
    double tau_A = 0.0;
    double b_x = 0.0;
    double max_error = 0.0;
};

struct OracleReport {
    int n_spins = 0;
    std::vector<OracleDraw> draws;

    double max_error() const {
        double m = 0.0;
        for (const auto &d : draws) m = std::max(m, d.max_error);
        return m;
    }
};

/// Compares every J^2 sector of the full ATA Floquet operator with the mapped
/// kicked top for `n_draws` random (tau_A, b_x) in [-pi, pi]^2.
inline OracleReport check_block_equivalence(int n_spins, int n_draws, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(-kPi, kPi);
    OracleReport report;
    report.n_spins = n_spins;
    const TwiceSpin j_max = TwiceSpin::from_twice(n_spins);
    for (int k = 0; k < n_draws; ++k) {
        OracleDraw draw;
        draw.tau_A = angle(rng);
        draw.b_x = angle(rng);
        const BlockProjection proj = block_project_spectrum(build_ata_floquet(n_spins, draw.tau_A, draw.b_x));
        for (const ProjectedBlock &b : proj.blocks) {
            const FloquetSpec spec = map_ata_parameters(draw.tau_A, draw.b_x, SpinBlock::single(b.spin), j_max);
            const EigenphaseSet kt = eigenphases(build_kicked_top(spec));
            const double err = aligned_phase_error(b.phases.phases, replicate_phases(kt.phases, b.multiplicity));
            draw.max_error = std::max(draw.max_error, err);
        }
        report.draws.push_back(draw);
    }
    return report;
}

}  // namespace blockchaos
