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

// Kicked-top Floquet operators on a single spin block, the ATA -> kicked-top
// parameter map, and eigenphase extraction (optionally split by the m <-> -m
// parity that every noiseless kicked top carries).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <utility>
#include <vector>

#include "blockchaos/errors.hpp"
#include "blockchaos/linalg.hpp"
#include "blockchaos/noise_spec.hpp"
#include "blockchaos/spin.hpp"

namespace blockchaos {

/// How `tau` in a FloquetSpec turns into the coefficient c of exp(-i c Jz^2).
///   kicked_top : c = tau / (2j+1), the usual kicked-top normalisation.
///   ata_derived: c = 2 tau, i.e. tau is the ATA coupling tau_A and the
///                coefficient comes from H_A = 2 tau_A (Jz^2 - N/4).
enum class TwistConvention { kicked_top, ata_derived };

struct FloquetSpec {
    double alpha = 0.0;
    double tau = 0.0;
    SpinBlock block{};
    TwistConvention convention = TwistConvention::kicked_top;
    std::optional<NoiseSpec> noise;

    double twist_coefficient() const {
        return convention == TwistConvention::kicked_top ? tau / block.dim() : 2.0 * tau;
    }

    void validate() const {
        if (!std::isfinite(alpha) || !std::isfinite(tau)) throw ValidationError("FloquetSpec: alpha and tau must be finite");
        if (noise) noise->validate();
    }
};

/// Eigendecomposition of the real tridiagonal Jx of one block: Jx = V diag(w) V^T.
class KickBasis {
  public:
    explicit KickBasis(TwiceSpin s) : spin_(s) {
        Eigen::SelfAdjointEigenSolver<RMatrix> es(jx_real(s));
        vectors_ = es.eigenvectors();
        values_ = es.eigenvalues();
    }

    TwiceSpin spin() const noexcept { return spin_; }
    const RMatrix &vectors() const noexcept { return vectors_; }
    const RVector &values() const noexcept { return values_; }

    /// exp(-i alpha Jx)
    CMatrix kick(double alpha) const {
        const Eigen::Index d = vectors_.rows();
        RMatrix vc(d, d), vs(d, d);
        for (Eigen::Index k = 0; k < d; ++k) {
            const double a = alpha * values_(k);
            vc.col(k) = vectors_.col(k) * std::cos(a);
            vs.col(k) = vectors_.col(k) * (-std::sin(a));
        }
        CMatrix out(d, d);
        out.real() = vc * vectors_.transpose();
        out.imag() = vs * vectors_.transpose();
        return out;
    }

  private:
    TwiceSpin spin_;
    RMatrix vectors_;
    RVector values_;
};

/// Process-wide immutable cache of Jx eigenbases and of kick matrices for the
/// few alpha values a sweep uses. Entries are shared_ptr<const ...> so readers
/// never hold the lock while using them.
class KickCache {
  public:
    static KickCache &instance() {
        static KickCache cache;
        return cache;
    }

    std::shared_ptr<const KickBasis> basis(TwiceSpin s) {
        std::lock_guard lock(mutex_);
        auto &slot = bases_[s.twice()];
        if (!slot) slot = std::make_shared<const KickBasis>(s);
        return slot;
    }

    std::shared_ptr<const CMatrix> kick(TwiceSpin s, double alpha) {
        const auto b = basis(s);
        const std::pair key{s.twice(), alpha};
        {
            std::lock_guard lock(mutex_);
            if (auto it = kicks_.find(key); it != kicks_.end()) return it->second;
        }
        auto k = std::make_shared<const CMatrix>(b->kick(alpha));
        std::lock_guard lock(mutex_);
        if (kicks_.size() >= kMaxKicks) kicks_.clear();
        return kicks_.try_emplace(key, std::move(k)).first->second;
    }

  private:
    static constexpr std::size_t kMaxKicks = 256;
    std::mutex mutex_;
    std::map<int, std::shared_ptr<const KickBasis>> bases_;
    std::map<std::pair<int, double>, std::shared_ptr<const CMatrix>> kicks_;
};

/// diag(exp(-i c m^2)) in basis order.
inline CVector twist_diagonal(TwiceSpin s, double c) {
    const RVector m = magnetic_numbers(s);
    CVector out(m.size());
    for (Eigen::Index k = 0; k < m.size(); ++k) out(k) = std::polar(1.0, -c * m(k) * m(k));
    return out;
}

/// U = exp(-i alpha Jx) exp(-i c Jz^2), c = spec.twist_coefficient().
inline CMatrix build_kicked_top(const FloquetSpec &spec) {
    spec.validate();
    if (spec.noise && spec.noise->delta != 0.0) {
        throw ValidationError("build_kicked_top: spec carries noise; use perturbed_kicked_top");
    }
    const TwiceSpin s = spec.block.spin;
    const auto kick = KickCache::instance().kick(s, spec.alpha);
    return *kick * twist_diagonal(s, spec.twist_coefficient()).asDiagonal();
}

/// Kicked-top spec reproducing the spin-j sector of the ATA Floquet operator
/// exp(-i b_x sum_i sigma^x_i) exp(-i tau_A sum_{i<k} sigma^z_i sigma^z_k).
///
/// ata_derived: exact up to the global phase exp(i tau_A N / 2). Since
/// sum_i sigma^x_i = 2 Jx the kick angle is 2 b_x, and the twist coefficient is 2 tau_A.
/// kicked_top : the literature map alpha = b_x, tau_T = tau_A j / (2 (2 J_max + 1)).
/// It does not reproduce the ATA sector spectrum; kept for figure parameters.
inline FloquetSpec map_ata_parameters(double tau_A, double b_x, SpinBlock block, TwiceSpin j_max,
                                      TwistConvention convention = TwistConvention::ata_derived) {
    if (block.spin > j_max) throw ValidationError("map_ata_parameters: block j exceeds J_max");
    FloquetSpec spec;
    spec.block = block;
    spec.convention = convention;
    if (convention == TwistConvention::ata_derived) {
        spec.alpha = 2.0 * b_x;
        spec.tau = tau_A;
    } else {
        spec.alpha = b_x;
        spec.tau = tau_A * block.j() / (2.0 * j_max.dim());
    }
    spec.validate();
    return spec;
}

struct EigenphaseSet {
    std::vector<double> phases;  // sorted ascending, each in (-pi, pi]
    std::optional<FloquetSpec> spec;

    std::size_t size() const noexcept { return phases.size(); }
};

inline constexpr double kUnitarityTolerance = 1e-8;

/// Sorted eigenphases of a unitary. Throws NonUnitaryError when
/// ||U^dag U - I|| >= tol.
inline EigenphaseSet eigenphases(const CMatrix &u, double tol = kUnitarityTolerance) {
    if (u.rows() != u.cols()) throw ValidationError("eigenphases: matrix is not square");
    const double dev = unitarity_deviation(u);
    if (!(dev < tol)) throw NonUnitaryError(dev, tol);
    EigenphaseSet out;
    const auto ev = general_eigenvalues(u);
    out.phases.reserve(ev.size());
    for (const Complex &z : ev) out.phases.push_back(wrap_phase(std::arg(z)));
    std::sort(out.phases.begin(), out.phases.end());
    return out;
}

enum class Parity { even, odd };

/// Dimension of the F-even / F-odd subspace, F: |m> -> |-m>.
constexpr Eigen::Index parity_sector_dim(Eigen::Index d, Parity p) noexcept {
    return p == Parity::even ? (d + 1) / 2 : d / 2;
}

/// B^T U B where the columns of B are (e_k +- e_{d-1-k})/sqrt(2), plus e_{mid}
/// in the even sector when d is odd. O(d^2).
inline CMatrix parity_sector(const CMatrix &u, Parity p) {
    const Eigen::Index d = u.rows();
    const Eigen::Index n = parity_sector_dim(d, p);
    const Eigen::Index pairs = d / 2;
    const double sign = p == Parity::even ? 1.0 : -1.0;
    const double h = std::sqrt(0.5);

    CMatrix ub(d, n);  // U B
    for (Eigen::Index k = 0; k < pairs; ++k) ub.col(k) = h * (u.col(k) + sign * u.col(d - 1 - k));
    if (n > pairs) ub.col(pairs) = u.col(pairs);

    CMatrix out(n, n);
    for (Eigen::Index k = 0; k < pairs; ++k) out.row(k) = h * (ub.row(k) + sign * ub.row(d - 1 - k));
    if (n > pairs) out.row(pairs) = ub.row(pairs);
    return out;
}

/// ||F U F - U||_F, zero when U commutes with the m <-> -m flip.
inline double parity_commutator_norm(const CMatrix &u) {
    return (u.colwise().reverse().rowwise().reverse() - u).norm();
}

/// Eigenphases of each parity sector separately (even first). Spacing
/// statistics of a kicked top must be taken per sector: pooling the two
/// sectors superimposes independent spectra and pulls r toward Poisson.
inline std::vector<EigenphaseSet> parity_resolved_eigenphases(const CMatrix &u, double tol = kUnitarityTolerance) {
    const double comm = parity_commutator_norm(u);
    if (comm > tol * std::max<double>(1.0, static_cast<double>(u.rows()))) {
        throw SymmetryError("parity_resolved_eigenphases: operator breaks m <-> -m parity", comm);
    }
    std::vector<EigenphaseSet> out;
    for (Parity p : {Parity::even, Parity::odd}) {
        if (parity_sector_dim(u.rows(), p) == 0) continue;
        out.push_back(eigenphases(parity_sector(u, p), tol));
    }
    return out;
}

}  // namespace blockchaos
