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

// Perturbation channels: a GOE matrix inserted between kick and twist of a
// kicked-top block, and a random-bond Ising chain added to the full-space
// ATA Hamiltonian. Each builder reports the operator norm of the
// perturbation it applied.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "blockchaos/errors.hpp"
#include "blockchaos/floquet.hpp"
#include "blockchaos/linalg.hpp"
#include "blockchaos/noise_spec.hpp"
#include "blockchaos/oracle.hpp"
#include "blockchaos/random_matrix.hpp"
#include "blockchaos/spin.hpp"

namespace blockchaos {

/// ||delta H|| in operator norm.
template <typename Derived>
double perturbation_norm(const Eigen::MatrixBase<Derived> &h, double delta) {
    return std::abs(delta) * hermitian_spectral_norm(h);
}

struct PerturbedUnitary {
    CMatrix unitary;
    double perturbation_norm = 0.0;
};

/// U = exp(-i alpha Jx) exp(-i delta H) exp(-i c Jz^2) for a given Hermitian H.
inline PerturbedUnitary perturbed_kicked_top(const FloquetSpec &spec, const RMatrix &h) {
    spec.validate();
    if (!spec.noise || spec.noise->kind != NoiseKind::goe) {
        throw ValidationError("perturbed_kicked_top: spec needs GOE noise");
    }
    const Eigen::Index d = spec.block.dim();
    if (h.rows() != d || h.cols() != d) {
        throw ValidationError("perturbed_kicked_top: perturbation is " + std::to_string(h.rows()) + "x" +
                              std::to_string(h.cols()) + ", block dimension is " + std::to_string(d));
    }
    FloquetSpec clean = spec;
    clean.noise.reset();
    const double delta = spec.noise->delta;
    if (delta == 0.0) return PerturbedUnitary{build_kicked_top(clean), 0.0};

    const auto kick = KickCache::instance().kick(spec.block.spin, spec.alpha);
    const CVector twist = twist_diagonal(spec.block.spin, spec.twist_coefficient());
    PerturbedUnitary out;
    out.unitary = *kick * (exp_minus_i_symmetric(h, delta) * twist.asDiagonal());
    out.perturbation_norm = perturbation_norm(h, delta);
    return out;
}

/// Same, with H sampled from the GOE using the spec's noise seed.
inline PerturbedUnitary perturbed_kicked_top(const FloquetSpec &spec) {
    if (!spec.noise || spec.noise->kind != NoiseKind::goe) {
        throw ValidationError("perturbed_kicked_top: spec needs GOE noise");
    }
    return perturbed_kicked_top(spec, sample_goe(spec.block.dim(), spec.noise->seed));
}

/// Diagonal of sum_i delta_i sigma^z_i sigma^z_{i+1 mod N}.
struct RandomChain {
    int n_spins = 0;
    std::vector<double> weights;
    RVector diagonal;

    FullSpaceOperator dense() const { return FullSpaceOperator{n_spins, diagonal.cast<Complex>().asDiagonal()}; }
    double norm() const { return diagonal.size() == 0 ? 0.0 : diagonal.cwiseAbs().maxCoeff(); }
};

inline std::vector<double> sample_chain_weights(int n_spins, double delta, std::uint64_t seed,
                                                ChainWeights law = ChainWeights::gaussian) {
    std::mt19937_64 rng(seed);
    std::vector<double> w(static_cast<std::size_t>(n_spins));
    if (law == ChainWeights::gaussian) {
        std::normal_distribution<double> normal(0.0, 1.0);
        for (double &x : w) x = delta * normal(rng);
    } else {
        std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
        for (double &x : w) x = delta * angle(rng);
    }
    return w;
}

inline RandomChain random_chain_from_weights(int n_spins, std::vector<double> weights, int cap = kDefaultFullSpaceCap) {
    check_full_space_cap(n_spins, cap, "sample_random_chain");
    if (weights.size() != static_cast<std::size_t>(n_spins)) throw ValidationError("random chain needs one weight per bond");
    RandomChain c{n_spins, std::move(weights), RVector::Zero(full_dim(n_spins))};
    for (Eigen::Index b = 0; b < c.diagonal.size(); ++b) {
        const auto ub = static_cast<std::uint64_t>(b);
        double e = 0.0;
        for (int i = 0; i < n_spins; ++i) e += c.weights[i] * z_value(ub, i) * z_value(ub, (i + 1) % n_spins);
        c.diagonal(b) = e;
    }
    return c;
}

inline RandomChain sample_random_chain(int n_spins, double delta, std::uint64_t seed,
                                       ChainWeights law = ChainWeights::gaussian, int cap = kDefaultFullSpaceCap) {
    check_full_space_cap(n_spins, cap, "sample_random_chain");
    if (!std::isfinite(delta) || delta < 0.0) throw ValidationError("sample_random_chain: delta must be >= 0");
    return random_chain_from_weights(n_spins, sample_chain_weights(n_spins, delta, seed, law), cap);
}

/// exp(-i b_x sum sigma^x) exp(-i H_RC) exp(-i H_A), kept factored.
inline KickedDiagonalOperator perturbed_full_factors(int n_spins, double tau_A, double b_x, const RandomChain &chain,
                                                     int cap = kDefaultFullSpaceCap) {
    check_full_space_cap(n_spins, cap, "perturbed_full_floquet");
    if (chain.n_spins != n_spins) throw ValidationError("perturbed_full_floquet: chain spin count mismatch");
    const RVector h = ata_diagonal(n_spins, tau_A) + chain.diagonal;
    return KickedDiagonalOperator(n_spins, h.unaryExpr([](double x) { return std::polar(1.0, -x); }), b_x);
}

inline FullSpaceOperator perturbed_full_floquet(int n_spins, double tau_A, double b_x, const RandomChain &chain,
                                                int cap = kDefaultFullSpaceCap) {
    return FullSpaceOperator{n_spins, perturbed_full_factors(n_spins, tau_A, b_x, chain, cap).dense()};
}

}  // namespace blockchaos
