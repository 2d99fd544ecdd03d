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

// Dense linear-algebra vocabulary shared by every module: Eigen typedefs,
// norms, Hermitian exponentials, and a LAPACK-backed eigenvalue routine for
// general complex matrices (Eigen's ComplexEigenSolver is 4-5x slower on the
// block sizes used in sweeps).

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#ifndef lapack_complex_double
#define lapack_complex_double std::complex<double>
#endif
#ifndef lapack_complex_float
#define lapack_complex_float std::complex<float>
#endif
#include <lapacke.h>

#include "blockchaos/errors.hpp"

// Provided by OpenBLAS when it backs LAPACK; left unresolved otherwise.
extern "C" void openblas_set_num_threads(int) __attribute__((weak));

namespace blockchaos {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};
inline constexpr double kPi = std::numbers::pi;

/// Largest singular value.
template <typename Derived>
double spectral_norm(const Eigen::MatrixBase<Derived> &a) {
    if (a.size() == 0) return 0.0;
    using Plain = typename Derived::PlainObject;
    Eigen::BDCSVD<Plain> svd(a.derived().eval());
    return svd.singularValues()(0);
}

/// Spectral norm of a real symmetric or complex Hermitian matrix, max |eigenvalue|.
template <typename Derived>
double hermitian_spectral_norm(const Eigen::MatrixBase<Derived> &h) {
    if (h.size() == 0) return 0.0;
    using Plain = typename Derived::PlainObject;
    Eigen::SelfAdjointEigenSolver<Plain> es(h.derived().eval(), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// ||U^dag U - I|| in operator norm.
inline double unitarity_deviation(const CMatrix &u) {
    const CMatrix g = u.adjoint() * u - CMatrix::Identity(u.rows(), u.cols());
    return hermitian_spectral_norm(g);
}

/// Spectral-norm estimate of a linear map given only its action and the
/// action of its adjoint; power iteration on A^dag A from a fixed start
/// vector, so the result is deterministic. Returns a lower bound that
/// converges to ||A||.
inline double spectral_norm_estimate(const std::function<CVector(const CVector &)> &apply,
                                     const std::function<CVector(const CVector &)> &apply_adjoint,
                                     Eigen::Index dim, int max_iterations = 200, double rel_tol = 1e-10) {
    if (dim == 0) return 0.0;
    CVector v(dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
        // Deterministic, non-symmetric start so no eigenvector is missed by parity.
        v(k) = Complex(1.0 + 0.37 * std::sin(1.3 * static_cast<double>(k) + 0.2),
                       0.25 * std::cos(0.7 * static_cast<double>(k)));
    }
    v.normalize();
    double estimate = 0.0;
    for (int it = 0; it < max_iterations; ++it) {
        const CVector w = apply_adjoint(apply(v));
        const double nrm = w.norm();
        if (nrm == 0.0) return 0.0;
        const double next = std::sqrt(nrm);
        v = w / nrm;
        if (it > 3 && std::abs(next - estimate) <= rel_tol * next) return next;
        estimate = next;
    }
    return estimate;
}

/// exp(-i t H) for real symmetric H, through its eigendecomposition.
inline CMatrix exp_minus_i_symmetric(const RMatrix &h, double t) {
    Eigen::SelfAdjointEigenSolver<RMatrix> es(h);
    const RMatrix &v = es.eigenvectors();
    const CVector phases = (es.eigenvalues() * (-t)).unaryExpr([](double x) { return std::polar(1.0, x); });
    return v.cast<Complex>() * phases.asDiagonal() * v.transpose().cast<Complex>();
}

/// exp(-i t H) for complex Hermitian H.
inline CMatrix exp_minus_i_hermitian(const CMatrix &h, double t) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
    const CMatrix &v = es.eigenvectors();
    const CVector phases = (es.eigenvalues() * (-t)).unaryExpr([](double x) { return std::polar(1.0, x); });
    return v * phases.asDiagonal() * v.adjoint();
}

/// Eigenvalues of a general complex square matrix (LAPACK zgeev, no vectors).
inline std::vector<Complex> general_eigenvalues(const CMatrix &a) {
    if (a.rows() != a.cols()) throw ValidationError("general_eigenvalues: matrix is not square");
    const auto n = static_cast<lapack_int>(a.rows());
    std::vector<Complex> w(static_cast<std::size_t>(n));
    if (n == 0) return w;
    CMatrix work = a;
    const lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', n, work.data(), n, w.data(), nullptr, 1,
                                          nullptr, 1);
    if (info != 0) throw Error("zgeev failed with info = " + std::to_string(info));
    return w;
}

/// Caps the BLAS thread count when the backend is OpenBLAS. Job-level
/// workers call this so BLAS threads do not oversubscribe the cores.
inline void limit_blas_threads(int n) {
    if (openblas_set_num_threads) openblas_set_num_threads(n);
}

/// Maps an angle onto the half-open branch (-pi, pi].
inline double wrap_phase(double phi) {
    double r = std::remainder(phi, 2.0 * kPi);
    if (r <= -kPi) r += 2.0 * kPi;
    return r;
}

/// Circular distance between two angles, in [0, pi].
inline double circular_distance(double a, double b) { return std::abs(wrap_phase(a - b)); }

}  // namespace blockchaos
