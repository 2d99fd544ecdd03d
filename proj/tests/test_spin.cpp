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

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "blockchaos/spin.hpp"

namespace bc = blockchaos;
using bc::CMatrix;
using bc::Complex;
using bc::SpinComponent;
using bc::TwiceSpin;

namespace {

bc::SpinBlock block_of_dim(int dim) { return bc::SpinBlock::single(TwiceSpin::from_twice(dim - 1)); }

CMatrix op(int dim, SpinComponent k) { return bc::build_spin_operator(block_of_dim(dim), k).matrix; }

std::uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    return r;
}

}  // namespace

TEST(TwiceSpin, RejectsLabelsThatAreNotHalfIntegers) {
    EXPECT_THROW(TwiceSpin::from_j(0.3), bc::ValidationError);
    EXPECT_THROW(TwiceSpin::from_j(-0.5), bc::ValidationError);
    EXPECT_THROW(TwiceSpin::from_twice(-1), bc::ValidationError);
    EXPECT_EQ(TwiceSpin::from_j(1.5).twice(), 3);
    EXPECT_EQ(TwiceSpin::from_j(1.5).dim(), 4);
    EXPECT_EQ(TwiceSpin::from_j(1.5).label(), "3/2");
    EXPECT_EQ(TwiceSpin::from_j(2.0).label(), "2");
}

TEST(SpinOperator, SpinHalfIsHalfThePauliMatrices) {
    const CMatrix jz = op(2, SpinComponent::z);
    EXPECT_EQ(jz(0, 0), Complex(0.5));
    EXPECT_EQ(jz(1, 1), Complex(-0.5));
    EXPECT_EQ(jz(0, 1), Complex(0.0));
    const CMatrix jx = op(2, SpinComponent::x);
    EXPECT_EQ(jx(0, 1), Complex(0.5));
    EXPECT_EQ(jx(1, 0), Complex(0.5));
    EXPECT_EQ(jx(0, 0), Complex(0.0));
}

TEST(SpinOperator, SpinOneJxIsTridiagonalWithInverseRootTwo) {
    // Hand ladder coefficients: J+|0> = sqrt(2)|1>, J+|-1> = sqrt(2)|0>, so Jx has 1/sqrt(2) off the diagonal.
    const double h = 1.0 / std::sqrt(2.0);
    CMatrix expected = CMatrix::Zero(3, 3);
    expected(0, 1) = expected(1, 0) = expected(1, 2) = expected(2, 1) = h;
    EXPECT_LT((op(3, SpinComponent::x) - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(SpinOperator, BasisOrderIsDescendingM) {
    const CMatrix jz = op(6, SpinComponent::z);
    for (int k = 0; k < 6; ++k) EXPECT_DOUBLE_EQ(jz(k, k).real(), 2.5 - k);
    const CMatrix jz2 = op(6, SpinComponent::z_squared);
    for (int k = 0; k < 6; ++k) EXPECT_DOUBLE_EQ(jz2(k, k).real(), (2.5 - k) * (2.5 - k));
}

TEST(SpinOperator, HermitianForEveryComponent) {
    for (int dim : {1, 2, 7, 40, 101}) {
        for (auto k : {SpinComponent::x, SpinComponent::y, SpinComponent::z, SpinComponent::z_squared, SpinComponent::casimir}) {
            const CMatrix m = op(dim, k);
            EXPECT_LT((m - m.adjoint()).cwiseAbs().maxCoeff(), 1e-12) << "dim " << dim << " " << bc::to_string(k);
        }
    }
}

namespace {

// ||[A, B] - i C|| for tridiagonal A, B, C, evaluated in long double from the
// double entries so the measurement adds no rounding of its own. The norm is
// bounded by sqrt(||E||_1 ||E||_inf), exact for the diagonal errors seen here.
double commutator_defect(const CMatrix &a, const CMatrix &b, const CMatrix &c) {
    using LC = std::complex<long double>;
    const Eigen::Index d = a.rows();
    auto at = [d](const CMatrix &m, Eigen::Index i, Eigen::Index j) {
        return i < 0 || j < 0 || i >= d || j >= d ? LC(0) : LC(m(i, j).real(), m(i, j).imag());
    };
    std::vector<long double> rows(static_cast<std::size_t>(d), 0.0L), cols(static_cast<std::size_t>(d), 0.0L);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = std::max<Eigen::Index>(0, i - 2); j <= std::min(d - 1, i + 2); ++j) {
            LC e = -LC(0, 1) * at(c, i, j);
            for (Eigen::Index k = i - 1; k <= i + 1; ++k) e += at(a, i, k) * at(b, k, j) - at(b, i, k) * at(a, k, j);
            rows[i] += std::abs(e);
            cols[j] += std::abs(e);
        }
    }
    return static_cast<double>(std::sqrt(*std::max_element(rows.begin(), rows.end()) * *std::max_element(cols.begin(), cols.end())));
}

void expect_su2(int dim) {
    const CMatrix x = op(dim, SpinComponent::x), y = op(dim, SpinComponent::y), z = op(dim, SpinComponent::z);
    EXPECT_LT(commutator_defect(x, y, z), 1e-10) << "[Jx, Jy], dim " << dim;
    EXPECT_LT(commutator_defect(y, z, x), 1e-10) << "[Jy, Jz], dim " << dim;
    EXPECT_LT(commutator_defect(z, x, y), 1e-10) << "[Jz, Jx], dim " << dim;
}

void expect_casimir(int dim) {
    const CMatrix c = op(dim, SpinComponent::casimir);
    const TwiceSpin s = TwiceSpin::from_twice(dim - 1);
    // Hermitian, so the largest absolute row sum bounds the operator norm.
    const double dev = (c - s.casimir() * CMatrix::Identity(dim, dim)).cwiseAbs().rowwise().sum().maxCoeff();
    EXPECT_LT(dev, 1e-10) << "J^2, dim " << dim;
}

}  // namespace

TEST(SpinOperator, Su2AlgebraUpToDim1001) {
    for (int dim : {1, 2, 3, 10, 51, 402, 1001}) expect_su2(dim);
}

TEST(SpinOperator, CasimirIsJTimesJPlusOne) {
    for (int dim : {1, 2, 5, 30, 201, 1001}) expect_casimir(dim);
}

// Entries reach j(j+1) ~ 1e6 here, where one ulp is 1.16e-10: the absolute
// 1e-10 bound sits at the double-precision floor.
TEST(SpinOperator, AlgebraAtDim2001) {
    expect_su2(2001);
    expect_casimir(2001);
}

TEST(BlockMultiplicities, SmallSystemsMatchHandDecomposition) {
    const auto n2 = bc::block_multiplicities(2);
    ASSERT_EQ(n2.size(), 2U);
    EXPECT_EQ(n2[0].spin.twice(), 2);
    EXPECT_EQ(n2[0].multiplicity, 1U);
    EXPECT_EQ(n2[1].spin.twice(), 0);
    EXPECT_EQ(n2[1].multiplicity, 1U);

    const auto n3 = bc::block_multiplicities(3);
    ASSERT_EQ(n3.size(), 2U);
    EXPECT_EQ(n3[0].spin.twice(), 3);
    EXPECT_EQ(n3[0].multiplicity, 1U);
    EXPECT_EQ(n3[1].spin.twice(), 1);
    EXPECT_EQ(n3[1].multiplicity, 2U);

    const auto n4 = bc::block_multiplicities(4);
    ASSERT_EQ(n4.size(), 3U);
    EXPECT_EQ(n4[0].multiplicity, 1U);
    EXPECT_EQ(n4[1].multiplicity, 3U);
    EXPECT_EQ(n4[2].multiplicity, 2U);
    EXPECT_EQ(n4[2].spin.twice(), 0);
}

TEST(BlockMultiplicities, DimensionSumAndBinomialCrossCheck) {
    for (int n = 1; n <= 20; ++n) {
        std::uint64_t total = 0;
        for (const auto &b : bc::block_multiplicities(n)) {
            total += b.multiplicity * static_cast<std::uint64_t>(b.dim());
            // Independent count: C(N, N/2 - j) - C(N, N/2 - j - 1).
            const int k = (n - b.spin.twice()) / 2;
            EXPECT_EQ(b.multiplicity, binomial(n, k) - binomial(n, k - 1)) << "N=" << n << " j=" << b.spin.label();
        }
        EXPECT_EQ(total, std::uint64_t{1} << n) << n;
    }
    EXPECT_THROW(bc::block_multiplicities(0), bc::ValidationError);
}

TEST(FullSpaceCollective, SmallExamples) {
    const CMatrix z1 = bc::full_space_collective(1, SpinComponent::z);
    EXPECT_EQ(z1(0, 0), Complex(0.5));
    EXPECT_EQ(z1(1, 1), Complex(-0.5));

    const CMatrix z2 = bc::full_space_collective(2, SpinComponent::z);
    const double expected[] = {1.0, 0.0, 0.0, -1.0};
    for (int k = 0; k < 4; ++k) EXPECT_EQ(z2(k, k), Complex(expected[k]));
    EXPECT_EQ(z2.cwiseAbs().sum(), 2.0);

    const CMatrix c2 = bc::full_space_collective(2, SpinComponent::casimir);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(c2);
    EXPECT_NEAR(es.eigenvalues()(0), 0.0, 1e-12);
    for (int k = 1; k < 4; ++k) EXPECT_NEAR(es.eigenvalues()(k), 2.0, 1e-12);
}

TEST(FullSpaceCollective, CasimirDegeneraciesMatchMultiplicities) {
    for (int n = 1; n <= 8; ++n) {
        Eigen::SelfAdjointEigenSolver<CMatrix> es(bc::full_space_collective(n, SpinComponent::casimir), Eigen::EigenvaluesOnly);
        for (const auto &b : bc::block_multiplicities(n)) {
            const double jj = b.spin.casimir();
            long count = 0;
            for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) count += std::abs(es.eigenvalues()(k) - jj) < 1e-8;
            EXPECT_EQ(static_cast<std::uint64_t>(count), b.multiplicity * static_cast<std::uint64_t>(b.dim()))
                << "N=" << n << " j=" << b.spin.label();
        }
    }
}

TEST(FullSpaceCollective, AlgebraHoldsOnTheFullSpace) {
    const CMatrix x = bc::full_space_collective(3, SpinComponent::x);
    const CMatrix y = bc::full_space_collective(3, SpinComponent::y);
    const CMatrix z = bc::full_space_collective(3, SpinComponent::z);
    EXPECT_LT(bc::spectral_norm(CMatrix(x * y - y * x - Complex(0, 1) * z)), 1e-12);
}

TEST(FullSpaceCollective, CapIsEnforced) {
    EXPECT_THROW(bc::full_space_collective(13, SpinComponent::z), bc::ResourceError);
    try {
        bc::full_space_collective(5, SpinComponent::z, 4);
        FAIL();
    } catch (const bc::ResourceError &e) {
        EXPECT_EQ(e.requested(), 5);
        EXPECT_EQ(e.cap(), 4);
    }
}
