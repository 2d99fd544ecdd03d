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

// Gaussian random matrices. Entries are drawn row-major from std::mt19937_64
// through std::normal_distribution, so a seed fixes a matrix bit-exactly for a
// given standard library.

#pragma once

#include <cstdint>
#include <random>

#include "blockchaos/errors.hpp"
#include "blockchaos/linalg.hpp"

namespace blockchaos {

/// A = (M + M^T) / 2 with M_ij iid N(0, 1): off-diagonal variance 1/2, diagonal variance 1.
inline RMatrix sample_goe(Eigen::Index dim, std::uint64_t seed) {
    if (dim < 1) throw ValidationError("sample_goe: dim must be >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    RMatrix m(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r) {
        for (Eigen::Index c = 0; c < dim; ++c) m(r, c) = normal(rng);
    }
    return 0.5 * (m + m.transpose());
}

/// H = (M + M^dag) / 2 with Re M_ij, Im M_ij iid N(0, 1).
inline CMatrix sample_gue(Eigen::Index dim, std::uint64_t seed) {
    if (dim < 1) throw ValidationError("sample_gue: dim must be >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    CMatrix m(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r) {
        for (Eigen::Index c = 0; c < dim; ++c) {
            const double re = normal(rng);
            m(r, c) = Complex(re, normal(rng));
        }
    }
    return 0.5 * (m + m.adjoint());
}

}  // namespace blockchaos
