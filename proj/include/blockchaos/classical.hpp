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

// Classical kicked top on the unit sphere: a rotation by alpha about x
// followed by a z-dependent twist about z, renormalised after every step.

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <vector>

#include "blockchaos/errors.hpp"

namespace blockchaos {

struct ClassicalState {
    double x = 0.0;
    double y = 0.0;
    double z = 1.0;

    double norm() const { return std::sqrt(x * x + y * y + z * z); }

    /// Rescales onto the unit sphere; rejects the zero vector.
    static ClassicalState normalized(double x, double y, double z) {
        const double n = std::sqrt(x * x + y * y + z * z);
        if (!(n > 0.0) || !std::isfinite(n)) throw ValidationError("classical state must be a finite nonzero vector");
        return ClassicalState{x / n, y / n, z / n};
    }
};

/// One period. With rho = y sin(alpha) + z cos(alpha):
///   x' = x cos(tau rho) - (y cos(alpha) - z sin(alpha)) sin(tau rho)
///   y' = x sin(tau rho) + (y cos(alpha) - z sin(alpha)) cos(tau rho)
///   z' = rho
inline ClassicalState step(const ClassicalState &s, double alpha, double tau) {
    const double ca = std::cos(alpha), sa = std::sin(alpha);
    const double rho = s.y * sa + s.z * ca;
    const double yr = s.y * ca - s.z * sa;
    const double ct = std::cos(tau * rho), st = std::sin(tau * rho);
    const double x = s.x * ct - yr * st;
    const double y = s.x * st + yr * ct;
    const double n = std::sqrt(x * x + y * y + rho * rho);
    return ClassicalState{x / n, y / n, rho / n};
}

/// The six reference initial conditions (Jx, Jy, Jz), unnormalised.
inline std::vector<std::array<double, 3>> default_portrait_initial_conditions() {
    return {{-1.0, -3.0, -3.0}, {-1.0, -1.3, -2.0}, {-1.0, -0.3, -1.0},
            {1.0, -1.0, 1.0},   {0.0, -2.0, 1.0},   {0.0, -2.0, 2.0}};
}

struct PortraitPoint {
    std::size_t trajectory = 0;
    std::size_t step = 0;
    double jx = 0.0;
    double jz = 0.0;
};

/// (Jx, Jz) after each of n_steps periods, trajectory-major. Initial
/// conditions are normalised on intake.
inline std::vector<PortraitPoint> phase_portrait(const std::vector<std::array<double, 3>> &initial, double alpha,
                                                 double tau, std::size_t n_steps) {
    std::vector<PortraitPoint> out;
    out.reserve(initial.size() * n_steps);
    for (std::size_t t = 0; t < initial.size(); ++t) {
        ClassicalState s = ClassicalState::normalized(initial[t][0], initial[t][1], initial[t][2]);
        for (std::size_t k = 1; k <= n_steps; ++k) {
            s = step(s, alpha, tau);
            out.push_back(PortraitPoint{t, k, s.x, s.z});
        }
    }
    return out;
}

}  // namespace blockchaos
