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

#pragma once

#include <stdexcept>
#include <string>

namespace blockchaos {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition.
class ValidationError : public Error {
  public:
    using Error::Error;
};

/// Request would exceed a configured size cap (exponential-cost builders).
class ResourceError : public Error {
  public:
    ResourceError(const std::string &what, long long requested, long long cap)
        : Error(what + " (requested " + std::to_string(requested) + ", cap " + std::to_string(cap) + ")"),
          requested_(requested),
          cap_(cap) {}

    long long requested() const noexcept { return requested_; }
    long long cap() const noexcept { return cap_; }

  private:
    long long requested_;
    long long cap_;
};

/// Matrix handed to an eigenphase routine is not unitary within tolerance.
class NonUnitaryError : public ValidationError {
  public:
    NonUnitaryError(double deviation, double tolerance)
        : ValidationError("matrix is not unitary: ||U^dag U - I|| = " + std::to_string(deviation) +
                          " exceeds " + std::to_string(tolerance)),
          deviation_(deviation) {}

    double deviation() const noexcept { return deviation_; }

  private:
    double deviation_;
};

/// Operator fails to commute with a symmetry it is required to respect.
class SymmetryError : public Error {
  public:
    SymmetryError(const std::string &what, double commutator_norm)
        : Error(what + ": commutator norm " + std::to_string(commutator_norm)),
          commutator_norm_(commutator_norm) {}

    double commutator_norm() const noexcept { return commutator_norm_; }

  private:
    double commutator_norm_;
};

}  // namespace blockchaos
