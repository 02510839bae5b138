// Copyright 2026 The qrobust Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace qrs {

/// Inconsistent dimensions between fields of a model object.
class StructuralError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An operation was called outside its documented domain (e.g. an unstable
/// state matrix passed to the H-infinity norm).
class PreconditionError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Failure of an iterative numerical kernel.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// No strictly feasible structured solution of the Riccati inequality was found.
class QmiInfeasible : public NumericalError {
public:
    QmiInfeasible(const std::string& what, double residual)
        : NumericalError(what), residual_(residual) {}

    /// Largest eigenvalue of the QMI left-hand side for the best candidate
    /// (positive, or +inf when no stabilizing Riccati solution existed).
    [[nodiscard]] double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Malformed system description file.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace qrs
