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

// Random instances shared by the property tests and the acceptance runner.

#include <random>

#include "qrobust/model.hpp"

namespace qrs::testing {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform(double lo = -1.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }

    CMat complex_matrix(Index r, Index c, double scale = 1.0) {
        CMat X(r, c);
        for (Index i = 0; i < r; ++i)
            for (Index j = 0; j < c; ++j) X(i, j) = cplx{uniform(), uniform()} * scale;
        return X;
    }
    CMat hermitian(Index n, double scale = 1.0) {
        const CMat X = complex_matrix(n, n, scale);
        return 0.5 * (X + X.adjoint());
    }
    CMat symmetric(Index n, double scale = 1.0) {
        const CMat X = complex_matrix(n, n, scale);
        return 0.5 * (X + X.transpose());
    }

    /// Nominal system with strong enough damping that F is usually Hurwitz.
    LinearNominalSystem system(Index n, Index m, double coupling = 2.0, double drive = 0.3) {
        LinearNominalSystem s;
        s.M1 = hermitian(n, drive);
        s.M2 = symmetric(n, drive);
        s.N1 = CMat::Identity(m, n) * coupling + complex_matrix(m, n, 0.2);
        s.N2 = complex_matrix(m, n, 0.1);
        return s;
    }

    /// Structured positive definite P = [[P1, P2], [P2#, P1#]].
    StructuredP structured_p(Index n, double floor = 1.0) {
        StructuredP p{hermitian(n, 0.5), symmetric(n, 0.3)};
        const double shift = floor - lambda_min(p.full());
        if (shift > 0.0) p.P1 += shift * CMat::Identity(n, n);
        return p;
    }

    std::mt19937_64& engine() { return gen_; }

private:
    std::mt19937_64 gen_;
};

/// The optical parametric amplifier: M = 0, N = sqrt(kappa), E = 1, Delta2 = i.
inline LinearNominalSystem opa_system(double kappa) {
    LinearNominalSystem s;
    s.M1 = CMat::Zero(1, 1);
    s.M2 = CMat::Zero(1, 1);
    s.N1 = CMat::Constant(1, 1, std::sqrt(kappa));
    s.N2 = CMat::Zero(1, 1);
    return s;
}

inline QuadraticPerturbation opa_perturbation(double gamma = 1.0) {
    QuadraticPerturbation p;
    p.E1 = CMat::Identity(1, 1);
    p.E2 = CMat::Zero(1, 1);
    p.Delta1 = CMat::Zero(1, 1);
    p.Delta2 = CMat::Constant(1, 1, kI);
    p.gamma = gamma;
    return p;
}

inline PolynomialPerturbation scalar_polynomial(const CMat& coeffs, double gamma = 1.0, double delta1 = 0.0,
                                                double delta2 = 0.0) {
    PolynomialPerturbation p;
    p.E1row = CMat::Identity(1, 1);
    p.E2row = CMat::Zero(1, 1);
    p.coeffs = coeffs;
    p.gamma = gamma;
    p.delta1 = delta1;
    p.delta2 = delta2;
    return p;
}

}  // namespace qrs::testing
