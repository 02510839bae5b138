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

#include <optional>

#include "qrobust/linalg.hpp"

namespace qrs {

/// Stabilizing solution of the continuous algebraic Riccati equation
///
///   A^H X + X A + X R X + Q = 0,   R, Q Hermitian,
///
/// from the stable invariant subspace of [[A, R], [-Q, -A^H]] (ordered
/// complex Schur form). A + R X is Hurwitz for the returned X. Returns
/// nullopt when the Hamiltonian matrix has eigenvalues on (or numerically
/// indistinguishable from) the imaginary axis, or when the invariant
/// subspace is not a graph.
inline std::optional<CMat> solve_care_stabilizing(const CMat& A, const CMat& R, const CMat& Q) {
    const Index n = A.rows();
    CMat H(2 * n, 2 * n);
    H << A, R, -Q, -A.adjoint();

    const double axis_tol = 1e-10 * std::max(1.0, H.norm());
    const auto schur = ordered_schur(H, [](cplx l) { return l.real() < 0.0; });
    for (Index i = 0; i < 2 * n; ++i)
        if (std::abs(schur.T(i, i).real()) <= axis_tol) return std::nullopt;
    if (schur.selected != n) return std::nullopt;

    const CMat U11 = schur.U.topLeftCorner(n, n);
    const CMat U21 = schur.U.bottomLeftCorner(n, n);
    Eigen::PartialPivLU<CMat> lu(U11.adjoint());
    if (!(lu.rcond() > 1e-13)) return std::nullopt;
    const CMat X = lu.solve(U21.adjoint()).adjoint();
    return hermitian_part(X);
}

/// A^H X + X A + X R X + Q.
inline CMat care_residual(const CMat& A, const CMat& R, const CMat& Q, const CMat& X) {
    return A.adjoint() * X + X * A + X * R * X + Q;
}

}  // namespace qrs
