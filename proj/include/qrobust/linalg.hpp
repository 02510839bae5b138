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

// Dense complex linear-algebra helpers shared by all modules. Doubled-up
// ("block-conjugate") matrices live on vectors x = [a; a#] of length 2n.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <utility>

#include <Eigen/Dense>

#include "qrobust/errors.hpp"

namespace qrs {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr cplx kI{0.0, 1.0};

/// J = diag(I_n, -I_n).
inline CMat signature_matrix(Index n) {
    CMat J = CMat::Zero(2 * n, 2 * n);
    J.topLeftCorner(n, n).setIdentity();
    J.bottomRightCorner(n, n) = -CMat::Identity(n, n);
    return J;
}

/// Sigma = [[0, I_n], [I_n, 0]].
inline CMat swap_matrix(Index n) {
    CMat S = CMat::Zero(2 * n, 2 * n);
    S.topRightCorner(n, n).setIdentity();
    S.bottomLeftCorner(n, n).setIdentity();
    return S;
}

/// Entrywise complex conjugate (the # operation on matrices).
inline CMat sharp(const CMat& X) { return X.conjugate(); }

/// [[X1, X2], [X2#, X1#]].
inline CMat doubled(const CMat& X1, const CMat& X2) {
    CMat X(2 * X1.rows(), 2 * X1.cols());
    X << X1, X2, X2.conjugate(), X1.conjugate();
    return X;
}

/// Sigma_{rows} X# Sigma_{cols}; fixed points are exactly the doubled matrices.
inline CMat conjugation_image(const CMat& X) {
    return swap_matrix(X.rows() / 2) * X.conjugate() * swap_matrix(X.cols() / 2);
}

inline CMat hermitian_part(const CMat& X) { return 0.5 * (X + X.adjoint()); }

/// ||A - B||_F / max(1, ||B||_F).
inline double rel_diff(const CMat& A, const CMat& B) {
    return (A - B).norm() / std::max(1.0, B.norm());
}

/// Ascending eigenvalues of the Hermitian part of X.
inline RVec hermitian_eigenvalues(const CMat& X) {
    if (X.rows() == 0) return RVec{};
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(X), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw NumericalError("Hermitian eigenvalue iteration did not converge");
    return es.eigenvalues();
}

inline double lambda_max(const CMat& X) {
    const RVec ev = hermitian_eigenvalues(X);
    return ev.size() ? ev(ev.size() - 1) : -std::numeric_limits<double>::infinity();
}

inline double lambda_min(const CMat& X) {
    const RVec ev = hermitian_eigenvalues(X);
    return ev.size() ? ev(0) : std::numeric_limits<double>::infinity();
}

/// Largest singular value; 0 for empty matrices.
inline double spectral_norm(const CMat& X) {
    if (X.size() == 0) return 0.0;
    Eigen::JacobiSVD<CMat> svd(X);
    return svd.singularValues()(0);
}

inline CVec eigenvalues(const CMat& A) {
    if (A.rows() == 0) return CVec{};
    Eigen::ComplexEigenSolver<CMat> es(A, false);
    if (es.info() != Eigen::Success)
        throw NumericalError("complex eigenvalue iteration did not converge (dim " +
                             std::to_string(A.rows()) + ")");
    return es.eigenvalues();
}

/// max Re(lambda_i(A)).
inline double spectral_abscissa(const CMat& A) {
    const CVec ev = eigenvalues(A);
    double a = -std::numeric_limits<double>::infinity();
    for (Index i = 0; i < ev.size(); ++i) a = std::max(a, ev(i).real());
    return a;
}

/// Complex Schur form A = U T U^H with the eigenvalues selected by `keep`
/// moved to the leading block.
struct OrderedSchur {
    CMat T;
    CMat U;
    Index selected = 0;
};

inline OrderedSchur ordered_schur(const CMat& A, const std::function<bool(cplx)>& keep) {
    Eigen::ComplexSchur<CMat> schur(A);
    if (schur.info() != Eigen::Success)
        throw NumericalError("complex Schur iteration did not converge");
    OrderedSchur out{schur.matrixT(), schur.matrixU(), 0};
    CMat& T = out.T;
    CMat& U = out.U;
    const Index n = T.rows();

    // Swap adjacent diagonal entries (k, k+1) with a Givens rotation built
    // from the eigenvector of the 2x2 block belonging to T(k+1, k+1).
    auto swap_adjacent = [&](Index k) {
        const cplx t11 = T(k, k);
        const cplx t22 = T(k + 1, k + 1);
        cplx v1 = T(k, k + 1);
        cplx v2 = t22 - t11;
        const double nrm = std::hypot(std::abs(v1), std::abs(v2));
        if (nrm == 0.0) return;  // equal eigenvalues with zero coupling
        v1 /= nrm;
        v2 /= nrm;
        Eigen::Matrix2cd G;
        G << v1, -std::conj(v2), v2, std::conj(v1);
        T.middleRows(k, 2) = G.adjoint() * T.middleRows(k, 2);
        T.middleCols(k, 2) = T.middleCols(k, 2) * G;
        U.middleCols(k, 2) = U.middleCols(k, 2) * G;
        T(k + 1, k) = 0.0;
        T(k, k) = t22;
        T(k + 1, k + 1) = t11;
    };

    Index next = 0;
    for (Index j = 0; j < n; ++j) {
        if (!keep(T(j, j))) continue;
        for (Index k = j - 1; k >= next; --k) swap_adjacent(k);
        ++next;
    }
    out.selected = next;
    return out;
}

}  // namespace qrs
