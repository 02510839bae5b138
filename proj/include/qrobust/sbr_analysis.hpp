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

// Strict bounded real robust-stability tests for a linear nominal system
// with a quadratic (set W3) or polynomial (set W4) Hamiltonian perturbation.
//
// Both tests share one shape:
//   1. F = -iJM - 1/2 J N^H J N must be Hurwitz;
//   2. ||C (sI - F)^{-1} B||_inf < gamma/2 for a perturbation channel (B, C);
//   3. a structured P > 0 with F^H P + P F + 4 P B B^H P + C^H C / gamma^2 < 0
//      yields V = x^H P x and the mean-square bound constants.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "qrobust/hinf.hpp"
#include "qrobust/model.hpp"
#include "qrobust/riccati.hpp"

namespace qrs {

/// Riccati shifts tried in order; the first giving a strict QMI and P > 0 wins.
inline constexpr std::array<double, 3> kEpsilonLadder{1e-2, 1e-4, 1e-6};

enum class FailureReason { None, NotHurwitz, NormTooLarge, QmiInfeasible };

inline const char* to_string(FailureReason r) {
    switch (r) {
        case FailureReason::None: return "None";
        case FailureReason::NotHurwitz: return "NotHurwitz";
        case FailureReason::NormTooLarge: return "NormTooLarge";
        case FailureReason::QmiInfeasible: return "QmiInfeasible";
    }
    return "?";
}

struct HurwitzResult {
    bool hurwitz = false;
    double abscissa = 0.0;
};

/// Perturbation channel of the bounded real condition.
struct Channel {
    CMat B;  // input matrix, 2n x k
    CMat C;  // output matrix, k' x 2n
};

struct QmiSolution {
    StructuredP P;
    CMat residual;  // QMI left-hand side at P
    RVec residual_eigenvalues;
    double epsilon = 0.0;
    std::string method;  // "direct" or "conjugate-augmented"
};

struct CertificateConstants {
    double c = 0.0;
    double lambda_tilde = 0.0;
    double lambda = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
    double c3 = 0.0;
};

struct StabilityCertificate {
    CMat F;
    double gamma = 0.0;
    double hinf_norm = 0.0;
    double gamma_margin = 0.0;  // gamma/2 - hinf_norm
    std::optional<StructuredP> P;
    double c = 0.0;
    double lambda_tilde = 0.0;
    std::optional<cplx> mu;
    double lambda = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
    double c3 = 0.0;
    FailureReason reason = FailureReason::None;
    std::string detail;

    // Solver diagnostics.
    double abscissa = 0.0;
    int hinf_iterations = 0;
    double epsilon = 0.0;
    std::string qmi_method;
    RVec residual_eigenvalues;

    [[nodiscard]] bool stable() const { return reason == FailureReason::None; }
    [[nodiscard]] std::string verdict() const {
        return stable() ? "RobustlyMeanSquareStable"
                        : std::string("ConditionFailed(") + to_string(reason) + ")";
    }
};

/// F = -iJM - 1/2 J N^H J N.
inline CMat compute_F(const CMat& M, const CMat& N, const CMat& J) {
    const CMat Jm = signature_matrix(N.rows() / 2);
    return -kI * J * M - 0.5 * J * N.adjoint() * Jm * N;
}

inline HurwitzResult is_hurwitz(const CMat& F) {
    if (F.rows() != F.cols()) throw StructuralError("dimension mismatch F/F: matrix must be square");
    const double a = spectral_abscissa(F);
    return {a < -kTolHurwitz, a};
}

/// Channel of the quadratic test: C = E, B = iJE^H.
inline Channel quadratic_channel(const CMat& E, const CMat& J) { return {kI * J * E.adjoint(), E}; }

/// Channel of the polynomial test: C = E~# Sigma, B = J Sigma E~^T.
inline Channel polynomial_channel(const CMat& Etilde, const CMat& J, const CMat& Sigma) {
    return {J * Sigma * Etilde.transpose(), Etilde.conjugate() * Sigma};
}

/// F^H P + P F + 4 P B B^H P + C^H C / gamma^2.
inline CMat qmi_lhs(const CMat& F, const Channel& ch, double gamma, const CMat& P) {
    return F.adjoint() * P + P * F + 4.0 * P * ch.B * ch.B.adjoint() * P +
           ch.C.adjoint() * ch.C / (gamma * gamma);
}

/// Structured P > 0 with a strictly negative QMI left-hand side.
///
/// Each shift eps solves F^H P + P F + P R P + Q + eps I = 0 and projects the
/// result onto the doubled form, P <- (P + Sigma P# Sigma)/2, before checking
/// the QMI. When the channel data are not conjugation-symmetric the projection
/// can break the inequality, so the symmetrised problem
/// (R + Sigma R# Sigma, Q + Sigma Q# Sigma) is tried next; its stabilizing
/// solution is structured and dominates the original QMI.
inline QmiSolution solve_structured_qmi(const CMat& F, const Channel& ch, double gamma) {
    const Index dim = F.rows();
    const CMat Sigma = swap_matrix(dim / 2);
    const CMat R = 4.0 * ch.B * ch.B.adjoint();
    const CMat Q = ch.C.adjoint() * ch.C / (gamma * gamma);
    const CMat Rs = R + Sigma * R.conjugate() * Sigma;
    const CMat Qs = Q + Sigma * Q.conjugate() * Sigma;
    const bool symmetric = rel_diff(Rs, 2.0 * R) < 1e-12 && rel_diff(Qs, 2.0 * Q) < 1e-12;

    struct Attempt {
        const char* name;
        const CMat* R;
        const CMat* Q;
    };
    std::vector<Attempt> attempts{{"direct", &R, &Q}};
    if (!symmetric) attempts.push_back({"conjugate-augmented", &Rs, &Qs});

    double best = std::numeric_limits<double>::infinity();
    for (const double eps : kEpsilonLadder) {
        for (const auto& a : attempts) {
            const auto X = solve_care_stabilizing(F, *a.R, *a.Q + eps * CMat::Identity(dim, dim));
            if (!X) continue;
            const CMat P = hermitian_part(0.5 * (*X + Sigma * X->conjugate() * Sigma));
            if (!(lambda_min(P) > 0.0)) continue;
            QmiSolution sol;
            sol.residual = qmi_lhs(F, ch, gamma, P);
            sol.residual_eigenvalues = hermitian_eigenvalues(sol.residual);
            const double top = sol.residual_eigenvalues(dim - 1);
            best = std::min(best, top);
            if (top < 0.0) {
                sol.P = StructuredP::from_full(P);
                sol.epsilon = eps;
                sol.method = a.name;
                return sol;
            }
        }
    }
    throw QmiInfeasible("no structured P > 0 satisfies the QMI strictly", best);
}

/// QMI for the quadratic perturbation: F^H P + P F + 4 P J E^H E J P + E^H E / gamma^2 < 0.
inline QmiSolution solve_qmi_quadratic(const CMat& F, const CMat& E, const CMat& J, double gamma) {
    return solve_structured_qmi(F, quadratic_channel(E, J), gamma);
}

/// The constant mu = [zeta, [V, zeta]] for zeta = E~ x and V = x^H P x:
/// mu = 2 E~ Sigma J P^T J E~^T.
inline cplx compute_mu(const StructuredP& P, const CMat& Etilde, const CMat& J, const CMat& Sigma) {
    return 2.0 * (Etilde * Sigma * J * P.full().transpose() * J * Etilde.transpose())(0, 0);
}

/// tr(P J N^H diag(I_m, 0) N J).
inline double lambda_tilde(const CMat& P, const CMat& N) {
    const Index m = N.rows() / 2;
    const CMat J = signature_matrix(P.rows() / 2);
    CMat top = CMat::Zero(2 * m, 2 * m);
    top.topLeftCorner(m, m).setIdentity();
    return (P * J * N.adjoint() * top * N * J).trace().real();
}

/// Decay rate c (largest with residual + cP <= 0), lambda~ and the
/// mean-square constants c1 = lmax(P)/lmin(P), c2 = c, c3 = lambda/(c lmin(P))
/// with lambda = lambda~ + extra_lambda.
inline CertificateConstants certificate_constants(const StructuredP& sp, const CMat& residual, const CMat& N,
                                                  double extra_lambda = 0.0) {
    const CMat P = sp.full();
    if (!(lambda_max(residual) < 0.0))
        throw NumericalError("certificate_constants: QMI residual is not strictly negative");
    Eigen::LLT<CMat> llt(P);
    if (llt.info() != Eigen::Success) throw NumericalError("certificate_constants: P is not positive definite");

    // Generalized eigenvalue of (-residual, P) via L^{-1} (-residual) L^{-H}.
    const CMat Linv = llt.matrixL().solve(CMat::Identity(P.rows(), P.cols()));
    const CMat W = Linv * (-residual) * Linv.adjoint();

    CertificateConstants k;
    k.c = lambda_min(W);
    k.lambda_tilde = lambda_tilde(P, N);
    k.lambda = k.lambda_tilde + extra_lambda;
    const RVec ev = hermitian_eigenvalues(P);
    const double pmin = ev(0);
    const double pmax = ev(ev.size() - 1);
    k.c1 = pmax / pmin;
    k.c2 = k.c;
    k.c3 = k.lambda / (k.c * pmin);
    return k;
}

namespace detail {

inline StabilityCertificate bounded_real_test(const DoubledSystem& d, const Channel& ch, double gamma) {
    StabilityCertificate cert;
    cert.gamma = gamma;
    cert.F = compute_F(d.M, d.N, d.J);
    const auto hw = is_hurwitz(cert.F);
    cert.abscissa = hw.abscissa;
    if (!hw.hurwitz) {
        cert.reason = FailureReason::NotHurwitz;
        cert.hinf_norm = std::numeric_limits<double>::infinity();
        cert.gamma_margin = -std::numeric_limits<double>::infinity();
        cert.detail = "spectral abscissa " + std::to_string(hw.abscissa);
        return cert;
    }
    const auto h = hinf_norm(cert.F, ch.B, ch.C);
    cert.hinf_norm = h.norm;
    cert.hinf_iterations = h.iterations;
    cert.gamma_margin = 0.5 * gamma - h.norm;
    if (!(h.norm < 0.5 * gamma)) {
        cert.reason = FailureReason::NormTooLarge;
        cert.detail = "H-infinity norm " + std::to_string(h.norm) + " >= gamma/2";
        return cert;
    }
    return cert;
}

inline void attach_qmi(StabilityCertificate& cert, const QmiSolution& sol) {
    cert.P = sol.P;
    cert.epsilon = sol.epsilon;
    cert.qmi_method = sol.method;
    cert.residual_eigenvalues = sol.residual_eigenvalues;
}

inline void attach_constants(StabilityCertificate& cert, const CertificateConstants& k) {
    cert.c = k.c;
    cert.lambda_tilde = k.lambda_tilde;
    cert.lambda = k.lambda;
    cert.c1 = k.c1;
    cert.c2 = k.c2;
    cert.c3 = k.c3;
}

}  // namespace detail

/// Robust mean-square stability test for a quadratic perturbation.
/// c3 uses delta = 0, which the W3 sector bound admits.
inline StabilityCertificate check_theorem3(const LinearNominalSystem& sys, const QuadraticPerturbation& pert) {
    const auto d = assemble_doubled(sys, pert);
    const Channel ch = quadratic_channel(d.E, d.J);
    auto cert = detail::bounded_real_test(d, ch, pert.gamma);
    if (!cert.stable()) return cert;
    const double excess = spectral_norm(assemble_Delta(pert)) - 2.0 / pert.gamma;
    if (excess > kTolStruct * std::max(1.0, 2.0 / pert.gamma))
        cert.detail = "supplied Delta lies outside the certified class ||Delta|| <= 2/gamma";
    try {
        const auto sol = solve_structured_qmi(cert.F, ch, pert.gamma);
        detail::attach_qmi(cert, sol);
        detail::attach_constants(cert, certificate_constants(sol.P, sol.residual, d.N));
    } catch (const QmiInfeasible& e) {
        cert.reason = FailureReason::QmiInfeasible;
        cert.detail = std::string(e.what()) + " (best residual " + std::to_string(e.residual()) + ")";
    }
    return cert;
}

/// Robust mean-square stability test for a polynomial perturbation of a
/// scalar zeta. lambda = lambda~ + delta1 + |mu|^2/4 + delta2.
inline StabilityCertificate check_theorem4(const LinearNominalSystem& sys, const PolynomialPerturbation& pert) {
    const auto d = assemble_doubled(sys, pert);
    const Channel ch = polynomial_channel(d.E, d.J, d.Sigma);
    auto cert = detail::bounded_real_test(d, ch, pert.gamma);
    if (!cert.stable()) return cert;
    try {
        const auto sol = solve_structured_qmi(cert.F, ch, pert.gamma);
        detail::attach_qmi(cert, sol);
        const cplx mu = compute_mu(sol.P, d.E, d.J, d.Sigma);
        cert.mu = mu;
        const double extra = pert.delta1 + std::norm(mu) / 4.0 + pert.delta2;
        detail::attach_constants(cert, certificate_constants(sol.P, sol.residual, d.N, extra));
    } catch (const QmiInfeasible& e) {
        cert.reason = FailureReason::QmiInfeasible;
        cert.detail = std::string(e.what()) + " (best residual " + std::to_string(e.residual()) + ")";
    }
    return cert;
}

inline StabilityCertificate analyze(const LinearNominalSystem& sys, const Perturbation& pert) {
    if (const auto* q = std::get_if<QuadraticPerturbation>(&pert)) return check_theorem3(sys, *q);
    return check_theorem4(sys, std::get<PolynomialPerturbation>(pert));
}

}  // namespace qrs
