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

#include <catch_amalgamated.hpp>

#include "qrobust/sbr_analysis.hpp"
#include "support.hpp"

using namespace qrs;
using Catch::Approx;
using qrs::testing::Rng;

namespace {

CMat opa_F(double kappa) {
    const auto d = assemble_doubled(testing::opa_system(kappa), testing::opa_perturbation());
    return compute_F(d.M, d.N, d.J);
}

void check_certificate_invariants(const StabilityCertificate& c) {
    REQUIRE(c.stable());
    REQUIRE(c.P);
    const CMat P = c.P->full();
    CHECK(validate(*c.P).empty());
    CHECK(rel_diff(P, conjugation_image(P)) < 1e-8);
    CHECK(spectral_abscissa(c.F) < 0.0);
    CHECK(c.hinf_norm < 0.5 * c.gamma);
    CHECK(c.c > 0.0);
    CHECK(c.residual_eigenvalues.maxCoeff() < 0.0);
    const RVec ev = hermitian_eigenvalues(P);
    CHECK(c.c1 == Approx(ev.maxCoeff() / ev.minCoeff()).epsilon(1e-12));
    CHECK(c.c2 == c.c);
    CHECK(c.c3 == Approx(c.lambda / (c.c * ev.minCoeff())).epsilon(1e-12));
}

}  // namespace

TEST_CASE("F for the OPA and simple cases") {
    CHECK((opa_F(5.0) + 2.5 * CMat::Identity(2, 2)).norm() < 1e-14);
    const CMat J = signature_matrix(1);
    CHECK(compute_F(CMat::Zero(2, 2), CMat::Zero(2, 2), J).norm() == 0.0);
    CMat M = CMat::Identity(2, 2);  // M1 = 1, M2 = 0
    const CMat F = compute_F(M, CMat::Zero(2, 2), J);
    CHECK(std::abs(F(0, 0) + kI) < 1e-15);
    CHECK(std::abs(F(1, 1) - kI) < 1e-15);
}

TEST_CASE("Hurwitz test reports the abscissa") {
    const auto a = is_hurwitz(opa_F(5.0));
    CHECK(a.hurwitz);
    CHECK(a.abscissa == Approx(-2.5));
    const auto b = is_hurwitz(CMat::Zero(2, 2));
    CHECK_FALSE(b.hurwitz);
    CHECK(b.abscissa == Approx(0.0).margin(1e-15));
    CMat D = CMat::Zero(2, 2);
    D(0, 0) = -kI;
    D(1, 1) = kI;
    CHECK_FALSE(is_hurwitz(D).hurwitz);
}

TEST_CASE("quadratic test on the OPA") {
    const auto s5 = check_theorem3(testing::opa_system(5.0), testing::opa_perturbation(1.0));
    CHECK(s5.verdict() == "RobustlyMeanSquareStable");
    CHECK(s5.hinf_norm == Approx(0.4).epsilon(1e-7));
    check_certificate_invariants(s5);

    const auto s3 = check_theorem3(testing::opa_system(3.0), testing::opa_perturbation(1.0));
    CHECK(s3.verdict() == "ConditionFailed(NormTooLarge)");
    CHECK(s3.gamma_margin < 0.0);
    CHECK_FALSE(s3.P);

    const auto s10 = check_theorem3(testing::opa_system(5.0), testing::opa_perturbation(10.0));
    CHECK(s10.stable());
    CHECK(s10.gamma_margin == Approx(4.6).epsilon(1e-7));
    CHECK_THAT(s10.detail, Catch::Matchers::ContainsSubstring("outside the certified class"));

    const auto sn = check_theorem3(testing::opa_system(0.0), testing::opa_perturbation(1.0));
    CHECK(sn.verdict() == "ConditionFailed(NotHurwitz)");
}

TEST_CASE("threshold of the OPA sits at kappa = 4") {
    CHECK(check_theorem3(testing::opa_system(4.01), testing::opa_perturbation()).stable());
    CHECK_FALSE(check_theorem3(testing::opa_system(3.99), testing::opa_perturbation()).stable());
}

TEST_CASE("scalar QMI of the OPA") {
    // For P = p I the QMI reads (-kappa p + 4 p^2 + 1) I < 0.
    const CMat J = signature_matrix(1);
    const CMat E = CMat::Identity(2, 2);
    const CMat hand = qmi_lhs(opa_F(5.0), quadratic_channel(E, J), 1.0, 0.5 * CMat::Identity(2, 2));
    CHECK((hand + 0.5 * CMat::Identity(2, 2)).norm() < 1e-14);

    const auto sol = solve_qmi_quadratic(opa_F(5.0), E, J, 1.0);
    CHECK(sol.residual_eigenvalues.maxCoeff() < 0.0);
    CHECK(lambda_min(sol.P.full()) > 0.0);
    const double p = sol.P.P1(0, 0).real();
    CHECK(p > 0.25);
    CHECK(p < 1.0);

    CHECK_NOTHROW(solve_qmi_quadratic(opa_F(4.01), E, J, 1.0));
    CHECK_THROWS_AS(solve_qmi_quadratic(opa_F(3.0), E, J, 1.0), QmiInfeasible);
}

TEST_CASE("certificate constants for P = 0.5 I") {
    const CMat J = signature_matrix(1);
    const CMat N = std::sqrt(5.0) * CMat::Identity(2, 2);
    const StructuredP P{CMat::Constant(1, 1, 0.5), CMat::Zero(1, 1)};
    const CMat residual = qmi_lhs(opa_F(5.0), quadratic_channel(CMat::Identity(2, 2), J), 1.0, P.full());
    const auto k = certificate_constants(P, residual, N);
    CHECK(k.lambda_tilde == Approx(2.5));
    CHECK(k.c == Approx(1.0));
    CHECK(k.c1 == Approx(1.0));
    CHECK(k.c3 == Approx(5.0));
    CHECK(lambda_tilde(CMat::Identity(2, 2), CMat::Zero(2, 2)) == 0.0);
    CHECK_THROWS_AS(certificate_constants(P, -residual, N), NumericalError);
}

TEST_CASE("decay rate is the largest admissible c") {
    Rng rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        const Index n = rng.integer(1, 3);
        const StructuredP P = rng.structured_p(n, 0.5);
        const CMat X = rng.complex_matrix(2 * n, 2 * n);
        const CMat residual = -(X * X.adjoint() + 0.1 * CMat::Identity(2 * n, 2 * n));
        const auto k = certificate_constants(P, residual, rng.complex_matrix(2 * n, 2 * n));
        CHECK(lambda_max(residual + k.c * P.full()) == Approx(0.0).margin(1e-10));
        CHECK(lambda_max(residual + k.c * (1.0 + 1e-6) * P.full()) > 0.0);
    }
}

TEST_CASE("polynomial test on the OPA nominal dynamics") {
    CMat S = CMat::Zero(3, 3);
    S(2, 0) = 1.0;
    S(0, 2) = 1.0;
    const auto c5 = check_theorem4(testing::opa_system(5.0), testing::scalar_polynomial(S));
    CHECK(c5.hinf_norm == Approx(0.4).epsilon(1e-7));
    check_certificate_invariants(c5);
    REQUIRE(c5.mu);
    CHECK(c5.lambda == Approx(c5.lambda_tilde + std::norm(*c5.mu) / 4.0).epsilon(1e-12));

    const auto c3 = check_theorem4(testing::opa_system(3.0), testing::scalar_polynomial(S));
    CHECK(c3.verdict() == "ConditionFailed(NormTooLarge)");

    auto zero = testing::scalar_polynomial(S);
    zero.E1row = CMat::Zero(1, 1);
    const auto cz = check_theorem4(testing::opa_system(5.0), zero);
    CHECK(cz.hinf_norm == 0.0);
    CHECK(cz.stable());
}

TEST_CASE("mu from the commutator formula") {
    const CMat J = signature_matrix(1);
    const CMat Sg = swap_matrix(1);
    CMat Et(1, 2);
    Et << 1, 0;
    const StructuredP I{CMat::Identity(1, 1), CMat::Zero(1, 1)};
    CHECK(std::abs(compute_mu(I, Et, J, Sg)) < 1e-15);
    // [a, [V, a]] = -2 P2 for V = x^H P x.
    const StructuredP P{CMat::Identity(1, 1), CMat::Constant(1, 1, 0.5)};
    CHECK(std::abs(compute_mu(P, Et, J, Sg) - cplx(-1.0, 0.0)) < 1e-15);
    CHECK(std::abs(compute_mu(P, CMat::Zero(1, 2), J, Sg)) == 0.0);
}

TEST_CASE("random quadratic systems yield consistent certificates") {
    Rng rng(29);
    int stable = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const Index n = rng.integer(1, 3);
        const Index m = rng.integer(1, 2);
        const auto sys = rng.system(n, std::max(n, m), 2.5);
        QuadraticPerturbation p;
        p.E1 = rng.complex_matrix(m, n, 0.4);
        p.E2 = rng.complex_matrix(m, n, 0.2);
        p.Delta1 = rng.hermitian(m, 0.3);
        p.Delta2 = rng.symmetric(m, 0.3);
        p.gamma = 1.0;
        const auto c = check_theorem3(sys, p);
        if (!c.stable()) {
            CHECK(c.reason != FailureReason::None);
            continue;
        }
        ++stable;
        check_certificate_invariants(c);
        CHECK(c.lambda == Approx(lambda_tilde(c.P->full(), assemble_N(sys))));
    }
    CHECK(stable >= 20);
}

TEST_CASE("random polynomial systems yield structured certificates") {
    Rng rng(31);
    int stable = 0;
    for (int trial = 0; trial < 30; ++trial) {
        const Index n = rng.integer(1, 3);
        const auto sys = rng.system(n, n, 2.5);
        CMat S = CMat::Zero(3, 3);
        S(2, 0) = cplx(rng.uniform(), rng.uniform());
        S(0, 2) = std::conj(S(2, 0));
        S(1, 1) = rng.uniform();
        PolynomialPerturbation p = testing::scalar_polynomial(S);
        p.E1row = rng.complex_matrix(1, n, 0.5);
        p.E2row = rng.complex_matrix(1, n, 0.3);
        const auto c = check_theorem4(sys, p);
        if (!c.stable()) continue;
        ++stable;
        check_certificate_invariants(c);
    }
    CHECK(stable >= 15);
}
