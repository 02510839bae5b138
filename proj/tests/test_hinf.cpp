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

#include "qrobust/hinf.hpp"
#include "qrobust/riccati.hpp"
#include "support.hpp"

using namespace qrs;
using Catch::Approx;
using qrs::testing::Rng;

namespace {

// Dense log/linear frequency sweep, refined around the best sample.
double grid_peak(const CMat& A, const CMat& B, const CMat& C) {
    double best = 0.0, wbest = 0.0;
    auto visit = [&](double w) {
        const double g = gain_at(A, B, C, w);
        if (g > best) {
            best = g;
            wbest = w;
        }
    };
    for (int k = -4000; k <= 4000; ++k) visit(k * 0.005);
    for (int k = 0; k <= 600; ++k) {
        const double w = std::pow(10.0, -3.0 + 0.01 * k);
        visit(w);
        visit(-w);
    }
    double step = 0.005;
    for (int round = 0; round < 30; ++round) {
        const double c = wbest;
        for (int k = -10; k <= 10; ++k) visit(c + k * step / 10.0);
        step /= 10.0;
    }
    return best;
}

CMat stable_matrix(Rng& rng, Index n) {
    CMat A = rng.complex_matrix(n, n, 1.5);
    const double a = spectral_abscissa(A);
    A -= (a + 0.5 + rng.uniform(0.0, 1.0)) * CMat::Identity(n, n);
    return A;
}

}  // namespace

TEST_CASE("signature and swap matrices") {
    const CMat J = signature_matrix(2);
    CHECK(J(0, 0) == cplx(1.0));
    CHECK(J(3, 3) == cplx(-1.0));
    const CMat S = swap_matrix(2);
    CHECK(S(0, 2) == cplx(1.0));
    CHECK(S(3, 1) == cplx(1.0));
    CHECK(S.diagonal().norm() == 0.0);
}

TEST_CASE("spectral abscissa of simple matrices") {
    CHECK(spectral_abscissa(-2.5 * CMat::Identity(2, 2)) == Approx(-2.5));
    CHECK(spectral_abscissa(CMat::Zero(2, 2)) == Approx(0.0));
    CMat D = CMat::Zero(2, 2);
    D(0, 0) = -kI;
    D(1, 1) = kI;
    CHECK(std::abs(spectral_abscissa(D)) < 1e-15);
}

TEST_CASE("ordered Schur form reorders and reconstructs") {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const Index n = rng.integer(2, 8);
        const CMat A = rng.complex_matrix(n, n);
        const auto s = ordered_schur(A, [](cplx l) { return l.real() < 0.0; });
        CHECK(rel_diff(s.U * s.T * s.U.adjoint(), A) < 1e-12);
        CHECK((s.U.adjoint() * s.U - CMat::Identity(n, n)).norm() < 1e-12);
        CHECK(s.T.triangularView<Eigen::StrictlyLower>().toDenseMatrix().norm() == 0.0);
        Index negatives = 0;
        const CVec ev = eigenvalues(A);
        for (Index i = 0; i < n; ++i) negatives += ev(i).real() < 0.0;
        CHECK(s.selected == negatives);
        for (Index i = 0; i < n; ++i) CHECK((s.T(i, i).real() < 0.0) == (i < s.selected));
    }
}

TEST_CASE("stabilizing Riccati solution") {
    Rng rng(5);
    int solved = 0;
    for (int trial = 0; trial < 30; ++trial) {
        const Index n = rng.integer(1, 5);
        const CMat A = stable_matrix(rng, n);
        const CMat Bm = rng.complex_matrix(n, n, 0.2);
        const CMat Cm = rng.complex_matrix(n, n, 0.2);
        const CMat R = Bm * Bm.adjoint();
        const CMat Q = Cm.adjoint() * Cm + 1e-3 * CMat::Identity(n, n);
        const auto X = solve_care_stabilizing(A, R, Q);
        if (!X) continue;
        ++solved;
        CHECK(care_residual(A, R, Q, *X).norm() < 1e-9 * std::max(1.0, X->norm()));
        CHECK(spectral_abscissa(A + R * *X) < 0.0);
        CHECK(rel_diff(*X, X->adjoint()) < 1e-12);
    }
    CHECK(solved >= 25);
}

TEST_CASE("scalar Riccati closed form") {
    // -5p + 4p^2 + 1 + eps = 0 as A^H X + X A + X R X + Q with A = -2.5, R = 4.
    const CMat A = CMat::Constant(1, 1, -2.5);
    const CMat R = CMat::Constant(1, 1, 4.0);
    const CMat Q = CMat::Constant(1, 1, 1.0);
    const auto X = solve_care_stabilizing(A, R, Q);
    REQUIRE(X);
    CHECK((*X)(0, 0).real() == Approx(0.25).epsilon(1e-12));  // smaller root: A + R X = -1.5
    const CMat Qbad = CMat::Constant(1, 1, 2.0);                // discriminant 25 - 32 < 0
    CHECK_FALSE(solve_care_stabilizing(A, R, Qbad).has_value());
}

TEST_CASE("H-infinity norm of the OPA channel") {
    for (const double kappa : {4.5, 5.0, 8.0, 20.0}) {
        const CMat A = -0.5 * kappa * CMat::Identity(2, 2);
        const CMat B = kI * signature_matrix(1);
        const auto r = hinf_norm(A, B, CMat::Identity(2, 2));
        CHECK(r.norm == Approx(2.0 / kappa).epsilon(1e-7));
        CHECK(r.lower <= r.upper);
    }
}

TEST_CASE("H-infinity norm edge cases") {
    const CMat A = -CMat::Identity(1, 1);
    CHECK(hinf_norm(A, CMat::Identity(1, 1), CMat::Identity(1, 1)).norm == Approx(1.0).epsilon(1e-7));
    CHECK(hinf_norm(A, CMat::Identity(1, 1), CMat::Zero(1, 1)).norm == 0.0);
    CHECK_THROWS_AS(hinf_norm(CMat::Zero(2, 2), CMat::Identity(2, 2), CMat::Identity(2, 2)), PreconditionError);
    CHECK_THROWS_AS(hinf_norm(A, CMat::Identity(2, 2), CMat::Identity(1, 1)), StructuralError);
}

TEST_CASE("H-infinity norm of a lightly damped resonance") {
    // 1/(s^2 + 2 zeta s + 1) peaks at 1/(2 zeta sqrt(1 - zeta^2)).
    const double zeta = 0.01;
    CMat A(2, 2);
    A << 0, 1, -1, -2 * zeta;
    CMat B(2, 1);
    B << 0, 1;
    CMat C(1, 2);
    C << 1, 0;
    const double exact = 1.0 / (2.0 * zeta * std::sqrt(1.0 - zeta * zeta));
    CHECK(hinf_norm(A, B, C).norm == Approx(exact).epsilon(1e-7));
}

TEST_CASE("H-infinity bisection agrees with a frequency grid") {
    Rng rng(17);
    for (int trial = 0; trial < 15; ++trial) {
        const Index n = rng.integer(1, 6);
        const CMat A = stable_matrix(rng, n);
        const CMat B = rng.complex_matrix(n, rng.integer(1, 3));
        const CMat C = rng.complex_matrix(rng.integer(1, 3), n);
        const double grid = grid_peak(A, B, C);
        const auto r = hinf_norm(A, B, C);
        CHECK(r.norm == Approx(grid).epsilon(1e-6));
        CHECK(gain_at(A, B, C, r.peak_frequency) <= r.upper * (1.0 + 1e-12));
    }
}
