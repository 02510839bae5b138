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

#include "qrobust/moment_sim.hpp"
#include "support.hpp"

using namespace qrs;
using Catch::Approx;
using qrs::testing::Rng;

namespace {

// Noise term of the second-moment equation from the coupling rows alone.
CMat noise_closed_form(const LinearNominalSystem& s) {
    const Index n = s.modes();
    const CMat N = assemble_N(s);
    const CMat top = N.topRows(s.channels());
    const CMat J = signature_matrix(n);
    return J * top.adjoint() * top * J;
}

// Stationary Q from the Kronecker form of F Q + Q F^H + G = 0.
CMat stationary(const CMat& F, const CMat& G) {
    const Index d = F.rows();
    const CMat Id = CMat::Identity(d, d);
    const CMat A = detail::kron(Id, F) + detail::kron(F.conjugate(), Id);
    const CVec g = Eigen::Map<const CVec>(G.data(), d * d);
    const CVec q = A.partialPivLu().solve(-g);
    return Eigen::Map<const CMat>(q.data(), d, d);
}

}  // namespace

TEST_CASE("closed-loop matrix of the OPA") {
    const CMat F = closed_loop_F(testing::opa_system(5.0), testing::opa_perturbation());
    CMat expected(2, 2);
    expected << -2.5, 1, 1, -2.5;
    CHECK((F - expected).norm() < 1e-14);
    const CVec ev = eigenvalues(F);
    CHECK(std::min(ev(0).real(), ev(1).real()) == Approx(-3.5));
    CHECK(std::max(ev(0).real(), ev(1).real()) == Approx(-1.5));

    auto none = testing::opa_perturbation();
    none.Delta2 = CMat::Zero(1, 1);
    const auto d = assemble_doubled(testing::opa_system(5.0), none);
    CHECK((closed_loop_F(testing::opa_system(5.0), none) - compute_F(d.M, d.N, d.J)).norm() == 0.0);

    const CMat Fu = closed_loop_F(testing::opa_system(1.5), testing::opa_perturbation());
    CHECK(spectral_abscissa(Fu) == Approx(0.25));
}

TEST_CASE("vacuum second moment") {
    const CMat Q = vacuum_second_moment(2);
    CHECK(Q.trace().real() == 2.0);
    CHECK(Q(0, 0) == cplx(1.0));
    CHECK(Q(2, 2) == cplx(0.0));
}

TEST_CASE("noise calibration matches the coupling closed form") {
    const auto sys = testing::opa_system(5.0);
    const auto cal = calibrate_noise(sys, testing::opa_perturbation());
    CHECK((cal.G - noise_closed_form(sys)).norm() < 1e-10);
    CHECK(cal.max_deviation < 1e-10);
    CHECK(cal.G(0, 0).real() == Approx(5.0));

    Rng rng(53);
    for (int trial = 0; trial < 2; ++trial) {
        const auto s = rng.system(2, 2);
        QuadraticPerturbation p;
        p.E1 = rng.complex_matrix(1, 2, 0.5);
        p.E2 = rng.complex_matrix(1, 2, 0.5);
        p.Delta1 = rng.hermitian(1, 0.5);
        p.Delta2 = rng.symmetric(1, 0.5);
        const auto c = calibrate_noise(s, p, FockSpace{2, 7, 4});
        CHECK((c.G - noise_closed_form(s)).norm() < 1e-9 * std::max(1.0, c.G.norm()));
        CHECK(c.max_deviation < 1e-9);
    }
}

TEST_CASE("homogeneous stable dynamics decay") {
    const CMat F = -CMat::Identity(2, 2) + kI * signature_matrix(1);  // normal
    const auto t = simulate_moments(F, CMat::Zero(2, 2), vacuum_second_moment(1), uniform_grid(0.0, 5.0, 51));
    for (std::size_t i = 1; i < t.trace.size(); ++i) CHECK(t.trace[i] < t.trace[i - 1]);
    CHECK(t.trace.back() == Approx(std::exp(-10.0)).epsilon(1e-9));
    CHECK(t.bound.empty());
}

TEST_CASE("OPA moments respect the certificate and converge to the stationary solution") {
    const auto sys = testing::opa_system(5.0);
    const auto pert = testing::opa_perturbation();
    const auto cert = check_theorem3(sys, pert);
    REQUIRE(cert.stable());
    const CertificateConstants k{cert.c, cert.lambda_tilde, cert.lambda, cert.c1, cert.c2, cert.c3};
    const CMat F = closed_loop_F(sys, pert);
    const CMat G = noise_closed_form(sys);
    const auto t = simulate_moments(F, G, vacuum_second_moment(1), uniform_grid(0.0, 20.0, 401), k);
    for (std::size_t i = 0; i < t.times.size(); ++i) {
        CHECK(t.trace[i] <= t.bound[i]);
        CHECK(t.trace[i] >= 1.0 - 1e-12);
        CHECK((t.Q[i] - t.Q[i].adjoint()).norm() < 1e-10);
    }
    CHECK((t.Q.back() - stationary(F, G)).norm() < 1e-10);
}

TEST_CASE("unstable closed loop diverges") {
    const auto sys = testing::opa_system(1.5);
    const CMat F = closed_loop_F(sys, testing::opa_perturbation());
    const auto t = simulate_moments(F, noise_closed_form(sys), vacuum_second_moment(1), uniform_grid(0.0, 40.0, 41));
    CHECK(t.trace.back() > 1e3 * t.trace.front());
    CHECK(t.trace.back() > t.trace[t.trace.size() - 2]);
}

TEST_CASE("moments agree with the master equation") {
    const FockSpace s{1, 30, 4};
    const auto sys = testing::opa_system(5.0);
    const auto pert = testing::opa_perturbation();
    const auto h = build_hamiltonians(sys, pert, std::nullopt, s);
    const auto ops = build_mode_operators(s);
    const TruncatedOperator xx = ops.adag[0] * ops.a[0] + ops.a[0] * ops.adag[0];
    const auto grid = uniform_grid(0.0, 1.0, 11);
    const auto me = simulate_master_equation(h.H1 + h.H2, h.L, fock_state(s, {0}), grid, {xx});
    const auto mo = simulate_moments(closed_loop_F(sys, pert), calibrate_noise(sys, pert).G, vacuum_second_moment(1), grid);
    for (std::size_t i = 0; i < grid.size(); ++i) CHECK(mo.trace[i] == Approx(me.expectations[0][i]).epsilon(1e-8));
}

TEST_CASE("time grid validation") {
    CHECK_THROWS_AS(simulate_moments(-CMat::Identity(2, 2), CMat::Zero(2, 2), vacuum_second_moment(1), {0.0, 1.0, 1.0}),
                    PreconditionError);
    CHECK_THROWS_AS(simulate_moments(-CMat::Identity(2, 2), CMat::Zero(3, 3), vacuum_second_moment(1), {0.0, 1.0}),
                    StructuralError);
    CHECK_THROWS_AS(uniform_grid(0.0, 1.0, 1), PreconditionError);
}
