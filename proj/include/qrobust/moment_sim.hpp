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

// Second-moment dynamics Q(t) = <x(t) x(t)^H>, x = [a; a#], for a linear
// nominal system with a quadratic perturbation:
//
//   dQ/dt = F_cl Q + Q F_cl^H + G_noise,
//   F_cl  = -iJ(M + E^H Delta E) - 1/2 J N^H J N.
//
// tr Q(t) equals <x(t)^H x(t)> exactly (both are sum_i <a_i a_i^+ + a_i^+ a_i>).
// G_noise is read off the Fock-space generator rather than derived by hand.

#include <map>
#include <optional>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "qrobust/fock_oracle.hpp"
#include "qrobust/sbr_analysis.hpp"

namespace qrs {

struct MomentTrajectory {
    std::vector<double> times;
    std::vector<CMat> Q;
    std::vector<double> trace;  // tr Q(t) = <x^H x>
    std::vector<double> bound;  // c1 exp(-c2 t) tr Q(0) + c3; empty without constants
};

inline CMat closed_loop_F(const CMat& M, const CMat& E, const CMat& Delta, const CMat& N, const CMat& J) {
    return compute_F(M + E.adjoint() * Delta * E, N, J);
}

inline CMat closed_loop_F(const LinearNominalSystem& sys, const QuadraticPerturbation& pert) {
    const auto d = assemble_doubled(sys, pert);
    return closed_loop_F(d.M, d.E, assemble_Delta(pert), d.N, d.J);
}

/// Vacuum <x x^H> = diag(I_n, 0_n): <a a^+> = 1, <a^+ a> = 0.
inline CMat vacuum_second_moment(Index n) {
    CMat Q = CMat::Zero(2 * n, 2 * n);
    Q.topLeftCorner(n, n).setIdentity();
    return Q;
}

struct NoiseCalibration {
    CMat G;
    double max_deviation = 0.0;  // largest distance of a compressed remainder from G_ij * I
    FockSpace space;
};

/// Evaluates the generator on each x_i x_j^+, removes the linear drift
/// F x x^H + x x^H F^H, and keeps the identity-proportional remainder.
inline NoiseCalibration calibrate_noise(const LinearNominalSystem& sys, const QuadraticPerturbation& pert,
                                        std::optional<FockSpace> space = std::nullopt) {
    const int n = static_cast<int>(sys.modes());
    const FockSpace fs = space ? *space : FockSpace{n, n <= 2 ? 8 : 6, 4};
    if (fs.n_modes != n) throw StructuralError("dimension mismatch FockSpace/M1: mode counts differ");
    const auto hs = build_hamiltonians(sys, pert, std::nullopt, fs);
    const TruncatedOperator H = hs.H1 + hs.H2;
    const auto ops = build_mode_operators(fs);
    const CMat F = closed_loop_F(sys, pert);
    const Index d = 2 * n;
    const int g = std::max(fs.guard, 4);

    NoiseCalibration out{CMat::Zero(d, d), 0.0, fs};
    for (Index i = 0; i < d; ++i) {
        for (Index j = 0; j < d; ++j) {
            const TruncatedOperator xj_dag = ops.x(j).adjoint();
            TruncatedOperator r = generator(ops.x(i) * xj_dag, H, hs.L);
            for (Index k = 0; k < d; ++k) {
                r = r - F(i, k) * (ops.x(k) * xj_dag) - std::conj(F(j, k)) * (ops.x(i) * ops.x(k).adjoint());
            }
            const CMat rc = r.compressed(g);
            const cplx gij = rc.trace() / static_cast<double>(rc.rows());
            out.G(i, j) = gij;
            const double dev = (rc - gij * CMat::Identity(rc.rows(), rc.cols())).norm() / std::sqrt(double(rc.rows()));
            out.max_deviation = std::max(out.max_deviation, dev);
        }
    }
    return out;
}

/// Exact stepping of the Lyapunov ODE: the vectorised system
/// d vec(Q)/dt = (I (x) F + conj(F) (x) I) vec(Q) + vec(G) is propagated by the
/// exponential of its affine augmentation, once per distinct step length.
inline MomentTrajectory simulate_moments(const CMat& F, const CMat& G, const CMat& Q0, const std::vector<double>& t_grid,
                                         const std::optional<CertificateConstants>& constants = std::nullopt) {
    const Index d = F.rows();
    if (G.rows() != d || Q0.rows() != d) throw StructuralError("dimension mismatch F/G/Q0 in simulate_moments");
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        if (!(t_grid[i] > t_grid[i - 1])) throw PreconditionError("time grid must be increasing");

    const Index d2 = d * d;
    CMat A = CMat::Zero(d2 + 1, d2 + 1);
    const CMat Id = CMat::Identity(d, d);
    A.topLeftCorner(d2, d2) = detail::kron(Id, F) + detail::kron(F.conjugate(), Id);
    A.topRightCorner(d2, 1) = Eigen::Map<const CVec>(G.data(), d2);

    std::map<double, CMat> propagators;
    auto propagator = [&](double h) -> const CMat& {
        auto it = propagators.find(h);
        if (it != propagators.end()) return it->second;
        CMat P = (A * h).exp();
        if (!P.allFinite()) throw NumericalError("simulate_moments: matrix exponential overflowed");
        return propagators.emplace(h, std::move(P)).first->second;
    };

    MomentTrajectory out;
    out.times = t_grid;
    CVec v(d2 + 1);
    v.head(d2) = Eigen::Map<const CVec>(Q0.data(), d2);
    v(d2) = 1.0;
    auto record = [&] {
        CMat Q = Eigen::Map<const CMat>(v.data(), d, d);
        out.trace.push_back(Q.trace().real());
        out.Q.push_back(std::move(Q));
    };
    if (!t_grid.empty()) record();
    for (std::size_t i = 1; i < t_grid.size(); ++i) {
        // Round the step so equal spacings share one exponential.
        const double h = std::round((t_grid[i] - t_grid[i - 1]) * 1e12) / 1e12;
        v = propagator(h) * v;
        record();
    }
    if (constants && !out.trace.empty()) {
        for (const double t : t_grid)
            out.bound.push_back(constants->c1 * std::exp(-constants->c2 * (t - t_grid.front())) * out.trace.front() +
                                constants->c3);
    }
    return out;
}

inline std::vector<double> uniform_grid(double t0, double t1, int points) {
    if (points < 2) throw PreconditionError("uniform_grid: at least two points are required");
    std::vector<double> t(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) t[static_cast<std::size_t>(i)] = t0 + (t1 - t0) * i / (points - 1);
    return t;
}

}  // namespace qrs
