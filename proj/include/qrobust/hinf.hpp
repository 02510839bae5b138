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

// H-infinity norm of a stable state-space system G(s) = C (sI - A)^{-1} B by
// bisection on the imaginary-axis eigenvalues of the Hamiltonian matrix
//
//   H(g) = [[A, B B^H / g], [-C^H C / g, -A^H]],
//
// which has an eigenvalue i*w exactly when g is a singular value of G(i*w).

#include <algorithm>
#include <cmath>
#include <vector>

#include "qrobust/linalg.hpp"

namespace qrs {

/// A is Hurwitz iff its spectral abscissa is below -kTolHurwitz.
inline constexpr double kTolHurwitz = 1e-9;
/// Relative width of the final bisection bracket.
inline constexpr double kTolHinf = 1e-8;

struct HinfResult {
    double norm = 0.0;
    double lower = 0.0;  // attained or imaginary-axis-certified lower bound
    double upper = 0.0;  // H(upper) has no imaginary-axis eigenvalue
    int iterations = 0;
    double peak_frequency = 0.0;
};

/// sigma_max(C (i w I - A)^{-1} B).
inline double gain_at(const CMat& A, const CMat& B, const CMat& C, double omega) {
    const Index n = A.rows();
    const CMat shifted = kI * omega * CMat::Identity(n, n) - A;
    return spectral_norm(C * shifted.partialPivLu().solve(B));
}

namespace detail {

struct AxisTest {
    bool crosses = false;
    std::vector<double> frequencies;
};

inline AxisTest imaginary_axis_test(const CMat& A, const CMat& BBh, const CMat& ChC, double g) {
    const Index n = A.rows();
    CMat H(2 * n, 2 * n);
    H << A, BBh / g, -ChC / g, -A.adjoint();
    const CVec ev = eigenvalues(H);
    const double tau = 1e-8 * std::max(1.0, H.norm());
    AxisTest out;
    for (Index i = 0; i < ev.size(); ++i) {
        if (std::abs(ev(i).real()) <= tau) {
            out.crosses = true;
            out.frequencies.push_back(ev(i).imag());
        }
    }
    std::sort(out.frequencies.begin(), out.frequencies.end());
    return out;
}

}  // namespace detail

/// Throws PreconditionError when A is not Hurwitz (the norm is infinite).
inline HinfResult hinf_norm(const CMat& A, const CMat& B, const CMat& C, double rel_tol = kTolHinf) {
    if (A.rows() != A.cols() || B.rows() != A.rows() || C.cols() != A.rows())
        throw StructuralError("dimension mismatch A/B/C in hinf_norm");
    if (spectral_abscissa(A) >= -kTolHurwitz)
        throw PreconditionError("hinf_norm: state matrix is not Hurwitz, the norm is infinite");

    HinfResult r;
    if (B.norm() == 0.0 || C.norm() == 0.0) return r;

    // Lower bound from the gain at zero, at the pole frequencies and on a
    // coarse log grid.
    auto probe = [&](double w) {
        const double s = gain_at(A, B, C, w);
        if (s > r.lower) {
            r.lower = s;
            r.peak_frequency = w;
        }
    };
    probe(0.0);
    const CVec poles = eigenvalues(A);
    for (Index i = 0; i < poles.size(); ++i) {
        probe(poles(i).imag());
        probe(std::abs(poles(i)));
    }
    for (int k = 0; k <= 40; ++k) {
        const double w = std::pow(10.0, -4.0 + 0.2 * k);
        probe(w);
        probe(-w);
    }
    if (r.lower == 0.0) return r;

    const CMat BBh = B * B.adjoint();
    const CMat ChC = C.adjoint() * C;

    r.upper = 2.0 * r.lower;
    for (int k = 0; detail::imaginary_axis_test(A, BBh, ChC, r.upper).crosses; ++k) {
        if (k > 200) throw NumericalError("hinf_norm: could not bracket the norm from above");
        r.lower = std::max(r.lower, r.upper);
        r.upper *= 2.0;
    }

    while (r.upper - r.lower > rel_tol * r.upper) {
        if (++r.iterations > 500) throw NumericalError("hinf_norm: bisection did not terminate");
        const double mid = 0.5 * (r.lower + r.upper);
        const auto test = detail::imaginary_axis_test(A, BBh, ChC, mid);
        if (!test.crosses) {
            r.upper = mid;
            continue;
        }
        r.lower = mid;
        // Gains attained between crossing frequencies are valid lower bounds too.
        for (std::size_t i = 0; i < test.frequencies.size(); ++i) {
            probe(test.frequencies[i]);
            if (i + 1 < test.frequencies.size())
                probe(0.5 * (test.frequencies[i] + test.frequencies[i + 1]));
        }
        r.lower = std::min(r.lower, r.upper);
    }
    r.norm = 0.5 * (r.lower + r.upper);
    return r;
}

}  // namespace qrs
