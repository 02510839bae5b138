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

// System and perturbation data for linear open quantum systems written in
// the doubled-up form x = [a; a#]:
//
//   H1 = 1/2 x^H M x,   L = [N1 N2] x,   V = x^H P x,
//   quadratic H2 = 1/2 zeta_d^H Delta zeta_d with zeta_d = E x,
//   polynomial H2 = sum_{k,l} S_kl zeta^k (zeta^*)^l with zeta = [E1 E2] x.
//
// The scattering matrix is fixed to the identity and is not stored.

#include <algorithm>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "qrobust/linalg.hpp"

namespace qrs {

/// Relative Frobenius tolerance for every structural symmetry check.
inline constexpr double kTolStruct = 1e-9;
/// Default degree cap of the coefficient table of a polynomial perturbation.
inline constexpr int kDefaultDegreeCap = 8;

inline constexpr const char* kGainBoundViolation = "||Delta|| exceeds 2/gamma";

struct LinearNominalSystem {
    CMat M1;  // n x n, Hermitian
    CMat M2;  // n x n, symmetric
    CMat N1;  // m x n
    CMat N2;  // m x n

    [[nodiscard]] Index modes() const { return M1.rows(); }
    [[nodiscard]] Index channels() const { return N1.rows(); }
};

struct DoubledConstants {
    CMat J;
    CMat Sigma;

    static DoubledConstants for_modes(Index n) { return {signature_matrix(n), swap_matrix(n)}; }
};

struct QuadraticPerturbation {
    CMat E1;      // m_z x n
    CMat E2;      // m_z x n
    CMat Delta1;  // m_z x m_z, Hermitian
    CMat Delta2;  // m_z x m_z, symmetric
    double gamma = 1.0;

    [[nodiscard]] Index channels() const { return E1.rows(); }
};

struct PolynomialPerturbation {
    CMat E1row;   // 1 x n
    CMat E2row;   // 1 x n
    CMat coeffs;  // (d+1) x (d+1), coeffs(k, l) = S_kl
    double gamma = 1.0;
    double delta1 = 0.0;
    double delta2 = 0.0;
    int degree_cap = kDefaultDegreeCap;

    /// Largest k + l with a nonzero coefficient (0 for an empty table).
    [[nodiscard]] int degree() const {
        int d = 0;
        for (Index k = 0; k < coeffs.rows(); ++k)
            for (Index l = 0; l < coeffs.cols(); ++l)
                if (coeffs(k, l) != cplx{0.0, 0.0}) d = std::max(d, static_cast<int>(k + l));
        return d;
    }
};

using Perturbation = std::variant<QuadraticPerturbation, PolynomialPerturbation>;

struct StructuredP {
    CMat P1;
    CMat P2;

    [[nodiscard]] CMat full() const { return doubled(P1, P2); }

    /// Inverse of full(): reads the top block row of a 2n x 2n matrix.
    static StructuredP from_full(const CMat& P) {
        const Index n = P.rows() / 2;
        return {P.topLeftCorner(n, n), P.topRightCorner(n, n)};
    }
};

struct Violation {
    std::string invariant;
    double residual = 0.0;
};

using Violations = std::vector<Violation>;

namespace detail {

inline std::string shape(const CMat& X) {
    std::ostringstream os;
    os << X.rows() << "x" << X.cols();
    return os.str();
}

inline void require_shape(const CMat& X, Index rows, Index cols, const std::string& field,
                          const std::string& against) {
    if (X.rows() != rows || X.cols() != cols) {
        std::ostringstream os;
        os << "dimension mismatch " << field << "/" << against << ": " << field << " is "
           << shape(X) << ", expected " << rows << "x" << cols;
        throw StructuralError(os.str());
    }
}

inline double rel_asym(const CMat& X, const CMat& mirrored) {
    return (X - mirrored).norm() / std::max(1.0, X.norm());
}

inline void check(Violations& out, double residual, const std::string& what) {
    if (!(residual <= kTolStruct)) out.push_back({what, residual});
}

}  // namespace detail

inline Violations validate(const LinearNominalSystem& sys) {
    const Index n = sys.M1.rows();
    if (n == 0) throw StructuralError("dimension mismatch M1/modes: at least one mode is required");
    detail::require_shape(sys.M1, n, n, "M1", "M1");
    detail::require_shape(sys.M2, n, n, "M2", "M1");
    if (sys.N1.rows() == 0) throw StructuralError("dimension mismatch N1/N2: at least one channel is required");
    detail::require_shape(sys.N1, sys.N1.rows(), n, "N1", "M1");
    detail::require_shape(sys.N2, sys.N1.rows(), n, "N2", "N1");

    Violations v;
    detail::check(v, detail::rel_asym(sys.M1, sys.M1.adjoint()), "M1 not Hermitian");
    detail::check(v, detail::rel_asym(sys.M2, sys.M2.transpose()), "M2 not symmetric");
    return v;
}

inline Violations validate(const QuadraticPerturbation& p) {
    const Index mz = p.E1.rows();
    if (mz == 0) throw StructuralError("dimension mismatch E1/E2: perturbation channel count must be >= 1");
    detail::require_shape(p.E2, mz, p.E1.cols(), "E2", "E1");
    detail::require_shape(p.Delta1, mz, mz, "Delta1", "E1");
    detail::require_shape(p.Delta2, mz, mz, "Delta2", "E1");

    Violations v;
    detail::check(v, detail::rel_asym(p.Delta1, p.Delta1.adjoint()), "Delta1 not Hermitian");
    detail::check(v, detail::rel_asym(p.Delta2, p.Delta2.transpose()), "Delta2 not symmetric");
    if (!(p.gamma > 0.0)) {
        v.push_back({"gamma not positive", std::abs(p.gamma)});
        return v;
    }
    const double excess = spectral_norm(doubled(p.Delta1, p.Delta2)) - 2.0 / p.gamma;
    if (excess > kTolStruct * std::max(1.0, 2.0 / p.gamma)) v.push_back({kGainBoundViolation, excess});
    return v;
}

inline Violations validate(const PolynomialPerturbation& p) {
    if (p.E1row.rows() != 1) throw StructuralError("dimension mismatch E1/E2: zeta must be scalar (E1 has one row)");
    detail::require_shape(p.E2row, 1, p.E1row.cols(), "E2", "E1");
    if (p.coeffs.rows() != p.coeffs.cols())
        throw StructuralError("dimension mismatch coeffs/coeffs: coefficient table must be square");

    Violations v;
    detail::check(v, detail::rel_asym(p.coeffs, p.coeffs.adjoint()), "coefficients violate S_kl = conj(S_lk)");
    if (p.coeffs.rows() > p.degree_cap + 1)
        v.push_back({"coefficient table exceeds degree cap", static_cast<double>(p.coeffs.rows() - 1)});
    if (!(p.gamma > 0.0)) v.push_back({"gamma not positive", std::abs(p.gamma)});
    if (!(p.delta1 >= 0.0)) v.push_back({"delta1 negative", -p.delta1});
    if (!(p.delta2 >= 0.0)) v.push_back({"delta2 negative", -p.delta2});
    return v;
}

inline Violations validate(const StructuredP& p) {
    const Index n = p.P1.rows();
    detail::require_shape(p.P1, n, n, "P1", "P1");
    detail::require_shape(p.P2, n, n, "P2", "P1");

    Violations v;
    detail::check(v, detail::rel_asym(p.P1, p.P1.adjoint()), "P1 not Hermitian");
    detail::check(v, detail::rel_asym(p.P2, p.P2.transpose()), "P2 not symmetric");
    if (v.empty()) {
        const double lmin = lambda_min(p.full());
        if (!(lmin > 0.0)) v.push_back({"P not positive definite", -lmin});
    }
    return v;
}

inline Violations validate(const Perturbation& p) {
    return std::visit([](const auto& x) { return validate(x); }, p);
}

inline std::string describe(const Violations& v) {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) os << "; ";
        os << v[i].invariant << " (residual " << v[i].residual << ")";
    }
    return os.str();
}

inline CMat assemble_M(const LinearNominalSystem& s) { return doubled(s.M1, s.M2); }
inline CMat assemble_N(const LinearNominalSystem& s) { return doubled(s.N1, s.N2); }
inline CMat assemble_E(const QuadraticPerturbation& p) { return doubled(p.E1, p.E2); }
inline CMat assemble_Delta(const QuadraticPerturbation& p) { return doubled(p.Delta1, p.Delta2); }

/// E~ = [E1 E2], so that zeta = E~ x.
inline CMat assemble_Etilde(const PolynomialPerturbation& p) {
    CMat Et(1, 2 * p.E1row.cols());
    Et << p.E1row, p.E2row;
    return Et;
}

/// Doubled-up matrices of a system/perturbation pair. `E` holds the doubled
/// E for a quadratic perturbation and the single row E~ for a polynomial one.
struct DoubledSystem {
    CMat M;
    CMat N;
    CMat E;
    CMat J;
    CMat Sigma;
};

namespace detail {

inline void throw_if(const Violations& v, const std::string& what) {
    if (!v.empty()) throw StructuralError(what + " invalid: " + describe(v));
}

}  // namespace detail

/// The gain bound ||Delta|| <= 2/gamma describes the class a certificate
/// covers rather than the shape of the data, so it is not enforced here.
inline DoubledSystem assemble_doubled(const LinearNominalSystem& sys, const QuadraticPerturbation& pert) {
    detail::throw_if(validate(sys), "system");
    Violations v = validate(pert);
    v.erase(std::remove_if(v.begin(), v.end(), [](const Violation& x) { return x.invariant == kGainBoundViolation; }),
            v.end());
    detail::throw_if(v, "quadratic perturbation");
    detail::require_shape(pert.E1, pert.E1.rows(), sys.modes(), "E1", "M1");
    const auto k = DoubledConstants::for_modes(sys.modes());
    return {assemble_M(sys), assemble_N(sys), assemble_E(pert), k.J, k.Sigma};
}

inline DoubledSystem assemble_doubled(const LinearNominalSystem& sys, const PolynomialPerturbation& pert) {
    detail::throw_if(validate(sys), "system");
    detail::throw_if(validate(pert), "polynomial perturbation");
    detail::require_shape(pert.E1row, 1, sys.modes(), "E1", "M1");
    const auto k = DoubledConstants::for_modes(sys.modes());
    return {assemble_M(sys), assemble_N(sys), assemble_Etilde(pert), k.J, k.Sigma};
}

inline DoubledSystem assemble_doubled(const LinearNominalSystem& sys, const Perturbation& pert) {
    return std::visit([&](const auto& p) { return assemble_doubled(sys, p); }, pert);
}

}  // namespace qrs
