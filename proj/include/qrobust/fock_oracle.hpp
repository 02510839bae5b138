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

// Truncated Fock-space oracle. Every operator identity and inequality used by
// the stability certificates is re-checked here on concrete matrices: the
// ladder operators are truncated at `cutoff` levels per mode, and identities
// are compared after compressing to the states whose per-mode occupation is at
// most cutoff - 1 - guard. A product of k ladder operators is exact on that
// subspace whenever k <= guard, so each check raises the guard to the longest
// product it forms.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "qrobust/model.hpp"
#include "qrobust/sbr_analysis.hpp"

namespace qrs {

inline constexpr Index kMaxFockDimension = 20000;
inline constexpr double kLeakageThreshold = 1e-6;
inline constexpr double kIdentityTol = 1e-8;
inline constexpr double kDissipationTol = 1e-7;

struct FockSpace {
    int n_modes = 1;
    int cutoff = 30;  // levels 0 .. cutoff-1 per mode
    int guard = 4;

    /// 30 levels for one mode, 12 for two, and the largest cutoff keeping the
    /// total dimension below ~2000 otherwise.
    static FockSpace with_defaults(int n_modes, int guard = 4) {
        int cutoff = n_modes == 1 ? 30 : n_modes == 2 ? 12 : 2;
        if (n_modes > 2)
            while (std::pow(cutoff + 1.0, n_modes) <= 2000.0) ++cutoff;
        return {n_modes, cutoff, guard};
    }

    [[nodiscard]] Index dim() const {
        Index d = 1;
        for (int i = 0; i < n_modes; ++i) d *= cutoff;
        return d;
    }

    /// Occupation of `mode` in basis state `index` (mode 0 most significant).
    [[nodiscard]] int occupation(Index index, int mode) const {
        for (int i = n_modes - 1; i > mode; --i) index /= cutoff;
        return static_cast<int>(index % cutoff);
    }

    void check() const {
        if (n_modes < 1) throw StructuralError("FockSpace: at least one mode is required");
        if (cutoff < 2) throw StructuralError("FockSpace: cutoff must be at least 2");
        if (guard < 0 || guard >= cutoff) throw StructuralError("FockSpace: guard must satisfy 0 <= guard < cutoff");
        if (std::pow(static_cast<double>(cutoff), n_modes) > static_cast<double>(kMaxFockDimension))
            throw StructuralError("FockSpace: total dimension exceeds " + std::to_string(kMaxFockDimension));
    }

    /// Basis states with every occupation <= cutoff - 1 - g.
    [[nodiscard]] std::vector<Index> compressed_indices(int g) const {
        std::vector<Index> idx;
        const int top = cutoff - 1 - g;
        for (Index s = 0; s < dim(); ++s) {
            bool inside = true;
            for (int m = 0; m < n_modes && inside; ++m) inside = occupation(s, m) <= top;
            if (inside) idx.push_back(s);
        }
        if (idx.empty()) throw StructuralError("FockSpace: guard leaves an empty compressed subspace");
        return idx;
    }

    friend bool operator==(const FockSpace&, const FockSpace&) = default;
};

/// A dense matrix acting on a truncated Fock space.
class TruncatedOperator {
public:
    TruncatedOperator(const FockSpace& space, CMat matrix) : space_(space), m_(std::move(matrix)) {
        if (m_.rows() != space_.dim() || m_.cols() != space_.dim())
            throw StructuralError("TruncatedOperator: matrix dimension does not match the Fock space");
    }

    static TruncatedOperator zero(const FockSpace& s) { return {s, CMat::Zero(s.dim(), s.dim())}; }
    static TruncatedOperator identity(const FockSpace& s) { return {s, CMat::Identity(s.dim(), s.dim())}; }

    [[nodiscard]] const FockSpace& space() const { return space_; }
    [[nodiscard]] const CMat& matrix() const { return m_; }
    [[nodiscard]] TruncatedOperator adjoint() const { return {space_, m_.adjoint()}; }

    /// Pi X Pi restricted to the compressed subspace for guard g.
    [[nodiscard]] CMat compressed(int g) const {
        const auto idx = space_.compressed_indices(g);
        return m_(idx, idx);
    }

    friend TruncatedOperator operator+(const TruncatedOperator& a, const TruncatedOperator& b) {
        same(a, b);
        return {a.space_, a.m_ + b.m_};
    }
    friend TruncatedOperator operator-(const TruncatedOperator& a, const TruncatedOperator& b) {
        same(a, b);
        return {a.space_, a.m_ - b.m_};
    }
    friend TruncatedOperator operator*(const TruncatedOperator& a, const TruncatedOperator& b) {
        same(a, b);
        return {a.space_, a.m_ * b.m_};
    }
    friend TruncatedOperator operator*(cplx s, const TruncatedOperator& a) { return {a.space_, s * a.m_}; }
    friend TruncatedOperator operator*(double s, const TruncatedOperator& a) { return {a.space_, s * a.m_}; }
    TruncatedOperator& operator+=(const TruncatedOperator& b) {
        same(*this, b);
        m_ += b.m_;
        return *this;
    }

private:
    static void same(const TruncatedOperator& a, const TruncatedOperator& b) {
        if (!(a.space_ == b.space_)) throw StructuralError("TruncatedOperator: operands live on different spaces");
    }

    FockSpace space_;
    CMat m_;
};

inline TruncatedOperator commutator(const TruncatedOperator& a, const TruncatedOperator& b) { return a * b - b * a; }

/// Ladder operators a_i, a_i^dagger and the doubled vector x = [a; a#].
struct ModeOperators {
    std::vector<TruncatedOperator> a;
    std::vector<TruncatedOperator> adag;

    [[nodiscard]] Index size() const { return static_cast<Index>(a.size()); }
    [[nodiscard]] const TruncatedOperator& x(Index k) const {
        return k < size() ? a[static_cast<std::size_t>(k)] : adag[static_cast<std::size_t>(k - size())];
    }
};

namespace detail {

inline CMat kron(const CMat& A, const CMat& B) {
    CMat K(A.rows() * B.rows(), A.cols() * B.cols());
    for (Index i = 0; i < A.rows(); ++i)
        for (Index j = 0; j < A.cols(); ++j) K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return K;
}

}  // namespace detail

inline ModeOperators build_mode_operators(const FockSpace& space) {
    space.check();
    CMat a1 = CMat::Zero(space.cutoff, space.cutoff);
    for (int k = 1; k < space.cutoff; ++k) a1(k - 1, k) = std::sqrt(static_cast<double>(k));

    ModeOperators ops;
    for (int mode = 0; mode < space.n_modes; ++mode) {
        CMat m = CMat::Identity(1, 1);
        for (int i = 0; i < space.n_modes; ++i)
            m = detail::kron(m, i == mode ? a1 : CMat::Identity(space.cutoff, space.cutoff));
        ops.a.emplace_back(space, m);
        ops.adag.emplace_back(space, m.adjoint());
    }
    return ops;
}

/// Row r of the result is sum_k coeff(r, k) x_k.
inline std::vector<TruncatedOperator> linear_forms(const CMat& coeff, const ModeOperators& ops) {
    if (coeff.cols() != 2 * ops.size()) throw StructuralError("dimension mismatch coeff/x in linear_forms");
    const FockSpace& s = ops.a.front().space();
    std::vector<TruncatedOperator> out;
    for (Index r = 0; r < coeff.rows(); ++r) {
        CMat m = CMat::Zero(s.dim(), s.dim());
        for (Index k = 0; k < coeff.cols(); ++k)
            if (coeff(r, k) != cplx{0.0, 0.0}) m += coeff(r, k) * ops.x(k).matrix();
        out.emplace_back(s, std::move(m));
    }
    return out;
}

/// sum_{ij} x_i^dagger Q_ij x_j.
inline TruncatedOperator quadratic_form(const CMat& Q, const ModeOperators& ops) {
    if (Q.rows() != 2 * ops.size() || Q.cols() != 2 * ops.size())
        throw StructuralError("dimension mismatch Q/x in quadratic_form");
    const FockSpace& s = ops.a.front().space();
    const auto Qx = linear_forms(Q, ops);
    TruncatedOperator out = TruncatedOperator::zero(s);
    for (Index i = 0; i < Q.rows(); ++i) out += ops.x(i).adjoint() * Qx[static_cast<std::size_t>(i)];
    return out;
}

/// sum_i u_i^dagger v_i for operator vectors.
inline TruncatedOperator inner(const std::vector<TruncatedOperator>& u, const std::vector<TruncatedOperator>& v) {
    if (u.size() != v.size() || u.empty()) throw StructuralError("inner: operand vectors differ in length");
    TruncatedOperator out = TruncatedOperator::zero(u.front().space());
    for (std::size_t i = 0; i < u.size(); ++i) out += u[i].adjoint() * v[i];
    return out;
}

/// Coefficient table of f, f' (d/d zeta) or f'' (d^2/d zeta^2).
inline CMat derivative_coefficients(const CMat& S, int order) {
    CMat D = CMat::Zero(S.rows(), S.cols());
    for (Index k = order; k < S.rows(); ++k) {
        double factor = 1.0;
        for (int j = 0; j < order; ++j) factor *= static_cast<double>(k - j);
        D.row(k - order) = factor * S.row(k);
    }
    return D;
}

/// sum_{k,l} S_kl zeta^k (zeta^*)^l.
inline TruncatedOperator polynomial_operator(const CMat& S, const TruncatedOperator& zeta) {
    const FockSpace& s = zeta.space();
    const Index d = S.rows();
    std::vector<TruncatedOperator> zp{TruncatedOperator::identity(s)};
    std::vector<TruncatedOperator> zsp{TruncatedOperator::identity(s)};
    const TruncatedOperator zs = zeta.adjoint();
    for (Index k = 1; k < d; ++k) {
        zp.push_back(zp.back() * zeta);
        zsp.push_back(zsp.back() * zs);
    }
    TruncatedOperator out = TruncatedOperator::zero(s);
    for (Index k = 0; k < d; ++k)
        for (Index l = 0; l < S.cols(); ++l)
            if (S(k, l) != cplx{0.0, 0.0})
                out += S(k, l) * (zp[static_cast<std::size_t>(k)] * zsp[static_cast<std::size_t>(l)]);
    return out;
}

struct Hamiltonians {
    TruncatedOperator H1;
    TruncatedOperator H2;
    std::vector<TruncatedOperator> L;
    TruncatedOperator V;
};

/// H1 = 1/2 x^H M x, L = [N1 N2] x, V = x^H P x (zero when P is absent) and
/// H2 from the perturbation. Non-Hermitian results signal a construction bug.
inline Hamiltonians build_hamiltonians(const LinearNominalSystem& sys, const Perturbation& pert,
                                       const std::optional<StructuredP>& P, const FockSpace& space) {
    if (space.n_modes != sys.modes()) throw StructuralError("dimension mismatch FockSpace/M1: mode counts differ");
    const auto d = assemble_doubled(sys, pert);
    const auto ops = build_mode_operators(space);
    const Index n = sys.modes();
    const Index m = sys.channels();

    TruncatedOperator H1 = 0.5 * quadratic_form(d.M, ops);
    auto L = linear_forms(d.N.topRows(m), ops);
    TruncatedOperator V = P ? quadratic_form(P->full(), ops) : TruncatedOperator::zero(space);

    TruncatedOperator H2 = TruncatedOperator::zero(space);
    if (const auto* q = std::get_if<QuadraticPerturbation>(&pert)) {
        H2 = 0.5 * quadratic_form(d.E.adjoint() * assemble_Delta(*q) * d.E, ops);
    } else {
        const auto& p = std::get<PolynomialPerturbation>(pert);
        H2 = polynomial_operator(p.coeffs, linear_forms(d.E, ops).front());
    }
    (void)n;

    for (const auto* h : {&H1, &H2, &V}) {
        const double asym = (h->matrix() - h->matrix().adjoint()).norm();
        if (asym > 1e-9 * std::max(1.0, h->matrix().norm()))
            throw NumericalError("build_hamiltonians: constructed operator is not Hermitian");
    }
    return {H1, H2, L, V};
}

/// G(X) = -i[X, H] + sum_k 1/2 L_k^dagger [X, L_k] + 1/2 [L_k^dagger, X] L_k.
inline TruncatedOperator generator(const TruncatedOperator& X, const TruncatedOperator& H,
                                   const std::vector<TruncatedOperator>& L) {
    TruncatedOperator out = -kI * commutator(X, H);
    for (const auto& Lk : L) {
        const TruncatedOperator Ld = Lk.adjoint();
        out += 0.5 * (Ld * commutator(X, Lk)) + 0.5 * (commutator(Ld, X) * Lk);
    }
    return out;
}

/// Outcome of one oracle comparison, with the truncation it was made at.
struct CheckResult {
    std::string name;
    double value = 0.0;      // residual, or slack for inequality checks
    double threshold = 0.0;  // residual must be below / slack must be above
    bool pass = false;
    int cutoff = 0;
    int guard = 0;
};

namespace detail {

inline CheckResult identity_check(std::string name, const TruncatedOperator& lhs, const TruncatedOperator& rhs,
                                  int needed_guard, double tol = kIdentityTol) {
    const FockSpace& s = lhs.space();
    const int g = std::max(s.guard, needed_guard);
    const CMat l = lhs.compressed(g);
    const CMat r = rhs.compressed(g);
    const double res = (l - r).norm() / std::max(1.0, l.norm());
    return {std::move(name), res, tol, res < tol, s.cutoff, g};
}

}  // namespace detail

/// The three quadratic-form identities for V = x^H P x, H1 = 1/2 x^H M x and
/// L = [N1 N2] x:
///   [V, H1] = x^H (PJM - MJP) x,
///   L(V) = tr(P J N^H diag(I,0) N J) - 1/2 x^H (N^H J N J P + P J N^H J N) x,
///   [x, V] = 2 J P x.
inline std::vector<CheckResult> verify_linear_identities(const CMat& P, const CMat& M, const CMat& N,
                                                         const FockSpace& space, double tol = 1e-9) {
    const auto ops = build_mode_operators(space);
    const Index n2 = 2 * ops.size();
    const CMat J = signature_matrix(ops.size());
    const CMat Jm = signature_matrix(N.rows() / 2);
    const TruncatedOperator V = quadratic_form(P, ops);
    const TruncatedOperator H1 = 0.5 * quadratic_form(M, ops);
    const auto L = linear_forms(N.topRows(N.rows() / 2), ops);

    std::vector<CheckResult> out;
    out.push_back(detail::identity_check("[V,H1] = x^H(PJM - MJP)x", commutator(V, H1),
                                         quadratic_form(P * J * M - M * J * P, ops), 4, tol));

    TruncatedOperator LV = TruncatedOperator::zero(space);
    for (const auto& Lk : L) {
        const TruncatedOperator Ld = Lk.adjoint();
        LV += 0.5 * (Ld * commutator(V, Lk)) + 0.5 * (commutator(Ld, V) * Lk);
    }
    const double trace_term = lambda_tilde(P, N);
    const TruncatedOperator LV_formula =
        trace_term * TruncatedOperator::identity(space) -
        0.5 * quadratic_form(N.adjoint() * Jm * N * J * P + P * J * N.adjoint() * Jm * N, ops);
    out.push_back(detail::identity_check("L(V) = tr(PJN^H diag(I,0) NJ) - 1/2 x^H(N^H JNJP + PJN^H JN)x", LV,
                                         LV_formula, 4, tol));

    const auto JPx = linear_forms(2.0 * J * P, ops);
    double worst = 0.0;
    CheckResult xv{"[x, V] = 2JPx", 0.0, tol, true, space.cutoff, space.guard};
    for (Index i = 0; i < n2; ++i) {
        const auto r = detail::identity_check("", commutator(ops.x(i), V), JPx[static_cast<std::size_t>(i)], 3, tol);
        worst = std::max(worst, r.value);
        xv.guard = r.guard;
    }
    xv.value = worst;
    xv.pass = worst < tol;
    out.push_back(xv);
    return out;
}

struct MuCheck {
    cplx measured{};        // mean diagonal of the compressed [zeta, [V, zeta]]
    double scalar_residual = 0.0;  // distance of the compressed commutator from measured * I
    CheckResult result;
};

/// Measures mu = [zeta, [V, zeta]] on the compressed subspace and compares it
/// with `expected`.
inline MuCheck measure_mu(const TruncatedOperator& V, const TruncatedOperator& zeta, cplx expected,
                          double tol = 1e-9) {
    const FockSpace& s = V.space();
    const int g = std::max(s.guard, 4);
    const CMat c = commutator(zeta, commutator(V, zeta)).compressed(g);
    MuCheck out;
    out.measured = c.trace() / static_cast<double>(c.rows());
    out.scalar_residual = (c - out.measured * CMat::Identity(c.rows(), c.cols())).norm() / std::sqrt(double(c.rows()));
    const double mismatch = std::abs(out.measured - expected) / std::max(1.0, std::abs(expected));
    const double value = std::max(mismatch, out.scalar_residual / std::max(1.0, std::abs(expected)));
    out.result = {"mu = [zeta,[V,zeta]] is the constant from the matrix formula", value, tol, value < tol,
                  s.cutoff, g};
    return out;
}

/// w = 1/2 Delta E x and z = E x for a quadratic perturbation.
struct W1Channels {
    std::vector<TruncatedOperator> w;
    std::vector<TruncatedOperator> z;
};

inline W1Channels quadratic_w1_channels(const QuadraticPerturbation& pert, const ModeOperators& ops) {
    const CMat E = assemble_E(pert);
    return {linear_forms(0.5 * assemble_Delta(pert) * E, ops), linear_forms(E, ops)};
}

/// [V, H2] = [V, z^dagger] w - w^dagger [z, V] (vector sums over channels).
inline CheckResult verify_decomposition_W1(const TruncatedOperator& V, const TruncatedOperator& H2,
                                           const std::vector<TruncatedOperator>& w,
                                           const std::vector<TruncatedOperator>& z) {
    if (w.size() != z.size()) throw StructuralError("dimension mismatch w/z in verify_decomposition_W1");
    TruncatedOperator rhs = TruncatedOperator::zero(V.space());
    for (std::size_t i = 0; i < w.size(); ++i)
        rhs += commutator(V, z[i].adjoint()) * w[i] - w[i].adjoint() * commutator(z[i], V);
    return detail::identity_check("[V,H2] = [V,z^H]w - w^H[z,V]", commutator(V, H2), rhs, 4);
}

/// lambda_min of 1/gamma^2 z^H z + delta - w^H w on the compressed subspace.
inline CheckResult verify_sector1(const std::vector<TruncatedOperator>& w, const std::vector<TruncatedOperator>& z,
                                  double gamma, double delta) {
    const FockSpace& s = z.front().space();
    const int g = std::max(s.guard, 2);
    const CMat zz = inner(z, z).compressed(g);
    const CMat ww = inner(w, w).compressed(g);
    const CMat slack = zz / (gamma * gamma) + delta * CMat::Identity(zz.rows(), zz.cols()) - ww;
    const double v = lambda_min(slack);
    const double tol = -1e-10 * std::max(1.0, spectral_norm(zz) / (gamma * gamma));
    return {"w^H w <= z^H z / gamma^2 + delta", v, tol, v >= tol, s.cutoff, g};
}

struct W2Check {
    CheckResult decomposition;
    MuCheck mu;
};

/// [V, H2] = [V,zeta] f' - f'^*[zeta^*,V] + 1/2 mu f'' - 1/2 mu^* f''^* for
/// H2 = f(zeta, zeta^*), with mu measured from the commutator and compared
/// against the closed form for V = x^H P x.
inline W2Check verify_decomposition_W2(const TruncatedOperator& V, const StructuredP& P, const CMat& coeffs,
                                       const CMat& Etilde) {
    const FockSpace& s = V.space();
    const auto ops = build_mode_operators(s);
    const TruncatedOperator zeta = linear_forms(Etilde, ops).front();
    const TruncatedOperator zs = zeta.adjoint();
    const Index n = ops.size();

    W2Check out;
    out.mu = measure_mu(V, zeta, compute_mu(P, Etilde, signature_matrix(n), swap_matrix(n)));
    const cplx mu = out.mu.measured;

    const TruncatedOperator H2 = polynomial_operator(coeffs, zeta);
    const TruncatedOperator f1 = polynomial_operator(derivative_coefficients(coeffs, 1), zeta);
    const TruncatedOperator f2 = polynomial_operator(derivative_coefficients(coeffs, 2), zeta);
    const TruncatedOperator rhs = commutator(V, zeta) * f1 - f1.adjoint() * commutator(zs, V) +
                                  (0.5 * mu) * f2 - (0.5 * std::conj(mu)) * f2.adjoint();
    int degree = 0;
    for (Index k = 0; k < coeffs.rows(); ++k)
        for (Index l = 0; l < coeffs.cols(); ++l)
            if (coeffs(k, l) != cplx{0.0, 0.0}) degree = std::max(degree, static_cast<int>(k + l));
    out.decomposition = detail::identity_check("[V,H2] = [V,z]f' - f'^*[z^*,V] + mu f''/2 - mu^* f''^*/2",
                                               commutator(V, H2), rhs, std::max(4, degree + 2));
    return out;
}

enum class DissipationVariant { T1, T2 };

/// lambda_min(lambda~ - LHS) on the compressed subspace with
///   T1: LHS = -i[V,H1] + L(V) + [V,z^H][z,V] + z^H z / gamma^2 + cV,
///   T2: LHS = -i[V,H1] + L(V) + [V,z][z^*,V] + z z^* / gamma^2 + cV (scalar z).
inline CheckResult verify_dissipation(const TruncatedOperator& V, const TruncatedOperator& H1,
                                      const std::vector<TruncatedOperator>& L,
                                      const std::vector<TruncatedOperator>& z, double gamma, double c,
                                      double lambda_tilde_value, DissipationVariant variant) {
    const FockSpace& s = V.space();
    TruncatedOperator lhs = -kI * commutator(V, H1) + c * V;
    for (const auto& Lk : L) {
        const TruncatedOperator Ld = Lk.adjoint();
        lhs += 0.5 * (Ld * commutator(V, Lk)) + 0.5 * (commutator(Ld, V) * Lk);
    }
    for (const auto& zi : z) {
        if (variant == DissipationVariant::T1) {
            lhs += commutator(V, zi.adjoint()) * commutator(zi, V) + (1.0 / (gamma * gamma)) * (zi.adjoint() * zi);
        } else {
            lhs += commutator(V, zi) * commutator(zi.adjoint(), V) + (1.0 / (gamma * gamma)) * (zi * zi.adjoint());
        }
    }
    const int g = std::max(s.guard, 6);
    const CMat lc = lhs.compressed(g);
    const double slack = lambda_min(lambda_tilde_value * CMat::Identity(lc.rows(), lc.cols()) - lc);
    return {variant == DissipationVariant::T1 ? "dissipation inequality (vector z)"
                                              : "dissipation inequality (scalar z)",
            slack, -kDissipationTol, slack >= -kDissipationTol, s.cutoff, g};
}

struct SectorSlack {
    CheckResult first;   // 1/gamma^2 zeta zeta^* + delta1 - f'^* f'
    CheckResult second;  // delta2 - f''^* f''
};

/// Negative slack falsifies a sector bound; non-negative slack only means the
/// bound was not falsified at this truncation.
inline SectorSlack check_sector_bounds(const PolynomialPerturbation& pert, const FockSpace& space) {
    const auto ops = build_mode_operators(space);
    const TruncatedOperator zeta = linear_forms(assemble_Etilde(pert), ops).front();
    const TruncatedOperator f1 = polynomial_operator(derivative_coefficients(pert.coeffs, 1), zeta);
    const TruncatedOperator f2 = polynomial_operator(derivative_coefficients(pert.coeffs, 2), zeta);
    const int g = std::max(space.guard, 2 * std::max(1, pert.degree()));

    const CMat zz = (zeta * zeta.adjoint()).compressed(g);
    const CMat Id = CMat::Identity(zz.rows(), zz.cols());
    const double a =
        lambda_min(zz / (pert.gamma * pert.gamma) + pert.delta1 * Id - (f1.adjoint() * f1).compressed(g));
    const double b = lambda_min(pert.delta2 * Id - (f2.adjoint() * f2).compressed(g));
    const double tol = -1e-10;
    return {{"f'^* f' <= zeta zeta^* / gamma^2 + delta1", a, tol, a >= tol, space.cutoff, g},
            {"f''^* f'' <= delta2", b, tol, b >= tol, space.cutoff, g}};
}

struct MasterTrajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> expectations;  // [observable][time]
    std::vector<double> trace;
    std::vector<double> leakage;  // population outside the compressed subspace
    double dt = 0.0;
    bool trusted = true;
};

/// Schroedinger-picture Lindblad evolution by fixed-step RK4 with
/// ||L|| dt <= 0.05, recording tr(O rho(t)) for Hermitian observables at
/// each grid time. No renormalisation is applied; trace and leakage are
/// reported, and the run is untrusted when leakage exceeds kLeakageThreshold.
inline MasterTrajectory simulate_master_equation(const TruncatedOperator& H, const std::vector<TruncatedOperator>& L,
                                                 const CMat& rho0, const std::vector<double>& t_grid,
                                                 const std::vector<TruncatedOperator>& observables) {
    const FockSpace& s = H.space();
    const Index dim = s.dim();
    if (rho0.rows() != dim || rho0.cols() != dim) throw StructuralError("dimension mismatch rho0/H");
    if (std::abs(rho0.trace() - 1.0) > 1e-9) throw PreconditionError("rho0 must have unit trace");
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        if (!(t_grid[i] > t_grid[i - 1])) throw PreconditionError("time grid must be increasing");

    CMat K = -kI * H.matrix();
    double norm_estimate = 2.0 * spectral_norm(H.matrix());
    for (const auto& Lk : L) {
        K -= 0.5 * Lk.matrix().adjoint() * Lk.matrix();
        const double ln = spectral_norm(Lk.matrix());
        norm_estimate += 2.0 * ln * ln;
    }
    const double dt_max = norm_estimate > 0.0 ? 0.05 / norm_estimate : 1.0;
    const CMat Kh = K.adjoint();

    auto rhs = [&](const CMat& rho) {
        CMat out = K * rho + rho * Kh;
        for (const auto& Lk : L) out.noalias() += Lk.matrix() * rho * Lk.matrix().adjoint();
        return out;
    };

    const auto inside = s.compressed_indices(s.guard);
    std::vector<char> in_set(static_cast<std::size_t>(dim), 0);
    for (const Index i : inside) in_set[static_cast<std::size_t>(i)] = 1;

    MasterTrajectory out;
    out.times = t_grid;
    out.expectations.assign(observables.size(), {});
    out.dt = dt_max;
    auto record = [&](const CMat& rho) {
        for (std::size_t k = 0; k < observables.size(); ++k)
            out.expectations[k].push_back((observables[k].matrix() * rho).trace().real());
        out.trace.push_back(rho.trace().real());
        double leak = 0.0;
        for (Index i = 0; i < dim; ++i)
            if (!in_set[static_cast<std::size_t>(i)]) leak += rho(i, i).real();
        out.leakage.push_back(leak);
        if (leak > kLeakageThreshold) out.trusted = false;
    };

    CMat rho = rho0;
    if (!t_grid.empty()) record(rho);
    for (std::size_t i = 1; i < t_grid.size(); ++i) {
        const double span = t_grid[i] - t_grid[i - 1];
        const int steps = std::max(1, static_cast<int>(std::ceil(span / dt_max)));
        const double h = span / steps;
        for (int k = 0; k < steps; ++k) {
            const CMat k1 = rhs(rho);
            const CMat k2 = rhs(rho + 0.5 * h * k1);
            const CMat k3 = rhs(rho + 0.5 * h * k2);
            const CMat k4 = rhs(rho + h * k3);
            rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        record(rho);
    }
    return out;
}

/// |n1 .. nk><n1 .. nk| for the given occupations.
inline CMat fock_state(const FockSpace& s, const std::vector<int>& occupation) {
    if (static_cast<int>(occupation.size()) != s.n_modes) throw StructuralError("fock_state: wrong mode count");
    Index idx = 0;
    for (const int o : occupation) {
        if (o < 0 || o >= s.cutoff) throw StructuralError("fock_state: occupation outside truncation");
        idx = idx * s.cutoff + o;
    }
    CMat rho = CMat::Zero(s.dim(), s.dim());
    rho(idx, idx) = 1.0;
    return rho;
}

}  // namespace qrs
