#pragma once

// Nonlinear squeezing coefficients xi^{-2}_(k): ordered observable sets of
// symmetrized quadrature monomials, their covariance matrix Gamma and
// commutator vector C (closed-form and numeric), and the optimized moment
// matrix chi^{-2} = C Gamma^{-1} C^T.

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "cubicsense/analytic.hpp"
#include "cubicsense/errors.hpp"
#include "cubicsense/fock.hpp"

namespace cubicsense {

// Ordered family {X_1..X_l} of Hermitian observables; order k selects
// {x}, {x, S(xp)}, {.., x^3, S(xp^2)}, {.., S(x^3 p), S(x p^3)}.
template <typename Scalar = double>
struct ObservableSet {
    int k = 0;
    std::vector<std::string> labels;
    std::vector<OperatorMatrix<Scalar>> members;

    std::size_t size() const { return members.size(); }
};

namespace detail {

template <typename Scalar>
using SparseC = Eigen::SparseMatrix<std::complex<Scalar>>;

// The quadrature monomials are banded; building them sparsely keeps large
// dims cheap.
template <typename Scalar>
SparseC<Scalar> sparse_ladder_x(Index dim) {
    SparseC<Scalar> x(dim, dim);
    std::vector<Eigen::Triplet<std::complex<Scalar>>> t;
    for (Index k = 1; k < dim; ++k) {
        const Scalar v = std::sqrt(Scalar(k) / 2);
        t.emplace_back(k - 1, k, std::complex<Scalar>(v, 0));
        t.emplace_back(k, k - 1, std::complex<Scalar>(v, 0));
    }
    x.setFromTriplets(t.begin(), t.end());
    return x;
}

template <typename Scalar>
SparseC<Scalar> sparse_ladder_p(Index dim) {
    SparseC<Scalar> p(dim, dim);
    std::vector<Eigen::Triplet<std::complex<Scalar>>> t;
    for (Index k = 1; k < dim; ++k) {
        const Scalar v = std::sqrt(Scalar(k) / 2);
        t.emplace_back(k - 1, k, std::complex<Scalar>(0, -v));
        t.emplace_back(k, k - 1, std::complex<Scalar>(0, v));
    }
    p.setFromTriplets(t.begin(), t.end());
    return p;
}

}  // namespace detail

template <typename Scalar = double>
ObservableSet<Scalar> build_observable_set(int k, Index dim) {
    if (k < 1 || k > 4) throw UnsupportedOrderError("observable sets are defined for k = 1..4");
    using detail::SparseC;
    const SparseC<Scalar> x = detail::sparse_ladder_x<Scalar>(dim);
    const SparseC<Scalar> p = detail::sparse_ladder_p<Scalar>(dim);
    const SparseC<Scalar> x2 = (x * x).pruned();
    const SparseC<Scalar> x3 = (x2 * x).pruned();
    const SparseC<Scalar> p2 = (p * p).pruned();
    const SparseC<Scalar> p3 = (p2 * p).pruned();

    ObservableSet<Scalar> set;
    set.k = k;
    auto add = [&](const std::string& label, const SparseC<Scalar>& m) {
        set.labels.push_back(label);
        set.members.push_back({MatrixXc<Scalar>(m), true});
    };
    add("x", x);
    if (k >= 2) add("S(xp)", ((x * p + p * x) * std::complex<Scalar>(0.5, 0)).pruned());
    if (k >= 3) {
        add("x^3", x3);
        add("S(xp^2)", ((x * p2 + p * x * p + p2 * x) / Scalar(3)).pruned());
    }
    if (k >= 4) {
        add("S(x^3p)", ((x3 * p + x2 * p * x + x * p * x2 + p * x3) / Scalar(4)).pruned());
        add("S(xp^3)", ((x * p3 + p * x * p2 + p2 * x * p + p3 * x) / Scalar(4)).pruned());
    }
    return set;
}

enum class MomentSource { analytic, numeric };

// Covariance matrix Gamma_ij = (1/2)<{X_i,X_j}> - <X_i><X_j> and commutator
// vector C_j = -i<[n, X_j]> for an ordered observable family.
template <typename Scalar = double>
struct MomentData {
    MatrixX<Scalar> gamma;
    VectorX<Scalar> c_vec;
    int k = 0;
    MomentSource source = MomentSource::numeric;

    void require_shape() const {
        if (gamma.rows() != gamma.cols() || gamma.rows() != c_vec.size())
            throw ContractError("moment data shape mismatch");
    }
};

// Closed forms for the pure cubic phase state, every entry polynomial in r
// and E = e^{2s}.
template <typename Scalar = double>
MomentData<Scalar> analytic_moments(Scalar r, Scalar s, int k) {
    if (k < 1 || k > 4) throw UnsupportedOrderError("analytic moments are defined for k = 1..4");
    const Scalar E = std::exp(Scalar(2) * s);
    const Scalar E2 = E * E, E3 = E2 * E, E4 = E3 * E;
    const Scalar r2 = r * r;

    MatrixX<Scalar> G(6, 6);
    G(0, 0) = E / 2;
    G(0, 1) = Scalar(9) / 4 * r * E2;
    G(0, 2) = Scalar(3) / 4 * E2;
    G(0, 3) = (135 * r2 * E3 + 2) / 8;
    G(0, 4) = Scalar(45) / 8 * r * E3;
    G(0, 5) = Scalar(21) / 16 * r * E * (135 * r2 * E3 + 2);
    G(1, 1) = (135 * r2 * E3 + 4) / 8;
    G(1, 2) = Scalar(45) / 8 * r * E3;
    G(1, 3) = Scalar(27) / 16 * r * E * (105 * r2 * E3 + 2);
    G(1, 4) = Scalar(3) / 16 * E * (315 * r2 * E3 + 4);
    G(1, 5) = Scalar(3) / 32 / E * (45 * r2 * E3 * (567 * r2 * E3 + 10) + 8);
    G(2, 2) = Scalar(15) / 8 * E3;
    G(2, 3) = Scalar(3) / 16 * E * (315 * r2 * E3 - 2);
    G(2, 4) = Scalar(315) / 16 * r * E4;
    G(2, 5) = Scalar(45) / 32 * r * E2 * (567 * r2 * E3 - 2);
    G(3, 3) = Scalar(1) / 32 / E * (27 * r2 * E3 * (2835 * r2 * E3 + 52) + 28);
    G(3, 4) = Scalar(9) / 32 * r * E2 * (2835 * r2 * E3 + 26);
    G(3, 5) = Scalar(3) / 64 * r * (945 * r2 * E3 * (891 * r2 * E3 + 16) + 124);
    G(4, 4) = Scalar(21) / 32 * E2 * (405 * r2 * E3 + 4);
    G(4, 5) = Scalar(3) / 64 * (45 * r2 * E3 * (6237 * r2 * E3 + 50) - 8);
    G(5, 5) = Scalar(3) / 128 / E2 * (15 * r2 * E3 * (2457 * r2 * E3 * (891 * r2 * E3 + 16) + 356) + 112);
    G.template triangularView<Eigen::StrictlyLower>() = G.transpose();

    VectorX<Scalar> C(6);
    C[0] = Scalar(-3) / 2 * r * E;
    C[1] = Scalar(-27) / 4 * r2 * E2 + std::sinh(2 * s);
    C[2] = Scalar(-27) / 4 * r * E2;
    C[3] = Scalar(-3) / 8 * r * (135 * r2 * E3 - 12 * E2 + 2);
    C[4] = Scalar(-3) / 8 * (135 * r2 * E3 - 2 * E2 + 2);
    C[5] = Scalar(-3) / 16 / E2 * (15 * r2 * E3 * (189 * r2 * E3 - 18 * E2 + 4) - 4 * E2 + 4);

    static const int sizes[] = {0, 1, 2, 4, 6};
    const int l = sizes[k];
    MomentData<Scalar> md;
    md.gamma = G.topLeftCorner(l, l);
    md.c_vec = C.head(l);
    md.k = k;
    md.source = MomentSource::analytic;
    return md;
}

namespace detail {

template <typename Scalar>
struct PureExpectations {
    const FockState<Scalar>& psi;
    std::vector<VectorXc<Scalar>> applied;  // X_i |psi>
    VectorXc<Scalar> n_applied;

    Scalar mean(std::size_t i) const { return psi.amplitudes.dot(applied[i]).real(); }
    Scalar sym_product(std::size_t i, std::size_t j) const {
        return ((applied[i].dot(applied[j]) + applied[j].dot(applied[i])) / Scalar(2)).real();
    }
    // -i<[n, X_j]> = 2 Im <n psi | X_j psi>
    Scalar commutator(std::size_t j) const {
        return Scalar(2) * n_applied.dot(applied[j]).imag();
    }
};

template <typename Scalar>
struct MixedExpectations {
    const DensityOperator<Scalar>& rho;
    const std::vector<OperatorMatrix<Scalar>>* members;
    std::vector<MatrixXc<Scalar>> rho_x;  // rho * X_i
    MatrixXc<Scalar> rho_n;

    Scalar mean(std::size_t i) const { return rho_x[i].trace().real(); }
    Scalar sym_product(std::size_t i, std::size_t j) const {
        const auto& Xi = (*members)[i].matrix;
        const auto& Xj = (*members)[j].matrix;
        return (((rho_x[i] * Xj).trace() + (rho_x[j] * Xi).trace()) / Scalar(2)).real();
    }
    // -i(Tr(rho n X) - Tr(rho X n)) = 2 Im Tr(rho n X) since Tr(rho X n) is
    // the conjugate of Tr(rho n X) for Hermitian rho, n, X.
    Scalar commutator(std::size_t j) const {
        return Scalar(2) * (rho_n * (*members)[j].matrix).trace().imag();
    }
};

template <typename Scalar, typename Expect>
MomentData<Scalar> assemble_moments(const Expect& ex, int k, std::size_t l, Scalar imag_tol) {
    MomentData<Scalar> md;
    md.k = k;
    md.source = MomentSource::numeric;
    md.gamma.resize(l, l);
    md.c_vec.resize(l);
    std::vector<Scalar> means(l);
    for (std::size_t i = 0; i < l; ++i) means[i] = ex.mean(i);
    for (std::size_t i = 0; i < l; ++i)
        for (std::size_t j = i; j < l; ++j) {
            const Scalar g = ex.sym_product(i, j) - means[i] * means[j];
            md.gamma(i, j) = g;
            md.gamma(j, i) = g;
        }
    for (std::size_t j = 0; j < l; ++j) md.c_vec[j] = ex.commutator(j);
    (void)imag_tol;
    return md;
}

}  // namespace detail

template <typename Scalar = double>
MomentData<Scalar> numeric_moments(const FockState<Scalar>& state, const ObservableSet<Scalar>& set) {
    const Index d = state.dim();
    for (const auto& m : set.members)
        if (m.dim() != d) throw ContractError("observable/state dimension mismatch");
    detail::PureExpectations<Scalar> ex{state, {}, {}};
    ex.applied.reserve(set.size());
    for (const auto& m : set.members) ex.applied.push_back(m.matrix * state.amplitudes);
    VectorXc<Scalar> nv(d);
    for (Index i = 0; i < d; ++i) nv[i] = Scalar(i) * state.amplitudes[i];
    ex.n_applied = nv;
    return detail::assemble_moments<Scalar>(ex, set.k, set.size(), Scalar(1e-10));
}

template <typename Scalar = double>
MomentData<Scalar> numeric_moments(const DensityOperator<Scalar>& rho, const ObservableSet<Scalar>& set) {
    const Index d = rho.dim();
    for (const auto& m : set.members)
        if (m.dim() != d) throw ContractError("observable/state dimension mismatch");
    detail::MixedExpectations<Scalar> ex{rho, &set.members, {}, {}};
    ex.rho_x.reserve(set.size());
    for (const auto& m : set.members) ex.rho_x.push_back(rho.matrix * m.matrix);
    MatrixXc<Scalar> n = MatrixXc<Scalar>::Zero(d, d);
    for (Index i = 0; i < d; ++i) n(i, i) = std::complex<Scalar>(Scalar(i), 0);
    ex.rho_n = rho.matrix * n;
    return detail::assemble_moments<Scalar>(ex, set.k, set.size(), Scalar(1e-10));
}

template <typename Scalar = double>
struct Chi2Result {
    Scalar chi2_inv = 0;
    VectorX<Scalar> m_opt;  // unit Euclidean norm
};

// chi^{-2}_opt = C Gamma^+ C^T with a symmetric-eigendecomposition
// pseudo-inverse (relative cutoff 1e-12). The system is first equilibrated to
// unit diagonal: chi is invariant under rescaling individual observables, and
// the mixed operator orders otherwise push the raw condition number past
// double precision at large cubicity. Near r = 0 some commutator entries
// vanish and Gamma can additionally be near-singular at small s.
template <typename Scalar = double>
Chi2Result<Scalar> chi2_inv(const MomentData<Scalar>& md) {
    md.require_shape();
    const Index l = md.gamma.rows();
    VectorX<Scalar> scale(l);
    for (Index i = 0; i < l; ++i)
        scale[i] = md.gamma(i, i) > 0 ? std::sqrt(md.gamma(i, i)) : Scalar(1);
    const MatrixX<Scalar> g =
        scale.cwiseInverse().asDiagonal() * md.gamma * scale.cwiseInverse().asDiagonal();
    const VectorX<Scalar> c = md.c_vec.cwiseQuotient(scale);

    Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(g);
    const VectorX<Scalar> w = es.eigenvalues();
    const Scalar wmax = std::max(w.cwiseAbs().maxCoeff(), Scalar(1e-300));
    if (w.minCoeff() < -Scalar(1e-9) * std::max(wmax, Scalar(1)))
        throw ConditioningError("covariance matrix is not positive semidefinite",
                                double(wmax / std::max(std::abs(w.minCoeff()), Scalar(1e-300))));
    const Scalar cut = Scalar(1e-12) * wmax;
    VectorX<Scalar> winv(l);
    for (Index i = 0; i < l; ++i) winv[i] = w[i] > cut ? 1 / w[i] : Scalar(0);
    const VectorX<Scalar> m_eq = es.eigenvectors() * winv.asDiagonal() *
                                 (es.eigenvectors().transpose() * c);
    Chi2Result<Scalar> out;
    out.chi2_inv = c.dot(m_eq);
    const Scalar nm = m_eq.norm();
    if (nm > 0) {
        // The optimum must reproduce itself through the ratio |C.m|^2/(m'Gm).
        const VectorX<Scalar> m_hat = m_eq / nm;
        const Scalar denom = m_hat.dot(g * m_hat);
        if (denom > 0) {
            const Scalar ratio = std::pow(c.dot(m_hat), 2) / denom;
            if (std::abs(ratio - out.chi2_inv) > Scalar(1e-9) * (1 + std::abs(out.chi2_inv)))
                throw ConditioningError("pseudo-inverse failed the reconstruction check",
                                        double(wmax / cut));
        }
        out.m_opt = m_eq.cwiseQuotient(scale);
        out.m_opt /= out.m_opt.norm();
    } else {
        out.m_opt = VectorX<Scalar>::Zero(l);
        if (l > 0) out.m_opt[0] = 1;  // degenerate: zero commutator vector
    }
    return out;
}

// Nonlinear squeezing coefficient xi^{-2}_(k) = chi^{-2}_(k) / n for the pure
// cubic phase state, on the closed-form path.
template <typename Scalar = double>
Scalar xi2_inv(Scalar r, Scalar s, int k) {
    const Scalar n = population(r, s);
    if (!(n > 0)) throw ContractError("xi2_inv is undefined at zero population");
    return chi2_inv(analytic_moments(r, s, k)).chi2_inv / n;
}

template <typename Scalar = double>
struct BiasCheck {
    Scalar mean_at_zero = 0;
    Scalar derivative = 0;  // d<M>/dtheta at theta = 0 under exp(-i theta n)
    bool degenerate = false;
};

// Local unbiasedness of the moment estimator M = m . X: <M> vanishes at
// theta = 0 and the signal slope is the (nonzero) commutator contraction.
// The slope is measured by a central difference over exp(-i theta n).
template <typename Scalar = double>
BiasCheck<Scalar> estimator_bias_check(const FockState<Scalar>& state, const ObservableSet<Scalar>& set,
                                       const VectorX<Scalar>& m, Scalar h = Scalar(1e-4)) {
    if (std::size_t(m.size()) != set.size()) throw ContractError("coefficient/set size mismatch");
    const Index d = state.dim();
    MatrixXc<Scalar> M = MatrixXc<Scalar>::Zero(d, d);
    for (std::size_t i = 0; i < set.size(); ++i) M += std::complex<Scalar>(m[int(i)], 0) * set.members[i].matrix;
    const OperatorMatrix<Scalar> Mop{M, true};

    auto rotated = [&](Scalar theta) {
        FockState<Scalar> out = state;
        for (Index i = 0; i < d; ++i)
            out.amplitudes[i] *= std::exp(std::complex<Scalar>(0, -theta * Scalar(i)));
        return out;
    };
    BiasCheck<Scalar> out;
    out.mean_at_zero = expectation(state, Mop).real();
    const Scalar mp = expectation(rotated(h), Mop).real();
    const Scalar mm = expectation(rotated(-h), Mop).real();
    out.derivative = (mp - mm) / (2 * h);
    out.degenerate = std::abs(out.derivative) < Scalar(1e-12);
    return out;
}

using ObservableSetd = ObservableSet<double>;
using MomentDatad = MomentData<double>;

}  // namespace cubicsense
