#pragma once

// Truncated-Fock-space engine: ladder operators, gates via Hermitian
// eigendecomposition, expectation values, quantum Fisher information and
// Wigner functions. Everything upstream is checked against this module.

#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cubicsense/errors.hpp"

namespace cubicsense {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorXc = VectorX<std::complex<Scalar>>;
template <typename Scalar>
using MatrixXc = MatrixX<std::complex<Scalar>>;

using Index = Eigen::Index;

// Normalized pure state over the truncated number basis.
template <typename Scalar = double>
struct FockState {
    VectorXc<Scalar> amplitudes;

    Index dim() const { return amplitudes.size(); }

    Scalar norm() const { return amplitudes.norm(); }

    // Occupation mass in the top five levels; the truncation health measure.
    Scalar tail_mass() const {
        const Index d = dim();
        const Index k0 = d > 5 ? d - 5 : Index{0};
        return amplitudes.segment(k0, d - k0).squaredNorm();
    }

    FockState& normalized_in_place() {
        amplitudes /= amplitudes.norm();
        return *this;
    }

    void require_normalized(Scalar tol = Scalar(1e-12)) const {
        if (std::abs(amplitudes.squaredNorm() - Scalar(1)) > tol)
            throw InvalidStateError("state is not normalized");
    }

    void require_tail(Scalar tol) const {
        const Scalar t = tail_mass();
        if (t > tol) throw TruncationError("state tail mass above tolerance", double(t), long(dim()));
    }
};

// Hermitian (or general) operator on the truncated basis.
template <typename Scalar = double>
struct OperatorMatrix {
    MatrixXc<Scalar> matrix;
    bool hermitian = false;

    Index dim() const { return matrix.rows(); }

    Scalar hermiticity_defect() const {
        return (matrix - matrix.adjoint()).template lpNorm<Eigen::Infinity>();
    }

    void require_hermitian(Scalar tol = Scalar(1e-12)) const {
        if (!hermitian || hermiticity_defect() > tol)
            throw ContractError("operator is not Hermitian within tolerance");
    }
};

// Trace-one Hermitian positive matrix.
template <typename Scalar = double>
struct DensityOperator {
    MatrixXc<Scalar> matrix;

    Index dim() const { return matrix.rows(); }

    std::complex<Scalar> trace() const { return matrix.trace(); }

    void validate(Scalar herm_tol = Scalar(1e-10), Scalar trace_tol = Scalar(1e-10),
                  Scalar eig_floor = Scalar(-1e-10)) const {
        if ((matrix - matrix.adjoint()).template lpNorm<Eigen::Infinity>() > herm_tol)
            throw InvalidStateError("density operator is not Hermitian");
        if (std::abs(matrix.trace() - std::complex<Scalar>(1, 0)) > trace_tol)
            throw InvalidStateError("density operator trace differs from one");
        Eigen::SelfAdjointEigenSolver<MatrixXc<Scalar>> es(matrix, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < eig_floor)
            throw InvalidStateError("density operator has a negative eigenvalue");
    }
};

template <typename Scalar = double>
struct Ladder {
    OperatorMatrix<Scalar> a, a_dagger, n, x, p;
};

// a|k> = sqrt(k)|k-1>;  x = (a+a')/sqrt2 so the vacuum has Var(x) = 1/2.
template <typename Scalar = double>
Ladder<Scalar> make_ladder(Index dim) {
    if (dim < 2) throw InvalidDimensionError("ladder operators need dim >= 2");
    using C = std::complex<Scalar>;
    MatrixXc<Scalar> a = MatrixXc<Scalar>::Zero(dim, dim);
    for (Index k = 1; k < dim; ++k) a(k - 1, k) = C(std::sqrt(Scalar(k)), 0);
    MatrixXc<Scalar> ad = a.adjoint();
    Ladder<Scalar> l;
    l.a = {a, false};
    l.a_dagger = {ad, false};
    l.n = {(ad * a).eval(), true};
    const Scalar rs2 = Scalar(1) / std::sqrt(Scalar(2));
    l.x = {((a + ad) * rs2).eval(), true};
    l.p = {((a - ad) * (C(0, -1) * rs2)).eval(), true};
    return l;
}

template <typename Scalar = double>
FockState<Scalar> vacuum_state(Index dim) {
    if (dim < 1) throw InvalidDimensionError("state needs dim >= 1");
    FockState<Scalar> s;
    s.amplitudes = VectorXc<Scalar>::Zero(dim);
    s.amplitudes[0] = std::complex<Scalar>(1, 0);
    return s;
}

// Closed-form Fock expansion of exp(-s(a^2-a'^2)/2)|0>:
//   c_{2m} = sech(s)^{1/2} (tanh(s)/2)^m sqrt((2m)!)/m!,
// evaluated in log space so high-index amplitudes underflow to zero instead
// of carrying roundoff dust.
template <typename Scalar = double>
FockState<Scalar> squeezed_vacuum_amplitudes(Scalar s, Index dim) {
    if (dim < 1) throw InvalidDimensionError("state needs dim >= 1");
    FockState<Scalar> out;
    out.amplitudes = VectorXc<Scalar>::Zero(dim);
    const Scalar t = std::tanh(s);
    if (t == Scalar(0)) {
        out.amplitudes[0] = std::complex<Scalar>(1, 0);
        return out;
    }
    const Scalar logt2 = std::log(std::abs(t) / Scalar(2));
    for (Index m = 0; 2 * m < dim; ++m) {
        const Scalar logc = Scalar(m) * logt2 +
                            Scalar(0.5) * std::lgamma(Scalar(2 * m + 1)) -
                            std::lgamma(Scalar(m + 1));
        Scalar c = std::exp(logc);
        if (t < Scalar(0) && (m % 2)) c = -c;
        out.amplitudes[2 * m] = std::complex<Scalar>(c, 0);
    }
    out.normalized_in_place();
    return out;
}

// exp(i*coeff*G) for Hermitian G, applied through the eigendecomposition of G.
// Decomposing once and reusing across coefficients is what keeps parameter
// scans cheap.
template <typename Scalar = double>
class HermitianGate {
public:
    HermitianGate(const OperatorMatrix<Scalar>& generator, Scalar herm_tol = Scalar(1e-10)) {
        if (generator.hermiticity_defect() > herm_tol)
            throw ContractError("gate generator is not Hermitian within tolerance");
        Eigen::SelfAdjointEigenSolver<MatrixXc<Scalar>> es(
            ((generator.matrix + generator.matrix.adjoint()) / Scalar(2)).eval());
        eigenvalues_ = es.eigenvalues();
        eigenvectors_ = es.eigenvectors();
    }

    Index dim() const { return eigenvalues_.size(); }

    FockState<Scalar> apply(const FockState<Scalar>& state, Scalar coeff) const {
        if (state.dim() != dim()) throw ContractError("gate/state dimension mismatch");
        if (coeff == Scalar(0)) return state;
        using C = std::complex<Scalar>;
        VectorXc<Scalar> y = eigenvectors_.adjoint() * state.amplitudes;
        for (Index k = 0; k < y.size(); ++k)
            y[k] *= std::exp(C(0, coeff * eigenvalues_[k]));
        FockState<Scalar> out;
        out.amplitudes = eigenvectors_ * y;
        return out;
    }

    MatrixXc<Scalar> unitary(Scalar coeff) const {
        using C = std::complex<Scalar>;
        VectorXc<Scalar> ph(eigenvalues_.size());
        for (Index k = 0; k < ph.size(); ++k) ph[k] = std::exp(C(0, coeff * eigenvalues_[k]));
        return eigenvectors_ * ph.asDiagonal() * eigenvectors_.adjoint();
    }

    const VectorX<Scalar>& eigenvalues() const { return eigenvalues_; }

private:
    VectorX<Scalar> eigenvalues_;
    MatrixXc<Scalar> eigenvectors_;
};

// Gates generated by real polynomials of x alone (the cubic gate, x^2 terms).
// Truncated x is real symmetric tridiagonal, so P(x) shares its eigenvectors
// with eigenvalues P(lambda); this reaches dims in the thousands where a dense
// complex eigendecomposition would not.
template <typename Scalar = double>
class XPolynomialGate {
public:
    // coeffs[j] multiplies x^j.
    XPolynomialGate(Index dim, std::vector<Scalar> coeffs) : coeffs_(std::move(coeffs)) {
        if (dim < 2) throw InvalidDimensionError("gate needs dim >= 2");
        VectorX<Scalar> diag = VectorX<Scalar>::Zero(dim);
        VectorX<Scalar> sub(dim - 1);
        for (Index k = 1; k < dim; ++k) sub[k - 1] = std::sqrt(Scalar(k) / Scalar(2));
        Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es;
        es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
        xvals_ = es.eigenvalues();
        vectors_ = es.eigenvectors();
        pvals_.resize(dim);
        for (Index k = 0; k < dim; ++k) {
            Scalar acc = 0, pw = 1;
            for (const Scalar c : coeffs_) {
                acc += c * pw;
                pw *= xvals_[k];
            }
            pvals_[k] = acc;
        }
    }

    Index dim() const { return xvals_.size(); }

    FockState<Scalar> apply(const FockState<Scalar>& state, Scalar coeff) const {
        if (state.dim() != dim()) throw ContractError("gate/state dimension mismatch");
        if (coeff == Scalar(0)) return state;
        using C = std::complex<Scalar>;
        VectorX<Scalar> yr = vectors_.transpose() * state.amplitudes.real();
        VectorX<Scalar> yi = vectors_.transpose() * state.amplitudes.imag();
        VectorXc<Scalar> y(dim());
        for (Index k = 0; k < dim(); ++k)
            y[k] = C(yr[k], yi[k]) * std::exp(C(0, coeff * pvals_[k]));
        FockState<Scalar> out;
        out.amplitudes.resize(dim());
        out.amplitudes.real() = vectors_ * y.real();
        out.amplitudes.imag() = vectors_ * y.imag();
        return out;
    }

private:
    std::vector<Scalar> coeffs_;
    VectorX<Scalar> xvals_, pvals_;
    MatrixX<Scalar> vectors_;
};

// One-shot exp(i*coeff*generator)|state>. Norm is preserved by construction;
// the tail check is the caller's truncation guard.
template <typename Scalar = double>
FockState<Scalar> apply_gate(const FockState<Scalar>& state, const OperatorMatrix<Scalar>& generator,
                             Scalar coeff, Scalar tail_tol = Scalar(1e-8)) {
    HermitianGate<Scalar> g(generator);
    FockState<Scalar> out = g.apply(state, coeff);
    out.require_tail(tail_tol);
    return out;
}

// Hermitian generator G with exp(i*s*G) = exp(-s(a^2-a'^2)/2).
template <typename Scalar = double>
OperatorMatrix<Scalar> squeeze_generator(const Ladder<Scalar>& l) {
    using C = std::complex<Scalar>;
    MatrixXc<Scalar> g = C(0, Scalar(0.5)) *
        (l.a.matrix * l.a.matrix - l.a_dagger.matrix * l.a_dagger.matrix);
    return {g.eval(), true};
}

// Hermitian generator G with exp(i*G) = D(beta) = exp(beta a' - conj(beta) a).
template <typename Scalar = double>
OperatorMatrix<Scalar> displacement_generator(const Ladder<Scalar>& l, std::complex<Scalar> beta) {
    using C = std::complex<Scalar>;
    MatrixXc<Scalar> g = C(0, 1) * (std::conj(beta) * l.a.matrix - beta * l.a_dagger.matrix);
    return {g.eval(), true};
}

template <typename Scalar = double>
FockState<Scalar> squeezed_vacuum(Scalar s, Index dim, Scalar tail_tol = Scalar(1e-8)) {
    const Ladder<Scalar> l = make_ladder<Scalar>(dim);
    return apply_gate(vacuum_state<Scalar>(dim), squeeze_generator(l), s, tail_tol);
}

// |psi(r,s)> = exp(i r x^3) exp(-s(a^2-a'^2)/2)|0>, seeded from the closed-form
// squeezed-vacuum amplitudes so high-index roundoff dust never enters.
template <typename Scalar = double>
FockState<Scalar> cubic_state(Scalar r, Scalar s, Index dim, Scalar tail_tol = Scalar(1e-8)) {
    XPolynomialGate<Scalar> cubic(dim, {0, 0, 0, 1});
    FockState<Scalar> out = cubic.apply(squeezed_vacuum_amplitudes(s, dim), r);
    out.require_tail(tail_tol);
    return out;
}

template <typename Scalar>
std::complex<Scalar> expectation(const FockState<Scalar>& state, const OperatorMatrix<Scalar>& obs) {
    if (state.dim() != obs.dim()) throw ContractError("state/observable dimension mismatch");
    return state.amplitudes.dot(obs.matrix * state.amplitudes);
}

template <typename Scalar>
std::complex<Scalar> expectation(const DensityOperator<Scalar>& rho, const OperatorMatrix<Scalar>& obs) {
    if (rho.dim() != obs.dim()) throw ContractError("state/observable dimension mismatch");
    return (rho.matrix * obs.matrix).trace();
}

template <typename Scalar, typename StateLike>
Scalar variance(const StateLike& state, const OperatorMatrix<Scalar>& obs) {
    const OperatorMatrix<Scalar> sq{(obs.matrix * obs.matrix).eval(), obs.hermitian};
    const Scalar m1 = expectation(state, obs).real();
    const Scalar m2 = expectation(state, sq).real();
    return m2 - m1 * m1;
}

// <M^j> for j = 0..jmax by repeated application.
template <typename Scalar>
std::vector<Scalar> raw_moments(const FockState<Scalar>& state, const OperatorMatrix<Scalar>& obs,
                                int jmax) {
    std::vector<Scalar> mom(jmax + 1);
    mom[0] = Scalar(1);
    VectorXc<Scalar> v = state.amplitudes;
    for (int j = 1; j <= jmax; ++j) {
        v = obs.matrix * v;
        mom[j] = state.amplitudes.dot(v).real();
    }
    return mom;
}

template <typename Scalar>
std::vector<Scalar> raw_moments(const DensityOperator<Scalar>& rho, const OperatorMatrix<Scalar>& obs,
                                int jmax) {
    std::vector<Scalar> mom(jmax + 1);
    mom[0] = Scalar(1);
    MatrixXc<Scalar> m = rho.matrix;
    for (int j = 1; j <= jmax; ++j) {
        m = m * obs.matrix;
        mom[j] = m.trace().real();
    }
    return mom;
}

// Pure-state QFI for the phase family exp(-i theta G): 4 Var(G).
template <typename Scalar>
Scalar pure_qfi(const FockState<Scalar>& state, const OperatorMatrix<Scalar>& generator) {
    return Scalar(4) * variance(state, generator);
}

template <typename Scalar>
struct NumberMoments {
    Scalar mean = 0;
    Scalar second = 0;

    Scalar variance() const { return second - mean * mean; }
    Scalar qfi() const { return Scalar(4) * variance(); }
};

// <n> and <n^2> straight off the amplitudes.
template <typename Scalar>
NumberMoments<Scalar> number_moments(const FockState<Scalar>& state) {
    NumberMoments<Scalar> out;
    for (Index k = 0; k < state.dim(); ++k) {
        const Scalar pk = std::norm(state.amplitudes[k]);
        out.mean += Scalar(k) * pk;
        out.second += Scalar(k) * Scalar(k) * pk;
    }
    return out;
}

// Mixed-state QFI: 2 sum_{k,l: lk+ll>0} (lk-ll)^2/(lk+ll) |<k|G|l>|^2.
template <typename Scalar>
Scalar mixed_qfi(const DensityOperator<Scalar>& rho, const OperatorMatrix<Scalar>& generator,
                 Scalar eig_floor = Scalar(-1e-10)) {
    if (rho.dim() != generator.dim()) throw ContractError("state/generator dimension mismatch");
    Eigen::SelfAdjointEigenSolver<MatrixXc<Scalar>> es(rho.matrix);
    VectorX<Scalar> lam = es.eigenvalues();
    if (lam.minCoeff() < eig_floor)
        throw InvalidStateError("density operator has a negative eigenvalue beyond tolerance");
    const MatrixXc<Scalar> g = es.eigenvectors().adjoint() * generator.matrix * es.eigenvectors();
    const Index d = lam.size();
    Scalar f = 0;
    for (Index k = 0; k < d; ++k) {
        const Scalar lk = std::max(lam[k], Scalar(0));
        for (Index l = 0; l < d; ++l) {
            const Scalar ll = std::max(lam[l], Scalar(0));
            const Scalar den = lk + ll;
            if (den > Scalar(1e-12)) {
                const Scalar diff = lk - ll;
                f += Scalar(2) * diff * diff / den * std::norm(g(k, l));
            }
        }
    }
    return f;
}

template <typename Scalar>
Scalar fidelity(const FockState<Scalar>& a, const FockState<Scalar>& b) {
    if (a.dim() != b.dim()) throw ContractError("state dimension mismatch");
    return std::abs(a.amplitudes.dot(b.amplitudes));
}

template <typename Scalar>
Scalar fidelity(const FockState<Scalar>& psi, const DensityOperator<Scalar>& rho) {
    if (psi.dim() != rho.dim()) throw ContractError("state dimension mismatch");
    return std::sqrt(std::abs(psi.amplitudes.dot(rho.matrix * psi.amplitudes)));
}

template <typename Scalar>
DensityOperator<Scalar> pure_density(const FockState<Scalar>& psi) {
    DensityOperator<Scalar> rho;
    rho.matrix = psi.amplitudes * psi.amplitudes.adjoint();
    return rho;
}

namespace detail {

// Phase-space translation split into commuting-diagonalizable factors:
// up to a global phase, D((x0+ip0)/sqrt2) = exp(i p0 x) exp(-i x0 p) and
// exp(i c p) = R exp(i c x) R' with R = diag(i^k). Both shift factors reuse
// one orthogonal eigenbasis of the tridiagonal x, which stays numerically
// stable at any displacement.
template <typename Scalar>
class PhaseSpaceShift {
public:
    explicit PhaseSpaceShift(Index dim) : xgate_(dim, {0, 1}) {
        using C = std::complex<Scalar>;
        rot_.resize(dim);
        const C i_unit(0, 1);
        C ph(1, 0);
        for (Index k = 0; k < dim; ++k) {
            rot_[k] = ph;
            ph *= i_unit;
        }
    }

    // |out> = D(-(x0+ip0)/sqrt2)|psi> up to a global phase.
    FockState<Scalar> displace_back(const FockState<Scalar>& psi, Scalar x0, Scalar p0) const {
        FockState<Scalar> work = psi;
        for (Index k = 0; k < work.dim(); ++k) work.amplitudes[k] *= std::conj(rot_[k]);
        work = xgate_.apply(work, x0);
        for (Index k = 0; k < work.dim(); ++k) work.amplitudes[k] *= rot_[k];
        return xgate_.apply(work, -p0);
    }

private:
    XPolynomialGate<Scalar> xgate_;
    VectorXc<Scalar> rot_;
};

}  // namespace detail

template <typename Scalar = double>
struct WignerGrid {
    VectorX<Scalar> xs, ps;
    MatrixX<Scalar> values;  // values(i,j) = W(xs[i], ps[j])

    Scalar integral() const {
        const Scalar dx = xs.size() > 1 ? xs[1] - xs[0] : Scalar(0);
        const Scalar dp = ps.size() > 1 ? ps[1] - ps[0] : Scalar(0);
        return values.sum() * dx * dp;
    }
};

// Displaced-parity Wigner transform: W(x,p) = <D(-b) psi| P |D(-b) psi>/pi
// with b = (x+ip)/sqrt2, normalized so the grid integrates to one.
template <typename Scalar = double>
WignerGrid<Scalar> wigner_grid(const FockState<Scalar>& state, Scalar x_min, Scalar x_max,
                               Scalar p_min, Scalar p_max, Index nx, Index np) {
    WignerGrid<Scalar> g;
    g.xs = VectorX<Scalar>::LinSpaced(nx, x_min, x_max);
    g.ps = VectorX<Scalar>::LinSpaced(np, p_min, p_max);
    g.values.resize(nx, np);
    const Scalar inv_pi = Scalar(1) / Scalar(EIGEN_PI);
    const Index d = state.dim();
    const detail::PhaseSpaceShift<Scalar> shift(d);
    for (Index i = 0; i < nx; ++i) {
        for (Index j = 0; j < np; ++j) {
            const FockState<Scalar> phi = shift.displace_back(state, g.xs[i], g.ps[j]);
            Scalar parity = 0;
            for (Index k = 0; k < d; ++k) parity += (k % 2 ? -1 : 1) * std::norm(phi.amplitudes[k]);
            g.values(i, j) = inv_pi * parity;
        }
    }
    return g;
}

template <typename Scalar = double>
WignerGrid<Scalar> wigner_grid(const FockState<Scalar>& state, Scalar half_width = Scalar(6),
                               Index resolution = 201) {
    return wigner_grid(state, -half_width, half_width, -half_width, half_width, resolution,
                       resolution);
}

// Automatic truncation-dimension selection: start small, double until the
// tail tolerance holds, fail explicitly past the cap.
struct DimensionPolicy {
    Index start = 40;
    Index max_dim = 256;
    double tail_tol = 1e-8;
};

template <typename Scalar = double, typename Builder>
std::pair<FockState<Scalar>, Index> converged_state(Builder&& build, const DimensionPolicy& policy) {
    Index dim = std::min(policy.start, policy.max_dim);
    for (;;) {
        FockState<Scalar> st = build(dim);
        if (st.tail_mass() <= Scalar(policy.tail_tol)) return {std::move(st), dim};
        if (dim >= policy.max_dim)
            throw TruncationError("dimension cap reached before tail tolerance", double(st.tail_mass()),
                                  long(dim));
        dim = std::min(Index(2) * dim, policy.max_dim);
    }
}

template <typename Scalar = double>
std::pair<FockState<Scalar>, Index> converged_cubic_state(Scalar r, Scalar s,
                                                          const DimensionPolicy& policy = {}) {
    return converged_state<Scalar>(
        [&](Index d) {
            XPolynomialGate<Scalar> cubic(d, {0, 0, 0, 1});
            return cubic.apply(squeezed_vacuum_amplitudes(s, d), r);
        },
        policy);
}

// Debug dump: uint64 dim then interleaved re/im doubles, little-endian.
inline void save_state(const FockState<double>& state, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open " + path + " for writing");
    const std::uint64_t d = std::uint64_t(state.dim());
    f.write(reinterpret_cast<const char*>(&d), sizeof d);
    for (Index k = 0; k < state.dim(); ++k) {
        const double re = state.amplitudes[k].real(), im = state.amplitudes[k].imag();
        f.write(reinterpret_cast<const char*>(&re), sizeof re);
        f.write(reinterpret_cast<const char*>(&im), sizeof im);
    }
}

inline FockState<double> load_state(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open " + path);
    std::uint64_t d = 0;
    f.read(reinterpret_cast<char*>(&d), sizeof d);
    FockState<double> st;
    st.amplitudes.resize(Index(d));
    for (std::uint64_t k = 0; k < d; ++k) {
        double re = 0, im = 0;
        f.read(reinterpret_cast<char*>(&re), sizeof re);
        f.read(reinterpret_cast<char*>(&im), sizeof im);
        st.amplitudes[Index(k)] = {re, im};
    }
    if (!f) throw ConfigError("truncated state file " + path);
    return st;
}

using FockStated = FockState<double>;
using DensityOperatord = DensityOperator<double>;
using OperatorMatrixd = OperatorMatrix<double>;
using Ladderd = Ladder<double>;

}  // namespace cubicsense
