#pragma once

// Photon loss during preparation (Lindblad dynamics with jump sqrt(gamma) a)
// and additive Gaussian detection noise on quadrature outcomes, propagated
// through powers of the accessible observables M_theta = cos(t) x + sin(t) p.

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "cubicsense/analytic.hpp"
#include "cubicsense/errors.hpp"
#include "cubicsense/fock.hpp"
#include "cubicsense/moments.hpp"

namespace cubicsense {

template <typename Scalar = double>
struct LossConfig {
    Scalar gamma = 0;  // loss rate; equal for both preparation stages
    Scalar t1 = 1;     // squeezing-stage duration
    Scalar t2 = 1;     // cubic-stage duration
    int steps = 1000;  // RK4 steps per stage
};

template <typename Scalar = double>
struct DetectionNoise {
    Scalar sigma = 0;  // std deviation of additive Gaussian outcome noise
};

template <typename Scalar = double>
struct LindbladResult {
    DensityOperator<Scalar> rho;
    Scalar trace_drift = 0;  // |tr - 1| accumulated before renormalization
};

// Fixed-step RK4 on d(rho)/dt = -i[H,rho] + L rho L' - (1/2){L'L, rho},
// with re-Hermitization every step. All generators here are banded, so the
// right-hand side runs on sparse views of H and L.
template <typename Scalar = double>
LindbladResult<Scalar> evolve_lindblad(const DensityOperator<Scalar>& rho0,
                                       const OperatorMatrix<Scalar>& h,
                                       const OperatorMatrix<Scalar>& jump, Scalar t, int steps) {
    if (steps < 1) throw ContractError("evolve_lindblad needs steps >= 1");
    if (h.dim() != rho0.dim() || jump.dim() != rho0.dim())
        throw ContractError("lindblad operator dimension mismatch");
    h.require_hermitian(Scalar(1e-10));

    using Sparse = Eigen::SparseMatrix<std::complex<Scalar>>;
    const Sparse H = h.matrix.sparseView(Scalar(1), Scalar(1e-300));
    const Sparse L = jump.matrix.sparseView(Scalar(1), Scalar(1e-300));
    const Sparse Ld = Sparse(L.adjoint());
    const Sparse LdL = (Ld * L).pruned();

    const std::complex<Scalar> mi(0, -1);
    auto rhs = [&](const MatrixXc<Scalar>& rho) -> MatrixXc<Scalar> {
        MatrixXc<Scalar> out = mi * (H * rho - rho * H);
        out += L * rho * Ld;
        out -= (LdL * rho + rho * LdL) * Scalar(0.5);
        return out;
    };

    MatrixXc<Scalar> rho = rho0.matrix;
    const Scalar hstep = t / Scalar(steps);
    for (int i = 0; i < steps; ++i) {
        const MatrixXc<Scalar> k1 = rhs(rho);
        const MatrixXc<Scalar> k2 = rhs(rho + (hstep / 2) * k1);
        const MatrixXc<Scalar> k3 = rhs(rho + (hstep / 2) * k2);
        const MatrixXc<Scalar> k4 = rhs(rho + hstep * k3);
        rho += (hstep / 6) * (k1 + Scalar(2) * k2 + Scalar(2) * k3 + k4);
        rho = ((rho + rho.adjoint()) / Scalar(2)).eval();
    }
    LindbladResult<Scalar> out;
    out.trace_drift = std::abs(rho.trace() - std::complex<Scalar>(1, 0));
    if (!(out.trace_drift <= Scalar(1e-6)))
        throw IntegratorError("lindblad trace drift beyond tolerance", double(out.trace_drift));
    out.rho.matrix = rho / rho.trace().real();
    return out;
}

// Sequential preparation under loss: vacuum -> (H1 = i s'(a'^2 - a^2)/2, loss)
// -> (H2 = -r' x^3, loss), with s' = s/t1 and r' = r/t2. gamma = 0 recovers
// the pure cubic state.
template <typename Scalar = double>
LindbladResult<Scalar> lossy_cubic_state(const CubicParams<Scalar>& params,
                                         const LossConfig<Scalar>& cfg, Index dim) {
    const Ladder<Scalar> l = make_ladder<Scalar>(dim);
    using C = std::complex<Scalar>;
    const Scalar sp = params.s / cfg.t1;
    const Scalar rp = params.r / cfg.t2;
    OperatorMatrix<Scalar> h1{
        (C(0, sp / 2) * (l.a_dagger.matrix * l.a_dagger.matrix - l.a.matrix * l.a.matrix)).eval(),
        true};
    const MatrixXc<Scalar> x3 = l.x.matrix * l.x.matrix * l.x.matrix;
    OperatorMatrix<Scalar> h2{(-rp * x3).eval(), true};
    OperatorMatrix<Scalar> jump{(std::sqrt(cfg.gamma) * l.a.matrix).eval(), false};

    DensityOperator<Scalar> rho = pure_density(vacuum_state<Scalar>(dim));
    LindbladResult<Scalar> stage1 = evolve_lindblad(rho, h1, jump, cfg.t1, cfg.steps);
    LindbladResult<Scalar> stage2 = evolve_lindblad(stage1.rho, h2, jump, cfg.t2, cfg.steps);
    stage2.trace_drift = std::max(stage1.trace_drift, stage2.trace_drift);
    return stage2;
}

template <typename Scalar = double>
Scalar trace_distance(const DensityOperator<Scalar>& a, const DensityOperator<Scalar>& b) {
    Eigen::SelfAdjointEigenSolver<MatrixXc<Scalar>> es((a.matrix - b.matrix).eval(),
                                                       Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum() / 2;
}

// Accessible quadrature channels used by the measurement decompositions.
namespace quadrature_channel {
inline constexpr int theta_0 = 0;     // x
inline constexpr int theta_90 = 1;    // p
inline constexpr int theta_45 = 2;    // (x+p)/sqrt2
inline constexpr int theta_135 = 3;   // (-x+p)/sqrt2
inline constexpr int theta_30 = 4;    // (sqrt3 x + p)/2
inline constexpr std::array<double, 5> angles = {0.0, EIGEN_PI / 2, EIGEN_PI / 4,
                                                 3 * EIGEN_PI / 4, EIGEN_PI / 6};
inline const char* const names[] = {"0", "pi/2", "pi/4", "3pi/4", "pi/6"};
}  // namespace quadrature_channel

// (channel, power) element lists of the accessible sets M'_(k): sizes 2, 5,
// 9, 14 for k = 1..4.
inline std::vector<std::pair<int, int>> accessible_elements(int k) {
    if (k < 1 || k > 4) throw UnsupportedOrderError("accessible sets are defined for k = 1..4");
    using namespace quadrature_channel;
    static const std::vector<std::vector<int>> channels_for_power = {
        {theta_0, theta_90},
        {theta_0, theta_90, theta_45},
        {theta_0, theta_90, theta_45, theta_135},
        {theta_0, theta_90, theta_45, theta_135, theta_30}};
    std::vector<std::pair<int, int>> out;
    for (int j = 1; j <= k; ++j)
        for (int ch : channels_for_power[j - 1]) out.emplace_back(ch, j);
    return out;
}

template <typename Scalar = double>
ObservableSet<Scalar> accessible_set(int k, Index dim) {
    using detail::SparseC;
    const SparseC<Scalar> x = detail::sparse_ladder_x<Scalar>(dim);
    const SparseC<Scalar> p = detail::sparse_ladder_p<Scalar>(dim);
    ObservableSet<Scalar> set;
    set.k = k;
    for (const auto& [ch, j] : accessible_elements(k)) {
        const double th = quadrature_channel::angles[ch];
        SparseC<Scalar> m = (std::cos(th) * x + std::sin(th) * p).pruned();
        SparseC<Scalar> mj = m;
        for (int q = 1; q < j; ++q) mj = (mj * m).pruned();
        set.labels.push_back("M(" + std::string(quadrature_channel::names[ch]) + ")^" +
                             std::to_string(j));
        set.members.push_back({MatrixXc<Scalar>(mj), true});
    }
    return set;
}

// Sigma-independent quantum ingredients for the noisy covariance table:
// raw moments <M^j> per channel, symmetrized covariances between all
// channel-power pairs, and the commutator entries. Assembling the noisy
// Gamma/C for any sigma is then O(set size squared).
template <typename Scalar = double>
class QuadratureMomentCache {
public:
    template <typename StateLike>
    QuadratureMomentCache(const StateLike& state, int k, Index dim) : k_(k) {
        if (k < 1 || k > 4) throw UnsupportedOrderError("noisy moments are defined for k = 1..4");
        elements_ = accessible_elements(k);
        // All channels appearing in the set, every power up to 4 for the
        // cross-term corrections, raw moments up to 8 for Cov(M~^4, M~^4).
        const Ladder<Scalar> l = make_ladder<Scalar>(dim);
        std::array<MatrixXc<Scalar>, 5> chan;
        for (int c = 0; c < 5; ++c) {
            const Scalar th = Scalar(quadrature_channel::angles[c]);
            chan[c] = std::cos(th) * l.x.matrix + std::sin(th) * l.p.matrix;
        }
        for (int c = 0; c < 5; ++c) {
            OperatorMatrix<Scalar> m{chan[c], true};
            const auto rm = raw_moments(state, m, 8);
            for (int j = 0; j <= 8; ++j) raw_[c][j] = rm[j];
        }
        // Powers as matrices, then pairwise symmetrized second moments.
        std::array<std::array<MatrixXc<Scalar>, 5>, 5> pow;  // pow[c][j-1] = M_c^j
        for (int c = 0; c < 5; ++c) {
            pow[c][0] = chan[c];
            for (int j = 1; j < 4; ++j) pow[c][j] = pow[c][j - 1] * chan[c];
        }
        for (int c = 0; c < 5; ++c)
            for (int j = 1; j <= 4; ++j)
                comm_[c][j] = commutator_entry(state, pow[c][j - 1], dim);
        for (int c1 = 0; c1 < 5; ++c1)
            for (int j1 = 1; j1 <= 4; ++j1)
                for (int c2 = 0; c2 < 5; ++c2)
                    for (int j2 = 1; j2 <= 4; ++j2)
                        qcov_[c1][j1][c2][j2] =
                            sym_cov(state, pow[c1][j1 - 1], pow[c2][j2 - 1]);
    }

    int order() const { return k_; }
    const std::vector<std::pair<int, int>>& elements() const { return elements_; }

    // Noisy covariance matrix and commutator vector. Within a channel the
    // noise realization is shared across powers; distinct channels carry
    // independent noise.
    MomentData<Scalar> assemble(Scalar sigma) const {
        const Scalar s2 = sigma * sigma, s4 = s2 * s2, s6 = s4 * s2, s8 = s4 * s4;
        const std::size_t l = elements_.size();
        MomentData<Scalar> md;
        md.k = k_;
        md.source = MomentSource::numeric;
        md.gamma.resize(l, l);
        md.c_vec.resize(l);
        for (std::size_t i = 0; i < l; ++i) {
            const auto [c, j] = elements_[i];
            Scalar v = comm_[c][j];
            if (j == 3) v += 3 * s2 * comm_[c][1];
            if (j == 4) v += 6 * s2 * comm_[c][2];
            md.c_vec[int(i)] = v;
        }
        for (std::size_t i = 0; i < l; ++i) {
            for (std::size_t jj = i; jj < l; ++jj) {
                auto [c1, a] = elements_[i];
                auto [c2, b] = elements_[jj];
                if (a > b) {
                    std::swap(c1, c2);
                    std::swap(a, b);
                }
                Scalar v = qcov_[c1][a][c2][b];
                if (c1 == c2) {
                    const auto& m = raw_[c1];
                    if (a == 1 && b == 1) v += s2;
                    else if (a == 1 && b == 2) v += 2 * s2 * m[1];
                    else if (a == 1 && b == 3) v += 6 * s2 * m[2] - 3 * s2 * m[1] * m[1] + 3 * s4;
                    else if (a == 1 && b == 4) v += 10 * s2 * m[3] - 6 * s2 * m[1] * m[2] + 12 * s4 * m[1];
                    else if (a == 2 && b == 2) v += 4 * s2 * m[2] + 2 * s4;
                    else if (a == 2 && b == 3) v += 9 * s2 * m[3] - 3 * s2 * m[1] * m[2] + 12 * s4 * m[1];
                    else if (a == 2 && b == 4) v += 14 * s2 * m[4] - 6 * s2 * m[2] * m[2] + 36 * s4 * m[2] + 12 * s6;
                    else if (a == 3 && b == 3) v += 15 * s2 * m[4] - 6 * s2 * m[1] * m[3] + 45 * s4 * m[2] - 9 * s4 * m[1] * m[1] + 15 * s6;
                    else if (a == 3 && b == 4) v += 21 * s2 * m[5] - 6 * s2 * m[2] * m[3] - 3 * s2 * m[1] * m[4] - 18 * s4 * m[1] * m[2] + 102 * s4 * m[3] + 96 * s6 * m[1];
                    else if (a == 4 && b == 4) v += 28 * s2 * m[6] - 12 * s2 * m[2] * m[4] + 204 * s4 * m[4] - 36 * s4 * m[2] * m[2] + 384 * s6 * m[2] + 96 * s8;
                } else {
                    auto qc = [&](int pa, int pb) { return qcov_[c1][pa][c2][pb]; };
                    if (a == 1 && b == 3) v += 3 * s2 * qc(1, 1);
                    else if (a == 1 && b == 4) v += 6 * s2 * qc(1, 2);
                    else if (a == 2 && b == 3) v += 3 * s2 * qc(2, 1);
                    else if (a == 2 && b == 4) v += 6 * s2 * qc(2, 2);
                    else if (a == 3 && b == 3) v += 3 * s2 * qc(3, 1) + 3 * s2 * qc(1, 3) + 9 * s4 * qc(1, 1);
                    else if (a == 3 && b == 4) v += 6 * s2 * qc(3, 2) + 3 * s2 * qc(1, 4) + 18 * s4 * qc(1, 2);
                    else if (a == 4 && b == 4) v += 6 * s2 * qc(4, 2) + 6 * s2 * qc(2, 4) + 36 * s4 * qc(2, 2);
                }
                md.gamma(int(i), int(jj)) = v;
                md.gamma(int(jj), int(i)) = v;
            }
        }
        return md;
    }

private:
    template <typename StateLike>
    static Scalar sym_cov(const StateLike& state, const MatrixXc<Scalar>& A,
                          const MatrixXc<Scalar>& B) {
        const OperatorMatrix<Scalar> a{A, true}, b{B, true};
        const OperatorMatrix<Scalar> ab{(A * B).eval(), false};
        const Scalar prod = expectation(state, ab).real();  // Re<AB> = (1/2)<{A,B}>
        return prod - expectation(state, a).real() * expectation(state, b).real();
    }

    static Scalar commutator_entry(const FockState<Scalar>& psi, const MatrixXc<Scalar>& M, Index dim) {
        VectorXc<Scalar> nv(dim);
        for (Index i = 0; i < dim; ++i) nv[i] = Scalar(i) * psi.amplitudes[i];
        return Scalar(2) * nv.dot(M * psi.amplitudes).imag();
    }

    static Scalar commutator_entry(const DensityOperator<Scalar>& rho, const MatrixXc<Scalar>& M,
                                   Index dim) {
        MatrixXc<Scalar> rn = rho.matrix;
        for (Index j = 0; j < dim; ++j) rn.col(j) *= Scalar(j);
        return Scalar(2) * (rn * M).trace().imag();
    }

    int k_;
    std::vector<std::pair<int, int>> elements_;
    std::array<std::array<Scalar, 9>, 5> raw_{};
    std::array<std::array<Scalar, 5>, 5> comm_{};
    Scalar qcov_[5][5][5][5] = {};
};

template <typename Scalar = double, typename StateLike>
MomentData<Scalar> noisy_moments(const StateLike& state, int k, const DetectionNoise<Scalar>& noise,
                                 Index dim) {
    if (noise.sigma < 0) throw ContractError("detection noise needs sigma >= 0");
    QuadratureMomentCache<Scalar> cache(state, k, dim);
    return cache.assemble(noise.sigma);
}

template <typename Scalar = double, typename StateLike>
Scalar noisy_xi2_inv(const StateLike& state, int k, const DetectionNoise<Scalar>& noise, Index dim) {
    const Ladder<Scalar> l = make_ladder<Scalar>(dim);
    const Scalar n = expectation(state, l.n).real();
    if (!(n > 0)) throw ContractError("noisy_xi2_inv is undefined at zero population");
    return chi2_inv(noisy_moments(state, k, noise, dim)).chi2_inv / n;
}

using LossConfigd = LossConfig<double>;
using DetectionNoised = DetectionNoise<double>;

}  // namespace cubicsense
