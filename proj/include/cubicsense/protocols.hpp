#pragma once

// Approximate cubic-phase-state preparation schemes and their sensitivity
// scans: repeat-until-success photon subtraction, the Kerr-sandwich effective
// cubic gate, plain squeezed-Kerr evolution and trisqueezed states.

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "cubicsense/analytic.hpp"
#include "cubicsense/errors.hpp"
#include "cubicsense/fock.hpp"
#include "cubicsense/moments.hpp"
#include "cubicsense/report.hpp"

namespace cubicsense {

// ---------------------------------------------------------------------------
// Repeat-until-success states |psi> ~ (1 + i(r/N) x^3)^N S(s)|0>.

template <typename Scalar = double>
struct RusParams {
    Scalar r = 0;
    Scalar s = 0;
    int n_iter = 1;
};

template <typename Scalar = double>
struct RusState {
    FockState<Scalar> state;
    Scalar norm_sq = 1;  // Z_N, the squared norm before normalization
};

template <typename Scalar = double>
RusState<Scalar> rus_state_numeric(const RusParams<Scalar>& p, Index dim,
                                   Scalar tail_tol = Scalar(1e-8)) {
    if (p.n_iter < 1) throw ContractError("repeat-until-success needs n_iter >= 1");
    using C = std::complex<Scalar>;
    const auto x = detail::sparse_ladder_x<Scalar>(dim);
    const auto x3 = (x * x * x).pruned();
    // Seeded from the closed-form amplitudes: the polynomial factor amplifies
    // any high-index roundoff dust, which the closed form does not carry.
    FockState<Scalar> psi = squeezed_vacuum_amplitudes(p.s, dim);
    const C coeff(0, p.r / Scalar(p.n_iter));
    for (int it = 0; it < p.n_iter; ++it)
        psi.amplitudes += coeff * (x3 * psi.amplitudes).eval();
    RusState<Scalar> out;
    out.norm_sq = psi.amplitudes.squaredNorm();
    out.state = psi.normalized_in_place();
    out.state.require_tail(tail_tol);
    return out;
}

template <typename Scalar = double>
struct RusAnalytic {
    Scalar z = 1;
    Scalar mean_n = 0;
    Scalar mean_n2 = 0;
    Scalar f_q = 0;
};

// Closed forms for N = 1..5; larger N remains available on the numeric path.
template <typename Scalar = double>
RusAnalytic<Scalar> rus_analytic(const RusParams<Scalar>& p) {
    const int N = p.n_iter;
    if (N < 1 || N > 5)
        throw UnsupportedOrderError("closed forms cover n_iter = 1..5; use the numeric path");
    const Scalar r2 = p.r * p.r;
    const Scalar s = p.s;
    const Scalar E = std::exp(2 * s);            // e^{2s}
    const Scalar E2 = E * E, E3 = E2 * E, E4 = E3 * E, E5 = E4 * E;
    const Scalar E6 = E3 * E3, E7 = E6 * E, E8 = E7 * E;
    const Scalar F = E3;                          // e^{6s}
    const Scalar sh2 = std::sinh(s) * std::sinh(s);

    RusAnalytic<Scalar> out;
    switch (N) {
        case 1:
            out.z = 1 + Scalar(15) / 8 * F * r2;
            out.mean_n = (sh2 + Scalar(3) / 16 * F * r2 *
                                    (-5 + 23 * std::cosh(2 * s) + 12 * std::sinh(2 * s))) /
                         out.z;
            out.mean_n2 =
                (24 - 32 * E + 16 * E2 +
                 E3 * (-32 + 225 * r2 +
                       3 * E * (8 + r2 * (-44 + 5 * E * (26 - 28 * E + 63 * E2))))) /
                (16 * E2 * (8 + 15 * E3 * r2));
            break;
        case 2:
            out.z = 1 + Scalar(15) / 16 * F * r2 + Scalar(10395) / 1024 * r2 * r2 * F * F;
            out.mean_n =
                Scalar(0.25) *
                (-2 + 1 / E + 13 * E +
                 12 * E * (-1024 + 3 * E * r2 * (224 - 160 * E2 + 315 * E3 * r2)) /
                     (1024 + 15 * E3 * r2 * (64 + 693 * E3 * r2)));
            out.mean_n2 =
                Scalar(1) / 16 *
                (50 + 3 / E2 - 4 / E - 52 * E + 195 * E2 +
                 48 *
                     (-1024 + 960 * E3 * r2 - 32 * E2 * (128 + 21 * r2) +
                      16 * E * (64 + 45 * r2) - 15 * E5 * r2 * (176 + 63 * r2) +
                      15 * E4 * r2 * (32 + 147 * r2)) /
                     (1024 + 15 * E3 * r2 * (64 + 693 * E3 * r2)));
            break;
        case 3: {
            out.z = 1 + Scalar(5) / 8 * F * r2 + Scalar(385) / 64 * F * F * r2 * r2 +
                    Scalar(425425) / 4608 * F * F * F * r2 * r2 * r2;
            const Scalar den = 4608 + 5 * E3 * r2 * (576 + 77 * E3 * r2 * (72 + 1105 * E3 * r2));
            out.mean_n =
                Scalar(0.25) *
                (-2 + 1 / E + 19 * E +
                 18 * E *
                     (-4608 + E * r2 * (2496 + 5 * E2 * (-384 + 7 * E * r2 *
                                                                    (336 - 264 * E2 +
                                                                     715 * E3 * r2)))) /
                     den);
            out.mean_n2 =
                Scalar(1) / 16 *
                (74 + 3 / E2 - 4 / E - 76 * E + 399 * E2 +
                 36 *
                     (-9216 + 7680 * E3 * r2 + 92400 * E6 * r2 * r2 -
                      3360 * E5 * r2 * (8 + 7 * r2) - 384 * E2 * (132 + 13 * r2) +
                      192 * E * (48 + 25 * r2) - 770 * E8 * r2 * r2 * (204 + 65 * r2) +
                      385 * E7 * r2 * r2 * (48 + 299 * r2) +
                      3840 * E4 * (r2 + 14 * r2 * r2)) /
                     den);
            break;
        }
        case 4: {
            const Scalar r4 = r2 * r2, r6 = r4 * r2, r8 = r4 * r4;
            out.z = 1 + Scalar(15) / 32 * F * r2 + Scalar(31185) / 8192 * F * F * r4 +
                    Scalar(34459425) / 524288 * F * F * F * r6 +
                    Scalar(316234143225.0) / 268435456 * F * F * F * F * r8;
            const Scalar den =
                Scalar(268435456) +
                15 * E3 * r2 *
                    (Scalar(8388608) +
                     2079 * E3 * r2 * (Scalar(32768) + 1105 * E3 * r2 * (512 + 9177 * E3 * r2)));
            out.mean_n =
                Scalar(0.25) *
                (-2 + 1 / E + 25 * E +
                 24 * E *
                     (Scalar(-268435456) +
                      3 * E * r2 *
                          (Scalar(39845888) - Scalar(31457280) * E2 +
                           945 * E3 * r2 *
                               (Scalar(212992) - Scalar(180224) * E2 +
                                715 * E3 * r2 * (2688 - 2176 * E2 + 6783 * E3 * r2)))) /
                     den);
            const Scalar E9 = E8 * E, E10 = E9 * E, E11 = E10 * E, E12 = E11 * E;
            const Scalar E13 = E12 * E, E14 = E13 * E, E15 = E14 * E, E16 = E15 * E;
            const Scalar num =
                Scalar(805306368) - Scalar(1073741824) * E + Scalar(536870912) * E2 +
                Scalar(30450647040.0) * E5 * r2 + Scalar(345392087040.0) * E8 * r4 +
                Scalar(5116535424000.0) * E11 * r6 + Scalar(30990946036050.0) * E14 * r8 -
                Scalar(31623414322500.0) * E15 * r8 + Scalar(213458046676875.0) * E16 * r8 -
                Scalar(54997242300.0) * E13 * r6 * (-128 + 47 * r2) -
                Scalar(100663296) * E4 * (-8 + 119 * r2) -
                Scalar(4151347200.0) * E10 * r4 * (-48 + 143 * r2) -
                Scalar(123863040) * E7 * r2 * (-64 + 501 * r2) +
                Scalar(8388608) * E3 * (-128 + 1305 * r2) +
                Scalar(654729075) * E12 * r6 * (-2048 + 6057 * r2) +
                Scalar(207567360) * E9 * r4 * (-256 + 6627 * r2) +
                Scalar(3440640) * E6 * r2 * (-1024 + 54891 * r2);
            out.mean_n2 = num / (16 * E2 * den);
            break;
        }
        case 5: {
            const Scalar r4 = r2 * r2, r6 = r4 * r2, r8 = r4 * r4, r10 = r8 * r2;
            out.z = 1 + Scalar(3) / 8 * F * r2 + Scalar(2079) / 800 * F * F * r4 +
                    Scalar(1378377) / 32000 * F * F * F * r6 +
                    Scalar(12649365729.0) / 12800000 * F * F * F * F * r8 +
                    Scalar(9904453365807.0) / 512000000 * F * F * F * F * F * r10;
            const Scalar den =
                Scalar(512000000) +
                3 * E3 * r2 *
                    (Scalar(64000000) +
                     693 * E3 * r2 *
                         (Scalar(640000) +
                          663 * E3 * r2 * (Scalar(16000) + 9177 * E3 * r2 * (40 + 783 * E3 * r2))));
            out.mean_n =
                Scalar(0.25) *
                (-2 + 1 / E + 31 * E +
                 30 * E *
                     (Scalar(-512000000) +
                      3 * E * r2 *
                          (Scalar(64000000) - Scalar(51200000) * E2 +
                           63 * E3 * r2 *
                               (Scalar(4864000) - Scalar(4224000) * E2 +
                                429 * E3 * r2 *
                                    (Scalar(124800) +
                                     17 * E2 *
                                         (-6400 + 399 * E * r2 *
                                                      (224 - 184 * E2 + 621 * E3 * r2)))))) /
                     den);
            const Scalar E9 = E8 * E, E10 = E9 * E, E11 = E10 * E, E12 = E11 * E;
            const Scalar E13 = E12 * E, E14 = E13 * E, E15 = E14 * E, E16 = E15 * E;
            const Scalar E17 = E16 * E, E18 = E17 * E, E19 = E18 * E;
            const Scalar num =
                Scalar(1536000000) - Scalar(2048000000) * E + Scalar(1024000000) * E2 +
                Scalar(60288000000.0) * E5 * r2 + Scalar(641329920000.0) * E8 * r4 +
                Scalar(11159340192000.0) * E11 * r6 + Scalar(195306206855760.0) * E14 * r8 +
                Scalar(1208343310628454.0) * E17 * r10 - Scalar(1228152217360068.0) * E18 * r10 +
                Scalar(10132255793220561.0) * E19 * r10 -
                Scalar(768000000) * E4 * (-2 + 31 * r2) -
                Scalar(1366131498732.0) * E16 * r8 * (-250 + 59 * r2) -
                Scalar(87995587680.0) * E13 * r6 * (-100 + 191 * r2) -
                Scalar(483840000) * E7 * r2 * (-25 + 239 * r2) -
                Scalar(5189184000.0) * E10 * r4 * (-50 + 251 * r2) +
                Scalar(64000000) * E3 * (-32 + 333 * r2) +
                Scalar(12649365729.0) * E15 * r8 * (-4000 + 9729 * r2) +
                Scalar(432432000) * E9 * r4 * (-160 + 10413 * r2) +
                Scalar(13440000) * E6 * r2 * (-400 + 34569 * r2) +
                Scalar(1047566520.0) * E12 * r6 * (-1600 + 38601 * r2);
            out.mean_n2 = num / (16 * E2 * den);
            break;
        }
    }
    out.f_q = 4 * (out.mean_n2 - out.mean_n * out.mean_n);
    return out;
}

// ---------------------------------------------------------------------------
// Kerr-sandwich effective cubic gate.

template <typename Scalar = double>
struct KerrParams {
    Scalar r = 0;       // target cubicity
    Scalar s = 0;       // input squeezing
    Scalar lambda = 2;  // quadrature amplitude gain of the outer squeezers
    Scalar alpha = 8;   // displacement amplitude
    Scalar kerr_k = 1;  // Kerr strength; tau rescales so the state is K-independent

    Scalar delta() const { return 3 * kerr_k * alpha * alpha - kerr_k; }
    Scalar beta() const { return -2 * kerr_k * alpha * alpha * alpha; }
    Scalar tau() const {
        return std::sqrt(Scalar(2)) * r / (kerr_k * alpha * lambda * lambda * lambda);
    }

    void validate() const {
        if (!(lambda > 1)) throw ContractError("kerr sandwich needs lambda > 1");
        if (!(kerr_k != 0)) throw ContractError("kerr sandwich needs a nonzero Kerr strength");
    }
};

// The sandwiched generator in the original frame: conjugation by D(alpha) and
// S(log lambda) maps a -> cosh(rho) a + sinh(rho) a' + alpha exactly, so the
// gate equals exp(-i tau H_Kerr(b)) with polynomial b-substitution. The
// working dimension then follows the output state, not the alpha^2-photon
// displaced frame.
template <typename Scalar = double>
OperatorMatrix<Scalar> kerr_effective_generator(const KerrParams<Scalar>& p, Index dim) {
    p.validate();
    const Ladder<Scalar> l = make_ladder<Scalar>(dim);
    const Scalar rho = std::log(p.lambda);
    MatrixXc<Scalar> b = std::cosh(rho) * l.a.matrix + std::sinh(rho) * l.a_dagger.matrix;
    b.diagonal().array() += std::complex<Scalar>(p.alpha, 0);
    const MatrixXc<Scalar> bd = b.adjoint();
    const MatrixXc<Scalar> b2 = b * b;
    MatrixXc<Scalar> h = Scalar(-0.5) * p.kerr_k * (b2.adjoint() * b2);
    h += p.delta() * (bd * b);
    h += p.beta() * (b + bd);
    return {((h + h.adjoint()) / Scalar(2)).eval(), true};
}

template <typename Scalar = double>
FockState<Scalar> kerr_effective_state(const KerrParams<Scalar>& p, Index dim,
                                       Scalar tail_tol = Scalar(1e-8)) {
    HermitianGate<Scalar> gate(kerr_effective_generator(p, dim));
    FockState<Scalar> out = gate.apply(squeezed_vacuum_amplitudes(p.s, dim), -p.tau());
    out.normalized_in_place();
    out.require_tail(tail_tol);
    return out;
}

// Plain squeezed-Kerr evolution exp(-i H t)|0> with
// H = delta n + drive (a'^2 + a^2) - kerr a'^2 a^2.
template <typename Scalar = double>
OperatorMatrix<Scalar> kerr_plain_generator(Scalar delta, Scalar drive, Scalar kerr, Index dim) {
    const Ladder<Scalar> l = make_ladder<Scalar>(dim);
    const MatrixXc<Scalar> ad2 = l.a_dagger.matrix * l.a_dagger.matrix;
    MatrixXc<Scalar> h = delta * l.n.matrix;
    h += drive * (ad2 + l.a.matrix * l.a.matrix);
    h -= kerr * (ad2 * l.a.matrix * l.a.matrix);
    return {((h + h.adjoint()) / Scalar(2)).eval(), true};
}

// ---------------------------------------------------------------------------
// Trisqueezed states exp(i(conj(t) a^3 + t a'^3))|0>.

template <typename Scalar = double>
struct TrisqueezeParams {
    std::complex<Scalar> t{0, 0};
    Index dim = 128;
};

template <typename Scalar = double>
OperatorMatrix<Scalar> trisqueeze_generator(std::complex<Scalar> t, Index dim) {
    const Ladder<Scalar> l = make_ladder<Scalar>(dim);
    const MatrixXc<Scalar> a3 = l.a.matrix * l.a.matrix * l.a.matrix;
    MatrixXc<Scalar> g = std::conj(t) * a3 + t * a3.adjoint();
    return {((g + g.adjoint()) / Scalar(2)).eval(), true};
}

template <typename Scalar = double>
FockState<Scalar> trisqueezed_state_at_dim(std::complex<Scalar> t, Index dim) {
    HermitianGate<Scalar> g(trisqueeze_generator(t, dim));
    return g.apply(vacuum_state<Scalar>(dim), Scalar(1));
}

// Truncation-gated construction: the population must agree between dim and
// 2*dim to 1e-4 relative, otherwise the result is cutoff-dominated (which
// happens already for |t| of a few tenths) and a ConvergenceError carries
// both values.
template <typename Scalar = double>
FockState<Scalar> trisqueezed_state(const TrisqueezeParams<Scalar>& p,
                                    Scalar rel_tol = Scalar(1e-4)) {
    const FockState<Scalar> lo = trisqueezed_state_at_dim(p.t, p.dim);
    const FockState<Scalar> hi = trisqueezed_state_at_dim(p.t, 2 * p.dim);
    const Ladder<Scalar> llo = make_ladder<Scalar>(p.dim);
    const Ladder<Scalar> lhi = make_ladder<Scalar>(2 * p.dim);
    const Scalar n_lo = expectation(lo, llo.n).real();
    const Scalar n_hi = expectation(hi, lhi.n).real();
    if (std::abs(n_hi - n_lo) > rel_tol * std::max(std::abs(n_hi), Scalar(1e-12)))
        throw ConvergenceError("trisqueezed population not converged in the truncation", double(n_lo),
                               double(n_hi));
    return lo;
}

// ---------------------------------------------------------------------------
// Sensitivity scans and envelopes.

enum class Protocol { ideal, rus, kerr, kerr_plain, trisqueeze, squeezed_vacuum };

inline std::string protocol_name(Protocol p, int rus_n = 0) {
    switch (p) {
        case Protocol::ideal: return "ideal";
        case Protocol::rus: return "rus" + std::to_string(rus_n);
        case Protocol::kerr: return "kerr";
        case Protocol::kerr_plain: return "kerr_plain";
        case Protocol::trisqueeze: return "trisqueeze";
        case Protocol::squeezed_vacuum: return "squeezed_vacuum";
    }
    return "?";
}

struct ScanGrid {
    // rus scan: squeezing/cubicity sweep
    std::vector<double> s_values;
    std::vector<double> r_values;
    // kerr sandwich scan
    std::vector<double> kerr_s_values;
    std::vector<double> kerr_r_values;
    std::vector<double> lambda_values{2, 3, 4, 5};
    // kerr_plain: delta is scanned as a multiple of the Kerr strength
    std::vector<double> delta_over_k{0, 1, 2};
    std::vector<double> drive_values{0.05, 0.14, 0.23, 0.32, 0.41, 0.5};
    std::vector<double> kerr_values{0.02, 0.05, 0.1, 0.2, 0.3};
    std::vector<double> time_values{0.25, 0.6, 1.0, 1.5, 2.0};
    // trisqueeze
    std::vector<double> t_values;
    std::vector<long> trisqueeze_dims{128, 256, 512};
    // envelope binning
    int n_bins = 200;
    double n_min = 0.01;
    double n_max = 20;
    long kerr_dim = 512;
    long kerr_plain_dim = 160;
    double tail_tol = 1e-8;

    static ScanGrid defaults();
};

std::vector<SensitivityReport> protocol_scan(Protocol protocol, const ScanGrid& grid,
                                             int rus_iterations = 1);

// Max f_q_over_n per logarithmic n-bin; rows keep the winning parameters.
std::vector<SensitivityReport> bin_envelope(const std::vector<SensitivityReport>& points,
                                            int n_bins, double n_min, double n_max);

using RusParamsd = RusParams<double>;
using KerrParamsd = KerrParams<double>;
using TrisqueezeParamsd = TrisqueezeParams<double>;

}  // namespace cubicsense
