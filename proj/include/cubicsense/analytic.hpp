#pragma once

// Closed-form layer: population budget, QFI of the cubic phase state in both
// (r,s) and (n,s) parameterizations, the quartic optimal-squeezing solver,
// large-n asymptotics, displacement-sensing QFI and the Cramer-Rao bound.

#include <array>
#include <cmath>
#include <complex>

#include "cubicsense/errors.hpp"

namespace cubicsense {

// Mean photon number of exp(i r x^3) S(s)|0>: sinh^2(s) + (27/8) e^{4s} r^2.
template <typename Scalar = double>
Scalar population(Scalar r, Scalar s) {
    const Scalar sh = std::sinh(s);
    return sh * sh + Scalar(27) / Scalar(8) * std::exp(Scalar(4) * s) * r * r;
}

// |r| reproducing population n at squeezing s.
template <typename Scalar = double>
Scalar cubicity_from_population(Scalar n, Scalar s, Scalar slack = Scalar(0)) {
    const Scalar sh2 = std::sinh(s) * std::sinh(s);
    if (n < sh2 - slack) throw InfeasiblePopulationError(double(n), double(s));
    const Scalar excess = std::max(n - sh2, Scalar(0));
    return std::sqrt(excess / (Scalar(27) / Scalar(8) * std::exp(Scalar(4) * s)));
}

template <typename Scalar = double>
struct CubicParams {
    Scalar r, s, n;

    static CubicParams from_rs(Scalar r, Scalar s) { return {r, s, population(r, s)}; }
    static CubicParams from_ns(Scalar n, Scalar s) {
        return {cubicity_from_population(n, s), s, n};
    }
};

// QFI of the cubic phase state against rotations exp(-i theta n).
template <typename Scalar = double>
Scalar qfi_rs(Scalar r, Scalar s) {
    const Scalar r2 = r * r;
    return Scalar(486) * std::exp(Scalar(8) * s) * r2 * r2 +
           (Scalar(4.5) * std::exp(Scalar(2) * s) + Scalar(27) * std::exp(Scalar(6) * s)) * r2 +
           std::cosh(Scalar(4) * s) - Scalar(1);
}

// Same QFI as a quadratic polynomial in the population, leading coefficient
// 128/3 independent of s.
template <typename Scalar = double>
Scalar qfi_ns(Scalar n, Scalar s) {
    const Scalar sh2 = std::sinh(s) * std::sinh(s);
    if (n < sh2 - Scalar(1e-12)) throw InfeasiblePopulationError(double(n), double(s));
    const Scalar c2 = Scalar(128) / Scalar(3);
    const Scalar a = Scalar(4) / Scalar(3) * std::exp(Scalar(-2) * s) +
                     Scalar(8) * std::exp(Scalar(2) * s);
    const Scalar c1 = a - Scalar(2) * c2 * sh2;
    const Scalar c0 = (Scalar(8) - a + (Scalar(8) + c2) * sh2) * sh2;
    return c2 * n * n + c1 * n + c0;
}

template <typename Scalar = double>
Scalar squeezed_vacuum_qfi(Scalar n) {
    return Scalar(8) * n * (n + Scalar(1));
}

// Large-n optimum: s -> (1/2) log(sqrt6/2), |r| -> (4/9) sqrt(n).
template <typename Scalar = double>
struct AsymptoticOptimal {
    Scalar s_inf;
    Scalar r_coeff;
};

template <typename Scalar = double>
AsymptoticOptimal<Scalar> asymptotic_optimal() {
    return {Scalar(0.5) * std::log(std::sqrt(Scalar(6)) / Scalar(2)), Scalar(4) / Scalar(9)};
}

template <typename Scalar = double>
Scalar squeezing_db(Scalar s) {
    return Scalar(10) * std::log10(std::exp(Scalar(2) * s));
}

template <typename Scalar = double>
struct OptimalPoint {
    Scalar n = 0;
    Scalar s_opt = 0;
    Scalar r_opt_abs = 0;
    Scalar f_q_max = 0;
    Scalar stationarity_residual = 0;  // |dF/ds| at s_opt by central difference
    bool used_fallback = false;        // quartic path failed; bracketed 1-D search used
};

namespace detail {

// Golden-section maximizer on [lo, hi]; used as the solver fallback.
template <typename Scalar, typename F>
Scalar golden_max(F&& f, Scalar lo, Scalar hi, Scalar tol) {
    const Scalar g = (std::sqrt(Scalar(5)) - 1) / Scalar(2);
    Scalar a = lo, b = hi;
    Scalar c = b - g * (b - a), d = a + g * (b - a);
    Scalar fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc < fd) {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        } else {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        }
    }
    return (a + b) / 2;
}

}  // namespace detail

// Squeezing maximizing F_Q(n, .) at fixed population, via the quartic in
// y = e^{2s} - 5A/7 (A = 1+2n) solved by Ferrari's method. All four roots are
// evaluated; roots with s <= 0 are discarded and the remaining one with the
// largest QFI is kept. Carried out in complex arithmetic with the principal
// cube root (S(n) is complex for n > 0).
template <typename Scalar = double>
OptimalPoint<Scalar> optimal_squeezing(Scalar n) {
    using C = std::complex<Scalar>;
    if (!(n > 0)) throw ContractError("optimal_squeezing needs n > 0");
    OptimalPoint<Scalar> out;
    out.n = n;

    const Scalar s_inf = asymptotic_optimal<Scalar>().s_inf;
    const Scalar A = 1 + 2 * n;
    const Scalar p = Scalar(-150) / 49 * A * A;
    const Scalar q = Scalar(-1000) / 343 * A * A * A + Scalar(30) / 7 * A;
    const Scalar l = Scalar(-1875) / 2401 * A * A * A * A + Scalar(150) / 49 * A * A - Scalar(17) / 7;

    const Scalar Q = -54781 - 24301800 * n - 553231800 * std::pow(n, 2) -
                     4513860000 * std::pow(n, 3) - 10896930000 * std::pow(n, 4) -
                     10368000000 * std::pow(n, 5) - 3456000000 * std::pow(n, 6);
    const C S = C(-1125 - 4500 * n - 4500 * n * n, 0) + std::sqrt(C(3, 0)) * std::sqrt(C(Q, 0));
    const C S13 = std::pow(S, C(1) / C(3));
    const Scalar six13 = std::cbrt(Scalar(6));
    const Scalar six43 = Scalar(6) * six13;  // 6^{4/3}
    const C m1(Scalar(-25) / 49 * (1 + 4 * n + 4 * n * n), 0);
    const C m2 = C(-7, 0) * C((-372 - 7200 * n - 7200 * n * n) / 49, 0) / six43 / S13;
    const C m3 = S13 / (Scalar(7) * six13 * six13);
    const C m = m1 + m2 + m3;

    const C Cc = std::sqrt(C(2, 0) * m - C(p, 0));
    std::array<C, 4> roots;
    if (std::abs(Cc) > Scalar(1e-300)) {
        const C D = -C(q, 0) / (C(2, 0) * Cc);
        int idx = 0;
        for (const Scalar sgn1 : {Scalar(1), Scalar(-1)}) {
            const C disc = std::sqrt(Cc * Cc - C(4, 0) * (m - C(sgn1, 0) * D));
            for (const Scalar sgn2 : {Scalar(1), Scalar(-1)})
                roots[idx++] = (C(sgn1, 0) * Cc + C(sgn2, 0) * disc) / C(2, 0);
        }
    } else {
        // Degenerate biquadratic y^4 + p y^2 + l = 0.
        const C disc = std::sqrt(C(p * p - 4 * l, 0));
        roots = {std::sqrt((-C(p, 0) + disc) / C(2, 0)), -std::sqrt((-C(p, 0) + disc) / C(2, 0)),
                 std::sqrt((-C(p, 0) - disc) / C(2, 0)), -std::sqrt((-C(p, 0) - disc) / C(2, 0))};
    }

    Scalar best_f = -1, best_s = -1;
    for (const C& y : roots) {
        const C e2s = y + C(5 * A / 7, 0);
        if (std::abs(e2s.imag()) > Scalar(1e-9) * std::max(Scalar(1), std::abs(e2s.real())))
            continue;
        if (!(e2s.real() > 1)) continue;  // s <= 0
        const Scalar s = Scalar(0.5) * std::log(e2s.real());
        if (std::sinh(s) * std::sinh(s) > n) continue;  // population infeasible
        const Scalar f = qfi_ns(n, s);
        if (f > best_f) {
            best_f = f;
            best_s = s;
        }
    }

    const auto fq = [n](Scalar s) { return qfi_ns<Scalar>(n, s); };
    const Scalar h = Scalar(1e-6);
    bool ok = best_s >= 0;
    if (ok) {
        const Scalar d1 = (fq(best_s + h) - fq(best_s - h)) / (2 * h);
        const Scalar d2 = fq(best_s + h) - 2 * fq(best_s) + fq(best_s - h);
        out.stationarity_residual = std::abs(d1);
        ok = out.stationarity_residual < Scalar(1e-6) * best_f && d2 < 0 &&
             best_s <= s_inf + Scalar(1e-9);
    }
    if (!ok) {
        // Quartic path failed its checks: bracketed 1-D maximization, flagged.
        best_s = detail::golden_max(fq, Scalar(0), s_inf + Scalar(1e-6), Scalar(1e-13));
        best_f = fq(best_s);
        out.used_fallback = true;
        out.stationarity_residual = std::abs((fq(best_s + h) - fq(best_s - h)) / (2 * h));
    }
    out.s_opt = best_s;
    out.f_q_max = best_f;
    out.r_opt_abs = cubicity_from_population(n, best_s, Scalar(1e-12));
    return out;
}

// Displacement-sensing QFI, optimized over the displacement direction: four
// times the largest eigenvalue of the quadrature covariance of |psi(r,s)>,
// which is diagonal with Var(x) = e^{2s}/2 and Var(p) = e^{-2s}/2 + (9/2) r^2 e^{4s}.
template <typename Scalar = double>
Scalar displacement_qfi(Scalar r, Scalar s) {
    const Scalar vx = std::exp(Scalar(2) * s) / 2;
    const Scalar vp = std::exp(Scalar(-2) * s) / 2 +
                      Scalar(4.5) * r * r * std::exp(Scalar(4) * s);
    return Scalar(4) * std::max(vx, vp);
}

// Quantum Cramer-Rao bound for mu independent repetitions.
template <typename Scalar = double>
Scalar cramer_rao_bound(Scalar f_q, long mu) {
    if (!(f_q > 0) || mu < 1) throw ContractError("cramer_rao_bound needs f_q > 0 and mu >= 1");
    return Scalar(1) / std::sqrt(Scalar(mu) * f_q);
}

}  // namespace cubicsense
