#pragma once

// Test-side oracles kept independent of the library paths they check:
// a bracketed 1-D maximizer, a symmetric-logarithmic-derivative QFI solve,
// quadrature-distribution sampling for Monte-Carlo noise checks, and small
// closed forms transcribed directly for cross-validation.

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "cubicsense/fock.hpp"

namespace oracle {

using cubicsense::DensityOperator;
using cubicsense::FockState;
using cubicsense::Index;
using cubicsense::MatrixXc;
using cubicsense::OperatorMatrix;
using cubicsense::VectorXc;

// Golden-section maximizer, written independently of the library fallback.
template <typename F>
double maximize(F&& f, double lo, double hi, double tol = 1e-12) {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
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
    return 0.5 * (a + b);
}

// QFI via the symmetric logarithmic derivative: solve L elementwise in the
// rho eigenbasis from d(rho)/dtheta = -i[n, rho], then F = Tr(rho L^2).
inline double sld_qfi(const DensityOperator<double>& rho, const OperatorMatrix<double>& gen) {
    Eigen::SelfAdjointEigenSolver<MatrixXc<double>> es(rho.matrix);
    const auto& lam = es.eigenvalues();
    const MatrixXc<double> drho =
        std::complex<double>(0, -1) * (gen.matrix * rho.matrix - rho.matrix * gen.matrix);
    const MatrixXc<double> dr = es.eigenvectors().adjoint() * drho * es.eigenvectors();
    const Index d = lam.size();
    MatrixXc<double> L = MatrixXc<double>::Zero(d, d);
    for (Index k = 0; k < d; ++k)
        for (Index l = 0; l < d; ++l) {
            const double den = lam[k] + lam[l];
            if (den > 1e-12) L(k, l) = 2.0 * dr(k, l) / den;
        }
    MatrixXc<double> rho_diag = MatrixXc<double>::Zero(d, d);
    for (Index k = 0; k < d; ++k) rho_diag(k, k) = std::max(lam[k], 0.0);
    return (rho_diag * L * L).trace().real();
}

// Position-space wavefunction from Fock amplitudes via the Hermite-function
// recurrence h_k = sqrt(2/k) x h_{k-1} - sqrt((k-1)/k) h_{k-2}.
inline std::complex<double> wavefunction(const VectorXc<double>& amps, double x) {
    const Index d = amps.size();
    double h_prev = std::pow(M_PI, -0.25) * std::exp(-x * x / 2);
    std::complex<double> out = amps[0] * h_prev;
    double h_cur = std::sqrt(2.0) * x * h_prev;
    if (d > 1) out += amps[1] * h_cur;
    for (Index k = 2; k < d; ++k) {
        const double h_next =
            std::sqrt(2.0 / double(k)) * x * h_cur - std::sqrt(double(k - 1) / double(k)) * h_prev;
        out += amps[Index(k)] * h_next;
        h_prev = h_cur;
        h_cur = h_next;
    }
    return out;
}

// Inverse-CDF sampler for the outcome distribution of the rotated quadrature
// M_theta on a pure state.
class QuadratureSampler {
public:
    QuadratureSampler(const FockState<double>& psi, double theta, double x_span = 12.0,
                      int grid = 8001) {
        VectorXc<double> rotated = psi.amplitudes;
        for (Index k = 0; k < rotated.size(); ++k)
            rotated[k] *= std::exp(std::complex<double>(0, -theta * double(k)));
        xs_.resize(grid);
        cdf_.resize(grid);
        double acc = 0;
        for (int i = 0; i < grid; ++i) {
            xs_[i] = -x_span + 2 * x_span * i / (grid - 1);
            acc += std::norm(wavefunction(rotated, xs_[i]));
            cdf_[i] = acc;
        }
        for (double& c : cdf_) c /= acc;
    }

    double sample(std::mt19937_64& rng) const {
        const double u = (rng() >> 11) * 0x1.0p-53;
        const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
        const std::size_t i = std::min<std::size_t>(it - cdf_.begin(), cdf_.size() - 1);
        return xs_[i];
    }

private:
    std::vector<double> xs_, cdf_;
};

inline double gaussian(std::mt19937_64& rng, double sigma) {
    const double u1 = ((rng() >> 11) + 0.5) * 0x1.0p-53;
    const double u2 = (rng() >> 11) * 0x1.0p-53;
    return sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

// <n^2> of the cubic phase state, transcribed as an independent closed form.
inline double cubic_n2_closed_form(double r, double s) {
    const double r2 = r * r;
    auto E = [&](double k) { return std::exp(k * s); };
    return (1.0 / 64.0) * E(-4) *
           (12 - 16 * E(2) + 8 * E(4) + 540 * E(10) * r2 + 8505 * E(12) * r2 * r2 +
            E(8) * (12 - 216 * r2) + 4 * E(6) * (-4 + 45 * r2));
}

// chi^{-2}_(3) closed form in (r, s), transcribed independently of the
// moment-matrix route.
inline double chi3_closed_form(double r, double s) {
    const double r2 = r * r;
    const double E = std::exp(2 * s);
    const double E2 = E * E, E3 = E2 * E, E4 = E3 * E;
    return 0.1 * (9 * r2 * E * (29 - 192 / (45 * r2 * E3 + 8)) + 3645 * r2 * r2 * E4 +
                  270 * r2 * E3 + 5 * E2 + 5 / E2 - 10);
}

// Trisqueezed-vacuum population through sixth order in the triplicity.
inline double trisqueeze_population_series(double t) {
    const double t2 = t * t;
    return 18 * t2 + 324 * t2 * t2 + 8164.8 * t2 * t2 * t2;
}

}  // namespace oracle
