#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "cubicsense/noise.hpp"
#include "oracle_helpers.hpp"

using namespace cubicsense;

namespace {

FockState<double> coherent_state(double alpha, Index dim) {
    FockState<double> st;
    st.amplitudes.resize(dim);
    for (Index k = 0; k < dim; ++k) {
        const double logmag = -alpha * alpha / 2 + k * std::log(alpha) - 0.5 * std::lgamma(k + 1.0);
        st.amplitudes[k] = std::exp(logmag);
    }
    st.normalized_in_place();
    return st;
}

}  // namespace

TEST_CASE("lindblad integrator") {
    const Index dim = 40;
    const auto l = make_ladder<double>(dim);
    const OperatorMatrix<double> zero_h{MatrixXc<double>::Zero(dim, dim).eval(), true};

    SUBCASE("free evolution without loss is the identity map") {
        const auto rho0 = pure_density(squeezed_vacuum(0.3, dim));
        const OperatorMatrix<double> no_jump{MatrixXc<double>::Zero(dim, dim).eval(), false};
        const auto res = evolve_lindblad(rho0, zero_h, no_jump, 1.0, 200);
        CHECK(trace_distance(res.rho, rho0) < 1e-12);
    }
    SUBCASE("vacuum is a fixed point of pure loss") {
        const auto rho0 = pure_density(vacuum_state<double>(dim));
        const OperatorMatrix<double> jump{(std::sqrt(0.8) * l.a.matrix).eval(), false};
        const auto res = evolve_lindblad(rho0, zero_h, jump, 1.0, 200);
        CHECK(trace_distance(res.rho, rho0) < 1e-12);
    }
    SUBCASE("coherent-state population decays exponentially") {
        const double alpha = 1.3, gamma = 0.5, t = 0.9;
        const auto rho0 = pure_density(coherent_state(alpha, dim));
        const OperatorMatrix<double> jump{(std::sqrt(gamma) * l.a.matrix).eval(), false};
        const auto res = evolve_lindblad(rho0, zero_h, jump, t, 600);
        CHECK(expectation(res.rho, l.n).real() ==
              doctest::Approx(alpha * alpha * std::exp(-gamma * t)).epsilon(1e-6));
    }
    SUBCASE("zero loss reduces to unitary evolution") {
        const auto rho0 = pure_density(vacuum_state<double>(dim));
        const OperatorMatrix<double> no_jump{MatrixXc<double>::Zero(dim, dim).eval(), false};
        const auto gen = squeeze_generator(l);
        OperatorMatrix<double> h{(-0.4 * gen.matrix).eval(), true};  // exp(-iHt) = exp(i 0.4 G)
        const auto res = evolve_lindblad(rho0, h, no_jump, 1.0, 800);
        const auto want = squeezed_vacuum(0.4, dim);
        CHECK(fidelity(want, res.rho) > 1 - 1e-8);
    }
    SUBCASE("halving the step changes the state below tolerance") {
        const auto opt = optimal_squeezing(0.2);
        const CubicParams<double> params{opt.r_opt_abs, opt.s_opt, 0.2};
        LossConfigd cfg;
        cfg.gamma = 0.69;
        cfg.steps = 1600;
        const auto coarse = lossy_cubic_state(params, cfg, 60);
        cfg.steps = 3200;
        const auto fine = lossy_cubic_state(params, cfg, 60);
        CHECK(trace_distance(coarse.rho, fine.rho) < 1e-7);
    }
    SUBCASE("gross under-stepping raises an integrator error") {
        // the right-hand side is exactly trace-free, so drift only shows up
        // once the unstable iteration overflows; drive it there
        const auto rho0 = pure_density(vacuum_state<double>(dim));
        const auto x3 = OperatorMatrix<double>{
            (l.x.matrix * l.x.matrix * l.x.matrix).eval(), true};
        const OperatorMatrix<double> jump{(2.0 * l.a.matrix).eval(), false};
        CHECK_THROWS_AS(evolve_lindblad(rho0, x3, jump, 60.0, 60), IntegratorError);
    }
    SUBCASE("non-Hermitian hamiltonians are rejected") {
        const auto rho0 = pure_density(vacuum_state<double>(dim));
        CHECK_THROWS_AS(evolve_lindblad(rho0, l.a, l.a, 1.0, 10), ContractError);
    }
}

TEST_CASE("lossy cubic preparation") {
    const Index dim = 60;
    const auto opt = optimal_squeezing(0.2);
    const CubicParams<double> params{opt.r_opt_abs, opt.s_opt, 0.2};
    const auto l = make_ladder<double>(dim);

    SUBCASE("lossless preparation recovers the pure state") {
        LossConfigd cfg;
        cfg.gamma = 0;
        cfg.steps = 1200;
        const auto res = lossy_cubic_state(params, cfg, dim);
        // reference built from the same truncated generators
        const OperatorMatrix<double> x3{
            (l.x.matrix * l.x.matrix * l.x.matrix).eval(), true};
        auto pure = apply_gate(vacuum_state<double>(dim), squeeze_generator(l), opt.s_opt, 1e-6);
        pure = apply_gate(pure, x3, opt.r_opt_abs, 1e-6);
        CHECK(fidelity(pure, res.rho) > 1 - 1e-8);
    }
    SUBCASE("lossless QFI matches the closed form at a converged dimension") {
        LossConfigd cfg;
        cfg.gamma = 0;
        cfg.steps = 1500;
        const Index big = 128;
        const auto res = lossy_cubic_state(params, cfg, big);
        const auto lb = make_ladder<double>(big);
        const double lhs = mixed_qfi(res.rho, lb.n) / 0.2;
        const double rhs = qfi_ns(0.2, opt.s_opt) / 0.2;
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-5));
    }
    SUBCASE("SLD oracle confirms the eigensum QFI") {
        LossConfigd cfg;
        cfg.gamma = 0.1;
        cfg.steps = 1200;
        const auto res = lossy_cubic_state(params, cfg, dim);
        const double eig = mixed_qfi(res.rho, l.n);
        const double sld = oracle::sld_qfi(res.rho, l.n);
        CHECK(std::abs(eig - sld) / eig < 1e-6);
    }
    SUBCASE("loss only ever degrades the QFI") {
        double prev = std::numeric_limits<double>::infinity();
        for (const double gamma : {0.0, 0.3, 0.69, 1.0}) {
            LossConfigd cfg;
            cfg.gamma = gamma;
            cfg.steps = 1200;
            const auto res = lossy_cubic_state(params, cfg, dim);
            const double fq = mixed_qfi(res.rho, l.n);
            CHECK(fq <= prev + 1e-9);
            prev = fq;
        }
    }
}

TEST_CASE("accessible quadrature sets") {
    const Index dim = 60;
    CHECK(accessible_set<double>(1, dim).size() == 2);
    CHECK(accessible_set<double>(2, dim).size() == 5);
    CHECK(accessible_set<double>(3, dim).size() == 9);
    CHECK(accessible_set<double>(4, dim).size() == 14);

    const auto l = make_ladder<double>(dim);
    const auto& x = l.x.matrix;
    const auto& p = l.p.matrix;
    auto quad = [&](double th) { return (std::cos(th) * x + std::sin(th) * p).eval(); };
    auto pow4 = [&](const MatrixXc<double>& m) { return (m * m * m * m).eval(); };

    const auto set1 = accessible_set<double>(1, dim);
    CHECK((set1.members[0].matrix - x).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((set1.members[1].matrix - p).cwiseAbs().maxCoeff() < 1e-14);

    SUBCASE("second-order decomposition of S(xp)") {
        const MatrixXc<double> m45 = quad(M_PI / 4);
        const MatrixXc<double> lhs = m45 * m45 - 0.5 * x * x - 0.5 * p * p;
        const MatrixXc<double> sxp = (x * p + p * x) / 2.0;
        CHECK((lhs - sxp).cwiseAbs().maxCoeff() < 1e-10);
    }
    SUBCASE("fourth-order decompositions of the symmetrized quartics") {
        const MatrixXc<double> m45 = quad(M_PI / 4), m135 = quad(3 * M_PI / 4),
                               m30 = quad(M_PI / 6);
        const MatrixXc<double> x2 = x * x, x3 = x2 * x, p2 = p * p, p3 = p2 * p;
        const MatrixXc<double> sx2p2 =
            (x2 * p2 + x * p * x * p + x * p2 * x + p * x * p * x + p * x2 * p + p2 * x2) / 6.0;
        const MatrixXc<double> sx3p = (x3 * p + x2 * p * x + x * p * x2 + p * x3) / 4.0;
        const MatrixXc<double> sxp3 = (x * p3 + p * x * p2 + p2 * x * p + p3 * x) / 4.0;

        const MatrixXc<double> sx2p2_dec =
            pow4(m45) / 3.0 + pow4(m135) / 3.0 - (pow4(x) + pow4(p)) / 6.0;
        CHECK((sx2p2_dec - sx2p2).cwiseAbs().maxCoeff() < 1e-10);

        const MatrixXc<double> bracket =
            pow4(m30) - 9.0 / 16 * pow4(x) - 9.0 / 8 * sx2p2 - pow4(p) / 16.0;
        const MatrixXc<double> sx3p_dec =
            2.0 / std::sqrt(3.0) * bracket - 0.25 * (pow4(m45) - pow4(m135));
        CHECK((sx3p_dec - sx3p).cwiseAbs().maxCoeff() < 1e-10);

        // difference identity over the five quartic channels
        const MatrixXc<double> diff_dec =
            4.0 / std::sqrt(3.0) * bracket - (pow4(m45) - pow4(m135));
        CHECK((diff_dec - (sx3p - sxp3)).cwiseAbs().maxCoeff() < 1e-10);

        // the companion reconstruction needs the 3/4 weight on the
        // antisymmetric quartic combination
        const MatrixXc<double> sxp3_dec =
            -2.0 / std::sqrt(3.0) * bracket + 0.75 * (pow4(m45) - pow4(m135));
        CHECK((sxp3_dec - sxp3).cwiseAbs().maxCoeff() < 1e-10);
    }
    SUBCASE("order bounds are enforced") {
        CHECK_THROWS_AS(accessible_set<double>(5, dim), UnsupportedOrderError);
    }
}

TEST_CASE("noisy moments") {
    const Index dim = 160;
    const auto st = cubic_state(0.2, 0.1, dim);

    SUBCASE("zero noise reproduces the direct accessible-set moments") {
        const auto direct = numeric_moments(st, accessible_set<double>(3, dim));
        const auto cached = noisy_moments(st, 3, DetectionNoised{0.0}, dim);
        CHECK((direct.gamma - cached.gamma).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((direct.c_vec - cached.c_vec).cwiseAbs().maxCoeff() < 1e-10);
    }
    SUBCASE("vacuum quadrature variance gains sigma^2") {
        const auto md = noisy_moments(vacuum_state<double>(dim), 1, DetectionNoised{0.5}, dim);
        CHECK(md.gamma(0, 0) == doctest::Approx(0.75).epsilon(1e-12));
        CHECK(md.gamma(1, 1) == doctest::Approx(0.75).epsilon(1e-12));
    }
    SUBCASE("monte-carlo sampling confirms the same-channel covariance block") {
        const double sigma = 0.3;
        const auto md = noisy_moments(st, 4, DetectionNoised{sigma}, dim);
        std::mt19937_64 rng(20240809);
        const std::size_t samples = 400000;
        oracle::QuadratureSampler sampler(st, 0.0);
        std::vector<std::array<double, 4>> powers(samples);
        for (auto& row : powers) {
            const double v = sampler.sample(rng) + oracle::gaussian(rng, sigma);
            row = {v, v * v, v * v * v, v * v * v * v};
        }
        // channel theta=0 occupies element indices {0, 2, 5, 9} (powers 1..4)
        const int idx[4] = {0, 2, 5, 9};
        for (int a = 0; a < 4; ++a)
            for (int b = a; b < 4; ++b) {
                double ma = 0, mb = 0, mab = 0;
                for (const auto& row : powers) {
                    ma += row[a];
                    mb += row[b];
                    mab += row[a] * row[b];
                }
                ma /= samples;
                mb /= samples;
                mab /= samples;
                const double cov_mc = mab - ma * mb;
                double var_est = 0;
                for (const auto& row : powers)
                    var_est += std::pow((row[a] - ma) * (row[b] - mb) - cov_mc, 2);
                const double se = std::sqrt(var_est / samples) / std::sqrt(double(samples));
                const double table = md.gamma(idx[a], idx[b]);
                CHECK(std::abs(cov_mc - table) < 4 * se + 2e-3);
            }
    }
    SUBCASE("sensitivity decays monotonically with noise and never beats the QFI") {
        QuadratureMomentCache<double> cache(st, 3, dim);
        const double fq_over_n = pure_qfi(st, make_ladder<double>(dim).n) /
                                 number_moments(st).mean;
        double prev = std::numeric_limits<double>::infinity();
        for (double sigma = 0; sigma <= 2.001; sigma += 0.2) {
            const double chi = chi2_inv(cache.assemble(sigma)).chi2_inv;
            const double xi = chi / number_moments(st).mean;
            CHECK(xi <= prev + 1e-12);
            CHECK(xi <= fq_over_n + 1e-8);
            prev = xi;
        }
    }
}

TEST_CASE("detection-noise ratios at the operating point") {
    const auto opt = optimal_squeezing(0.2);
    const auto [st, dim] =
        converged_cubic_state(opt.r_opt_abs, opt.s_opt, DimensionPolicy{128, 256, 1e-8});
    const double sigma = 1.0 / (2.0 * std::sqrt(2.0));
    QuadratureMomentCache<double> c3(st, 3, dim);
    const double ratio3 =
        chi2_inv(c3.assemble(sigma)).chi2_inv / chi2_inv(c3.assemble(0.0)).chi2_inv;
    CHECK(ratio3 == doctest::Approx(0.3556).epsilon(0.02));
}

TEST_CASE("lossy states keep the moment hierarchy below the QFI") {
    const Index dim = 60;
    const auto opt = optimal_squeezing(0.2);
    LossConfigd cfg;
    cfg.gamma = 0.3;
    cfg.steps = 1200;
    const auto res = lossy_cubic_state(CubicParams<double>{opt.r_opt_abs, opt.s_opt, 0.2}, cfg, dim);
    const auto l = make_ladder<double>(dim);
    const double n = expectation(res.rho, l.n).real();
    const double fq_over_n = mixed_qfi(res.rho, l.n) / n;
    double prev = 0;
    for (int k = 1; k <= 4; ++k) {
        const auto md = numeric_moments(res.rho, build_observable_set<double>(k, dim));
        Eigen::SelfAdjointEigenSolver<MatrixX<double>> es(md.gamma, Eigen::EigenvaluesOnly);
        CHECK(es.eigenvalues().minCoeff() > -1e-9);
        const double xi = chi2_inv(md).chi2_inv / n;
        CHECK(xi >= prev - 1e-9);
        prev = xi;
    }
    CHECK(prev <= fq_over_n + 1e-8);
    // the third- and fourth-order coefficients stay close to the QFI curve
    CHECK(prev > 0.9 * fq_over_n);
}
