#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "cubicsense/moments.hpp"
#include "oracle_helpers.hpp"

using namespace cubicsense;

TEST_CASE("observable sets") {
    const Index dim = 40;
    CHECK(build_observable_set<double>(1, dim).size() == 1);
    CHECK(build_observable_set<double>(2, dim).size() == 2);
    CHECK(build_observable_set<double>(3, dim).size() == 4);
    const auto set = build_observable_set<double>(4, dim);
    CHECK(set.size() == 6);
    for (const auto& m : set.members) CHECK(m.hermiticity_defect() < 1e-12);

    SUBCASE("fourth-order member is the full symmetrization") {
        const auto l = make_ladder<double>(dim);
        const auto& x = l.x.matrix;
        const auto& p = l.p.matrix;
        const MatrixXc<double> x2 = x * x, x3 = x2 * x;
        const MatrixXc<double> want = (x3 * p + x2 * p * x + x * p * x2 + p * x3) / 4.0;
        CHECK((set.members[4].matrix - want).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("order bounds are enforced") {
        CHECK_THROWS_AS(build_observable_set<double>(0, dim), UnsupportedOrderError);
        CHECK_THROWS_AS(build_observable_set<double>(5, dim), UnsupportedOrderError);
    }
}

TEST_CASE("analytic moments match the Fock numerics entrywise") {
    const Index dim = 512;
    const auto set = build_observable_set<double>(4, dim);
    for (const auto& [r, s] : {std::pair{0.2, 0.1}, std::pair{0.15, 0.2}}) {
        const auto st = cubic_state(r, s, dim);
        const auto numeric = numeric_moments(st, set);
        const auto closed = analytic_moments(r, s, 4);
        CHECK((numeric.gamma - closed.gamma).cwiseAbs().maxCoeff() < 1e-6);
        CHECK((numeric.c_vec - closed.c_vec).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("table entries at the worked point") {
    const auto md = analytic_moments(0.2, 0.1, 4);
    CHECK(md.gamma(0, 0) == doctest::Approx(std::exp(0.2) / 2).epsilon(1e-14));
    CHECK(md.c_vec[0] == doctest::Approx(-1.5 * 0.2 * std::exp(0.2)).epsilon(1e-12));
    CHECK(md.c_vec[0] == doctest::Approx(-0.3664208274).epsilon(1e-9));

    SUBCASE("covariance stays positive semidefinite on a grid") {
        for (double r = 0; r <= 0.31; r += 0.05)
            for (double s = 0; s <= 0.51; s += 0.1) {
                const auto g = analytic_moments(r, s, 4).gamma;
                Eigen::SelfAdjointEigenSolver<MatrixX<double>> es(g, Eigen::EigenvaluesOnly);
                CHECK(es.eigenvalues().minCoeff() > -1e-9 * es.eigenvalues().maxCoeff());
            }
    }
}

TEST_CASE("optimized sensitivity chi^-2") {
    SUBCASE("first order closed form") {
        const auto res = chi2_inv(analytic_moments(0.2, 0.1, 1));
        CHECK(res.chi2_inv == doctest::Approx(4.5 * 0.04 * std::exp(0.2)).epsilon(1e-12));
        CHECK(res.chi2_inv == doctest::Approx(0.2198524965).epsilon(1e-9));
    }
    SUBCASE("second order at zero cubicity") {
        const auto res = chi2_inv(analytic_moments(0.0, 0.3, 2));
        CHECK(res.chi2_inv ==
              doctest::Approx(2 * std::sinh(0.6) * std::sinh(0.6)).epsilon(1e-12));
    }
    SUBCASE("fourth order saturates the QFI") {
        std::mt19937_64 rng(3);
        for (int i = 0; i < 20; ++i) {
            const double r = 0.02 + 0.28 * ((rng() >> 11) * 0x1.0p-53);
            const double s = 0.5 * ((rng() >> 11) * 0x1.0p-53);
            const double chi4 = chi2_inv(analytic_moments(r, s, 4)).chi2_inv;
            CHECK(std::abs(chi4 - qfi_rs(r, s)) / qfi_rs(r, s) < 1e-8);
        }
    }
    SUBCASE("the optimal coefficients reproduce the maximum") {
        const auto md = analytic_moments(0.15, 0.25, 3);
        const auto res = chi2_inv(md);
        CHECK(res.m_opt.norm() == doctest::Approx(1.0).epsilon(1e-12));
        const double num = std::pow(md.c_vec.dot(res.m_opt), 2);
        const double den = res.m_opt.dot(md.gamma * res.m_opt);
        CHECK(num / den == doctest::Approx(res.chi2_inv).epsilon(1e-9));
    }
    SUBCASE("degenerate commutator vector gives zero sensitivity") {
        MomentData<double> vacuum_like;
        vacuum_like.gamma = MatrixX<double>::Constant(1, 1, 0.5);
        vacuum_like.c_vec = VectorX<double>::Zero(1);
        vacuum_like.k = 1;
        CHECK(chi2_inv(vacuum_like).chi2_inv == 0.0);
    }
    SUBCASE("rescaling an observable never changes the optimum") {
        auto md = analytic_moments(0.2, 0.15, 4);
        const double base = chi2_inv(md).chi2_inv;
        const double c = 37.5;
        md.gamma.row(2) *= c;
        md.gamma.col(2) *= c;
        md.c_vec[2] *= c;
        CHECK(chi2_inv(md).chi2_inv == doctest::Approx(base).epsilon(1e-10));
    }
}

TEST_CASE("third-order closed form agrees with the moment matrix") {
    for (double r = 0.05; r <= 0.31; r += 0.05)
        for (double s = 0; s <= 0.51; s += 0.1) {
            const double matrix_route = chi2_inv(analytic_moments(r, s, 3)).chi2_inv;
            CHECK(matrix_route ==
                  doctest::Approx(oracle::chi3_closed_form(r, s)).epsilon(1e-8));
        }
}

TEST_CASE("nonlinear squeezing hierarchy") {
    struct Point {
        double r, s;
        Index dim;
    };
    for (const auto& [r, s, dim] :
         {Point{0.1, 0.1, 384}, Point{0.2, 0.3, 768}, Point{0.05, 0.5, 768}}) {
        const double n = population(r, s);
        double prev = 0;
        for (int k = 1; k <= 4; ++k) {
            const double xi = xi2_inv(r, s, k);
            CHECK(xi >= prev - 1e-9);
            prev = xi;
        }
        CHECK(prev <= qfi_rs(r, s) / n + 1e-8);

        // numeric route obeys the same chain and the saturation identity
        const auto st = cubic_state(r, s, dim);
        const auto md4 = numeric_moments(st, build_observable_set<double>(4, dim));
        const double xi4 = chi2_inv(md4).chi2_inv / n;
        const double fq_n = number_moments(st).qfi() / n;
        CHECK(std::abs(xi4 - fq_n) / fq_n < 1e-6);
    }
    CHECK_THROWS_AS(xi2_inv(0.0, 0.0, 1), ContractError);
}

TEST_CASE("estimator bias check") {
    const Index dim = 240;
    const auto st = cubic_state(0.2, 0.1, dim);
    const auto set = build_observable_set<double>(4, dim);

    SUBCASE("all six observables are centered") {
        for (std::size_t i = 0; i < set.size(); ++i) {
            VectorX<double> e = VectorX<double>::Zero(6);
            e[int(i)] = 1;
            const auto bc = estimator_bias_check(st, set, e);
            CHECK(std::abs(bc.mean_at_zero) < 1e-10);
        }
    }
    SUBCASE("optimal third-order estimator reaches its chi^-2") {
        const auto set3 = build_observable_set<double>(3, dim);
        const auto md = analytic_moments(0.2, 0.1, 3);
        const auto res = chi2_inv(md);
        const auto bc = estimator_bias_check(st, set3, res.m_opt);
        // Var(M) for the unit-norm optimal coefficients
        const double var_m = res.m_opt.dot(md.gamma * res.m_opt);
        CHECK(bc.derivative * bc.derivative / var_m ==
              doctest::Approx(res.chi2_inv).epsilon(1e-6));
        CHECK_FALSE(bc.degenerate);
    }
    SUBCASE("first-order signal is odd in the phase") {
        const auto set1 = build_observable_set<double>(1, dim);
        VectorX<double> m = VectorX<double>::Ones(1);
        auto mean_at = [&](double theta) {
            FockState<double> rotated = st;
            for (Index k = 0; k < dim; ++k)
                rotated.amplitudes[k] *= std::exp(std::complex<double>(0, -theta * double(k)));
            return expectation(rotated, set1.members[0]).real();
        };
        const double plus = mean_at(0.05), minus = mean_at(-0.05);
        CHECK(plus == doctest::Approx(-minus).epsilon(1e-4));
        CHECK(std::abs(plus) > 1e-4);
    }
}
