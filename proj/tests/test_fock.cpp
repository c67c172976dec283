#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <random>

#include "cubicsense/fock.hpp"
#include "oracle_helpers.hpp"

using namespace cubicsense;

TEST_CASE("ladder operators act canonically") {
    const auto l = make_ladder<double>(3);
    VectorXc<double> one = VectorXc<double>::Zero(3);
    one[1] = 1;
    const VectorXc<double> lowered = l.a.matrix * one;
    CHECK(std::abs(lowered[0] - std::complex<double>(1, 0)) < 1e-15);
    CHECK(std::abs(lowered[1]) < 1e-15);
    CHECK_THROWS_AS(make_ladder<double>(1), InvalidDimensionError);
}

TEST_CASE("canonical commutator holds away from the truncation edge") {
    const auto l = make_ladder<double>(50);
    const MatrixXc<double> comm = l.x.matrix * l.p.matrix - l.p.matrix * l.x.matrix;
    const MatrixXc<double> expect =
        std::complex<double>(0, 1) * MatrixXc<double>::Identity(50, 50);
    CHECK((comm - expect).topLeftCorner(45, 45).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("vacuum quadrature variance is one half") {
    const auto l = make_ladder<double>(50);
    CHECK(variance(vacuum_state<double>(50), l.x) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("squeezed vacuum basics") {
    const auto zero = squeezed_vacuum(0.0, 40);
    CHECK(std::abs(zero.amplitudes[0] - std::complex<double>(1, 0)) < 1e-14);

    const auto l = make_ladder<double>(60);
    const auto sv = squeezed_vacuum(0.5, 60);
    CHECK(expectation(sv, l.n).real() ==
          doctest::Approx(std::sinh(0.5) * std::sinh(0.5)).epsilon(1e-8));
    CHECK(variance(sv, l.x) == doctest::Approx(std::exp(1.0) / 2).epsilon(1e-8));

    SUBCASE("gate route agrees with the closed-form amplitudes") {
        const auto closed = squeezed_vacuum_amplitudes(0.6, 200);
        const auto gate = squeezed_vacuum(0.6, 200);
        CHECK(fidelity(closed, gate) > 1 - 1e-12);
    }
    SUBCASE("insufficient dimension raises a truncation error") {
        CHECK_THROWS_AS(squeezed_vacuum(1.5, 20), TruncationError);
    }
}

TEST_CASE("gate application") {
    const Index dim = 120;
    const auto l = make_ladder<double>(dim);
    const auto sv = squeezed_vacuum(0.1, dim);

    SUBCASE("zero coefficient is the identity") {
        const OperatorMatrix<double> x3{(l.x.matrix * l.x.matrix * l.x.matrix).eval(), true};
        const auto out = apply_gate(sv, x3, 0.0);
        CHECK((out.amplitudes - sv.amplitudes).norm() == 0.0);
    }
    SUBCASE("cubic gate reproduces the population budget") {
        const OperatorMatrix<double> x3{(l.x.matrix * l.x.matrix * l.x.matrix).eval(), true};
        const auto out = apply_gate(sv, x3, 0.1);
        const double want = std::sinh(0.1) * std::sinh(0.1) + 27.0 / 8 * std::exp(0.4) * 0.01;
        CHECK(expectation(out, l.n).real() == doctest::Approx(want).epsilon(1e-6));
        CHECK(out.norm() == doctest::Approx(1.0).epsilon(1e-10));
    }
    SUBCASE("generators commuting with n leave the population alone") {
        const OperatorMatrix<double> n2{(l.n.matrix * l.n.matrix).eval(), true};
        const auto out = apply_gate(sv, n2, 0.7);
        CHECK(expectation(out, l.n).real() ==
              doctest::Approx(expectation(sv, l.n).real()).epsilon(1e-12));
    }
    SUBCASE("non-Hermitian generators are rejected") {
        CHECK_THROWS_AS(apply_gate(sv, l.a, 0.1), ContractError);
    }
    SUBCASE("x-polynomial fast path agrees with the dense gate") {
        const OperatorMatrix<double> x3{(l.x.matrix * l.x.matrix * l.x.matrix).eval(), true};
        const auto dense = apply_gate(sv, x3, 0.15);
        XPolynomialGate<double> fast(dim, {0, 0, 0, 1});
        const auto quick = fast.apply(sv, 0.15);
        CHECK((dense.amplitudes - quick.amplitudes).norm() < 1e-10);
    }
}

TEST_CASE("expectation values against closed forms") {
    const Index dim = 160;
    const auto l = make_ladder<double>(dim);
    const OperatorMatrix<double> n2{(l.n.matrix * l.n.matrix).eval(), true};

    CHECK(std::abs(expectation(vacuum_state<double>(dim), l.n)) < 1e-15);

    const auto sv = squeezed_vacuum(0.3, dim);
    const double sh2 = std::sinh(0.3) * std::sinh(0.3);
    CHECK(expectation(sv, n2).real() ==
          doctest::Approx(0.5 * sh2 * (1 + 3 * std::cosh(0.6))).epsilon(1e-8));

    const auto cubic = cubic_state(0.1, 0.1, dim);
    CHECK(expectation(cubic, n2).real() ==
          doctest::Approx(oracle::cubic_n2_closed_form(0.1, 0.1)).epsilon(1e-6));

    SUBCASE("dimension mismatch is rejected") {
        CHECK_THROWS_AS(expectation(vacuum_state<double>(dim - 1), l.n), ContractError);
    }
}

TEST_CASE("pure-state QFI") {
    const Index dim = 200;
    const auto l = make_ladder<double>(dim);
    CHECK(pure_qfi(vacuum_state<double>(dim), l.n) < 1e-14);

    const auto sv = squeezed_vacuum(0.4, dim);
    CHECK(pure_qfi(sv, l.n) == doctest::Approx(std::cosh(1.6) - 1).epsilon(1e-8));

    const auto cubic = cubic_state(0.2, 0.1, dim);
    const double eq2 = 486 * std::exp(0.8) * std::pow(0.2, 4) +
                       (4.5 * std::exp(0.2) + 27 * std::exp(0.6)) * 0.04 + std::cosh(0.4) - 1;
    CHECK(pure_qfi(cubic, l.n) == doctest::Approx(eq2).epsilon(1e-6));

    SUBCASE("QFI is even in the cubicity") {
        const auto plus = cubic_state(0.15, 0.2, dim);
        const auto minus = cubic_state(-0.15, 0.2, dim);
        CHECK(std::abs(pure_qfi(plus, l.n) - pure_qfi(minus, l.n)) < 1e-10);
    }
    SUBCASE("rotations leave number moments invariant") {
        auto rotated = cubic_state(0.2, 0.1, dim);
        for (Index k = 0; k < dim; ++k)
            rotated.amplitudes[k] *= std::exp(std::complex<double>(0, -0.73 * double(k)));
        const auto a = number_moments(cubic_state(0.2, 0.1, dim));
        const auto b = number_moments(rotated);
        CHECK(std::abs(a.mean - b.mean) < 1e-12);
        CHECK(std::abs(a.second - b.second) < 1e-12);
    }
}

TEST_CASE("mixed-state QFI") {
    const Index dim = 80;
    const auto l = make_ladder<double>(dim);

    SUBCASE("rank-one states reduce to the pure formula") {
        const auto sv = squeezed_vacuum(0.3, dim);
        const double n = std::sinh(0.3) * std::sinh(0.3);
        CHECK(mixed_qfi(pure_density(sv), l.n) ==
              doctest::Approx(8 * n * (n + 1)).epsilon(1e-7));
    }
    SUBCASE("generator-diagonal mixtures carry no phase information") {
        DensityOperator<double> rho;
        rho.matrix = MatrixXc<double>::Zero(dim, dim);
        rho.matrix(0, 0) = 0.5;
        rho.matrix(1, 1) = 0.5;
        CHECK(mixed_qfi(rho, l.n) < 1e-12);
    }
    SUBCASE("density-operator invariants are enforced") {
        DensityOperator<double> bad;
        bad.matrix = MatrixXc<double>::Zero(dim, dim);
        bad.matrix(0, 0) = 1.5;
        bad.matrix(1, 1) = -0.5;
        CHECK_THROWS_AS(bad.validate(), InvalidStateError);
        CHECK_THROWS_AS(mixed_qfi(bad, l.n), InvalidStateError);
    }
}

TEST_CASE("wigner transform via displaced parity") {
    SUBCASE("vacuum peaks at 1/pi") {
        const auto g = wigner_grid(vacuum_state<double>(40), 4.0, 81);
        CHECK(g.values(40, 40) == doctest::Approx(1.0 / M_PI).epsilon(1e-10));
        CHECK(g.integral() == doctest::Approx(1.0).epsilon(1e-3));
    }
    SUBCASE("single photon dips to -1/pi at the origin") {
        FockState<double> one = vacuum_state<double>(40);
        one.amplitudes[0] = 0;
        one.amplitudes[1] = 1;
        const auto g = wigner_grid(one, 4.0, 81);
        CHECK(g.values(40, 40) == doctest::Approx(-1.0 / M_PI).epsilon(1e-10));
    }
    SUBCASE("p-marginal reproduces the position density") {
        const double r = 0.2, s = 0.1;
        const auto st = cubic_state(r, s, 96);
        const auto g = wigner_grid(st, -5.0, 5.0, -6.0, 6.0, Index(41), Index(201));
        const double dp = g.ps[1] - g.ps[0];
        for (Index i = 0; i < g.xs.size(); i += 8) {
            const double marginal = g.values.row(i).sum() * dp;
            const double x = g.xs[i];
            const double want =
                std::pow(M_PI, -0.5) * std::exp(-s) * std::exp(-x * x / std::exp(2 * s));
            CHECK(marginal == doctest::Approx(want).epsilon(2e-3));
        }
        CHECK(g.integral() == doctest::Approx(1.0).epsilon(1e-3));
    }
}

TEST_CASE("automatic dimension selection") {
    const auto [state, dim] = converged_cubic_state(0.2, 0.1, DimensionPolicy{40, 256, 1e-8});
    CHECK(dim <= 256);
    CHECK(state.tail_mass() <= 1e-8);
    CHECK_THROWS_AS(converged_cubic_state(0.2, 0.1, DimensionPolicy{40, 64, 1e-30}),
                    TruncationError);
}

TEST_CASE("doubling the dimension leaves converged expectations in place") {
    for (const auto& [r, s] : {std::pair{0.1, 0.1}, std::pair{0.2, 0.3}}) {
        XPolynomialGate<double> g1(768, {0, 0, 0, 1});
        XPolynomialGate<double> g2(1536, {0, 0, 0, 1});
        const auto a = number_moments(g1.apply(squeezed_vacuum_amplitudes(s, 768), r));
        const auto b = number_moments(g2.apply(squeezed_vacuum_amplitudes(s, 1536), r));
        CHECK(std::abs(a.mean - b.mean) < 1e-8);
        CHECK(std::abs(a.qfi() - b.qfi()) / (1 + b.qfi()) < 1e-7);
    }
}

TEST_CASE("binary state dump round-trips bit-exactly") {
    std::mt19937_64 rng(7);
    FockState<double> st;
    st.amplitudes.resize(33);
    for (Index k = 0; k < 33; ++k)
        st.amplitudes[k] = {(rng() >> 11) * 0x1.0p-53, (rng() >> 11) * 0x1.0p-53};
    st.normalized_in_place();
    const std::string path = "fock_roundtrip.bin";
    save_state(st, path);
    const auto back = load_state(path);
    REQUIRE(back.dim() == st.dim());
    CHECK((back.amplitudes - st.amplitudes).norm() == 0.0);
    std::remove(path.c_str());
}
