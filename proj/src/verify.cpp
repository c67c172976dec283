#include "cubicsense/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "cubicsense/analytic.hpp"
#include "cubicsense/fock.hpp"
#include "cubicsense/moments.hpp"
#include "cubicsense/noise.hpp"
#include "cubicsense/parallel.hpp"
#include "cubicsense/protocols.hpp"

namespace cubicsense {

namespace {

struct Check {
    std::string id;
    std::string description;
    double target = 0;
    double tolerance = 0;
};

CriterionResult finish(const Check& c, double measured, const std::string& detail = {}) {
    CriterionResult r;
    r.id = c.id;
    r.description = c.description;
    r.measured = measured;
    r.target = c.target;
    r.tolerance = c.tolerance;
    r.pass = std::abs(measured - c.target) <= c.tolerance;
    r.detail = detail;
    return r;
}

CriterionResult errored(const Check& c, const std::string& what) {
    CriterionResult r;
    r.id = c.id;
    r.description = c.description;
    r.measured = std::numeric_limits<double>::quiet_NaN();
    r.target = c.target;
    r.tolerance = c.tolerance;
    r.pass = false;
    r.detail = what;
    return r;
}

template <typename Fn>
CriterionResult guarded(const Check& c, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        return errored(c, e.what());
    }
}

// Deterministic uniform draw independent of the standard library's
// distribution implementations.
double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * ((rng() >> 11) * 0x1.0p-53);
}

const std::vector<double>& qfi_grid_r() {
    static const std::vector<double> v = {0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3};
    return v;
}
const std::vector<double>& qfi_grid_s() {
    static const std::vector<double> v = {0, 0.1, 0.2, 0.3, 0.4, 0.5};
    return v;
}

// Fock-oracle QFI with a doubling ladder: accept once successive doublings
// move the value by < 9e-6 relative (observed contraction per doubling is a
// factor ~10-20, certifying ~1e-6).
double ladder_qfi(double r, double s, long max_dim, std::string* note) {
    Index dim = std::min<Index>(256, max_dim);
    bool have_prev = false;
    double prev = 0;
    double last_tail = 0;
    for (;;) {
        XPolynomialGate<double> cubic(dim, {0, 0, 0, 1});
        const FockStated st = cubic.apply(squeezed_vacuum_amplitudes(s, dim), r);
        last_tail = st.tail_mass();
        const double fq = number_moments(st).qfi();
        const bool tail_ok = last_tail <= 1e-8;
        if (tail_ok && have_prev && std::abs(fq - prev) <= 9e-6 * (1 + std::abs(fq))) return fq;
        if (dim >= max_dim) {
            if (!tail_ok)
                throw TruncationError("oracle state tail above tolerance at the dimension cap",
                                      last_tail, long(dim));
            if (note) *note += " [uncertified at cap]";
            return fq;
        }
        prev = fq;
        have_prev = true;
        dim = std::min<Index>(2 * dim, max_dim);
    }
}

CriterionResult a1_formula() {
    const Check c{"A1a", "squeezed-vacuum QFI equals cosh(4s)-1 on s=0.1..1.0", 0, 1e-12};
    double worst = 0;
    for (int i = 1; i <= 10; ++i) {
        const double s = 0.1 * i;
        worst = std::max(worst, std::abs(qfi_rs(0.0, s) - (std::cosh(4 * s) - 1)));
    }
    return finish(c, worst);
}

CriterionResult a1_population_form() {
    const Check c{"A1b", "squeezed-vacuum QFI equals 8n(n+1) with n=sinh^2(s)", 0, 1e-10};
    double worst = 0;
    for (int i = 1; i <= 10; ++i) {
        const double s = 0.1 * i;
        const double n = std::sinh(s) * std::sinh(s);
        worst = std::max(worst, std::abs(qfi_rs(0.0, s) - squeezed_vacuum_qfi(n)));
    }
    return finish(c, worst);
}

CriterionResult a2() {
    const Check c{"A2", "qfi_ns(n, s_opt)/n^2 approaches 128/3 at n=1e3 (relative)", 0, 0.005};
    const double n = 1e3;
    const auto opt = optimal_squeezing(n);
    const double val = qfi_ns(n, opt.s_opt) / (n * n);
    return finish(c, std::abs(val / (128.0 / 3.0) - 1));
}

CriterionResult a3_sopt() {
    const Check c{"A3a", "s_opt(1e4) equals 0.101366", 0.101366, 1e-3};
    return finish(c, optimal_squeezing(1e4).s_opt);
}

CriterionResult a3_ropt() {
    const Check c{"A3b", "r_opt(1e4) equals 4*sqrt(n)/9 (ratio)", 1.0, 0.01};
    return finish(c, optimal_squeezing(1e4).r_opt_abs / (4.0 * 100.0 / 9.0));
}

CriterionResult a3_bound() {
    const Check c{"A3c", "s_opt(n) never exceeds the asymptote (worst excess)", 0, 1e-9};
    const double s_inf = asymptotic_optimal<double>().s_inf;
    double worst = -1;
    for (double ln = -2; ln <= 6.01; ln += 0.25)
        worst = std::max(worst, optimal_squeezing(std::pow(10.0, ln)).s_opt - s_inf);
    return finish(c, std::max(worst, 0.0));
}

CriterionResult a4(const VerifyConfig& cfg) {
    const Check c{"A4", "analytic QFI vs Fock oracle on the 7x6 grid (worst relative)", 0, 1e-6};
    return guarded(c, [&] {
        struct Pt {
            double r, s;
        };
        std::vector<Pt> pts;
        for (const double r : qfi_grid_r())
            for (const double s : qfi_grid_s()) pts.push_back({r, s});
        std::vector<double> devs(pts.size());
        std::string note;
        std::exception_ptr err;
        parallel_for(
            pts.size(),
            [&](std::size_t i) {
                try {
                    const double want = qfi_rs(pts[i].r, pts[i].s);
                    const double got = ladder_qfi(pts[i].r, pts[i].s, cfg.max_dim, &note);
                    devs[i] = std::abs(got - want) / (1 + want);
                } catch (...) {
                    if (!err) err = std::current_exception();
                }
            },
            cfg.threads);
        if (err) std::rethrow_exception(err);
        return finish(c, *std::max_element(devs.begin(), devs.end()), note);
    });
}

CriterionResult a5_analytic(const VerifyConfig& cfg) {
    const Check c{"A5a", "xi2_inv(4) equals F_Q/n, closed-form path (worst relative)", 0, 1e-8};
    std::mt19937_64 rng(cfg.seed);
    double worst = 0;
    for (int i = 0; i < 20; ++i) {
        const double r = uniform(rng, 0.02, 0.2);
        const double s = uniform(rng, 0.0, 0.3);
        const double lhs = xi2_inv(r, s, 4);
        const double rhs = qfi_rs(r, s) / population(r, s);
        worst = std::max(worst, std::abs(lhs - rhs) / rhs);
    }
    return finish(c, worst);
}

CriterionResult a5_numeric(const VerifyConfig& cfg) {
    const Check c{"A5b", "xi2_inv(4) equals F_Q/n, numeric moment path (worst relative)", 0, 1e-8};
    return guarded(c, [&] {
        std::mt19937_64 rng(cfg.seed + 1);
        double worst = 0;
        for (int i = 0; i < 20; ++i) {
            const double r = uniform(rng, 0.02, 0.2);
            const double s = uniform(rng, 0.0, 0.3);
            // The eighth-order quadrature moments behind chi converge slower
            // than the tail mass, so double past the tail-converged point.
            const auto probe = converged_cubic_state(
                r, s, DimensionPolicy{320, std::max<Index>(cfg.max_dim / 2, 1), 1e-13});
            const Index dim = std::min<Index>(2 * probe.second, std::max<Index>(cfg.max_dim, 1));
            const FockStated state = cubic_state(r, s, dim);
            const auto set = build_observable_set<double>(4, dim);
            const double chi4 = chi2_inv(numeric_moments(state, set)).chi2_inv;
            const double fq = number_moments(state).qfi();
            worst = std::max(worst, std::abs(chi4 - fq) / fq);
        }
        return finish(c, worst);
    });
}

CriterionResult a6() {
    const Check c{"A6", "hierarchy xi(1)<=xi(2)<=xi(3)<=xi(4) on the grid (worst violation)", 0,
                  1e-9};
    double worst = 0;
    for (const double r : qfi_grid_r())
        for (const double s : qfi_grid_s()) {
            if (!(population(r, s) > 0)) continue;
            double prev = 0;
            for (int k = 1; k <= 4; ++k) {
                const double xi = xi2_inv(r, s, k);
                if (k > 1) worst = std::max(worst, prev - xi);
                prev = xi;
            }
        }
    return finish(c, std::max(worst, 0.0));
}

CriterionResult a7() {
    const Check c{"A7", "xi2_inv(3)(n, s_opt)/n approaches 32 at n=1e3 (relative)", 0, 0.01};
    const double n = 1e3;
    const auto opt = optimal_squeezing(n);
    const double r = cubicity_from_population(n, opt.s_opt);
    const double val = xi2_inv(r, opt.s_opt, 3) / n;
    return finish(c, std::abs(val / 32.0 - 1));
}

CriterionResult a8(const VerifyConfig& cfg) {
    const Check c{"A8", "loss gamma*t=0.69 keeps 46% of lossless F_Q/n at n=0.2", 0.46, 0.03};
    return guarded(c, [&] {
        const double n_op = 0.2;
        const auto opt = optimal_squeezing(n_op);
        const Index dim = std::min<Index>(cfg.loss_dim, cfg.max_dim);
        LossConfigd loss;
        loss.gamma = 0.69;
        loss.steps = cfg.loss_steps;
        const auto res =
            lossy_cubic_state(CubicParams<double>{opt.r_opt_abs, opt.s_opt, n_op}, loss, dim);
        const double tail = res.rho.matrix.diagonal().real().tail(5).sum();
        if (tail > cfg.tail_tol)
            throw TruncationError("lossy state tail above tolerance", tail, long(dim));
        const Ladderd ladder = make_ladder<double>(dim);
        const double n_lossy = expectation(res.rho, ladder.n).real();
        const double fq = mixed_qfi(res.rho, ladder.n);
        const double ratio = (fq / n_lossy) / (opt.f_q_max / n_op);
        return finish(c, ratio);
    });
}

std::pair<double, double> noise_ratios(const VerifyConfig& cfg) {
    const double n_op = 0.2;
    const auto opt = optimal_squeezing(n_op);
    const auto [state, dim] = converged_cubic_state(
        opt.r_opt_abs, opt.s_opt,
        DimensionPolicy{128, std::min<Index>(cfg.noise_dim, cfg.max_dim), cfg.tail_tol});
    const double sigma = 1.0 / (2.0 * std::sqrt(2.0));
    QuadratureMomentCache<double> c3(state, 3, dim);
    QuadratureMomentCache<double> c4(state, 4, dim);
    const double r3 = chi2_inv(c3.assemble(sigma)).chi2_inv / chi2_inv(c3.assemble(0)).chi2_inv;
    const double r4 = chi2_inv(c4.assemble(sigma)).chi2_inv / chi2_inv(c4.assemble(0)).chi2_inv;
    return {r3, r4};
}

CriterionResult a9_third(const VerifyConfig& cfg) {
    const Check c{"A9a", "detection noise sigma=1/(2*sqrt2): xi2_inv(3) ratio", 0.356, 0.02};
    return guarded(c, [&] { return finish(c, noise_ratios(cfg).first); });
}

CriterionResult a9_fourth(const VerifyConfig& cfg) {
    const Check c{"A9b", "detection noise sigma=1/(2*sqrt2): xi2_inv(4) ratio", 0.398, 0.02};
    return guarded(c, [&] {
        return finish(c, noise_ratios(cfg).second,
                      "shared-per-channel outcome noise on the 14-element accessible set tops "
                      "out near 0.35; the reference ratio appears to assume a larger "
                      "measurement span (see the project notes)");
    });
}

CriterionResult a10_closed_forms(const VerifyConfig& cfg) {
    const Check c{"A10a", "repeat-until-success closed forms vs Fock numerics (worst abs)", 0, 1e-6};
    return guarded(c, [&] {
        const Index dim = std::min<Index>(240, cfg.max_dim);
        const Ladderd ladder = make_ladder<double>(dim);
        const OperatorMatrixd n2{(ladder.n.matrix * ladder.n.matrix).eval(), true};
        double worst = 0;
        for (int N = 1; N <= 5; ++N)
            for (const double r : {0.05, 0.1})
                for (const double s : {0.2, 0.5}) {
                    const RusParamsd p{r, s, N};
                    const auto numeric = rus_state_numeric(p, dim, cfg.tail_tol);
                    const auto closed = rus_analytic(p);
                    worst = std::max(worst, std::abs(numeric.norm_sq - closed.z));
                    worst = std::max(worst, std::abs(expectation(numeric.state, ladder.n).real() -
                                                     closed.mean_n));
                    worst = std::max(worst,
                                     std::abs(expectation(numeric.state, n2).real() - closed.mean_n2));
                }
        return finish(c, worst);
    });
}

CriterionResult a10_envelope() {
    ScanGrid grid = ScanGrid::defaults();
    const auto env = protocol_scan(Protocol::rus, grid, 1);
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& row : env) {
        if (row.n < 0.5 || row.n > 18) continue;
        worst = std::min(worst, row.f_q_over_n - squeezed_vacuum_qfi(row.n) / row.n);
    }
    CriterionResult r;
    r.id = "A10b";
    r.description = "rus(1) envelope exceeds the squeezed-vacuum gain for n >= 0.5 (worst margin)";
    r.measured = worst;
    r.target = 0;
    r.tolerance = 0;
    r.pass = worst > 0;
    return r;
}

CriterionResult a11(const VerifyConfig& cfg) {
    const Check c{"A11", "Kerr sandwich at lambda=4 reaches the ideal gain at equal n (best ratio)",
                  1.0, 0.05};
    return guarded(c, [&] {
        const Index dim = std::min<Index>(240, cfg.max_dim);
        KerrParamsd p;
        p.lambda = 4;
        p.alpha = 64;
        const HermitianGate<double> gate(kerr_effective_generator(p, dim));
        double best_ratio = 0;
        for (const double s : {0.06, 0.08, 0.1, 0.12})
            for (const double r : {0.1, 0.15, 0.2}) {
                KerrParamsd q = p;
                q.r = r;
                q.s = s;
                FockStated st = gate.apply(squeezed_vacuum_amplitudes(s, dim), -q.tau());
                st.normalized_in_place();
                if (st.tail_mass() > cfg.tail_tol) continue;
                const auto nm = number_moments(st);
                const auto opt = optimal_squeezing(nm.mean);
                const double ratio = (nm.qfi() / nm.mean) / (opt.f_q_max / nm.mean);
                if (std::abs(ratio - 1) < std::abs(best_ratio - 1)) best_ratio = ratio;
            }
        return finish(c, best_ratio);
    });
}

CriterionResult a12_commutator(const VerifyConfig& cfg) {
    const Check c{"A12a", "Kerr unitary commutes with the number operator (matrix norm)", 0, 1e-12};
    return guarded(c, [&] {
        const Index dim = std::min<Index>(60, cfg.max_dim);
        const Ladderd l = make_ladder<double>(dim);
        const MatrixXc<double> k4 =
            l.a_dagger.matrix * l.a_dagger.matrix * l.a.matrix * l.a.matrix;
        const HermitianGate<double> gate(OperatorMatrixd{k4, true});
        const MatrixXc<double> u = gate.unitary(0.37);
        const double nrm = (u * l.n.matrix - l.n.matrix * u).norm();
        return finish(c, nrm);
    });
}

CriterionResult a12_envelope(const VerifyConfig& cfg) {
    const Check c{"A12b", "plain squeezed-Kerr never beats the squeezed-vacuum gain (worst excess)",
                  0, 1e-6};
    return guarded(c, [&] {
        ScanGrid grid = ScanGrid::defaults();
        grid.kerr_plain_dim = std::min<long>(grid.kerr_plain_dim, cfg.max_dim);
        const auto env = protocol_scan(Protocol::kerr_plain, grid);
        double worst = -std::numeric_limits<double>::infinity();
        for (const auto& row : env)
            worst = std::max(worst, row.f_q_over_n - squeezed_vacuum_qfi(row.n) / row.n);
        return finish(c, std::max(worst, 0.0));
    });
}

CriterionResult a13(const VerifyConfig& cfg) {
    const Check c{"A13", "all six observables have zero mean on random cubic states (worst abs)", 0,
                  1e-10};
    return guarded(c, [&] {
        std::mt19937_64 rng(cfg.seed + 2);
        double worst = 0;
        for (int i = 0; i < 10; ++i) {
            const double r = uniform(rng, 0.02, 0.25);
            const double s = uniform(rng, 0.0, 0.4);
            const auto [state, dim] = converged_cubic_state(
                r, s, DimensionPolicy{256, std::max<Index>(cfg.max_dim, 1), 1e-10});
            const auto set = build_observable_set<double>(4, dim);
            for (const auto& member : set.members)
                worst = std::max(worst, std::abs(expectation(state, member).real()));
        }
        return finish(c, worst);
    });
}

CriterionResult a14() {
    const Check c{"A14",
                  "displacement QFI of cubic states never beats equal-n squeezed vacuum (worst "
                  "excess)",
                  0, 1e-9};
    double worst = -std::numeric_limits<double>::infinity();
    for (const double r : qfi_grid_r())
        for (int i = 0; i <= 40; ++i) {
            const double s = i / 40.0;
            const double n = population(r, s);
            const double s_eq = std::asinh(std::sqrt(n));
            worst = std::max(worst, displacement_qfi(r, s) - 2 * std::exp(2 * s_eq));
        }
    return finish(c, std::max(worst, 0.0));
}

CriterionResult a15_perturbative(const VerifyConfig& cfg) {
    const Check c{"A15a", "trisqueezed population matches the perturbation series at |t|=0.05", 0,
                  1e-4};
    return guarded(c, [&] {
        const double t = 0.05;
        TrisqueezeParamsd p;
        p.t = {t, 0};
        p.dim = std::min<Index>(128, cfg.max_dim);
        const FockStated st = trisqueezed_state(p);
        const double n = number_moments(st).mean;
        const double t2 = t * t;
        const double oracle = 18 * t2 + 324 * t2 * t2 + 8164.8 * t2 * t2 * t2;
        return finish(c, std::abs(n - oracle));
    });
}

CriterionResult a15_oscillation(const VerifyConfig& cfg) {
    const Check c{"A15b",
                  "trisqueezed population returns to small values in 1.6<=t<=1.9 (worst "
                  "window/peak ratio)",
                  0, 0.1};
    return guarded(c, [&] {
        double worst = 0;
        for (const Index dim : {Index(128), Index(256), Index(512)}) {
            const Index d = std::min(dim, Index(cfg.max_dim));
            const HermitianGate<double> gate(trisqueeze_generator<double>({1.0, 0.0}, d));
            const FockStated vac = vacuum_state<double>(d);
            double peak = 0;
            for (double t = 0.2; t <= 1.5001; t += 0.1)
                peak = std::max(peak, number_moments(gate.apply(vac, t)).mean);
            double dip = std::numeric_limits<double>::infinity();
            for (double t = 1.6; t <= 1.9001; t += 0.05)
                dip = std::min(dip, number_moments(gate.apply(vac, t)).mean);
            worst = std::max(worst, dip / peak);
        }
        return finish(c, worst,
                      "populations are cutoff-family values; the window dip is checked per dim");
    });
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const VerifyConfig& cfg) {
    std::vector<CriterionResult> out;
    out.push_back(a1_formula());
    out.push_back(a1_population_form());
    out.push_back(a2());
    out.push_back(a3_sopt());
    out.push_back(a3_ropt());
    out.push_back(a3_bound());
    out.push_back(a4(cfg));
    out.push_back(a5_analytic(cfg));
    out.push_back(a5_numeric(cfg));
    out.push_back(a6());
    out.push_back(a7());
    out.push_back(a8(cfg));
    out.push_back(a9_third(cfg));
    out.push_back(a9_fourth(cfg));
    out.push_back(a10_closed_forms(cfg));
    out.push_back(a10_envelope());
    out.push_back(a11(cfg));
    out.push_back(a12_commutator(cfg));
    out.push_back(a12_envelope(cfg));
    out.push_back(a13(cfg));
    out.push_back(a14());
    out.push_back(a15_perturbative(cfg));
    out.push_back(a15_oscillation(cfg));
    return out;
}

Table acceptance_table(const std::vector<CriterionResult>& results) {
    Table t;
    t.columns = {"measured", "target", "tolerance", "pass"};
    for (const auto& r : results) {
        t.row_tags.push_back(r.id);
        t.rows.push_back({r.measured, r.target, r.tolerance, r.pass ? 1.0 : 0.0});
    }
    return t;
}

std::string format_criterion_line(const CriterionResult& r) {
    std::ostringstream os;
    os << (r.pass ? "PASS " : "FAIL ") << r.id << ": " << r.description << " | measured "
       << format_double(r.measured) << " target " << format_double(r.target) << " tol "
       << format_double(r.tolerance);
    if (!r.detail.empty()) os << " | " << r.detail;
    return os.str();
}

}  // namespace cubicsense
