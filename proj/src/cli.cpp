#include "cubicsense/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <iostream>
#include <map>

#include "cubicsense/analytic.hpp"
#include "cubicsense/fock.hpp"
#include "cubicsense/moments.hpp"
#include "cubicsense/noise.hpp"
#include "cubicsense/parallel.hpp"
#include "cubicsense/protocols.hpp"
#include "cubicsense/verify.hpp"

namespace cubicsense {

namespace {

long dim_cap(const RunConfig& cfg, long fallback) {
    return cfg.max_dim > 0 ? cfg.max_dim : fallback;
}

const std::map<std::string, std::vector<std::string>>& schemas() {
    static const std::map<std::string, std::vector<std::string>> s = {
        {"fig1b", {"r", "s", "n", "f_q", "f_q_over_n", "s_opt_of_n"}},
        {"fig2",
         {"n", "s_opt", "r_opt_abs", "f_q_max", "f_q_max_over_n", "sqvac_f_q_over_n",
          "cubic_asymptote_f_q_over_n", "sqvac_asymptote_f_q_over_n", "s_opt_asymptote",
          "r_opt_asymptote", "stationarity_residual"}},
        {"fig3b",
         {"gamma_t", "n", "f_q", "f_q_over_n", "f_q_over_n_ratio", "xi2_inv_1", "xi2_inv_2",
          "xi2_inv_3", "xi2_inv_4", "dim_used", "truncation_tail"}},
        {"fig3c",
         {"sigma", "n", "xi2_inv_1", "xi2_inv_2", "xi2_inv_3", "xi2_inv_4", "xi2_inv_3_ratio",
          "xi2_inv_4_ratio", "dim_used", "truncation_tail"}},
        {"fig4",
         {"n", "r", "s", "lambda", "kerr_time", "triplicity", "f_q", "f_q_over_n", "dim_used",
          "truncation_tail"}},
        {"sm_fig_rus", {"n_iter", "n", "r", "s", "f_q", "f_q_over_n"}},
        {"sm_fig_kerr", {"lambda", "r", "s", "n", "f_q", "f_q_over_n", "dim_used", "truncation_tail"}},
        {"sm_fig_trisqueeze", {"t", "dim_used", "n", "f_q", "f_q_over_n", "truncation_tail"}},
        {"sm_fig_displacement",
         {"r", "s", "n", "displacement_f_q", "displacement_f_q_over_n", "sqvac_equal_n_f_q"}},
        {"point",
         {"n", "r", "s", "f_q", "f_q_over_n", "xi2_inv_1", "xi2_inv_2", "xi2_inv_3", "xi2_inv_4",
          "gamma_t", "sigma", "dim_used", "truncation_tail"}},
        {"verify", {"measured", "target", "tolerance", "pass"}},
    };
    return s;
}

// Tag column per command; empty means a purely numeric table.
std::string tag_column(const std::string& command) {
    if (command == "fig4") return "protocol";
    if (command == "point") return "protocol";
    if (command == "verify") return "criterion";
    return {};
}

std::vector<double> linspace(double lo, double hi, int count) {
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i)
        out[i] = count > 1 ? lo + (hi - lo) * i / (count - 1) : lo;
    return out;
}

std::vector<double> logspace(double lo, double hi, int count) {
    std::vector<double> out(count);
    const double l0 = std::log(lo), l1 = std::log(hi);
    for (int i = 0; i < count; ++i)
        out[i] = std::exp(count > 1 ? l0 + (l1 - l0) * i / (count - 1) : l0);
    return out;
}

Table fig1b_table(const RunConfig& cfg) {
    Table t;
    t.columns = schemas().at("fig1b");
    const auto rs = linspace(0, cfg.fig1b_r_max, cfg.fig1b_resolution);
    const auto ss = linspace(0, cfg.fig1b_s_max, cfg.fig1b_resolution);
    for (const double r : rs)
        for (const double s : ss) {
            const double n = population(r, s);
            const double fq = qfi_rs(r, s);
            // s_opt at this row's population: the dashed optimal-squeezing
            // trace is the locus s == s_opt_of_n.
            const double sopt = n > 0 ? optimal_squeezing(n).s_opt : 0.0;
            t.rows.push_back({r, s, n, fq, n > 0 ? fq / n : 0.0, sopt});
        }
    return t;
}

Table fig2_table(const RunConfig& cfg) {
    Table t;
    t.columns = schemas().at("fig2");
    std::vector<double> ns;
    if (cfg.n)
        ns.push_back(*cfg.n);
    else
        ns = logspace(cfg.fig2_n_min, cfg.fig2_n_max, cfg.fig2_count);
    const auto asym = asymptotic_optimal<double>();
    for (const double n : ns) {
        const auto opt = optimal_squeezing(n);
        t.rows.push_back({n, opt.s_opt, opt.r_opt_abs, opt.f_q_max, opt.f_q_max / n,
                          squeezed_vacuum_qfi(n) / n, 128.0 / 3.0 * n, 8.0 * n, asym.s_inf,
                          asym.r_coeff * std::sqrt(n), opt.stationarity_residual});
    }
    return t;
}

Table fig3b_table(const RunConfig& cfg) {
    Table t;
    t.columns = schemas().at("fig3b");
    const double n_op = 0.2;
    const auto opt = optimal_squeezing(n_op);
    const CubicParams<double> params{opt.r_opt_abs, opt.s_opt, n_op};
    const double ideal = opt.f_q_max / n_op;
    const Index dim = std::min<Index>(dim_cap(cfg, 256), 60);
    const auto gammas = linspace(0, cfg.fig3b_gamma_max, cfg.fig3b_count);
    const auto set3 = build_observable_set<double>(3, dim);
    const auto set4 = build_observable_set<double>(4, dim);
    const Ladderd ladder = make_ladder<double>(dim);
    std::vector<std::vector<std::optional<double>>> rows(gammas.size());
    parallel_for(
        gammas.size(),
        [&](std::size_t i) {
            LossConfigd loss;
            loss.gamma = gammas[i];
            loss.steps = cfg.steps;
            const auto res = lossy_cubic_state(params, loss, dim);
            const double n = expectation(res.rho, ladder.n).real();
            const double fq = mixed_qfi(res.rho, ladder.n);
            const auto md3 = numeric_moments(res.rho, set3);
            const auto md4 = numeric_moments(res.rho, set4);
            const auto md1 = MomentData<double>{md3.gamma.topLeftCorner(1, 1),
                                                md3.c_vec.head(1), 1, MomentSource::numeric};
            const auto md2 = MomentData<double>{md3.gamma.topLeftCorner(2, 2),
                                                md3.c_vec.head(2), 2, MomentSource::numeric};
            const double tail = res.rho.matrix.diagonal().real().tail(5).sum();
            rows[i] = {gammas[i],
                       n,
                       fq,
                       fq / n,
                       (fq / n) / ideal,
                       chi2_inv(md1).chi2_inv / n,
                       chi2_inv(md2).chi2_inv / n,
                       chi2_inv(md3).chi2_inv / n,
                       chi2_inv(md4).chi2_inv / n,
                       double(dim),
                       tail};
        },
        cfg.threads);
    t.rows = std::move(rows);
    return t;
}

Table fig3c_table(const RunConfig& cfg) {
    Table t;
    t.columns = schemas().at("fig3c");
    const double n_op = 0.2;
    const auto opt = optimal_squeezing(n_op);
    const auto [state, dim] = converged_cubic_state(
        opt.r_opt_abs, opt.s_opt, DimensionPolicy{64, dim_cap(cfg, 256), cfg.tail_tol});
    const QuadratureMomentCache<double> cache3(state, 3, dim);
    const QuadratureMomentCache<double> cache4(state, 4, dim);
    const double n = number_moments(state).mean;
    const double ideal3 = chi2_inv(cache3.assemble(0)).chi2_inv;
    const double ideal4 = chi2_inv(cache4.assemble(0)).chi2_inv;
    for (const double sigma : linspace(0, cfg.fig3c_sigma_max, cfg.fig3c_count)) {
        const auto md3 = cache3.assemble(sigma);
        const auto md4 = cache4.assemble(sigma);
        const auto md1 = MomentData<double>{md3.gamma.topLeftCorner(2, 2), md3.c_vec.head(2), 1,
                                            MomentSource::numeric};
        const auto md2 = MomentData<double>{md3.gamma.topLeftCorner(5, 5), md3.c_vec.head(5), 2,
                                            MomentSource::numeric};
        const double c3 = chi2_inv(md3).chi2_inv;
        const double c4 = chi2_inv(md4).chi2_inv;
        t.rows.push_back({sigma, n, chi2_inv(md1).chi2_inv / n, chi2_inv(md2).chi2_inv / n, c3 / n,
                          c4 / n, c3 / ideal3, c4 / ideal4, double(dim),
                          double(state.tail_mass())});
    }
    return t;
}

void append_report_rows(Table& t, const std::vector<SensitivityReport>& rows) {
    for (const auto& p : rows) {
        t.row_tags.push_back(p.protocol);
        t.rows.push_back({p.n, p.r, p.s, p.lambda, p.kerr_time, p.triplicity, p.f_q, p.f_q_over_n,
                          double(p.dim_used), p.truncation_tail});
    }
}

Table fig4_table(const RunConfig& cfg) {
    Table t;
    t.columns = schemas().at("fig4");
    ScanGrid grid = ScanGrid::defaults();
    grid.tail_tol = cfg.tail_tol;
    append_report_rows(t, protocol_scan(Protocol::ideal, grid));
    append_report_rows(t, protocol_scan(Protocol::squeezed_vacuum, grid));
    for (int n_iter = 1; n_iter <= 5; ++n_iter)
        append_report_rows(t, protocol_scan(Protocol::rus, grid, n_iter));
    append_report_rows(t, protocol_scan(Protocol::kerr, grid));
    append_report_rows(t, protocol_scan(Protocol::kerr_plain, grid));
    return t;
}

Table sm_fig_rus_table(const RunConfig&) {
    Table t;
    t.columns = schemas().at("sm_fig_rus");
    const ScanGrid grid = ScanGrid::defaults();
    for (int n_iter = 1; n_iter <= 5; ++n_iter)
        for (const auto& p : protocol_scan(Protocol::rus, grid, n_iter))
            t.rows.push_back({double(n_iter), p.n, p.r, p.s, p.f_q, p.f_q_over_n});
    return t;
}

Table sm_fig_kerr_table(const RunConfig& cfg) {
    Table t;
    t.columns = schemas().at("sm_fig_kerr");
    ScanGrid grid = ScanGrid::defaults();
    grid.tail_tol = cfg.tail_tol;
    const Index dim = grid.kerr_dim;
    const Ladderd ladder = make_ladder<double>(dim);
    for (const double lambda : grid.lambda_values) {
        KerrParamsd p;
        p.lambda = lambda;
        p.alpha = lambda * lambda * lambda;
        const HermitianGate<double> gate(kerr_effective_generator(p, dim));
        for (const double s : grid.kerr_s_values) {
            const FockStated seed = squeezed_vacuum_amplitudes(s, dim);
            for (const double r : grid.kerr_r_values) {
                KerrParamsd q = p;
                q.r = r;
                FockStated st = gate.apply(seed, -q.tau());
                st.normalized_in_place();
                const double tail = st.tail_mass();
                if (tail > grid.tail_tol) continue;
                const auto nm = number_moments(st);
                if (!(nm.mean > 1e-9)) continue;
                t.rows.push_back({lambda, r, s, nm.mean, nm.qfi(), nm.qfi() / nm.mean, double(dim),
                                  tail});
            }
        }
    }
    (void)ladder;
    return t;
}

Table sm_fig_trisqueeze_table(const RunConfig&) {
    Table t;
    t.columns = schemas().at("sm_fig_trisqueeze");
    const ScanGrid grid = ScanGrid::defaults();
    for (const auto& p : protocol_scan(Protocol::trisqueeze, grid))
        t.rows.push_back({p.triplicity, double(p.dim_used), p.n, p.f_q, p.f_q_over_n,
                          p.truncation_tail});
    return t;
}

Table sm_fig_displacement_table(const RunConfig&) {
    Table t;
    t.columns = schemas().at("sm_fig_displacement");
    for (const double r : linspace(0, 0.3, 7))
        for (const double s : linspace(0, 1.0, 51)) {
            const double n = population(r, s);
            const double d = displacement_qfi(r, s);
            const double s_eq = std::asinh(std::sqrt(n));
            t.rows.push_back({r, s, n, d, n > 0 ? d / n : 0.0, 2 * std::exp(2 * s_eq)});
        }
    return t;
}

Table point_table(const RunConfig& cfg) {
    if (!cfg.r || !cfg.s) throw ConfigError("point needs --r and --s");
    Table t;
    t.columns = schemas().at("point");
    const double r = *cfg.r, s = *cfg.s;
    const double n = population(r, s);
    SensitivityReport row;
    row.protocol = "cubic";
    row.n = n;
    row.r = r;
    row.s = s;
    row.f_q = qfi_rs(r, s);
    row.f_q_over_n = n > 0 ? row.f_q / n : 0.0;

    if (cfg.gamma) {
        const Index dim = std::min<Index>(dim_cap(cfg, 256), 60);
        LossConfigd loss;
        loss.gamma = *cfg.gamma;
        loss.steps = cfg.steps;
        const auto res = lossy_cubic_state(CubicParams<double>{r, s, n}, loss, dim);
        const Ladderd ladder = make_ladder<double>(dim);
        row.protocol = "cubic_lossy";
        row.n = expectation(res.rho, ladder.n).real();
        row.f_q = mixed_qfi(res.rho, ladder.n);
        row.f_q_over_n = row.n > 0 ? row.f_q / row.n : 0.0;
        row.gamma_t = *cfg.gamma;
        row.dim_used = dim;
        row.truncation_tail = res.rho.matrix.diagonal().real().tail(5).sum();
        DetectionNoised noise{cfg.sigma.value_or(0.0)};
        row.xi2_inv_1 = noisy_xi2_inv(res.rho, 1, noise, dim);
        row.xi2_inv_2 = noisy_xi2_inv(res.rho, 2, noise, dim);
        row.xi2_inv_3 = noisy_xi2_inv(res.rho, 3, noise, dim);
        row.xi2_inv_4 = noisy_xi2_inv(res.rho, 4, noise, dim);
        if (cfg.sigma) row.sigma = *cfg.sigma;
    } else if (cfg.sigma) {
        const auto [state, dim] =
            converged_cubic_state(r, s, DimensionPolicy{64, dim_cap(cfg, 256), cfg.tail_tol});
        DetectionNoised noise{*cfg.sigma};
        row.sigma = *cfg.sigma;
        row.dim_used = dim;
        row.truncation_tail = state.tail_mass();
        row.xi2_inv_1 = noisy_xi2_inv(state, 1, noise, dim);
        row.xi2_inv_2 = noisy_xi2_inv(state, 2, noise, dim);
        row.xi2_inv_3 = noisy_xi2_inv(state, 3, noise, dim);
        row.xi2_inv_4 = noisy_xi2_inv(state, 4, noise, dim);
    } else if (n > 0) {
        row.xi2_inv_1 = xi2_inv(r, s, 1);
        row.xi2_inv_2 = xi2_inv(r, s, 2);
        row.xi2_inv_3 = xi2_inv(r, s, 3);
        row.xi2_inv_4 = xi2_inv(r, s, 4);
    }
    t.row_tags.push_back(row.protocol);
    t.rows.push_back({row.n, row.r, row.s, row.f_q, row.f_q_over_n, row.xi2_inv_1, row.xi2_inv_2,
                      row.xi2_inv_3, row.xi2_inv_4, row.gamma_t, row.sigma, double(row.dim_used),
                      row.truncation_tail});
    return t;
}

Table verify_table_from_cfg(const RunConfig& cfg, bool* all_pass) {
    VerifyConfig vc;
    vc.max_dim = std::max<long>(dim_cap(cfg, VerifyConfig{}.max_dim), 1);
    vc.loss_steps = std::max(cfg.steps, 100);
    vc.tail_tol = cfg.tail_tol;
    vc.threads = cfg.threads;
    const auto results = run_acceptance(vc);
    bool ok = true;
    for (const auto& r : results) {
        std::cout << format_criterion_line(r) << "\n";
        ok = ok && r.pass;
    }
    std::cout << (ok ? "all criteria passed" : "some criteria FAILED") << std::endl;
    if (all_pass) *all_pass = ok;
    return acceptance_table(results);
}

}  // namespace

const std::vector<std::string>& known_commands() {
    static const std::vector<std::string> cmds = {
        "fig1b", "fig2",        "fig3b",           "fig3c",
        "fig4",  "sm_fig_rus",  "sm_fig_kerr",     "sm_fig_trisqueeze",
        "point", "verify",      "sm_fig_displacement"};
    return cmds;
}

std::vector<std::string> command_schema(const std::string& command) {
    const auto it = schemas().find(command);
    if (it == schemas().end()) throw ConfigError("unknown command " + command);
    std::vector<std::string> cols;
    const std::string tag = tag_column(command);
    if (!tag.empty()) cols.push_back(tag);
    cols.insert(cols.end(), it->second.begin(), it->second.end());
    return cols;
}

std::string default_output_dir() {
    if (const char* env = std::getenv("CUBICSENSE_OUTDIR")) return env;
    return ".";
}

Table build_command_table(const RunConfig& cfg) {
    if (cfg.command == "fig1b") return fig1b_table(cfg);
    if (cfg.command == "fig2") return fig2_table(cfg);
    if (cfg.command == "fig3b") return fig3b_table(cfg);
    if (cfg.command == "fig3c") return fig3c_table(cfg);
    if (cfg.command == "fig4") return fig4_table(cfg);
    if (cfg.command == "sm_fig_rus") return sm_fig_rus_table(cfg);
    if (cfg.command == "sm_fig_kerr") return sm_fig_kerr_table(cfg);
    if (cfg.command == "sm_fig_trisqueeze") return sm_fig_trisqueeze_table(cfg);
    if (cfg.command == "sm_fig_displacement") return sm_fig_displacement_table(cfg);
    if (cfg.command == "point") return point_table(cfg);
    throw ConfigError("unknown command " + cfg.command);
}

int run(const RunConfig& cfg) {
    try {
        bool verify_ok = true;
        Table t;
        if (cfg.command == "verify")
            t = verify_table_from_cfg(cfg, &verify_ok);
        else
            t = build_command_table(cfg);

        std::string path = cfg.output_path;
        if (path.empty())
            path = default_output_dir() + "/" + cfg.command +
                   (cfg.format == OutputFormat::csv ? ".csv" : ".json");
        const std::string tag = tag_column(cfg.command);
        write_text_file(path, cfg.format == OutputFormat::csv ? table_to_csv(t, tag)
                                                              : table_to_json(t, tag));
        std::cout << "wrote " << path << " (" << t.rows.size() << " rows)" << std::endl;
        if (cfg.command == "verify" && !verify_ok) return 1;
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << std::endl;
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
}

}  // namespace cubicsense
