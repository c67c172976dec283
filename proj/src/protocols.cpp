#include "cubicsense/protocols.hpp"

#include <algorithm>
#include <cmath>

#include "cubicsense/parallel.hpp"

namespace cubicsense {

namespace {

std::vector<double> linspace(double lo, double hi, int count) {
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i)
        out[i] = count > 1 ? lo + (hi - lo) * i / (count - 1) : lo;
    return out;
}

std::vector<double> logspace(double lo, double hi, int count) {
    std::vector<double> out(count);
    const double llo = std::log(lo), lhi = std::log(hi);
    for (int i = 0; i < count; ++i)
        out[i] = std::exp(count > 1 ? llo + (lhi - llo) * i / (count - 1) : llo);
    return out;
}

// Squeezed-vacuum amplitudes decay like tanh(s)^(2m); this covers the mass
// tail plus the cubic-polynomial spread of N iterations.
Index rus_scan_dim(double s, int n_iter) {
    const double t = std::tanh(s);
    if (t < 0.2) return 96;
    const double needed = -23.0 / std::log(t) + 15.0 * n_iter + 80.0;
    return Index(std::min(1400.0, std::max(96.0, needed)));
}

SensitivityReport make_row(const std::string& protocol, double n, double fq) {
    SensitivityReport row;
    row.protocol = protocol;
    row.n = n;
    row.f_q = fq;
    row.f_q_over_n = n > 0 ? fq / n : 0;
    return row;
}

}  // namespace

ScanGrid ScanGrid::defaults() {
    ScanGrid g;
    g.s_values = linspace(0.0, 2.0, 81);
    // log-refined cubicity sweep over the same range: near the strongly
    // squeezed edge the rewarding cubicities sit at r ~ 1e-3 and a linear
    // grid misses them entirely
    g.r_values = logspace(1e-4, 0.4, 80);
    g.r_values.insert(g.r_values.begin(), 0.0);
    g.kerr_s_values = linspace(0.0, 0.48, 13);
    g.kerr_r_values = linspace(0.0, 0.5, 26);
    g.t_values = linspace(0.0, 1.9, 77);
    return g;
}

std::vector<SensitivityReport> bin_envelope(const std::vector<SensitivityReport>& points,
                                            int n_bins, double n_min, double n_max) {
    std::vector<SensitivityReport> best(n_bins);
    std::vector<bool> used(n_bins, false);
    const double lmin = std::log(n_min), lmax = std::log(n_max);
    for (const auto& p : points) {
        if (!(p.n > 0) || p.n < n_min || p.n > n_max) continue;
        int bin = int((std::log(p.n) - lmin) / (lmax - lmin) * n_bins);
        bin = std::clamp(bin, 0, n_bins - 1);
        if (!used[bin] || p.f_q_over_n > best[bin].f_q_over_n) {
            best[bin] = p;
            used[bin] = true;
        }
    }
    std::vector<SensitivityReport> out;
    for (int b = 0; b < n_bins; ++b)
        if (used[b]) out.push_back(best[b]);
    std::sort(out.begin(), out.end(),
              [](const SensitivityReport& a, const SensitivityReport& b) { return a.n < b.n; });
    return out;
}

namespace {

std::vector<SensitivityReport> scan_ideal(const ScanGrid& grid) {
    const auto ns = logspace(grid.n_min, grid.n_max, grid.n_bins);
    std::vector<SensitivityReport> rows(ns.size());
    for (std::size_t i = 0; i < ns.size(); ++i) {
        const auto opt = optimal_squeezing(ns[i]);
        auto row = make_row("ideal", ns[i], opt.f_q_max);
        row.r = opt.r_opt_abs;
        row.s = opt.s_opt;
        rows[i] = row;
    }
    return rows;
}

std::vector<SensitivityReport> scan_squeezed_vacuum(const ScanGrid& grid) {
    const auto ns = logspace(grid.n_min, grid.n_max, grid.n_bins);
    std::vector<SensitivityReport> rows;
    rows.reserve(ns.size());
    for (const double n : ns) {
        auto row = make_row("squeezed_vacuum", n, squeezed_vacuum_qfi(n));
        row.r = 0.0;
        row.s = std::asinh(std::sqrt(n));
        rows.push_back(row);
    }
    return rows;
}

// Numeric path throughout: the closed forms for larger N lose all precision
// to cancellation once e^{6s} factors grow, while the normalized state is
// well-conditioned at any grid point.
std::vector<SensitivityReport> scan_rus(const ScanGrid& grid, int n_iter) {
    std::vector<SensitivityReport> pts;
    pts.reserve(grid.s_values.size() * grid.r_values.size());
    const std::string name = protocol_name(Protocol::rus, n_iter);
    for (const double s : grid.s_values) {
        const Index dim = rus_scan_dim(s, n_iter);
        const auto x = detail::sparse_ladder_x<double>(dim);
        const Eigen::SparseMatrix<std::complex<double>> x3 = (x * x * x).pruned();
        const FockStated seed = squeezed_vacuum_amplitudes(s, dim);
        for (const double r : grid.r_values) {
            FockStated psi = seed;
            const std::complex<double> coeff(0, r / n_iter);
            for (int it = 0; it < n_iter; ++it)
                psi.amplitudes += coeff * (x3 * psi.amplitudes).eval();
            psi.normalized_in_place();
            const double tail = psi.tail_mass();
            if (tail > grid.tail_tol) continue;
            const auto nm = number_moments(psi);
            if (!(nm.mean > 0)) continue;
            auto row = make_row(name, nm.mean, nm.qfi());
            row.r = r;
            row.s = s;
            row.dim_used = dim;
            row.truncation_tail = tail;
            pts.push_back(row);
        }
    }
    return bin_envelope(pts, grid.n_bins, grid.n_min, grid.n_max);
}

std::vector<SensitivityReport> scan_kerr(const ScanGrid& grid, unsigned threads) {
    const Index dim = grid.kerr_dim;
    std::vector<std::vector<SensitivityReport>> per_lambda(grid.lambda_values.size());
    parallel_for(
        grid.lambda_values.size(),
        [&](std::size_t li) {
            const double lambda = grid.lambda_values[li];
            KerrParamsd p;
            p.lambda = lambda;
            p.alpha = lambda * lambda * lambda;
            p.r = 1;  // tau carries r; the generator itself is r-independent
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
                    const double n = nm.mean;
                    if (!(n > 1e-9)) continue;
                    auto row = make_row("kerr", n, nm.qfi());
                    row.r = r;
                    row.s = s;
                    row.lambda = lambda;
                    row.dim_used = dim;
                    row.truncation_tail = tail;
                    per_lambda[li].push_back(row);
                }
            }
        },
        threads);
    std::vector<SensitivityReport> pts;
    for (auto& v : per_lambda) pts.insert(pts.end(), v.begin(), v.end());
    return bin_envelope(pts, grid.n_bins, grid.n_min, grid.n_max);
}

std::vector<SensitivityReport> scan_kerr_plain(const ScanGrid& grid, unsigned threads) {
    const Index dim = grid.kerr_plain_dim;
    const FockStated vac = vacuum_state<double>(dim);
    struct Combo {
        double delta, drive, kerr;
    };
    std::vector<Combo> combos;
    for (const double dk : grid.delta_over_k)
        for (const double drive : grid.drive_values)
            for (const double kerr : grid.kerr_values)
                combos.push_back({dk * kerr, drive, kerr});
    std::vector<std::vector<SensitivityReport>> per_combo(combos.size());
    parallel_for(
        combos.size(),
        [&](std::size_t ci) {
            const auto& c = combos[ci];
            const HermitianGate<double> gate(
                kerr_plain_generator(c.delta, c.drive, c.kerr, dim));
            for (const double t : grid.time_values) {
                FockStated st = gate.apply(vac, -t);
                const double tail = st.tail_mass();
                if (tail > grid.tail_tol) continue;
                const auto nm = number_moments(st);
                const double n = nm.mean;
                if (!(n > 1e-9)) continue;
                auto row = make_row("kerr_plain", n, nm.qfi());
                row.kerr_time = t;
                row.dim_used = dim;
                row.truncation_tail = tail;
                per_combo[ci].push_back(row);
            }
        },
        threads);
    std::vector<SensitivityReport> pts;
    for (auto& v : per_combo) pts.insert(pts.end(), v.begin(), v.end());
    return bin_envelope(pts, grid.n_bins, grid.n_min, grid.n_max);
}

// Raw curves per truncation dimension, SM-figure style: the populations are
// cutoff-dominated for larger t, so the cutoff family is the honest output.
std::vector<SensitivityReport> scan_trisqueeze(const ScanGrid& grid, unsigned threads) {
    std::vector<std::vector<SensitivityReport>> per_dim(grid.trisqueeze_dims.size());
    parallel_for(
        grid.trisqueeze_dims.size(),
        [&](std::size_t di) {
            const Index dim = grid.trisqueeze_dims[di];
            const HermitianGate<double> gate(trisqueeze_generator<double>({1.0, 0.0}, dim));
            const FockStated vac = vacuum_state<double>(dim);
            for (const double t : grid.t_values) {
                FockStated st = gate.apply(vac, t);
                const auto nm = number_moments(st);
                const double n = nm.mean;
                auto row = make_row("trisqueeze", n, n > 0 ? nm.qfi() : 0.0);
                row.triplicity = t;
                row.dim_used = dim;
                row.truncation_tail = st.tail_mass();
                per_dim[di].push_back(row);
            }
        },
        threads);
    std::vector<SensitivityReport> out;
    for (auto& v : per_dim) out.insert(out.end(), v.begin(), v.end());
    return out;
}

}  // namespace

std::vector<SensitivityReport> protocol_scan(Protocol protocol, const ScanGrid& grid,
                                             int rus_iterations) {
    const bool needs_rs = protocol == Protocol::rus;
    if (needs_rs && (grid.s_values.empty() || grid.r_values.empty()))
        throw ContractError("empty scan grid");
    if (protocol == Protocol::kerr &&
        (grid.kerr_s_values.empty() || grid.kerr_r_values.empty() || grid.lambda_values.empty()))
        throw ContractError("empty scan grid");
    if (protocol == Protocol::trisqueeze && (grid.t_values.empty() || grid.trisqueeze_dims.empty()))
        throw ContractError("empty scan grid");
    switch (protocol) {
        case Protocol::ideal: return scan_ideal(grid);
        case Protocol::squeezed_vacuum: return scan_squeezed_vacuum(grid);
        case Protocol::rus: return scan_rus(grid, rus_iterations);
        case Protocol::kerr: return scan_kerr(grid, 0);
        case Protocol::kerr_plain: return scan_kerr_plain(grid, 0);
        case Protocol::trisqueeze: return scan_trisqueeze(grid, 0);
    }
    throw ContractError("unknown protocol");
}

}  // namespace cubicsense
