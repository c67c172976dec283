#include <CLI11.hpp>

#include "cubicsense/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"cubicsense: phase-sensing sensitivity of cubic phase states"};
    app.require_subcommand(1);

    cubicsense::RunConfig cfg;
    std::string format = "csv";
    double n = 0, r = 0, s = 0, sigma = 0, gamma = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("-o,--output", cfg.output_path, "output file (default <outdir>/<cmd>.<fmt>)");
        sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--seed", cfg.seed, "seed recorded for sampling consumers");
        sub->add_option("--max-dim", cfg.max_dim, "truncation dimension cap");
        sub->add_option("--steps", cfg.steps, "Lindblad integrator steps per stage");
        sub->add_option("--threads", cfg.threads, "worker threads for grid fan-out (0 = auto)");
        sub->add_option("--tail-tol", cfg.tail_tol, "truncation tail tolerance");
    };

    CLI::App* fig1b = app.add_subcommand("fig1b", "sensitivity heatmap over (r, s)");
    fig1b->add_option("--r-max", cfg.fig1b_r_max, "cubicity range");
    fig1b->add_option("--s-max", cfg.fig1b_s_max, "squeezing range");
    fig1b->add_option("--resolution", cfg.fig1b_resolution, "grid points per axis");
    add_common(fig1b);

    CLI::App* fig2 = app.add_subcommand("fig2", "optimal parameters and scaling laws vs population");
    CLI::Option* fig2_n = fig2->add_option("--n", n, "single population instead of the default grid");
    fig2->add_option("--n-min", cfg.fig2_n_min, "population grid start");
    fig2->add_option("--n-max", cfg.fig2_n_max, "population grid end");
    fig2->add_option("--count", cfg.fig2_count, "population grid size");
    add_common(fig2);

    CLI::App* fig3b = app.add_subcommand("fig3b", "loss robustness at the n=0.2 operating point");
    fig3b->add_option("--gamma-max", cfg.fig3b_gamma_max, "largest loss rate");
    fig3b->add_option("--count", cfg.fig3b_count, "loss grid size");
    add_common(fig3b);

    CLI::App* fig3c = app.add_subcommand("fig3c", "detection-noise robustness at n=0.2");
    fig3c->add_option("--sigma-max", cfg.fig3c_sigma_max, "largest noise deviation");
    fig3c->add_option("--count", cfg.fig3c_count, "noise grid size");
    add_common(fig3c);

    for (const char* name : {"fig4", "sm_fig_rus", "sm_fig_kerr", "sm_fig_trisqueeze",
                             "sm_fig_displacement"})
        add_common(app.add_subcommand(name, std::string("data behind ") + name));

    CLI::App* point = app.add_subcommand("point", "single-state sensitivity record");
    CLI::Option* opt_r = point->add_option("--r", r, "cubicity")->required();
    CLI::Option* opt_s = point->add_option("--s", s, "squeezing strength")->required();
    CLI::Option* opt_sigma = point->add_option("--sigma", sigma, "detection-noise deviation");
    CLI::Option* opt_gamma = point->add_option("--gamma", gamma, "preparation loss rate");
    add_common(point);

    CLI::App* verify = app.add_subcommand("verify", "run the acceptance criteria");
    add_common(verify);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;  // configuration error
    }

    cfg.command = app.get_subcommands().front()->get_name();
    cfg.format = format == "json" ? cubicsense::OutputFormat::json : cubicsense::OutputFormat::csv;
    if (fig2_n->count()) cfg.n = n;
    if (opt_r->count()) cfg.r = r;
    if (opt_s->count()) cfg.s = s;
    if (opt_sigma->count()) cfg.sigma = sigma;
    if (opt_gamma->count()) cfg.gamma = gamma;

    return cubicsense::run(cfg);
}
