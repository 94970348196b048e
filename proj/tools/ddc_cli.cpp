// Command-line front end; all functionality lives behind the C API.

#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "ddc/ddc.h"

namespace {

struct CommonArgs {
    std::string config;
    std::string out;
    long long seed = -1;
    int workers = 0;
};

void add_common(CLI::App* sub, CommonArgs& args) {
    sub->add_option("--config", args.config, "configuration file")->required();
    sub->add_option("--out", args.out, "output directory (overrides the config)");
    sub->add_option("--seed", args.seed, "seed (overrides the config)");
    sub->add_option("--workers", args.workers, "parallel workers (overrides the config)");
}

int dispatch(ddc_status (*fn)(const char*, const char*, long long, int), const CommonArgs& args) {
    const ddc_status st =
        fn(args.config.c_str(), args.out.empty() ? nullptr : args.out.c_str(), args.seed, args.workers);
    if (st != DDC_OK) std::fprintf(stderr, "error: %s\n", ddc_last_error());
    return static_cast<int>(st);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"structure-preserving simulator for the doubly degenerate "
                 "chemotaxis-consumption system, with built-in estimate monitors"};
    app.require_subcommand(1);

    CommonArgs run_args, sweep_args, conv_args, ineq_args;
    CLI::App* run = app.add_subcommand("run", "execute one simulation");
    add_common(run, run_args);
    CLI::App* sweep = app.add_subcommand("sweep", "run an (m, alpha) parameter-plane sweep");
    add_common(sweep, sweep_args);
    CLI::App* conv = app.add_subcommand("converge", "epsilon and grid refinement studies");
    add_common(conv, conv_args);
    CLI::App* ineq = app.add_subcommand("ineq", "discrete functional-inequality suite");
    add_common(ineq, ineq_args);
    CLI::App* ref = app.add_subcommand("config-reference", "print the configuration key reference");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    if (ref->parsed()) {
        std::fputs(ddc_config_reference(), stdout);
        return 0;
    }
    if (run->parsed()) return dispatch(ddc_run, run_args);
    if (sweep->parsed()) return dispatch(ddc_sweep, sweep_args);
    if (conv->parsed()) return dispatch(ddc_converge, conv_args);
    if (ineq->parsed()) return dispatch(ddc_ineq, ineq_args);
    return 1;
}
