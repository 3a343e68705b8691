// plaplab: experiments on the indefinite sublinear p-Laplacian energy.
//
// Usage:
//   plaplab <solve|eigen|multistart|q0|sweep|deadcore|restricted|check>
//           --config <file> --out <dir> [--seed <n>] [--quiet]
//
// The config file declares the experiment; the subcommand must match it.
// Exit status: 0 all assertions held, 1 an assertion failed or a solve did
// not converge, 2 configuration or I/O error.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "plap/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for indefinite sublinear p-Laplacian "
                 "minimizers and eigenvalues"};
    app.require_subcommand(1);

    struct Args {
        std::string config;
        std::string out;
        long long seed = -1;
        bool quiet = false;
    };

    std::vector<std::pair<plap::ExperimentKind, CLI::App*>> subs;
    Args args;
    for (plap::ExperimentKind kind :
         {plap::ExperimentKind::Solve, plap::ExperimentKind::Eigen,
          plap::ExperimentKind::Multistart, plap::ExperimentKind::Q0,
          plap::ExperimentKind::Sweep, plap::ExperimentKind::Deadcore,
          plap::ExperimentKind::Restricted, plap::ExperimentKind::Check}) {
        CLI::App* sub = app.add_subcommand(plap::to_string(kind));
        sub->add_option("--config", args.config, "experiment config file")
            ->required();
        sub->add_option("--out", args.out, "output directory")->required();
        sub->add_option("--seed", args.seed, "override solver.seed");
        sub->add_flag("--quiet", args.quiet, "suppress progress output");
        subs.emplace_back(kind, sub);
    }

    CLI11_PARSE(app, argc, argv);

    plap::ExperimentKind requested = plap::ExperimentKind::Solve;
    for (const auto& [kind, sub] : subs)
        if (sub->parsed()) requested = kind;

    plap::ParseOutcome parsed = plap::parse_config_file(args.config);
    if (!parsed.ok()) {
        std::cerr << "config rejected (" << parsed.errors.size() << " violation"
                  << (parsed.errors.size() == 1 ? "" : "s") << "):\n";
        for (const std::string& e : parsed.errors) std::cerr << "  " << e << '\n';
        return 2;
    }
    plap::ExperimentConfig cfg = *parsed.config;
    if (cfg.experiment != requested) {
        std::cerr << "config declares experiment '" << plap::to_string(cfg.experiment)
                  << "' but the subcommand is '" << plap::to_string(requested)
                  << "'\n";
        return 2;
    }
    if (args.seed >= 0) cfg.solver.seed = static_cast<std::uint64_t>(args.seed);

    try {
        return plap::run_experiment(cfg, args.out, args.quiet);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
