// carnotlab <subcommand> --config <file> [--out <dir>] [--seed <u64>] [--threads <n>]

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "carnot/harness.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Step-2 Carnot group experiments"};
    app.set_version_flag("--version", carnot::version());
    app.require_subcommand(1, 1);

    carnot::RunRequest req;
    std::uint64_t seed = 0;
    int threads = 0;
    std::string out;
    for (const std::string& name : carnot::subcommands()) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", req.config_path, "experiment config file")->required();
        sub->add_option("--out", out, "output directory (overrides output.dir)");
        sub->add_option("--seed", seed, "global seed (overrides seed)");
        sub->add_option("--threads", threads, "OpenMP thread count")->check(CLI::PositiveNumber);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : carnot::kExitInput;
    }
    CLI::App* sub = app.get_subcommands().front();
    req.subcommand = sub->get_name();
    if (sub->count("--out")) req.out_dir = out;
    if (sub->count("--seed")) req.seed = seed;
    if (sub->count("--threads")) req.threads = threads;
    return carnot::run(req, std::cerr);
}
