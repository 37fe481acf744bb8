#include <CLI11.hpp>

#include "rwre/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Laboratory for one-dimensional random walks in random environment"};
    app.require_subcommand(1);

    std::string config_path;
    rwre::cli::CommonOptions opt;
    std::uint64_t seed = 0;
    unsigned workers = 0;
    bool seed_set = false, workers_set = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file")->required();
        sub->add_option("--out", opt.out, "output directory (default: out)");
        sub->add_option("--seed", seed, "override the config's master seed")
            ->each([&](const std::string&) { seed_set = true; });
        sub->add_option("--workers", workers, "override the config's worker count")
            ->each([&](const std::string&) { workers_set = true; });
    };

    CLI::App* sim = app.add_subcommand("simulate", "run one quenched walk");
    CLI::App* val = app.add_subcommand("valley", "locate the basic valley");
    CLI::App* ver = app.add_subcommand("verify", "closed form vs oracle tables");
    CLI::App* exp = app.add_subcommand("experiment", "seeded Monte Carlo campaigns");
    for (CLI::App* sub : {sim, val, ver, exp}) add_common(sub);

    CLI11_PARSE(app, argc, argv);

    if (seed_set) opt.seed_override = seed;
    if (workers_set) opt.workers_override = workers;

    std::string command;
    for (CLI::App* sub : {sim, val, ver, exp})
        if (sub->parsed()) command = sub->get_name();

    return rwre::cli::run(command, config_path, opt);
}
