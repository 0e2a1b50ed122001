#include <iostream>

#include <CLI11.hpp>

#include "blochframes/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Bloch bands, Berry curvature, Chern numbers and smooth equivariant frames"};
    std::string command;
    std::string config;
    std::string out;
    int workers = 1;
    app.add_option("command", command, "bands | gap | curvature | chern | symmetry | frame | intertwiner | wannier | kramers")
        ->required();
    app.add_option("--config", config, "JSON run configuration")->required()->check(CLI::ExistingFile);
    app.add_option("--out", out, "output directory (overrides the config's \"output\")");
    app.add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }
    blochframes::cli::RunOptions opts;
    opts.command = command;
    opts.config_path = config;
    if (!out.empty()) opts.out_dir = out;
    opts.workers = workers;
    return blochframes::cli::run(opts, std::cerr);
}
