#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "wedge/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"transonic shock past a perturbed wedge"};
    app.require_subcommand(1);
    std::string config_path, out_dir;
    for (const char* name : {"polar", "solve", "verify", "sweep"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON configuration file")->required();
        sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
    }
    app.get_subcommand("polar")->description("shock polar sweep and roots for the configured wedge");
    app.get_subcommand("solve")->description("fixed-point solve; writes fields, shock and diagnostics");
    app.get_subcommand("verify")->description("diagnose a saved run (or solve first) and apply the thresholds");
    app.get_subcommand("sweep")->description("one solve per (amplitude, branch, grid) of the sweep section");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : wedge::exit_validation;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    wedge::RunConfig cfg;
    try {
        cfg = wedge::load_config(config_path);
    } catch (const wedge::Error& e) {
        std::cerr << "error [" << wedge::to_string(e.kind()) << "]: " << e.what() << '\n';
        return wedge::exit_code_for(e.kind());
    }
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    return wedge::run_command(command, cfg, std::cout, std::cerr);
}
