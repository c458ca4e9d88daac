#include <string>

#include <CLI11.hpp>

#include "warpscat/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"scattering pipeline for two-ended warped-product geometries"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    bool svg = false;

    for (const char* name : {"profile", "channels", "scatter", "propagate", "distance",
                             "stability"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "run configuration file")->required();
        sub->add_option("--out", out_override, "output directory (overrides config)");
        sub->add_flag("--svg", svg, "also write SVG charts");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    return warpscat::cli::run_command(app.get_subcommands().front()->get_name(),
                                      config_path, out_override, svg);
}
