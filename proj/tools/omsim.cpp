#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "omsim/app.hpp"

int main(int argc, char** argv) {
    omsim::AppOptions opt;
    double dt = 0.0;

    CLI::App cli{"Two-cavity optomechanical memory and transduction simulator"};
    cli.add_option("subcommand", opt.subcommand, "spectrum | stability | memory | transduce | scan | verify")
        ->required();
    cli.add_option("--config", opt.config_path, "run configuration file")->required();
    cli.add_option("--out", opt.out_dir, "output directory")->capture_default_str();
    auto* dt_opt = cli.add_option("--dt", dt, "envelope integration step in seconds (overrides dt_s)");
    cli.add_option("--override", opt.overrides, "key=value, repeatable");
    cli.add_flag("--plot-data", opt.plot_data, "also write downsampled series for plotting");

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return cli.exit(e);
        std::cerr << "error kind=config exit=" << omsim::exit_config << " message=\"" << e.what() << "\"\n";
        return omsim::exit_config;
    }
    if (dt_opt->count() > 0) opt.dt = dt;
    return omsim::run_app(opt, std::cout, std::cerr);
}
