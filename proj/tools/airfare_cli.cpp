#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <string>

#include "airfare/run.hpp"

int main(int argc, char** argv) {
    CLI::App app{"airfare: fare-quote ingestion, holiday features and "
                 "fixed-effects estimation"};
    app.require_subcommand(1);

    std::string config_path;
    std::string granularity;
    std::string depvar;
    std::string format_name;
    std::string output_dir;
    double demean_tol = 0.0;
    std::uint64_t seed = 0;
    bool robust = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "configuration file (JSON)");
        cmd->add_flag("--robust-se", robust,
                      "heteroskedasticity-robust standard errors");
        cmd->add_option("--granularity", granularity,
                        "period granularity for the absorbed time dimensions")
            ->check(CLI::IsMember({"day", "month"}));
        cmd->add_option("--depvar", depvar, "dependent-variable transform")
            ->check(CLI::IsMember({"raw", "log100"}));
        cmd->add_option("--format", format_name, "table output format")
            ->check(CLI::IsMember({"text", "delim", "markup"}));
        cmd->add_option("--seed", seed, "random seed for synthetic generation");
        cmd->add_option("--demean-tol", demean_tol,
                        "demeaning convergence tolerance (scaled)");
        cmd->add_option("--output-dir", output_dir, "directory for result files");
        return cmd;
    };

    CLI::App* ingest = add_common(
        app.add_subcommand("ingest", "parse quotes and apply sample selection"));
    CLI::App* fit = add_common(
        app.add_subcommand("fit", "estimate the configured models and render tables"));
    CLI::App* synth = add_common(
        app.add_subcommand("synth", "generate a synthetic panel with known truth"));
    CLI::App* check = add_common(
        app.add_subcommand("check", "run estimator self-checks on bundled fixtures"));

    CLI11_PARSE(app, argc, argv);

    try {
        airfare::RunConfig config = config_path.empty()
                                        ? airfare::RunConfig{}
                                        : airfare::RunConfig::load(config_path);
        CLI::App* active = app.get_subcommands().front();
        if (active->count("--robust-se")) {
            config.robust_se = robust;
        }
        if (active->count("--granularity")) {
            for (auto& spec : config.specs) {
                spec.granularity = airfare::parse_granularity(granularity);
            }
        }
        if (active->count("--depvar")) {
            for (auto& spec : config.specs) {
                spec.depvar = airfare::parse_depvar(depvar);
            }
        }
        if (active->count("--format")) {
            config.format = airfare::parse_format(format_name);
        }
        if (active->count("--seed")) {
            config.dgp.seed = seed;
        }
        if (active->count("--demean-tol")) {
            config.demean_tol = demean_tol;
        }
        if (active->count("--output-dir")) {
            config.output_dir = output_dir;
        }

        if (active == ingest) return airfare::run_ingest(config, std::cerr);
        if (active == fit) return airfare::run_fit(config, std::cerr);
        if (active == synth) return airfare::run_synth(config, std::cerr);
        if (active == check) return airfare::run_check(config, std::cerr);
        return 2;
    } catch (const airfare::Error& e) {
        std::cerr << e.what() << "\n";
        return airfare::exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "[internal] " << e.what() << "\n";
        return 9;
    }
}
