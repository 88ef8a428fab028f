#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "halfcavity/cli.hpp"
#include "halfcavity/errors.hpp"
#include "halfcavity/parallel.hpp"

namespace cli = halfcavity::cli;

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-level atom in front of a mirror: decay, driven dynamics and spectra"};
    std::string config_path, mode, out;
    bool validate_only = false;
    unsigned threads = 1;
    double tol = 0.0;
    app.add_option("--config", config_path, "Scenario file")->required()->check(CLI::ExistingFile);
    app.add_option("--mode", mode, "Override the mode in the config")
        ->check(CLI::IsMember(cli::mode_names()));
    app.add_option("--out", out, "Output table path (default: config [output] path, else stdout)");
    app.add_flag("--validate-only", validate_only, "Check the config and print derived parameters");
    app.add_option("--threads", threads, "Worker threads for grid evaluations")->check(CLI::Range(1u, 256u));
    app.add_option("--tol", tol, "Integrator tolerance");
    app.set_version_flag("--version", cli::kVersion);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }

    cli::ScenarioConfig cfg;
    try {
        cfg = cli::load_config(config_path);
        if (!mode.empty()) cfg.mode = cli::parse_mode(mode);
        if (app.count("--tol")) cfg.tol = tol;
        if (!out.empty()) cfg.output_path = out;
        cli::validate(cfg);
    } catch (const cli::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    }
    if (validate_only) {
        std::cout << cli::describe(cfg);
        return 0;
    }

    halfcavity::set_thread_count(threads);
    cli::Table table;
    try {
        table = cli::run(cfg);
    } catch (const cli::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const halfcavity::NumericalError& e) {
        std::cerr << "numerical error [" << cli::to_string(*cfg.mode) << "]: " << e.what() << "\n";
        return kNumericalError;
    } catch (const halfcavity::DomainError& e) {
        std::cerr << "numerical error [" << cli::to_string(*cfg.mode) << "]: " << e.what() << "\n";
        return kNumericalError;
    }

    if (cfg.output_path.empty()) {
        cli::write_csv(cfg, table, std::cout);
        return 0;
    }
    std::ofstream f(cfg.output_path);
    std::ofstream meta(cfg.output_path + ".json");
    if (!f || !meta) {
        std::cerr << "cannot write " << cfg.output_path << "\n";
        return 1;
    }
    cli::write_csv(cfg, table, f);
    meta << cli::sidecar_json(cfg, table);
    for (const auto& w : table.warnings) std::cerr << "warning: " << w << "\n";
    std::cerr << "wrote " << table.rows.size() << " rows to " << cfg.output_path << "\n";
    return 0;
}
