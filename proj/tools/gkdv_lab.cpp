/// gkdv-lab: run experiment recipes and collate run directories.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gkdv/lab.hpp"

namespace {

using gkdv::lab::ExitCode;
using nlohmann::json;

void print_error(const std::string& type, const std::string& message) {
    std::cout << json{{"error", {{"type", type}, {"message", message}}}}.dump() << '\n';
}

int do_run(const std::string& config_path, const std::string& experiment, const std::vector<std::string>& sets,
           const std::string& seed, const std::string& output, const std::string& sweep) {
    gkdv::lab::ExperimentConfig cfg = gkdv::lab::ExperimentConfig::from_file(config_path);
    for (const auto& s : sets) cfg.set(s);
    if (!experiment.empty()) cfg.run.experiment = experiment;
    if (!seed.empty()) cfg.set("run.seed", seed);
    if (!output.empty()) cfg.run.output_dir = output;
    cfg.validate();
    if (!sweep.empty()) return gkdv::lab::sweep(gkdv::lab::expand_sweep(cfg, sweep), std::cout);
    const auto out = gkdv::lab::run(cfg);
    if (!out.error.empty()) {
        std::cerr << "error: " << out.error << '\n';
        std::cout << gkdv::io::read_json(out.dir / "error.json").dump() << '\n';
    } else {
        std::cout << gkdv::lab::format_table(out.checks);
    }
    std::cout << "run directory: " << out.dir.string() << '\n';
    return out.exit_code;
}

int do_report(const std::string& dir) {
    const auto rep = gkdv::lab::report(dir);
    std::cout << rep.text;
    return rep.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quartic gKdV numerical laboratory"};
    app.require_subcommand(1);

    std::string config, experiment, seed, output, sweep;
    std::vector<std::string> sets;
    auto* run = app.add_subcommand("run", "Execute one experiment recipe");
    run->add_option("--config", config, "INI configuration file (or a meta.json)")->required();
    run->add_option("--experiment", experiment, "Recipe name")
        ->check(CLI::IsMember(gkdv::lab::experiment_names()));
    run->add_option("--set", sets, "Override section.key=value (repeatable)");
    run->add_option("--seed", seed, "Random seed");
    run->add_option("--output", output, "Run directory");
    run->add_option("--sweep", sweep, "section.key=v1,v2,... runs one configuration per value");

    std::string dir;
    auto* report = app.add_subcommand("report", "Summarize a run directory");
    report->add_option("dir", dir, "Run directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : ExitCode::kUsageError;
    }

    try {
        if (*run) return do_run(config, experiment, sets, seed, output, sweep);
        return do_report(dir);
    } catch (const gkdv::lab::ConfigError& e) {
        print_error("ConfigError", e.what());
        return ExitCode::kUsageError;
    } catch (const gkdv::io::ArtifactError& e) {
        print_error("ArtifactError", e.what());
        return ExitCode::kUsageError;
    } catch (const gkdv::InvalidArgument& e) {
        print_error("InvalidArgument", e.what());
        return ExitCode::kUsageError;
    } catch (const gkdv::Error& e) {
        std::cout << gkdv::io::error_json(e).dump() << '\n';
        return ExitCode::kNumericAbort;
    } catch (const std::exception& e) {
        print_error("Error", e.what());
        return ExitCode::kNumericAbort;
    }
}
