// driftbench command-line front end.
#include <iostream>

#include <CLI11.hpp>

#include "driftbench/experiment.hpp"

int main(int argc, char** argv) {
    driftbench::configure_logging_from_env();

    CLI::App app{"driftbench: anomaly detector maintenance experiments"};
    app.set_version_flag("--version", driftbench::kToolkitVersion);
    app.require_subcommand(1);

    std::string config_path;
    auto* validate = app.add_subcommand("validate", "Check an experiment config");
    validate->add_option("config", config_path, "Experiment config JSON")->required();

    int jobs = 1;
    std::string output;
    auto* run = app.add_subcommand("run", "Run an experiment and write reports");
    run->add_option("config", config_path, "Experiment config JSON")->required();
    run->add_option("--jobs,-j", jobs, "Series processed concurrently (0 = all cores)")
        ->check(CLI::NonNegativeNumber);
    run->add_option("--output,-o", output, "Output directory (overrides output_dir)");

    std::string summary_a;
    std::string summary_b;
    driftbench::CompareOptions compare_options;
    std::string scenario_a;
    std::string scenario_b;
    auto* compare = app.add_subcommand("compare", "Paired Wilcoxon test between two summaries");
    compare->add_option("summary_a", summary_a, "First summary.json")->required();
    compare->add_option("summary_b", summary_b, "Second summary.json")->required();
    compare->add_option("--alpha", compare_options.alpha, "Significance level")
        ->capture_default_str();
    compare->add_option("--scenario-a", scenario_a, "Scenario taken from the first report");
    compare->add_option("--scenario-b", scenario_b, "Scenario taken from the second report");

    std::string spec_path;
    std::string out_csv;
    auto* synth = app.add_subcommand("synth", "Generate a labeled synthetic series");
    synth->add_option("spec", spec_path, "SynthSpec JSON")->required();
    synth->add_option("--out", out_csv, "Output CSV (timestamp,value,is_anomaly)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : driftbench::kExitConfigError;
    }

    if (*validate) return driftbench::cmd_validate(config_path, std::cout, std::cerr);
    if (*run) {
        std::optional<std::filesystem::path> override_dir;
        if (!output.empty()) override_dir = output;
        return driftbench::cmd_run(config_path, jobs, override_dir, std::cerr);
    }
    if (*compare) {
        if (!scenario_a.empty()) compare_options.scenario_a = scenario_a;
        if (!scenario_b.empty()) compare_options.scenario_b = scenario_b;
        return driftbench::cmd_compare(summary_a, summary_b, compare_options, std::cout,
                                       std::cerr);
    }
    return driftbench::cmd_synth(spec_path, out_csv, std::cerr);
}
