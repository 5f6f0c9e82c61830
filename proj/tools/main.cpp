#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "iclv/errors.hpp"
#include "iclv/runner.hpp"
#include "iclv/textio.hpp"
#include "iclv/version.hpp"

// Thin shell over run_command: each subcommand reads an optional key=value
// config file, lets the flags below override it, and hands the merged map
// down.  All real work and all error-to-exit-code mapping lives in the
// library so it can be tested without spawning processes.
int main(int argc, char** argv) {
    CLI::App app{"Estimates a socially interdependent vehicle-choice model "
                 "and forecasts automated-vehicle adoption with it"};
    app.set_version_flag("--version", std::string(iclv::kToolVersion));
    app.require_subcommand(1);

    std::string config, out, parameters, sample, population, metric;
    long seed = 0, ties = 0, draws = 0;
    bool has_seed = false, has_ties = false, has_draws = false,
         independent = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config, "key=value configuration file");
        sub->add_option("--out", out, "output directory (default .)");
        sub->add_option("--parameters", parameters, "parameter csv");
        sub->add_option("--seed", seed, "base random seed")
            ->each([&](const std::string&) { has_seed = true; });
        return sub;
    };
    CLI::App* est = add_common(app.add_subcommand(
        "estimate", "fit the model to a survey sample"));
    est->add_option("--sample", sample, "survey csv");
    est->add_option("--draws", draws,
                    "simulator draws for both optimization and covariance")
        ->each([&](const std::string&) { has_draws = true; });
    CLI::App* sim = add_common(app.add_subcommand(
        "simulate", "run the adoption forecast scenarios"));
    sim->add_option("--population", population, "population csv");
    sim->add_flag("--independent", independent,
                  "switch off the social-interdependence channels");
    CLI::App* wgt = add_common(app.add_subcommand(
        "weights", "write the tie matrix used for social weighting"));
    wgt->add_option("--population", population, "population csv");
    wgt->add_option("--sample", sample, "survey csv");
    CLI::App* val = add_common(app.add_subcommand(
        "validate", "check input files against the model layout"));
    val->add_option("--sample", sample, "survey csv");
    val->add_option("--population", population, "population csv");
    for (CLI::App* sub : {est, sim, wgt, val}) {
        sub->add_option("--metric", metric, "tie metric: gower or spatial");
        sub->add_option("--ties", ties, "ties per individual")
            ->each([&](const std::string&) { has_ties = true; });
    }

    CLI11_PARSE(app, argc, argv);

    std::map<std::string, std::string> cfg;
    try {
        if (!config.empty()) cfg = iclv::read_config(config);
    } catch (const iclv::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    }
    cfg["command"] = app.get_subcommands().front()->get_name();
    if (!out.empty()) cfg["out"] = out;
    if (!parameters.empty()) cfg["parameters"] = parameters;
    if (!sample.empty()) cfg["sample"] = sample;
    if (!population.empty()) cfg["population"] = population;
    if (!metric.empty()) cfg["metric"] = metric;
    if (has_seed) cfg["seed"] = std::to_string(seed);
    if (has_ties) cfg["ties"] = std::to_string(ties);
    if (has_draws) {
        cfg["draws_optim"] = std::to_string(draws);
        cfg["draws_covariance"] = std::to_string(draws);
    }
    if (independent) cfg["independent"] = "1";

    return iclv::run_command(cfg);
}
