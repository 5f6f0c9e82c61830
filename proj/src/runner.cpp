#include "iclv/runner.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "iclv/errors.hpp"
#include "iclv/estimator.hpp"
#include "iclv/io.hpp"
#include "iclv/simulate.hpp"
#include "iclv/textio.hpp"
#include "iclv/transform.hpp"
#include "iclv/weight_matrix.hpp"

namespace iclv {

namespace {

using Config = std::map<std::string, std::string>;

std::string get(const Config& cfg, const std::string& key,
                const std::string& fallback) {
    const auto it = cfg.find(key);
    return it == cfg.end() ? fallback : it->second;
}

std::string require(const Config& cfg, const std::string& key) {
    const auto it = cfg.find(key);
    if (it == cfg.end() || it->second.empty())
        throw ConfigError("missing required key '" + key + "'");
    return it->second;
}

double number(const Config& cfg, const std::string& key, double fallback) {
    const auto it = cfg.find(key);
    if (it == cfg.end()) return fallback;
    try {
        return parse_number(it->second, key);
    } catch (const SchemaError& e) {
        throw ConfigError(e.what());
    }
}

long integer(const Config& cfg, const std::string& key, long fallback) {
    const auto it = cfg.find(key);
    if (it == cfg.end()) return fallback;
    try {
        return parse_integer(it->second, key);
    } catch (const SchemaError& e) {
        throw ConfigError(e.what());
    }
}

bool flag(const Config& cfg, const std::string& key, bool fallback) {
    const auto it = cfg.find(key);
    if (it == cfg.end()) return fallback;
    if (it->second == "1" || it->second == "true") return true;
    if (it->second == "0" || it->second == "false") return false;
    throw ConfigError(key + " must be 0/1 (or true/false), got '" +
                      it->second + "'");
}

std::vector<double> number_list(const Config& cfg, const std::string& key,
                                const std::string& fallback) {
    const std::string text = get(cfg, key, fallback);
    std::vector<double> out;
    std::string::size_type start = 0;
    while (true) {
        const auto comma = text.find(',', start);
        const std::string item =
            comma == std::string::npos ? text.substr(start)
                                       : text.substr(start, comma - start);
        try {
            out.push_back(parse_number(item, key));
        } catch (const SchemaError& e) {
            throw ConfigError(e.what());
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (out.empty()) throw ConfigError(key + " must list at least one value");
    return out;
}

void check_keys(const Config& cfg, const std::set<std::string>& allowed) {
    for (const auto& [key, value] : cfg)
        if (!allowed.count(key))
            throw ConfigError("unknown key '" + key + "' for command " +
                              get(cfg, "command", "?"));
}

TieMetric metric_from(const Config& cfg) {
    const std::string m = get(cfg, "metric", "gower");
    if (m == "gower") return TieMetric::gower;
    if (m == "spatial") return TieMetric::spatial;
    throw ConfigError("metric must be gower or spatial, got '" + m + "'");
}

WeightMatrix build_ties(const Config& cfg,
                        const std::vector<IndividualProfile>& profiles) {
    const TieMetric metric = metric_from(cfg);
    const long k = integer(cfg, "ties", 5);
    if (k < 1) throw ConfigError("ties must be at least 1");
    if (metric == TieMetric::spatial)
        for (const auto& pr : profiles)
            if (!pr.has_centroid)
                throw ConfigError(
                    "spatial ties need lat/lon columns in the input file");
    return build_weight_matrix(profiles, metric, static_cast<int>(k));
}

OutputHeader make_header(const Config& cfg) {
    // The destination directory does not change what is computed, so it
    // stays out of the fingerprint.
    Config hashed = cfg;
    hashed.erase("out");
    OutputHeader h;
    h.config_hash = config_hash(hashed);
    h.seed = static_cast<std::uint64_t>(integer(cfg, "seed", 1));
    return h;
}

std::filesystem::path out_dir(const Config& cfg) {
    const std::filesystem::path dir = get(cfg, "out", ".");
    std::filesystem::create_directories(dir);
    return dir;
}

std::string out_file(const Config& cfg, const std::string& name) {
    return (out_dir(cfg) / name).string();
}

int percent(double rate) { return static_cast<int>(std::lround(rate * 100.0)); }

void run_estimate(const Config& cfg) {
    check_keys(cfg, {"command", "out", "seed", "parameters", "sample", "metric",
                     "ties", "draws_optim", "draws_covariance",
                     "max_iterations"});
    const ParameterFile pf = load_parameters(require(cfg, "parameters"));
    const SampleData data = load_sample(require(cfg, "sample"), pf);
    const WeightMatrix w = build_ties(cfg, data.profiles);

    EstimationOptions opts;
    opts.draws_optim = static_cast<int>(
        integer(cfg, "draws_optim", opts.draws_optim));
    opts.draws_covariance = static_cast<int>(
        integer(cfg, "draws_covariance", opts.draws_covariance));
    opts.optim.max_iterations = static_cast<int>(
        integer(cfg, "max_iterations", opts.optim.max_iterations));
    if (opts.draws_optim < 1 || opts.draws_covariance < 1)
        throw ConfigError("draw counts must be positive");

    std::cout << "estimating " << ParamPacker(pf.params, pf.mask).dim()
              << " free parameters on " << data.sample.q() << " individuals ("
              << opts.draws_optim << " draws)\n";
    const EstimationResult result =
        maximize_cml(data.sample, w, pf.params, pf.mask, opts);

    const OutputHeader h = make_header(cfg);
    write_estimates(out_file(cfg, "estimates.csv"), h, result);
    write_fit(out_file(cfg, "fit.csv"), h, result);

    const char* status = "converged";
    if (result.status == OptimStatus::max_iterations) status = "max_iterations";
    if (result.status == OptimStatus::line_search_failure)
        status = "line_search_failure";
    std::cout << "status " << status << " after " << result.iterations
              << " iterations, composite loglik " << result.cml << ", clic "
              << result.clic << "\n";
}

void run_simulate(const Config& cfg) {
    check_keys(cfg, {"command", "out", "seed", "parameters", "population",
                     "metric", "ties", "starting_price", "discount_rates",
                     "satisfaction", "horizon_years", "n_seeds",
                     "curvature_crash", "curvature_legal", "crash_upper",
                     "legal_upper", "independent"});
    const ParameterFile pf = load_parameters(require(cfg, "parameters"));
    if (pf.attr_slots.constant < 0 || pf.attr_slots.social < 0 ||
        pf.attr_slots.city < 0 || pf.attr_slots.price_ratio < 0)
        throw ConfigError(
            "the forecast needs the reserved attributes constant, "
            "social_adoption, city_adoption and price_ratio in the parameter "
            "file");
    const Population pop = load_population(require(cfg, "population"), pf);
    const WeightMatrix w = build_ties(cfg, pop.profiles);
    const SimulationModel model = simulation_model(pf);

    ScenarioConfig base;
    base.starting_price = number(cfg, "starting_price", base.starting_price);
    base.horizon_years = static_cast<int>(
        integer(cfg, "horizon_years", base.horizon_years));
    base.curvature_crash = number(cfg, "curvature_crash", base.curvature_crash);
    base.curvature_legal = number(cfg, "curvature_legal", base.curvature_legal);
    base.crash_upper = number(cfg, "crash_upper", base.crash_upper);
    base.legal_upper = number(cfg, "legal_upper", base.legal_upper);
    base.independent = flag(cfg, "independent", false);
    const long n_seeds = integer(cfg, "n_seeds", 10);
    const long seed0 = integer(cfg, "seed", 1);
    if (n_seeds < 1) throw ConfigError("n_seeds must be at least 1");
    base.seeds.clear();
    for (long i = 0; i < n_seeds; ++i)
        base.seeds.push_back(static_cast<std::uint64_t>(seed0 + i));

    const std::vector<double> discounts =
        number_list(cfg, "discount_rates", "0.01,0.05,0.1");
    const std::vector<double> satisfactions =
        number_list(cfg, "satisfaction", "0.3,0.9");

    std::vector<ScenarioResult> results;
    std::set<std::string> labels;
    for (const double d : discounts)
        for (const double s : satisfactions) {
            ScenarioConfig sc = base;
            sc.yearly_discount_rate = d;
            sc.proportion_satisfied = s;
            sc.label = std::string(sc.independent ? "indep_" : "") + "disc" +
                       std::to_string(percent(d)) + "_sat" +
                       std::to_string(percent(s));
            if (!labels.insert(sc.label).second)
                throw ConfigError("scenario label " + sc.label +
                                  " repeats; rates must stay distinct in "
                                  "whole percent");
            results.push_back(run_scenario(sc, model, pop.agents, w));
            const ScenarioResult& res = results.back();
            std::cout << sc.label << ": final mean share "
                      << res.mean_share.back();
            if (std::isnan(res.years_to_half))
                std::cout << ", never reaches half\n";
            else
                std::cout << ", reaches half at year " << res.years_to_half
                          << "\n";
        }

    const OutputHeader h = make_header(cfg);
    write_trajectories(out_file(cfg, "trajectory.csv"), h, results);
    write_mean_trajectories(out_file(cfg, "mean_trajectory.csv"), h, results);
    write_adopters(out_file(cfg, "adopters.csv"), h, results);
    write_density_by_zip(out_file(cfg, "density_by_zip.csv"), h, results,
                         pop.zip_area);
    write_summary(out_file(cfg, "summary.csv"), h, results);
}

void run_weights(const Config& cfg) {
    check_keys(cfg, {"command", "out", "seed", "parameters", "population",
                     "sample", "metric", "ties"});
    const ParameterFile pf = load_parameters(require(cfg, "parameters"));
    std::vector<IndividualProfile> profiles;
    std::vector<std::string> ids;
    if (cfg.count("population") && cfg.count("sample"))
        throw ConfigError("give either population or sample, not both");
    if (cfg.count("population")) {
        const Population pop = load_population(cfg.at("population"), pf);
        profiles = pop.profiles;
        for (const auto& a : pop.agents) ids.push_back(a.id);
    } else if (cfg.count("sample")) {
        const SampleData data = load_sample(cfg.at("sample"), pf);
        profiles = data.profiles;
        for (const auto& ind : data.sample.individuals) ids.push_back(ind.id);
    } else {
        throw ConfigError("weights needs a population or sample file");
    }
    const WeightMatrix w = build_ties(cfg, profiles);
    write_weights(out_file(cfg, "weights.csv"), make_header(cfg), w, ids);
    std::cout << "wrote " << w.q << " rows of " << w.k << " ties each\n";
}

void run_validate(const Config& cfg) {
    check_keys(cfg, {"command", "out", "seed", "parameters", "sample",
                     "population"});
    const ParameterFile pf = load_parameters(require(cfg, "parameters"));
    std::cout << "parameters: " << pf.latent_names.size() << " latents, "
              << pf.indicator_names.size() << " indicators ("
              << pf.n_levels << "-point), " << pf.attribute_names.size()
              << " attributes, " << ParamPacker(pf.params, pf.mask).dim()
              << " free\n";
    if (cfg.count("sample")) {
        const SampleData data = load_sample(cfg.at("sample"), pf);
        std::cout << "sample: " << data.sample.q() << " individuals, "
                  << data.sample.n_tasks << " tasks each\n";
    }
    if (cfg.count("population")) {
        const Population pop = load_population(cfg.at("population"), pf);
        std::cout << "population: " << pop.agents.size() << " agents, "
                  << pop.zip_area.size() << " zips\n";
    }
    std::cout << "ok\n";
}

}  // namespace

int run_command(const std::map<std::string, std::string>& cfg) {
    try {
        const std::string command = require(cfg, "command");
        if (command == "estimate") run_estimate(cfg);
        else if (command == "simulate") run_simulate(cfg);
        else if (command == "weights") run_weights(cfg);
        else if (command == "validate") run_validate(cfg);
        else throw ConfigError("unknown command '" + command + "'");
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const SchemaError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 3;
    } catch (const ConditioningError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace iclv
