#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "iclv/params.hpp"
#include "iclv/weight_matrix.hpp"

namespace iclv {

// Control variables of one forecasting scenario.  Defaults follow the
// reference setup: $40k starting price, 5% yearly reduction, 90% satisfied
// adopters, 30-year horizon, ten seeds.
struct ScenarioConfig {
    std::string label = "scenario";
    double starting_price = 40000.0;
    double yearly_discount_rate = 0.05;  // in [0,1)
    double proportion_satisfied = 0.90;  // in [0,1]
    double curvature_crash = 1.10;
    double curvature_legal = 1.00;
    double crash_upper = 415.0;  // crashes per 100M miles, first-year ceiling
    double legal_upper = 0.30;   // share of crashes with unclear liability
    int horizon_years = 30;
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    // benchmark mode: network autocorrelation forced to zero and the
    // post-purchase WOM feedback disabled
    bool independent = false;
};

// Throws ConfigError if rates/proportions/horizon leave their domains.
void validate(const ScenarioConfig& cfg);

// Where the year-driven inputs land inside the structural covariate vectors
// (indices into s[latent 0]; -1 marks a channel the model does not carry).
// Crash counts enter the structural equation scaled to hundreds.
struct CovariateSlots {
    int crash = -1;
    int legal = -1;
    int src_friend = -1;
    int src_media = -1;
    double crash_scale = 0.01;
};

// Where the choice-utility attributes live in each task's attribute matrix,
// and which alternative receives them (the base column stays zero).
struct AttributeSlots {
    int constant = 0;
    int social = 1;
    int city = 2;
    int price_ratio = 3;
    int av_alternative = 1;  // 0-based column
};

// A calibrated model plus the covariate wiring the year loop needs.
struct SimulationModel {
    IclvParams params;
    CovariateSlots structural;
    AttributeSlots attributes;
};

// One simulated decision maker.  `s` follows the estimated model's structural
// covariate layout with the year-driven slots left at zero; they are filled
// in each simulated year.
struct Agent {
    std::string id;
    std::string zip;
    std::vector<Eigen::VectorXd> s;
    double cv_price = 0.0;  // conventional-vehicle price anchoring the ratio

    bool adopted = false;
    int adoption_year = 0;  // 1-based, 0 = never
    std::optional<bool> satisfied;
    double wom = 0.0;
    double risk_aversion = 0.0;
    bool media_reached = false;
    bool friend_reached = false;
};

// Year-end snapshot of one simulated year.
struct YearRecord {
    int year = 0;  // 1-based
    double city_share = 0.0;
    double av_price = 0.0;
    double crash_value = 0.0;  // raw crashes per 100M miles after reduction
    double legal_value = 0.0;
    double media_fraction = 0.0;      // percent of population reached
    Eigen::VectorXd network_share;    // per agent, end of year
};

struct SeedTrajectory {
    std::uint64_t seed = 0;
    std::vector<YearRecord> years;
    std::vector<Agent> agents;  // final state; adopters carry year + verdict
};

struct ScenarioResult {
    ScenarioConfig cfg;
    std::vector<SeedTrajectory> runs;
    std::vector<double> mean_share;  // across seeds, one entry per year
    std::vector<double> sd_share;    // reported, never asserted against
    // first (interpolated) year the mean city share reaches one half; NaN
    // when the horizon ends below 50%
    double years_to_half = 0.0;
};

// AV price in year t (1-based): starting price discounted t-1 times.
double price_at(const ScenarioConfig& cfg, int t);

// Yearly reduction of an information variable from its first-year ceiling:
// upper - sqrt(upper)*(t/curvature) - 1, clamped below at zero.  The printed
// form goes negative quickly for ceilings below one (the liability share),
// which the clamp turns into a dead channel; kept literal on purpose.
double info_value(double upper_limit, double curvature, int t);

// Cumulative percent of the population reached by media in year t:
// 2*sqrt(t) + 2*t + 1, capped at 100.
double media_fraction(int t);

// Deterministic uniform in [0,1) from a seed and a purpose-tagged counter.
// Every random decision in a run draws through this, so two scenarios that
// share a seed also share each agent-year's random numbers.
double sim_uniform(std::uint64_t seed, std::uint64_t tag, std::uint64_t a,
                   std::uint64_t b);

// Update media/friend reach flags for year t and write the information
// covariates (crash, legal, source dummies) into each agent's s-vector.
// Media recipients accumulate along a seed-fixed random order until
// round(media_fraction(t)/100 * N) agents are reached; the friend flag turns
// on while an agent's tie network exceeds 40% adoption (strict).
void assign_info_sources(std::vector<Agent>& agents, const SimulationModel& model,
                         const Eigen::VectorXd& network_share, int t,
                         double crash_value, double legal_value,
                         std::uint64_t seed);

// Latent values at the structural mean for the current covariates.  WOM
// solves the network system (I - delta_1 W) z = s alpha with adopters whose
// satisfaction verdict exists held fixed at their current WOM; remaining
// latents follow in declared order, each seeing the cross-loadings of the
// ones before it.  In independent mode delta is forced to zero and nothing
// is held fixed.
void evaluate_latents(std::vector<Agent>& agents, const SimulationModel& model,
                      const WeightMatrix& w, bool independent);

// One purchase round: each non-adopter buys when Phi(delta V) exceeds a
// fresh Uniform(0.5, 1) draw.  Returns the number of new adopters.
int adoption_step(std::vector<Agent>& agents, const SimulationModel& model,
                  const Eigen::VectorXd& network_share, double city_share,
                  double av_price, int t, std::uint64_t seed);

// Satisfaction verdicts for last year's adopters (drawn once per agent),
// then the WOM override: every adopter with a verdict takes the max (if
// satisfied) or min (if not) of its ties' current WOM values, computed from
// a snapshot so the update order cannot matter.
void post_purchase_update(std::vector<Agent>& agents, const WeightMatrix& w,
                          double proportion_satisfied, int t,
                          std::uint64_t seed);

// Full scenario: the year loop above for every seed, then across-seed mean
// and standard deviation of the city share and the years-to-50% statistic.
ScenarioResult run_scenario(const ScenarioConfig& cfg,
                            const SimulationModel& model,
                            const std::vector<Agent>& initial_agents,
                            const WeightMatrix& w);

}  // namespace iclv
