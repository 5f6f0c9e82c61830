#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "iclv/estimator.hpp"
#include "iclv/params.hpp"
#include "iclv/profiles.hpp"
#include "iclv/sample.hpp"
#include "iclv/simulate.hpp"
#include "iclv/transform.hpp"
#include "iclv/weight_matrix.hpp"

namespace iclv {

// A parameter file is the single description of a model: it fixes the latent
// variables and their covariate lists, the indicator battery, the utility
// attributes, the coefficient values and which of them an estimation run may
// move.  Stored as block,label,latent,value,fixed rows; every cell the file
// does not mention is fixed at zero.
//
// Blocks and how label/latent are read:
//   meta            label = n_levels | n_alternatives | base_alternative |
//                   crash_scale (n_levels may instead be inferred from the
//                   highest threshold index)
//   structural      label = covariate name, latent = equation; row order
//                   defines both the latent order and each covariate layout
//   delta           latent = equation; network autocorrelation strength
//   cross           label = source latent, latent = target equation
//   corr            label/latent = the two latents; disturbance correlation
//   loading         label = indicator, latent = which latent it measures
//   meas_intercept  label = indicator
//   threshold       label = indicator, latent = psi<k> with k counting
//                   cutpoints from 1 (psi1 = -inf and psi2 = 0 are pinned
//                   and never listed; files carry psi3 upward)
//   attribute       label = utility attribute; row order defines the layout
//   choice_loading  label = latent entering the non-base utility
//   interaction     label = attribute, latent = latent it is crossed with
//
// Covariate and attribute names are free-form except for the reserved ones
// the simulator drives each year: crashes_av_hundreds, unclear_liability_share,
// src_friend, src_media among the first latent's covariates, and constant,
// social_adoption, city_adoption, price_ratio among the attributes.
struct ParameterFile {
    std::vector<std::string> comments;  // leading '#' lines, carried verbatim
    std::vector<std::string> latent_names;
    std::vector<std::vector<std::string>> structural_names;  // per latent
    std::vector<std::string> indicator_names;
    std::vector<std::string> attribute_names;
    int n_levels = 0;  // Likert points per indicator
    IclvParams params;
    ParamMask mask;
    CovariateSlots slots;
    AttributeSlots attr_slots;
};

ParameterFile load_parameters(const std::string& path);
// Canonical emission: blocks in the order documented above, numbers in
// shortest round-trip form, so save(load(f)) then load gives back the same
// ParameterFile.
void save_parameters(const std::string& path, const ParameterFile& pf);

// The calibrated model plus covariate wiring, ready for the year loop.
SimulationModel simulation_model(const ParameterFile& pf);

// Raw person records use categorical levels, not dummies:
//   education   below_college | college_graduate | ms_phd | professional
//   income      le_35k | 36k_75k | over_75k
//   acc_vehicle none | minor | major        (vehicle-damage accident)
//   acc_injury  none | minor | severe       (injury accident)
// plus male 0/1 and counts n_workers, n_children, n_vehicles.  Loaders
// expand these into the dummy names a parameter file's covariate lists use
// (edu_ms_phd, hh_income_le_35k, acc_vehicle_minor, ...).
struct Population {
    std::vector<Agent> agents;
    std::vector<IndividualProfile> profiles;      // for tie building
    std::map<std::string, double> zip_area;       // square miles, default 1
};

// Population file columns: id, zip, the raw person records above, cv_price,
// optionally lat/lon (spatial ties) and zip_area_sqmi (adoption density).
// Year-driven covariate slots start at zero.
Population load_population(const std::string& path, const ParameterFile& pf);

struct SampleData {
    Sample sample;
    std::vector<IndividualProfile> profiles;
};

// Survey file columns: id, the raw person records, the information-exposure
// columns shown to the respondent (crash per 100M miles, legal as a share,
// src_friend/src_colleague/src_media dummies), Likert responses y1..yH in
// indicator order, and per choice task t: task<t>_social, task<t>_city,
// task<t>_price_ratio (plus task<t>_<name> for any non-reserved attribute)
// and task<t>_chosen, 1-based.  Optionally lat/lon for spatial ties.
SampleData load_sample(const std::string& path, const ParameterFile& pf);

// Every output file opens with the same provenance comments:
//   tool_version=..., config_hash=..., seed=...
// No timestamps or hostnames, so a re-run writes identical bytes.
struct OutputHeader {
    std::string config_hash;
    std::uint64_t seed = 0;
};
std::vector<std::string> header_comments(const OutputHeader& h);

void write_estimates(const std::string& path, const OutputHeader& h,
                     const EstimationResult& result);
void write_fit(const std::string& path, const OutputHeader& h,
               const EstimationResult& result);
void write_weights(const std::string& path, const OutputHeader& h,
                   const WeightMatrix& w, const std::vector<std::string>& ids);

// Scenario outputs; one row per (scenario, seed, year), (scenario, year),
// adopter, and (scenario, seed, zip, year) respectively.
void write_trajectories(const std::string& path, const OutputHeader& h,
                        const std::vector<ScenarioResult>& results);
void write_mean_trajectories(const std::string& path, const OutputHeader& h,
                             const std::vector<ScenarioResult>& results);
void write_adopters(const std::string& path, const OutputHeader& h,
                    const std::vector<ScenarioResult>& results);
void write_density_by_zip(const std::string& path, const OutputHeader& h,
                          const std::vector<ScenarioResult>& results,
                          const std::map<std::string, double>& zip_area);
void write_summary(const std::string& path, const OutputHeader& h,
                   const std::vector<ScenarioResult>& results);

}  // namespace iclv
