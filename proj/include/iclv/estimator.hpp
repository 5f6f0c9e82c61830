#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "iclv/cml.hpp"
#include "iclv/optimize.hpp"
#include "iclv/transform.hpp"

namespace iclv {

struct EstimationOptions {
    OptimOptions optim;
    int draws_optim = 200;        // GHK draws while optimizing
    int draws_covariance = 1000;  // GHK draws for final value and covariance
    int halton_skip = 100;
    double hessian_step = 1e-4;  // second-difference base step
    double score_step = 1e-5;    // per-pair score difference base step
};

// Pieces of the robust (sandwich) covariance on the packed scale.  The
// variability matrix is built from numerical per-pair scores aggregated into
// per-individual windows: s_q sums the scores of every pair containing q,
// and J = sum_q s_q s_q' - sum_pairs g g' keeps exactly one cross-product
// for every two score terms that share an individual.  With independent
// individuals that expectation is the exact variance of the total score;
// cross-products of pairs with no common member are truncated away.
struct SandwichParts {
    Eigen::MatrixXd hessian;      // d2 loglik, second differences
    Eigen::MatrixXd variability;  // windowed score outer products
    Eigen::MatrixXd covariance;   // (-H)^+ J (-H)^+
    bool singular = false;        // eigenvalue pseudo-inverse had to drop modes
};

SandwichParts sandwich_covariance(const Sample& sample, const WeightMatrix& w,
                                  const IclvParams& at, const ParamMask& mask,
                                  const EstimationOptions& opts = {});

// Composite-likelihood information criterion penalty tr(J (-H)^{-1}) and the
// criterion itself, loglik - penalty.  With J = -H the penalty is exactly
// the number of free parameters.
double clic_penalty(const Eigen::MatrixXd& variability,
                    const Eigen::MatrixXd& hessian, bool* singular = nullptr);
double clic(double loglik, const Eigen::MatrixXd& variability,
            const Eigen::MatrixXd& hessian, bool* singular = nullptr);

struct EstimationResult {
    IclvParams params;               // estimate on the natural scale
    Eigen::VectorXd packed;          // estimate on the optimizer scale
    std::vector<std::string> names;  // one label per packed slot
    Eigen::VectorXd natural;         // natural-scale value per slot
    Eigen::VectorXd std_errors;      // sandwich standard errors, natural scale
    Eigen::MatrixXd covariance_natural;
    SandwichParts sandwich;

    double cml = 0.0;         // composite log-likelihood at the estimate
    double choice_cml = 0.0;  // its task-task (choice) component
    double avg_choice_per_pair = 0.0;
    double penalty = 0.0;
    double clic = 0.0;
    long n_pairs = 0;
    long floored = 0;

    OptimStatus status = OptimStatus::converged;
    int iterations = 0;
    double gradient_norm = 0.0;
    std::vector<double> history;
};

// Maximize the pairwise composite likelihood over the masked parameters,
// then evaluate fit statistics and the sandwich covariance at the optimum.
// Deterministic end to end: quasi-random draws are a pure function of the
// options, and the pair sum has a fixed order.  Throws std::invalid_argument
// if the objective is not finite at init.
EstimationResult maximize_cml(const Sample& sample, const WeightMatrix& w,
                              const IclvParams& init, const ParamMask& mask,
                              const EstimationOptions& opts = {});

}  // namespace iclv
