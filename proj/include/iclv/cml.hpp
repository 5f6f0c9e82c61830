#pragma once

#include <vector>

#include <Eigen/Dense>

#include "iclv/halton.hpp"
#include "iclv/moments.hpp"
#include "iclv/pairs.hpp"

namespace iclv {

// Moments of one pair's stacked differenced block, ordered [block of a,
// block of b] with each block holding H ordinal rows then T*(I-1)
// differenced task rows.
struct PairMoments {
    Eigen::VectorXd b;      // 2*db
    Eigen::MatrixXd omega;  // 2*db x 2*db
};

// Threshold interval (psi_low, psi_up] observed for each of the pair's 2H
// ordinal responses, in the regrouped order: a's indicators then b's.
struct PairBounds {
    Eigen::VectorXd psi_low;
    Eigen::VectorXd psi_up;
};

// One pair's log composite likelihood, split by term group: ordinal-ordinal
// rectangles, ordinal-task slices, and task-task orthants.  The task-task
// group is what gets reported as the choice component of the fit.
struct PairLoglik {
    double total = 0.0;
    double ordinal_ordinal = 0.0;
    double ordinal_task = 0.0;
    double task_task = 0.0;
    int floored = 0;  // factors clamped at the 1e-300 probability floor
};

// Every bivariate-and-up normal probability inside is a GHK evaluation on
// the given draws; draws.dimension must cover cml_draw_dimension(I).
PairLoglik pair_loglik(const PairMoments& pm, const PairBounds& bounds,
                       int n_indicators, int n_tasks, int n_alternatives,
                       const HaltonDraws& draws);

// Quasi-random dimension needed by the largest normal integral a pair
// produces: max(2, I, 2*(I-1)) minus the closed-form first stage.
int cml_draw_dimension(int n_alternatives);

// Pairwise composite marginal log-likelihood summed over the deduplicated
// tie pairs of w, in their sorted order (fixed order keeps the floating-point
// sum reproducible).
struct CmlValue {
    double total = 0.0;
    double choice_component = 0.0;  // sum of task-task groups over pairs
    long floored = 0;
    long n_pairs = 0;
    std::vector<double> per_pair;  // per-pair totals, kept only on request
};

CmlValue cml_loglik(const IclvParams& params, const Sample& sample,
                    const WeightMatrix& w, const HaltonDraws& draws,
                    bool keep_per_pair = false);

// Assemble one pair's differenced moments and ordinal bounds from the joint
// moments.  Exposed for tests; cml_loglik uses the same routine with cached
// per-individual blocks.
PairMoments pair_moments(const JointMoments& jm, const Sample& sample, int a,
                         int b);
PairBounds pair_bounds(const IclvParams& params, const Sample& sample, int a,
                       int b);

}  // namespace iclv
