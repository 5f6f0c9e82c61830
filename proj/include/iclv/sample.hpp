#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace iclv {

struct ChoiceTask {
    Eigen::MatrixXd x;  // M x I attribute matrix (constant row included)
    int chosen = 0;     // 1-based chosen alternative
};

struct Individual {
    std::string id;
    // structural covariates, one vector per latent variable
    std::vector<Eigen::VectorXd> s;
    Eigen::MatrixXd x_star;  // H x K measurement covariates (constant included)
    Eigen::VectorXi y;       // H Likert responses, each in 1..J
    std::vector<ChoiceTask> tasks;
};

// Estimation sample with its dimensional card.  All individuals share the
// same layout: number of indicators, Likert levels, tasks, alternatives,
// attribute counts and structural covariate counts per latent variable.
struct Sample {
    std::vector<Individual> individuals;
    int n_latents = 0;       // L
    int n_indicators = 0;    // H
    int n_levels = 0;        // J
    int n_tasks = 0;         // T
    int n_alternatives = 0;  // I
    int n_attributes = 0;    // M
    int n_meas_covariates = 0;  // K

    int q() const { return static_cast<int>(individuals.size()); }
    // length of one individual's stacked (indicators, task utilities) block
    int block_dim() const { return n_indicators + n_tasks * n_alternatives; }
    // same block after utility differencing
    int diff_block_dim() const {
        return n_indicators + n_tasks * (n_alternatives - 1);
    }
};

// Checks every individual against the sample's dimensional card: covariate
// and response lengths, responses within 1..J, chosen alternative within
// 1..I, all values finite.  Throws SchemaError naming the individual and the
// offending slot.
void validate(const Sample& sample);

}  // namespace iclv
