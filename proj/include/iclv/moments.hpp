#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <vector>

#include "iclv/params.hpp"
#include "iclv/sample.hpp"
#include "iclv/spatial.hpp"
#include "iclv/weight_matrix.hpp"

namespace iclv {

// Moments of the stacked (indicator latents, task utilities) normal vector
// across all individuals.  The full covariance is block-structured —
// per-individual observation blocks coupled only through the latent
// covariance — so it is stored in factored form and materialized on demand.
struct JointMoments {
    int n_latents = 0;
    int block = 0;  // H + T*I rows per individual
    Eigen::VectorXd theta;               // QL latent means
    Eigen::MatrixXd xi;                  // QL x QL latent covariance
    std::vector<Eigen::VectorXd> mu1;    // per individual: covariate-only mean
    std::vector<Eigen::MatrixXd> mu2;    // per individual: latent loading map
    Eigen::MatrixXd sigma;               // common independent-error covariance

    int q() const { return static_cast<int>(mu1.size()); }
    // mean of individual q's block: mu1 + mu2 * theta_q
    Eigen::VectorXd b(int q) const;
    // covariance between the blocks of individuals qa and qb
    Eigen::MatrixXd omega_block(int qa, int qb) const;
    // materialized stacked forms (intended for small instances)
    Eigen::VectorXd full_b() const;
    Eigen::MatrixXd full_omega() const;
};

JointMoments joint_moments(const IclvParams& params, const Sample& sample,
                           const WeightMatrix& w);

// One individual's utility-differencing block: identity over the H indicator
// rows, and per task a (I-1) x I sub-block subtracting the chosen
// alternative's utility from every other alternative's.
Eigen::MatrixXd individual_difference_block(int n_indicators, int n_alternatives,
                                            const std::vector<int>& chosen);

// Full sparse differencing map: Q(H+T(I-1)) x Q(H+TI), block-diagonal with
// one individual_difference_block per individual.
Eigen::SparseMatrix<double> build_M(const Sample& sample);

struct DifferencedMoments {
    Eigen::VectorXd b_bar;
    Eigen::MatrixXd omega_bar;
};

// Exact products M*B and M*Omega*M' on materialized moments (small instances;
// the estimator works pair-by-pair instead).
DifferencedMoments differenced_moments(const JointMoments& jm,
                                       const Eigen::SparseMatrix<double>& m);

// Non-stochastic utility of each alternative in one task given the
// individual's latent values: b'x_i + (lambda_i + G x_i)' z.
Eigen::VectorXd choice_utility_systematic(const ChoiceParams& choice,
                                          const Eigen::VectorXd& z,
                                          const Eigen::MatrixXd& x_task);

}  // namespace iclv
