#pragma once

#include <Eigen/Dense>
#include <vector>

namespace iclv {

// Coefficients of the latent-variable regressions, the network autocorrelation
// strengths, and the latent-on-latent cross-loading structure.
struct StructuralParams {
    // one coefficient vector per latent variable (covariate lists may differ)
    std::vector<Eigen::VectorXd> alpha;
    Eigen::VectorXd delta;       // per-latent network autocorrelation, each in [0,1)
    Eigen::MatrixXd gamma_corr;  // L x L correlation of the latent disturbances
    // cross-loading pattern: k_pattern(a,b)=1 loads latent b onto latent a;
    // must be strictly lower triangular in the declared latent order
    Eigen::MatrixXi k_pattern;
    Eigen::VectorXd rho;  // one coefficient per set pattern cell, row-major scan
};

// Ordered-probit measurement system: one equation per Likert indicator.
struct MeasurementParams {
    Eigen::MatrixXd gamma;  // H x K covariate coefficients (constant included)
    Eigen::MatrixXd d;      // H x L latent loadings
    // per indicator, thresholds psi_0..psi_J with psi_0=-inf, psi_1=0,
    // psi_J=+inf; response j occurs when psi_{j-1} < y* < psi_j
    std::vector<Eigen::VectorXd> psi;
};

// Utility coefficients of the panel choice model.
struct ChoiceParams {
    Eigen::VectorXd b;       // M marginal utilities of alternative attributes
    Eigen::MatrixXd lambda;  // L x I latent loadings; base-alternative column zero
    Eigen::MatrixXd g;       // L x M latent-by-attribute interaction coefficients
    // differenced kernel-error covariance, top-left fixed to 1 for scale
    Eigen::MatrixXd lambda_diff;  // (I-1) x (I-1)
    int base_alternative = 1;     // 1-based column of lambda constrained to zero
};

struct IclvParams {
    StructuralParams structural;
    MeasurementParams measurement;
    ChoiceParams choice;
};

// Place rho coefficients into the L x L cross-loading matrix following the
// row-major order of set cells in the pattern.  Throws std::invalid_argument
// if the pattern is not strictly lower triangular or rho has the wrong length.
Eigen::MatrixXd cross_loading_matrix(const Eigen::MatrixXi& k_pattern,
                                     const Eigen::VectorXd& rho);

// Undifferenced kernel-error covariance: zero first row/column bordering
// lambda_diff, so that differencing against any alternative stays consistent
// with one common parent covariance.
Eigen::MatrixXd task_error_covariance(const ChoiceParams& choice);

// Structural sanity: correlation matrix symmetric/unit-diagonal/PD, delta in
// [0,1), thresholds ascending with the pinned endpoints, base lambda column
// zero, lambda_diff symmetric with unit top-left, consistent dimensions.
// Throws std::invalid_argument describing the first violated constraint.
void validate(const IclvParams& params);

}  // namespace iclv
