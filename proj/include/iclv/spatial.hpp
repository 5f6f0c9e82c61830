#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <memory>

#include "iclv/params.hpp"
#include "iclv/sample.hpp"
#include "iclv/weight_matrix.hpp"

namespace iclv {

// Applies the network propagation operator: the inverse of
// (I_QL - diag(repeated delta) * (W kron I_L)), realized through sparse LU
// solves rather than an explicit inverse.  With all delta zero the operator
// short-circuits to the identity.
class SpatialPropagator {
  public:
    SpatialPropagator(int dim, Eigen::SparseMatrix<double> system);
    explicit SpatialPropagator(int dim);  // identity variant

    bool is_identity() const { return !lu_; }
    int dim() const { return dim_; }

    Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
    Eigen::MatrixXd apply(const Eigen::MatrixXd& m) const;

  private:
    int dim_;
    std::shared_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;
};

// Build the propagation operator for a row-stochastic tie matrix and
// per-latent autocorrelation strengths.  Throws std::invalid_argument when a
// delta falls outside [0,1) or W is not row-stochastic, and ConditioningError
// if factorization fails (cannot happen under the preconditions; kept as a
// guard).
SpatialPropagator build_S(const WeightMatrix& w, const Eigen::VectorXd& delta);

// Block-diagonal moderation operator: the same (I_L - R)^{-1} block repeated
// per individual, R holding the cross-loading coefficients.
struct ModerationOperator {
    int q = 0;
    Eigen::MatrixXd block;  // L x L, unit lower triangular for a valid pattern

    Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
};

ModerationOperator build_D(int q, const Eigen::MatrixXi& k_pattern,
                           const Eigen::VectorXd& rho);

// Mean and covariance of the stacked latent vector after network propagation
// and moderation: theta = D S (stacked covariate effects), xi the matching
// QL x QL covariance.
struct LatentMoments {
    Eigen::VectorXd theta;
    Eigen::MatrixXd xi;
};

LatentMoments latent_moments(const StructuralParams& structural, const Sample& sample,
                             const WeightMatrix& w);

}  // namespace iclv
