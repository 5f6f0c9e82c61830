#pragma once

#include <Eigen/Dense>

#include "iclv/halton.hpp"

namespace iclv {

// A multivariate normal distribution by mean vector and covariance matrix.
struct MvnSpec {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;
};

// GHK estimate of P(X <= upper) for X ~ N(mean, covariance), using the given
// quasi-random draws (one stage per dimension past the first, so
// draws.dimension must be at least d-1 after infinite bounds are removed).
//
// +inf bounds marginalise the coordinate away exactly; any -inf bound makes
// the probability 0.  The first stage is computed in closed form; variables
// are ordered by decreasing truncation probability before the recursion.
// Deterministic for fixed draws.  Throws ConditioningError when the
// covariance fails Cholesky even after the jitter ladder.
double mvn_cdf_ghk(const MvnSpec& spec, const Eigen::VectorXd& upper,
                   const HaltonDraws& draws);

// Rectangle probability P(lower < X <= upper) by inclusion-exclusion over the
// 2^d corner CDFs (corners holding a -inf coordinate vanish).  Result clamped
// to [0,1].  Throws std::domain_error if lower > upper in any coordinate.
double mvn_cdf_rect(const MvnSpec& spec, const Eigen::VectorXd& lower,
                    const Eigen::VectorXd& upper, const HaltonDraws& draws);

namespace detail {

// GHK core on pre-reduced inputs: all bounds finite, shifted_upper = upper -
// mean, cov row-major d*d.  Used directly by the pairwise-likelihood hot loop
// to avoid per-call heap traffic; the public entry points route through it.
double ghk_core(int d, const double* shifted_upper, const double* cov,
                const HaltonDraws& draws);

}  // namespace detail

}  // namespace iclv
