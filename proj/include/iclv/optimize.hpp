#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace iclv {

using Objective = std::function<double(const Eigen::VectorXd&)>;

struct OptimOptions {
    int max_iterations = 200;
    double grad_tol = 1e-4;     // max-norm of the gradient counts as converged
    double rel_obj_tol = 1e-8;  // or relative objective change per accepted step
    double fd_step = 1e-5;      // base finite-difference step, scaled by 1+|x_i|
};

enum class OptimStatus { converged, max_iterations, line_search_failure };

struct OptimResult {
    Eigen::VectorXd x;
    double value = 0.0;
    Eigen::VectorXd gradient;
    int iterations = 0;
    OptimStatus status = OptimStatus::converged;
    std::vector<double> history;  // objective at start and after each step
};

// Forward-difference gradient reusing an already-known f(x); one evaluation
// per coordinate.  Used inside the optimizer loop.
Eigen::VectorXd fd_gradient_forward(const Objective& f, const Eigen::VectorXd& x,
                                    double fx, double step);

// Central-difference gradient; two evaluations per coordinate.  Used where
// accuracy matters more than cost (final gradient, gradient checks).
Eigen::VectorXd fd_gradient_central(const Objective& f, const Eigen::VectorXd& x,
                                    double step);

// BFGS ascent with numerical gradients and Armijo backtracking.  The inverse
// curvature estimate resets to identity whenever it stops producing an
// ascent direction.  -inf objective values are treated as "outside the
// feasible region" by the line search.  Deterministic for deterministic f.
// Throws std::invalid_argument if f(x0) is not finite.
OptimResult maximize_bfgs(const Objective& f, const Eigen::VectorXd& x0,
                          const OptimOptions& opts = {});

}  // namespace iclv
