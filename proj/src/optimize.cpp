#include "iclv/optimize.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace iclv {

namespace {

double coord_step(double base, double xi) { return base * (1.0 + std::abs(xi)); }

}  // namespace

Eigen::VectorXd fd_gradient_forward(const Objective& f, const Eigen::VectorXd& x,
                                    double fx, double step) {
    const int n = static_cast<int>(x.size());
    Eigen::VectorXd g(n);
    Eigen::VectorXd xp = x;
    for (int i = 0; i < n; ++i) {
        const double h = coord_step(step, x(i));
        xp(i) = x(i) + h;
        g(i) = (f(xp) - fx) / h;
        xp(i) = x(i);
    }
    return g;
}

Eigen::VectorXd fd_gradient_central(const Objective& f, const Eigen::VectorXd& x,
                                    double step) {
    const int n = static_cast<int>(x.size());
    Eigen::VectorXd g(n);
    Eigen::VectorXd xp = x;
    for (int i = 0; i < n; ++i) {
        const double h = coord_step(step, x(i));
        xp(i) = x(i) + h;
        const double fp = f(xp);
        xp(i) = x(i) - h;
        const double fm = f(xp);
        xp(i) = x(i);
        g(i) = (fp - fm) / (2.0 * h);
    }
    return g;
}

OptimResult maximize_bfgs(const Objective& f, const Eigen::VectorXd& x0,
                          const OptimOptions& opts) {
    const int n = static_cast<int>(x0.size());
    OptimResult res;
    res.x = x0;
    res.value = f(x0);
    if (!std::isfinite(res.value))
        throw std::invalid_argument(
            "maximize_bfgs: objective is not finite at the starting point");
    res.history.push_back(res.value);
    if (n == 0) {
        res.gradient.resize(0);
        return res;
    }
    res.gradient = fd_gradient_forward(f, res.x, res.value, opts.fd_step);

    Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);

    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        if (res.gradient.lpNorm<Eigen::Infinity>() < opts.grad_tol) {
            res.status = OptimStatus::converged;
            return res;
        }
        Eigen::VectorXd p = hinv * res.gradient;
        double gp = res.gradient.dot(p);
        if (!(gp > 0.0)) {  // lost the ascent property; restart curvature
            hinv = eye;
            p = res.gradient;
            gp = res.gradient.squaredNorm();
        }

        double alpha = 1.0;
        double fn = -std::numeric_limits<double>::infinity();
        Eigen::VectorXd xn;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            xn = res.x + alpha * p;
            fn = f(xn);
            if (std::isfinite(fn) && fn >= res.value + 1e-4 * alpha * gp) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            res.status = OptimStatus::line_search_failure;
            return res;
        }

        const Eigen::VectorXd gn =
            fd_gradient_forward(f, xn, fn, opts.fd_step);
        const Eigen::VectorXd s = xn - res.x;
        // curvature pair of the negated (minimization) problem
        const Eigen::VectorXd y = res.gradient - gn;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            const double rho = 1.0 / sy;
            const Eigen::MatrixXd a = eye - rho * s * y.transpose();
            hinv = a * hinv * a.transpose() + rho * s * s.transpose();
        }

        const double rel =
            std::abs(fn - res.value) / (1.0 + std::abs(fn));
        res.x = xn;
        res.value = fn;
        res.gradient = gn;
        res.history.push_back(fn);
        ++res.iterations;
        if (rel < opts.rel_obj_tol) {
            res.status = OptimStatus::converged;
            return res;
        }
    }
    res.status = OptimStatus::max_iterations;
    return res;
}

}  // namespace iclv
