#include "iclv/estimator.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "iclv/errors.hpp"

namespace iclv {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool thresholds_finite(const IclvParams& p) {
    for (const auto& psi : p.measurement.psi) {
        const int levels = static_cast<int>(psi.size()) - 1;
        for (int j = 1; j < levels; ++j)
            if (!std::isfinite(psi(j))) return false;
    }
    return true;
}

// Objective for the optimizer: parameter regions the transforms can only
// reach in the limit (overflowed thresholds, numerically singular latent
// correlation) count as -inf rather than as errors, so the line search backs
// off instead of aborting.
Objective guarded_objective(const ParamPacker& packer, const Sample& sample,
                            const WeightMatrix& w, const HaltonDraws& draws) {
    return [&packer, &sample, &w, &draws](const Eigen::VectorXd& x) -> double {
        IclvParams p = packer.unpack(x);
        if (!thresholds_finite(p)) return kNegInf;
        try {
            return cml_loglik(p, sample, w, draws).total;
        } catch (const ConditioningError&) {
            return kNegInf;
        } catch (const std::invalid_argument&) {
            return kNegInf;
        }
    };
}

// Moore-Penrose inverse of a symmetric matrix by eigenvalue truncation.
Eigen::MatrixXd symmetric_pinv(const Eigen::MatrixXd& m, bool* dropped) {
    const int n = static_cast<int>(m.rows());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
    const Eigen::VectorXd ev = es.eigenvalues();
    const double tol = 1e-10 * ev.cwiseAbs().maxCoeff();
    Eigen::VectorXd inv(n);
    bool any_dropped = false;
    for (int i = 0; i < n; ++i) {
        if (ev(i) > tol) {
            inv(i) = 1.0 / ev(i);
        } else {
            inv(i) = 0.0;
            any_dropped = true;
        }
    }
    if (dropped) *dropped = any_dropped;
    return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

double clic_penalty(const Eigen::MatrixXd& variability,
                    const Eigen::MatrixXd& hessian, bool* singular) {
    if (variability.rows() == 0) {
        if (singular) *singular = false;
        return 0.0;
    }
    bool dropped = false;
    const Eigen::MatrixXd neg_h_inv = symmetric_pinv(-hessian, &dropped);
    if (singular) *singular = dropped;
    return (variability * neg_h_inv).trace();
}

double clic(double loglik, const Eigen::MatrixXd& variability,
            const Eigen::MatrixXd& hessian, bool* singular) {
    return loglik - clic_penalty(variability, hessian, singular);
}

SandwichParts sandwich_covariance(const Sample& sample, const WeightMatrix& w,
                                  const IclvParams& at, const ParamMask& mask,
                                  const EstimationOptions& opts) {
    const ParamPacker packer(at, mask);
    const int p = packer.dim();
    SandwichParts parts;
    parts.hessian.resize(p, p);
    parts.variability.resize(p, p);
    parts.covariance.resize(p, p);
    if (p == 0) return parts;

    const Eigen::VectorXd x0 = packer.pack(at);
    const HaltonDraws draws =
        halton_sequence(cml_draw_dimension(sample.n_alternatives),
                        opts.draws_covariance, opts.halton_skip);
    const auto pairs = enumerate_pairs(w);
    const long n_pairs = static_cast<long>(pairs.size());

    const auto per_pair = [&](const Eigen::VectorXd& x) {
        return cml_loglik(packer.unpack(x), sample, w, draws, true).per_pair;
    };
    const auto total = [&](const Eigen::VectorXd& x) {
        return cml_loglik(packer.unpack(x), sample, w, draws).total;
    };

    // Per-pair numerical scores, one central difference per coordinate.
    Eigen::MatrixXd scores(n_pairs, p);
    Eigen::VectorXd xp = x0;
    for (int i = 0; i < p; ++i) {
        const double h = opts.score_step * (1.0 + std::abs(x0(i)));
        xp(i) = x0(i) + h;
        const auto vp = per_pair(xp);
        xp(i) = x0(i) - h;
        const auto vm = per_pair(xp);
        xp(i) = x0(i);
        for (long k = 0; k < n_pairs; ++k)
            scores(k, i) = (vp[static_cast<size_t>(k)] -
                            vm[static_cast<size_t>(k)]) /
                           (2.0 * h);
    }

    // Each individual's window sums the scores of every pair it appears in.
    // Summing the window outer products counts a pair's self-product once per
    // member, so subtracting one copy of the per-pair outer products leaves
    // exactly one term for every ordered pair of score terms that share an
    // individual -- the cross-products a score variance needs and nothing
    // from disjoint pairs, whose covariance the window construction treats
    // as negligible.
    Eigen::MatrixXd windows = Eigen::MatrixXd::Zero(sample.q(), p);
    for (long k = 0; k < n_pairs; ++k) {
        windows.row(pairs[static_cast<size_t>(k)].first) += scores.row(k);
        windows.row(pairs[static_cast<size_t>(k)].second) += scores.row(k);
    }
    parts.variability = windows.transpose() * windows -
                        scores.transpose() * scores;
    // The truncation can dip below positive semidefinite in finite samples;
    // clip so downstream variances stay nonnegative.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(parts.variability);
    parts.variability = es.eigenvectors() *
                        es.eigenvalues().cwiseMax(0.0).asDiagonal() *
                        es.eigenvectors().transpose();
    parts.variability =
        0.5 * (parts.variability + parts.variability.transpose());

    // Hessian by direct second differences of the objective.
    const double f0 = total(x0);
    Eigen::VectorXd hstep(p);
    for (int i = 0; i < p; ++i)
        hstep(i) = opts.hessian_step * (1.0 + std::abs(x0(i)));
    Eigen::VectorXd fp(p), fm(p);
    for (int i = 0; i < p; ++i) {
        xp(i) = x0(i) + hstep(i);
        fp(i) = total(xp);
        xp(i) = x0(i) - hstep(i);
        fm(i) = total(xp);
        xp(i) = x0(i);
        parts.hessian(i, i) = (fp(i) - 2.0 * f0 + fm(i)) / (hstep(i) * hstep(i));
    }
    for (int i = 0; i < p; ++i) {
        for (int j = i + 1; j < p; ++j) {
            xp(i) = x0(i) + hstep(i);
            xp(j) = x0(j) + hstep(j);
            const double fpp = total(xp);
            xp(j) = x0(j) - hstep(j);
            const double fpm = total(xp);
            xp(i) = x0(i) - hstep(i);
            const double fmm = total(xp);
            xp(j) = x0(j) + hstep(j);
            const double fmp = total(xp);
            xp(i) = x0(i);
            xp(j) = x0(j);
            parts.hessian(i, j) =
                (fpp - fpm - fmp + fmm) / (4.0 * hstep(i) * hstep(j));
            parts.hessian(j, i) = parts.hessian(i, j);
        }
    }

    const Eigen::MatrixXd neg_h_inv =
        symmetric_pinv(-parts.hessian, &parts.singular);
    parts.covariance = neg_h_inv * parts.variability * neg_h_inv;
    parts.covariance = 0.5 * (parts.covariance + parts.covariance.transpose());
    return parts;
}

EstimationResult maximize_cml(const Sample& sample, const WeightMatrix& w,
                              const IclvParams& init, const ParamMask& mask,
                              const EstimationOptions& opts) {
    validate(sample);
    const ParamPacker packer(init, mask);
    const Eigen::VectorXd x0 = packer.pack(init);
    const int p = packer.dim();

    const HaltonDraws draws_opt =
        halton_sequence(cml_draw_dimension(sample.n_alternatives),
                        opts.draws_optim, opts.halton_skip);
    const HaltonDraws draws_cov =
        halton_sequence(cml_draw_dimension(sample.n_alternatives),
                        opts.draws_covariance, opts.halton_skip);

    // First evaluation outside any guard so schema problems surface loudly.
    const double at_init =
        cml_loglik(packer.unpack(x0), sample, w, draws_opt).total;
    if (!std::isfinite(at_init))
        throw std::invalid_argument(
            "maximize_cml: composite likelihood is not finite at the initial "
            "parameters");

    const Objective f = guarded_objective(packer, sample, w, draws_opt);
    const OptimResult opt = maximize_bfgs(f, x0, opts.optim);

    EstimationResult res;
    res.params = packer.unpack(opt.x);
    res.packed = opt.x;
    res.names = packer.names();
    res.natural = packer.natural(res.params);
    res.status = opt.status;
    res.iterations = opt.iterations;
    res.gradient_norm =
        p > 0 ? opt.gradient.lpNorm<Eigen::Infinity>() : 0.0;
    res.history = opt.history;

    const CmlValue fit = cml_loglik(res.params, sample, w, draws_cov);
    res.cml = fit.total;
    res.choice_cml = fit.choice_component;
    res.n_pairs = fit.n_pairs;
    res.floored = fit.floored;
    const long task_pairs_per_pair =
        static_cast<long>(sample.n_tasks) * (2L * sample.n_tasks - 1L);
    res.avg_choice_per_pair =
        fit.n_pairs > 0
            ? fit.choice_component /
                  (static_cast<double>(fit.n_pairs) *
                   static_cast<double>(task_pairs_per_pair))
            : 0.0;

    res.sandwich = sandwich_covariance(sample, w, res.params, mask, opts);
    res.penalty = clic_penalty(res.sandwich.variability, res.sandwich.hessian,
                               &res.sandwich.singular);
    res.clic = res.cml - res.penalty;

    // Natural-scale covariance by the delta method: FD Jacobian of the
    // packed -> natural map at the optimum.
    Eigen::MatrixXd jac(p, p);
    Eigen::VectorXd xp = opt.x;
    for (int i = 0; i < p; ++i) {
        const double h = 1e-6 * (1.0 + std::abs(opt.x(i)));
        xp(i) = opt.x(i) + h;
        const Eigen::VectorXd np = packer.natural(packer.unpack(xp));
        xp(i) = opt.x(i) - h;
        const Eigen::VectorXd nm = packer.natural(packer.unpack(xp));
        xp(i) = opt.x(i);
        jac.col(i) = (np - nm) / (2.0 * h);
    }
    res.covariance_natural =
        jac * res.sandwich.covariance * jac.transpose();
    res.std_errors.resize(p);
    for (int i = 0; i < p; ++i)
        res.std_errors(i) =
            std::sqrt(std::max(res.covariance_natural(i, i), 0.0));
    return res;
}

}  // namespace iclv
