#include "iclv/cml.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "iclv/errors.hpp"
#include "iclv/ghk.hpp"
#include "iclv/normal.hpp"

namespace iclv {

namespace {

constexpr double kProbFloor = 1e-300;
constexpr int kMaxDim = 32;

// P(X <= upper) on stack buffers.  Reduces infinite bounds before handing
// the finite remainder to the GHK core: +inf coordinates integrate out
// exactly, any -inf (or NaN) coordinate gives probability zero, and a single
// surviving coordinate is an exact Phi.  `cov` is the full d x d matrix in
// row-major order with stride `stride`.
double upper_cdf(int d, const double* upper, const double* mean,
                 const double* cov, int stride, const HaltonDraws& draws) {
    double shifted[kMaxDim];
    int keep[kMaxDim];
    int kd = 0;
    for (int i = 0; i < d; ++i) {
        const double u = upper[i];
        if (std::isinf(u) && u > 0.0) continue;
        const double z = u - mean[i];
        if (!(z > -std::numeric_limits<double>::infinity())) return 0.0;
        if (std::isinf(z)) continue;  // finite bound minus -inf mean
        shifted[kd] = z;
        keep[kd] = i;
        ++kd;
    }
    if (kd == 0) return 1.0;
    if (kd == 1) {
        const double v = cov[keep[0] * stride + keep[0]];
        if (!(v > 0.0)) return shifted[0] >= 0.0 ? 1.0 : 0.0;
        return std_normal_cdf(shifted[0] / std::sqrt(v));
    }
    double sub[kMaxDim * kMaxDim];
    for (int r = 0; r < kd; ++r)
        for (int c = 0; c < kd; ++c)
            sub[r * kd + c] = cov[keep[r] * stride + keep[c]];
    return detail::ghk_core(kd, shifted, sub, draws);
}

// P(lower < X <= upper) for a bivariate block by corner inclusion-exclusion;
// corners holding a -inf coordinate vanish inside upper_cdf.
double rect_cdf2(const double* lo, const double* up, const double* mean,
                 const double* cov, const HaltonDraws& draws) {
    double corner[2];
    corner[0] = up[0];
    corner[1] = up[1];
    double p = upper_cdf(2, corner, mean, cov, 2, draws);
    if (std::isfinite(lo[0])) {
        corner[0] = lo[0];
        p -= upper_cdf(2, corner, mean, cov, 2, draws);
        corner[0] = up[0];
    }
    if (std::isfinite(lo[1])) {
        corner[1] = lo[1];
        p -= upper_cdf(2, corner, mean, cov, 2, draws);
        if (std::isfinite(lo[0])) {
            corner[0] = lo[0];
            p += upper_cdf(2, corner, mean, cov, 2, draws);
        }
    }
    return std::clamp(p, 0.0, 1.0);
}

}  // namespace

int cml_draw_dimension(int n_alternatives) {
    const int widest = std::max(2, std::max(n_alternatives, 2 * (n_alternatives - 1)));
    return widest - 1;
}

PairLoglik pair_loglik(const PairMoments& pm, const PairBounds& bounds,
                       int n_indicators, int n_tasks, int n_alternatives,
                       const HaltonDraws& draws) {
    const int h = n_indicators;
    const int t = n_tasks;
    const int ni = n_alternatives;
    const int nd = ni - 1;
    const int db = h + t * nd;
    const int n = 2 * db;
    if (h < 1 || t < 1 || ni < 2)
        throw std::invalid_argument("pair_loglik: need H >= 1, T >= 1, I >= 2");
    if (std::max(ni, 2 * nd) > kMaxDim)
        throw std::invalid_argument("pair_loglik: too many alternatives");
    if (pm.b.size() != n || pm.omega.rows() != n || pm.omega.cols() != n)
        throw std::invalid_argument(
            "pair_loglik: moment dimensions do not match the block layout");
    if (bounds.psi_low.size() != 2 * h || bounds.psi_up.size() != 2 * h)
        throw std::invalid_argument("pair_loglik: need 2H ordinal bounds");

    // Row of regrouped ordinal index a (a's H indicators then b's) inside the
    // stacked pair vector, and likewise for regrouped task tau, difference j.
    const auto ord_row = [&](int a) { return a < h ? a : db + (a - h); };
    const auto task_row = [&](int tau, int j) {
        return (tau < t ? h + tau * nd : db + h + (tau - t) * nd) + j;
    };

    PairLoglik out;
    const auto add_log = [&out](double p, double& group) {
        if (!(p > kProbFloor)) {
            p = kProbFloor;
            ++out.floored;
        }
        group += std::log(p);
    };

    // Ordinal x ordinal: bivariate rectangle between the two threshold
    // intervals.
    for (int a = 0; a < 2 * h; ++a) {
        const int ra = ord_row(a);
        for (int a2 = a + 1; a2 < 2 * h; ++a2) {
            const int rb = ord_row(a2);
            const double mean[2] = {pm.b(ra), pm.b(rb)};
            const double cov[4] = {pm.omega(ra, ra), pm.omega(ra, rb),
                                   pm.omega(rb, ra), pm.omega(rb, rb)};
            const double lo[2] = {bounds.psi_low(a), bounds.psi_low(a2)};
            const double up[2] = {bounds.psi_up(a), bounds.psi_up(a2)};
            add_log(rect_cdf2(lo, up, mean, cov, draws), out.ordinal_ordinal);
        }
    }

    // Ordinal x task: the ordinal's threshold slice times the task's
    // non-positive utility differences, as a difference of two I-dimensional
    // upper CDFs.
    for (int a = 0; a < 2 * h; ++a) {
        const int ra = ord_row(a);
        for (int tau = 0; tau < 2 * t; ++tau) {
            int rows[kMaxDim];
            rows[0] = ra;
            for (int j = 0; j < nd; ++j) rows[1 + j] = task_row(tau, j);
            double mean[kMaxDim];
            double cov[kMaxDim * kMaxDim];
            double up[kMaxDim];
            for (int r = 0; r < ni; ++r) {
                mean[r] = pm.b(rows[r]);
                up[r] = 0.0;
                for (int c = 0; c < ni; ++c)
                    cov[r * ni + c] = pm.omega(rows[r], rows[c]);
            }
            up[0] = bounds.psi_up(a);
            double p = upper_cdf(ni, up, mean, cov, ni, draws);
            if (std::isfinite(bounds.psi_low(a))) {
                up[0] = bounds.psi_low(a);
                p -= upper_cdf(ni, up, mean, cov, ni, draws);
            }
            add_log(std::max(p, 0.0), out.ordinal_task);
        }
    }

    // Task x task: joint orthant of two tasks' utility differences.
    {
        double mean[kMaxDim];
        double cov[kMaxDim * kMaxDim];
        double up[kMaxDim];
        const int d2 = 2 * nd;
        std::fill(up, up + d2, 0.0);
        for (int tau = 0; tau < 2 * t; ++tau) {
            for (int tau2 = tau + 1; tau2 < 2 * t; ++tau2) {
                int rows[kMaxDim];
                for (int j = 0; j < nd; ++j) {
                    rows[j] = task_row(tau, j);
                    rows[nd + j] = task_row(tau2, j);
                }
                for (int r = 0; r < d2; ++r) {
                    mean[r] = pm.b(rows[r]);
                    for (int c = 0; c < d2; ++c)
                        cov[r * d2 + c] = pm.omega(rows[r], rows[c]);
                }
                add_log(upper_cdf(d2, up, mean, cov, d2, draws), out.task_task);
            }
        }
    }

    out.total = out.ordinal_ordinal + out.ordinal_task + out.task_task;
    return out;
}

namespace {

std::vector<int> chosen_list(const Individual& ind) {
    std::vector<int> chosen;
    chosen.reserve(ind.tasks.size());
    for (const auto& task : ind.tasks) chosen.push_back(task.chosen);
    return chosen;
}

}  // namespace

PairMoments pair_moments(const JointMoments& jm, const Sample& sample, int a,
                         int b) {
    const int db = sample.diff_block_dim();
    const int l = sample.n_latents;
    const Eigen::MatrixXd ma = individual_difference_block(
        sample.n_indicators, sample.n_alternatives,
        chosen_list(sample.individuals[static_cast<size_t>(a)]));
    const Eigen::MatrixXd mb = individual_difference_block(
        sample.n_indicators, sample.n_alternatives,
        chosen_list(sample.individuals[static_cast<size_t>(b)]));

    PairMoments pm;
    pm.b.resize(2 * db);
    pm.b.head(db) = ma * jm.b(a);
    pm.b.tail(db) = mb * jm.b(b);

    const Eigen::MatrixXd ca = ma * jm.mu2[static_cast<size_t>(a)];
    const Eigen::MatrixXd cb = mb * jm.mu2[static_cast<size_t>(b)];
    const auto xi_block = [&](int qa, int qb) {
        return jm.xi.block(qa * l, qb * l, l, l);
    };
    pm.omega.resize(2 * db, 2 * db);
    pm.omega.topLeftCorner(db, db) =
        ca * xi_block(a, a) * ca.transpose() + ma * jm.sigma * ma.transpose();
    pm.omega.bottomRightCorner(db, db) =
        cb * xi_block(b, b) * cb.transpose() + mb * jm.sigma * mb.transpose();
    pm.omega.topRightCorner(db, db) = ca * xi_block(a, b) * cb.transpose();
    pm.omega.bottomLeftCorner(db, db) =
        pm.omega.topRightCorner(db, db).transpose();
    return pm;
}

PairBounds pair_bounds(const IclvParams& params, const Sample& sample, int a,
                       int b) {
    const int h = sample.n_indicators;
    PairBounds bounds;
    bounds.psi_low.resize(2 * h);
    bounds.psi_up.resize(2 * h);
    const auto fill = [&](int q, int offset) {
        const Individual& ind = sample.individuals[static_cast<size_t>(q)];
        for (int i = 0; i < h; ++i) {
            const Eigen::VectorXd& psi =
                params.measurement.psi[static_cast<size_t>(i)];
            const int level = ind.y(i);
            bounds.psi_low(offset + i) = psi(level - 1);
            bounds.psi_up(offset + i) = psi(level);
        }
    };
    fill(a, 0);
    fill(b, h);
    return bounds;
}

CmlValue cml_loglik(const IclvParams& params, const Sample& sample,
                    const WeightMatrix& w, const HaltonDraws& draws,
                    bool keep_per_pair) {
    validate(params);
    if (w.q != sample.q())
        throw std::invalid_argument(
            "cml_loglik: weight matrix size does not match sample");
    const auto pairs = enumerate_pairs(w);

    const JointMoments jm = joint_moments(params, sample, w);
    const int q = sample.q();
    const int db = sample.diff_block_dim();
    const int l = sample.n_latents;
    const int h = sample.n_indicators;

    // Params-dependent per-individual pieces, each computed once: differenced
    // mean, differenced loading map, differenced own-block noise, and the
    // ordinal threshold intervals for the observed responses.
    std::vector<Eigen::VectorXd> bbar(static_cast<size_t>(q));
    std::vector<Eigen::MatrixXd> load(static_cast<size_t>(q));
    std::vector<Eigen::MatrixXd> noise(static_cast<size_t>(q));
    Eigen::MatrixXd low(h, q), up(h, q);
    for (int i = 0; i < q; ++i) {
        const Individual& ind = sample.individuals[static_cast<size_t>(i)];
        const Eigen::MatrixXd m = individual_difference_block(
            h, sample.n_alternatives, chosen_list(ind));
        bbar[static_cast<size_t>(i)] = m * jm.b(i);
        load[static_cast<size_t>(i)] = m * jm.mu2[static_cast<size_t>(i)];
        noise[static_cast<size_t>(i)] = m * jm.sigma * m.transpose();
        for (int r = 0; r < h; ++r) {
            const Eigen::VectorXd& psi =
                params.measurement.psi[static_cast<size_t>(r)];
            low(r, i) = psi(ind.y(r) - 1);
            up(r, i) = psi(ind.y(r));
        }
    }

    CmlValue out;
    out.n_pairs = static_cast<long>(pairs.size());
    if (keep_per_pair) out.per_pair.reserve(pairs.size());

    PairMoments pm;
    pm.b.resize(2 * db);
    pm.omega.resize(2 * db, 2 * db);
    PairBounds bounds;
    bounds.psi_low.resize(2 * h);
    bounds.psi_up.resize(2 * h);

    for (const auto& [a, b] : pairs) {
        const size_t sa = static_cast<size_t>(a);
        const size_t sb = static_cast<size_t>(b);
        pm.b.head(db) = bbar[sa];
        pm.b.tail(db) = bbar[sb];
        pm.omega.topLeftCorner(db, db) =
            load[sa] * jm.xi.block(a * l, a * l, l, l) * load[sa].transpose() +
            noise[sa];
        pm.omega.bottomRightCorner(db, db) =
            load[sb] * jm.xi.block(b * l, b * l, l, l) * load[sb].transpose() +
            noise[sb];
        pm.omega.topRightCorner(db, db) =
            load[sa] * jm.xi.block(a * l, b * l, l, l) * load[sb].transpose();
        pm.omega.bottomLeftCorner(db, db) =
            pm.omega.topRightCorner(db, db).transpose();
        if (!pm.b.allFinite() || !pm.omega.allFinite())
            throw ConditioningError(
                "non-finite pair moments for pair (" +
                sample.individuals[sa].id + ", " + sample.individuals[sb].id +
                ")");
        bounds.psi_low.head(h) = low.col(a);
        bounds.psi_low.tail(h) = low.col(b);
        bounds.psi_up.head(h) = up.col(a);
        bounds.psi_up.tail(h) = up.col(b);

        const PairLoglik pl = pair_loglik(pm, bounds, h, sample.n_tasks,
                                          sample.n_alternatives, draws);
        out.total += pl.total;
        out.choice_component += pl.task_task;
        out.floored += pl.floored;
        if (keep_per_pair) out.per_pair.push_back(pl.total);
    }
    return out;
}

}  // namespace iclv
