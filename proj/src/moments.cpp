#include "iclv/moments.hpp"

#include <stdexcept>
#include <string>

#include "iclv/errors.hpp"

namespace iclv {

Eigen::VectorXd JointMoments::b(int q) const {
    return mu1[q] + mu2[q] * theta.segment(static_cast<Eigen::Index>(q) * n_latents,
                                           n_latents);
}

Eigen::MatrixXd JointMoments::omega_block(int qa, int qb) const {
    Eigen::MatrixXd out =
        mu2[qa] *
        xi.block(static_cast<Eigen::Index>(qa) * n_latents,
                 static_cast<Eigen::Index>(qb) * n_latents, n_latents, n_latents) *
        mu2[qb].transpose();
    if (qa == qb) out += sigma;
    return out;
}

Eigen::VectorXd JointMoments::full_b() const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(q()) * block);
    for (int i = 0; i < q(); ++i) out.segment(static_cast<Eigen::Index>(i) * block, block) = b(i);
    return out;
}

Eigen::MatrixXd JointMoments::full_omega() const {
    const Eigen::Index dim = static_cast<Eigen::Index>(q()) * block;
    Eigen::MatrixXd out(dim, dim);
    for (int a = 0; a < q(); ++a)
        for (int c = 0; c < q(); ++c)
            out.block(static_cast<Eigen::Index>(a) * block,
                      static_cast<Eigen::Index>(c) * block, block, block) =
                omega_block(a, c);
    return out;
}

JointMoments joint_moments(const IclvParams& params, const Sample& sample,
                           const WeightMatrix& w) {
    const int l = static_cast<int>(params.structural.delta.size());
    const int h = sample.n_indicators;
    const int n_alt = sample.n_alternatives;
    const int t_count = sample.n_tasks;
    const auto& me = params.measurement;
    const auto& ch = params.choice;
    if (l != sample.n_latents)
        throw SchemaError("parameter latent count differs from sample latent count");
    if (me.d.rows() != h)
        throw SchemaError("measurement loading rows differ from indicator count");
    if (me.gamma.cols() != sample.n_meas_covariates)
        throw SchemaError("measurement coefficient columns differ from covariate count");
    if (ch.b.size() != sample.n_attributes)
        throw SchemaError("utility coefficient length differs from attribute count");
    if (ch.lambda.cols() != n_alt)
        throw SchemaError("latent loading columns differ from alternative count");

    JointMoments jm;
    jm.n_latents = l;
    jm.block = h + t_count * n_alt;

    const LatentMoments lm = latent_moments(params.structural, sample, w);
    jm.theta = lm.theta;
    jm.xi = lm.xi;

    jm.mu1.reserve(sample.q());
    jm.mu2.reserve(sample.q());
    for (const auto& ind : sample.individuals) {
        Eigen::VectorXd m1(jm.block);
        Eigen::MatrixXd m2(jm.block, l);
        for (int row = 0; row < h; ++row) {
            m1(row) = me.gamma.row(row).dot(ind.x_star.row(row));
            m2.row(row) = me.d.row(row);
        }
        for (int t = 0; t < t_count; ++t) {
            const auto& x = ind.tasks[t].x;
            for (int i = 0; i < n_alt; ++i) {
                const int row = h + t * n_alt + i;
                m1(row) = ch.b.dot(x.col(i));
                m2.row(row) = ch.lambda.col(i).transpose() + (ch.g * x.col(i)).transpose();
            }
        }
        jm.mu1.push_back(std::move(m1));
        jm.mu2.push_back(std::move(m2));
    }

    jm.sigma = Eigen::MatrixXd::Zero(jm.block, jm.block);
    jm.sigma.topLeftCorner(h, h).setIdentity();
    const Eigen::MatrixXd lam = task_error_covariance(ch);
    for (int t = 0; t < t_count; ++t)
        jm.sigma.block(h + t * n_alt, h + t * n_alt, n_alt, n_alt) = lam;
    return jm;
}

Eigen::MatrixXd individual_difference_block(int n_indicators, int n_alternatives,
                                            const std::vector<int>& chosen) {
    const int t_count = static_cast<int>(chosen.size());
    const int rows = n_indicators + t_count * (n_alternatives - 1);
    const int cols = n_indicators + t_count * n_alternatives;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, cols);
    m.topLeftCorner(n_indicators, n_indicators).setIdentity();
    for (int t = 0; t < t_count; ++t) {
        const int c = chosen[t];
        if (c < 1 || c > n_alternatives)
            throw std::invalid_argument("chosen alternative outside 1..I");
        const int r0 = n_indicators + t * (n_alternatives - 1);
        const int c0 = n_indicators + t * n_alternatives;
        // identity columns for the non-chosen alternatives with a -1 column
        // spliced in at the chosen one: each row reads u_other - u_chosen
        int next = 0;
        for (int j = 0; j < n_alternatives; ++j) {
            if (j == c - 1) {
                m.block(r0, c0 + j, n_alternatives - 1, 1).setConstant(-1.0);
            } else {
                m(r0 + next, c0 + j) = 1.0;
                ++next;
            }
        }
    }
    return m;
}

Eigen::SparseMatrix<double> build_M(const Sample& sample) {
    const int rows_per = sample.diff_block_dim();
    const int cols_per = sample.block_dim();
    std::vector<Eigen::Triplet<double>> trip;
    for (int q = 0; q < sample.q(); ++q) {
        std::vector<int> chosen;
        for (const auto& task : sample.individuals[q].tasks) chosen.push_back(task.chosen);
        const Eigen::MatrixXd blockq =
            individual_difference_block(sample.n_indicators, sample.n_alternatives, chosen);
        for (int r = 0; r < blockq.rows(); ++r)
            for (int c = 0; c < blockq.cols(); ++c)
                if (blockq(r, c) != 0.0)
                    trip.emplace_back(q * rows_per + r, q * cols_per + c, blockq(r, c));
    }
    Eigen::SparseMatrix<double> m(static_cast<Eigen::Index>(sample.q()) * rows_per,
                                  static_cast<Eigen::Index>(sample.q()) * cols_per);
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

DifferencedMoments differenced_moments(const JointMoments& jm,
                                       const Eigen::SparseMatrix<double>& m) {
    DifferencedMoments out;
    out.b_bar = m * jm.full_b();
    const Eigen::MatrixXd omega = jm.full_omega();
    out.omega_bar = m * omega * m.transpose();
    return out;
}

Eigen::VectorXd choice_utility_systematic(const ChoiceParams& choice,
                                          const Eigen::VectorXd& z,
                                          const Eigen::MatrixXd& x_task) {
    const int n_alt = static_cast<int>(x_task.cols());
    if (z.size() != choice.lambda.rows())
        throw std::invalid_argument("latent vector length differs from loading rows");
    if (x_task.rows() != choice.b.size())
        throw std::invalid_argument("attribute rows differ from coefficient length");
    Eigen::VectorXd v(n_alt);
    for (int i = 0; i < n_alt; ++i)
        v(i) = choice.b.dot(x_task.col(i)) + choice.lambda.col(i).dot(z) +
               (choice.g * x_task.col(i)).dot(z);
    return v;
}

}  // namespace iclv
