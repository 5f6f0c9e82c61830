#include "iclv/params.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace iclv {

namespace {
const double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void fail(const std::string& what) { throw std::invalid_argument(what); }
}  // namespace

Eigen::MatrixXd cross_loading_matrix(const Eigen::MatrixXi& k_pattern,
                                     const Eigen::VectorXd& rho) {
    const int l = static_cast<int>(k_pattern.rows());
    if (k_pattern.cols() != l) fail("cross-loading pattern must be square");
    int needed = 0;
    for (int r = 0; r < l; ++r) {
        for (int c = 0; c < l; ++c) {
            if (k_pattern(r, c) == 0) continue;
            if (k_pattern(r, c) != 1) fail("cross-loading pattern cells must be 0 or 1");
            if (c >= r)
                fail("cross-loading pattern must be strictly lower triangular "
                     "in the declared latent order");
            ++needed;
        }
    }
    if (rho.size() != needed)
        fail("cross-loading coefficient count does not match pattern (" +
             std::to_string(rho.size()) + " given, " + std::to_string(needed) +
             " pattern cells)");
    Eigen::MatrixXd r_mat = Eigen::MatrixXd::Zero(l, l);
    int next = 0;
    for (int r = 0; r < l; ++r)
        for (int c = 0; c < l; ++c)
            if (k_pattern(r, c) == 1) r_mat(r, c) = rho(next++);
    return r_mat;
}

Eigen::MatrixXd task_error_covariance(const ChoiceParams& choice) {
    const int i = static_cast<int>(choice.lambda_diff.rows()) + 1;
    Eigen::MatrixXd lam = Eigen::MatrixXd::Zero(i, i);
    lam.bottomRightCorner(i - 1, i - 1) = choice.lambda_diff;
    return lam;
}

void validate(const IclvParams& params) {
    const auto& st = params.structural;
    const auto& me = params.measurement;
    const auto& ch = params.choice;

    const int l = static_cast<int>(st.delta.size());
    if (l < 1) fail("at least one latent variable required");
    if (static_cast<int>(st.alpha.size()) != l)
        fail("one structural coefficient vector required per latent variable");
    for (int i = 0; i < l; ++i) {
        if (!(st.delta(i) >= 0.0 && st.delta(i) < 1.0))
            fail("network autocorrelation delta must lie in [0,1)");
        if (!st.alpha[i].allFinite()) fail("non-finite structural coefficient");
    }
    if (st.gamma_corr.rows() != l || st.gamma_corr.cols() != l)
        fail("latent disturbance correlation must be L x L");
    if (!st.gamma_corr.isApprox(st.gamma_corr.transpose(), 1e-12))
        fail("latent disturbance correlation must be symmetric");
    for (int i = 0; i < l; ++i)
        if (std::fabs(st.gamma_corr(i, i) - 1.0) > 1e-12)
            fail("latent disturbance correlation needs a unit diagonal");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(st.gamma_corr);
    if (es.eigenvalues().minCoeff() <= 0.0)
        fail("latent disturbance correlation must be positive definite");
    cross_loading_matrix(st.k_pattern, st.rho);  // validates pattern shape

    const int h = static_cast<int>(me.d.rows());
    if (me.d.cols() != l) fail("measurement loadings must have one column per latent");
    if (me.gamma.rows() != h) fail("measurement coefficients must have one row per indicator");
    if (static_cast<int>(me.psi.size()) != h)
        fail("one threshold vector required per indicator");
    for (int ind = 0; ind < h; ++ind) {
        const auto& psi = me.psi[ind];
        const int levels = static_cast<int>(psi.size()) - 1;
        if (levels < 2) fail("each indicator needs at least two response levels");
        if (psi(0) != -kInf || psi(levels) != kInf)
            fail("threshold vectors must start at -inf and end at +inf");
        if (psi(1) != 0.0) fail("the first finite threshold is pinned to zero");
        for (int j = 0; j < levels; ++j)
            if (!(psi(j) < psi(j + 1))) fail("thresholds must strictly ascend");
    }

    const int n_alt = static_cast<int>(ch.lambda.cols());
    if (n_alt < 2) fail("choice model needs at least two alternatives");
    if (ch.lambda.rows() != l) fail("utility latent loadings must have one row per latent");
    if (ch.base_alternative < 1 || ch.base_alternative > n_alt)
        fail("base alternative out of range");
    if (ch.lambda.col(ch.base_alternative - 1).cwiseAbs().maxCoeff() != 0.0)
        fail("latent loadings of the base alternative must be zero");
    if (ch.g.rows() != l || ch.g.cols() != ch.b.size())
        fail("interaction coefficient matrix must be L x M");
    if (ch.lambda_diff.rows() != n_alt - 1 || ch.lambda_diff.cols() != n_alt - 1)
        fail("differenced error covariance must be (I-1) x (I-1)");
    if (std::fabs(ch.lambda_diff(0, 0) - 1.0) > 1e-12)
        fail("top-left differenced error variance is fixed to 1 for scale");
    if (!ch.lambda_diff.isApprox(ch.lambda_diff.transpose(), 1e-12))
        fail("differenced error covariance must be symmetric");
}

}  // namespace iclv
