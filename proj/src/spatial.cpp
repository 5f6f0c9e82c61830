#include "iclv/spatial.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "iclv/errors.hpp"

namespace iclv {

SpatialPropagator::SpatialPropagator(int dim) : dim_(dim) {}

SpatialPropagator::SpatialPropagator(int dim, Eigen::SparseMatrix<double> system)
    : dim_(dim),
      lu_(std::make_shared<Eigen::SparseLU<Eigen::SparseMatrix<double>>>()) {
    system.makeCompressed();
    lu_->compute(system);
    if (lu_->info() != Eigen::Success)
        throw ConditioningError("network propagation system is singular");
}

Eigen::VectorXd SpatialPropagator::apply(const Eigen::VectorXd& v) const {
    if (v.size() != dim_)
        throw std::invalid_argument("propagator applied to wrong-sized vector");
    if (!lu_) return v;
    return lu_->solve(v);
}

Eigen::MatrixXd SpatialPropagator::apply(const Eigen::MatrixXd& m) const {
    if (m.rows() != dim_)
        throw std::invalid_argument("propagator applied to wrong-sized matrix");
    if (!lu_) return m;
    return lu_->solve(m);
}

SpatialPropagator build_S(const WeightMatrix& w, const Eigen::VectorXd& delta) {
    const int l = static_cast<int>(delta.size());
    if (l < 1) throw std::invalid_argument("at least one latent variable required");
    for (int i = 0; i < l; ++i)
        if (!(delta(i) >= 0.0 && delta(i) < 1.0))
            throw std::invalid_argument("network autocorrelation delta must lie in [0,1)");
    const int dim = w.q * l;
    if (delta.cwiseAbs().maxCoeff() == 0.0) return SpatialPropagator(dim);

    for (int r = 0; r < w.q; ++r)
        if (std::fabs(w.row_sum(r) - 1.0) > 1e-8)
            throw std::invalid_argument("tie matrix must be row-stochastic");

    // I - diag(delta per row) * (W kron I_L): row (q,l) couples to (q',l)
    // for each tie q -> q' with strength delta_l * w_qq'
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<size_t>(dim) + static_cast<size_t>(w.q) * w.k * l);
    for (int i = 0; i < dim; ++i) trip.emplace_back(i, i, 1.0);
    for (int q = 0; q < w.q; ++q)
        for (const auto& [nbr, wt] : w.ties[q])
            for (int i = 0; i < l; ++i)
                if (delta(i) != 0.0)
                    trip.emplace_back(q * l + i, nbr * l + i, -delta(i) * wt);
    Eigen::SparseMatrix<double> a(dim, dim);
    a.setFromTriplets(trip.begin(), trip.end());
    return SpatialPropagator(dim, std::move(a));
}

Eigen::VectorXd ModerationOperator::apply(const Eigen::VectorXd& v) const {
    const int l = static_cast<int>(block.rows());
    if (v.size() != static_cast<Eigen::Index>(q) * l)
        throw std::invalid_argument("moderation operator applied to wrong-sized vector");
    Eigen::VectorXd out(v.size());
    for (int i = 0; i < q; ++i)
        out.segment(i * l, l) = block * v.segment(i * l, l);
    return out;
}

ModerationOperator build_D(int q, const Eigen::MatrixXi& k_pattern,
                           const Eigen::VectorXd& rho) {
    const int l = static_cast<int>(k_pattern.rows());
    const Eigen::MatrixXd r = cross_loading_matrix(k_pattern, rho);
    ModerationOperator d;
    d.q = q;
    // (I - R) is unit lower triangular for a strictly lower-triangular
    // pattern, so the inverse exists and is itself unit lower triangular
    const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(l, l) - r;
    d.block = a.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(l, l));
    return d;
}

LatentMoments latent_moments(const StructuralParams& structural, const Sample& sample,
                             const WeightMatrix& w) {
    const int l = static_cast<int>(structural.delta.size());
    const int q = sample.q();
    if (static_cast<int>(structural.alpha.size()) != l)
        throw std::invalid_argument("one structural coefficient vector per latent required");
    const int dim = q * l;

    // stacked covariate effects: block q holds alpha_l' s_ql per latent
    Eigen::VectorXd salpha(dim);
    for (int i = 0; i < q; ++i) {
        const auto& ind = sample.individuals[i];
        for (int j = 0; j < l; ++j) {
            if (ind.s[j].size() != structural.alpha[j].size())
                throw SchemaError("individual '" + ind.id +
                                  "': structural covariate length mismatch");
            salpha(i * l + j) = structural.alpha[j].dot(ind.s[j]);
        }
    }

    const SpatialPropagator s = build_S(w, structural.delta);
    const ModerationOperator d = build_D(q, structural.k_pattern, structural.rho);

    LatentMoments out;
    out.theta = d.apply(s.apply(salpha));

    if (s.is_identity()) {
        // no network coupling: covariance is block-diagonal Gamma
        out.xi = Eigen::MatrixXd::Zero(dim, dim);
        for (int i = 0; i < q; ++i)
            out.xi.block(i * l, i * l, l, l) = structural.gamma_corr;
    } else {
        // S (I kron Gamma) S' via two solves against the same factorization
        Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(dim, dim);
        for (int i = 0; i < q; ++i)
            rhs.block(i * l, i * l, l, l) = structural.gamma_corr;
        const Eigen::MatrixXd half = s.apply(rhs);          // A^{-1} (I kron Gamma)
        out.xi = s.apply(Eigen::MatrixXd(half.transpose()));  // A^{-1} half'
    }

    // moderation wraps each L x L block: xi <- (I_Q kron Dblock) xi (...)'
    for (int br = 0; br < q; ++br)
        for (int bc = 0; bc < q; ++bc)
            out.xi.block(br * l, bc * l, l, l) =
                d.block * out.xi.block(br * l, bc * l, l, l) * d.block.transpose();
    out.xi = 0.5 * (out.xi + out.xi.transpose()).eval();
    return out;
}

}  // namespace iclv
