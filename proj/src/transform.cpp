#include "iclv/transform.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "iclv/errors.hpp"

namespace iclv {

namespace {

double logit01(double p) {
    p = std::clamp(p, 1e-8, 1.0 - 1e-8);
    return std::log(p / (1.0 - p));
}

double logistic(double a) {
    if (a >= 0.0) {
        const double e = std::exp(-a);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(a);
    return e / (1.0 + e);
}

constexpr double kPi = 3.14159265358979323846;

int n_levels_of(const Eigen::VectorXd& psi) {
    return static_cast<int>(psi.size()) - 1;
}

}  // namespace

Eigen::VectorXd correlation_to_angles(const Eigen::MatrixXd& corr) {
    const int l = static_cast<int>(corr.rows());
    Eigen::LLT<Eigen::MatrixXd> llt(corr);
    if (llt.info() != Eigen::Success)
        throw ConditioningError(
            "correlation matrix is not positive definite; cannot take its "
            "Cholesky angles");
    const Eigen::MatrixXd lc = llt.matrixL();
    Eigen::VectorXd ang(l * (l - 1) / 2);
    int k = 0;
    for (int i = 1; i < l; ++i) {
        double running = 1.0;
        for (int j = 0; j < i; ++j) {
            const double c =
                std::clamp(lc(i, j) / std::max(running, 1e-300), -1.0, 1.0);
            const double phi = std::acos(c);
            ang(k++) = phi;
            running *= std::sin(phi);
        }
    }
    return ang;
}

Eigen::MatrixXd angles_to_correlation(const Eigen::VectorXd& angles, int dim) {
    if (angles.size() != dim * (dim - 1) / 2)
        throw std::invalid_argument(
            "angles_to_correlation: need dim*(dim-1)/2 angles");
    Eigen::MatrixXd lc = Eigen::MatrixXd::Zero(dim, dim);
    if (dim > 0) lc(0, 0) = 1.0;
    int k = 0;
    for (int i = 1; i < dim; ++i) {
        double running = 1.0;
        for (int j = 0; j < i; ++j) {
            const double phi = angles(k++);
            lc(i, j) = std::cos(phi) * running;
            running *= std::sin(phi);
        }
        lc(i, i) = running;
    }
    Eigen::MatrixXd corr = lc * lc.transpose();
    for (int i = 0; i < dim; ++i) corr(i, i) = 1.0;
    return 0.5 * (corr + corr.transpose());
}

ParamMask mask_none(const IclvParams& ref) {
    ParamMask m;
    m.alpha.reserve(ref.structural.alpha.size());
    for (const auto& a : ref.structural.alpha)
        m.alpha.push_back(
            Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(a.size(), false));
    m.delta = Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(
        ref.structural.delta.size(), false);
    m.gamma_corr = false;
    m.rho = Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(
        ref.structural.rho.size(), false);
    m.meas_gamma = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(
        ref.measurement.gamma.rows(), ref.measurement.gamma.cols(), false);
    m.meas_d = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(
        ref.measurement.d.rows(), ref.measurement.d.cols(), false);
    m.thresholds.assign(ref.measurement.psi.size(), false);
    m.b = Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(ref.choice.b.size(),
                                                          false);
    m.lambda = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(
        ref.choice.lambda.rows(), ref.choice.lambda.cols(), false);
    m.g = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(
        ref.choice.g.rows(), ref.choice.g.cols(), false);
    return m;
}

ParamMask mask_all(const IclvParams& ref) {
    ParamMask m = mask_none(ref);
    for (auto& a : m.alpha) a.setConstant(true);
    m.delta.setConstant(true);
    m.gamma_corr = ref.structural.gamma_corr.rows() > 1;
    m.rho.setConstant(true);
    m.meas_gamma.setConstant(true);
    m.meas_d.setConstant(true);
    m.thresholds.assign(ref.measurement.psi.size(), true);
    m.b.setConstant(true);
    m.lambda.setConstant(true);
    m.lambda.col(ref.choice.base_alternative - 1).setConstant(false);
    m.g.setConstant(true);
    return m;
}

ParamPacker::ParamPacker(IclvParams reference, ParamMask mask)
    : ref_(std::move(reference)), mask_(std::move(mask)) {
    validate(ref_);
    const auto bad = [](const char* what) {
        throw std::invalid_argument(std::string("ParamPacker: mask shape for ") +
                                    what + " does not match the reference");
    };
    if (mask_.alpha.size() != ref_.structural.alpha.size()) bad("alpha");
    for (size_t l = 0; l < mask_.alpha.size(); ++l)
        if (mask_.alpha[l].size() != ref_.structural.alpha[l].size())
            bad("alpha");
    if (mask_.delta.size() != ref_.structural.delta.size()) bad("delta");
    if (mask_.rho.size() != ref_.structural.rho.size()) bad("rho");
    if (mask_.meas_gamma.rows() != ref_.measurement.gamma.rows() ||
        mask_.meas_gamma.cols() != ref_.measurement.gamma.cols())
        bad("meas_gamma");
    if (mask_.meas_d.rows() != ref_.measurement.d.rows() ||
        mask_.meas_d.cols() != ref_.measurement.d.cols())
        bad("meas_d");
    if (mask_.thresholds.size() != ref_.measurement.psi.size())
        bad("thresholds");
    if (mask_.b.size() != ref_.choice.b.size()) bad("b");
    if (mask_.lambda.rows() != ref_.choice.lambda.rows() ||
        mask_.lambda.cols() != ref_.choice.lambda.cols())
        bad("lambda");
    if (mask_.g.rows() != ref_.choice.g.rows() ||
        mask_.g.cols() != ref_.choice.g.cols())
        bad("g");
    // The base-alternative lambda column is structurally zero; never pack it.
    mask_.lambda.col(ref_.choice.base_alternative - 1).setConstant(false);

    // Canonical slot order (all four walks below must match): alpha, delta,
    // correlation angles, rho, meas_gamma, loadings, thresholds, b, lambda, g.
    const auto tag = [](const std::string& base, int i) {
        return base + "." + std::to_string(i);
    };
    const auto tag2 = [](const std::string& base, int i, int j) {
        return base + "." + std::to_string(i) + "." + std::to_string(j);
    };
    for (size_t l = 0; l < mask_.alpha.size(); ++l)
        for (int k = 0; k < mask_.alpha[l].size(); ++k)
            if (mask_.alpha[l](k))
                names_.push_back(tag2("alpha", static_cast<int>(l), k));
    for (int l = 0; l < mask_.delta.size(); ++l)
        if (mask_.delta(l)) names_.push_back(tag("delta", l));
    if (mask_.gamma_corr) {
        const int l = static_cast<int>(ref_.structural.gamma_corr.rows());
        for (int i = 1; i < l; ++i)
            for (int j = 0; j < i; ++j) names_.push_back(tag2("corr", i, j));
    }
    for (int k = 0; k < mask_.rho.size(); ++k)
        if (mask_.rho(k)) names_.push_back(tag("rho", k));
    for (int h = 0; h < mask_.meas_gamma.rows(); ++h)
        for (int k = 0; k < mask_.meas_gamma.cols(); ++k)
            if (mask_.meas_gamma(h, k)) names_.push_back(tag2("meas_gamma", h, k));
    for (int h = 0; h < mask_.meas_d.rows(); ++h)
        for (int l = 0; l < mask_.meas_d.cols(); ++l)
            if (mask_.meas_d(h, l)) names_.push_back(tag2("loading", h, l));
    for (size_t h = 0; h < mask_.thresholds.size(); ++h)
        if (mask_.thresholds[h]) {
            const int levels = n_levels_of(ref_.measurement.psi[h]);
            for (int j = 2; j < levels; ++j)
                names_.push_back(tag2("threshold", static_cast<int>(h), j));
        }
    for (int i = 0; i < mask_.b.size(); ++i)
        if (mask_.b(i)) names_.push_back(tag("b", i));
    for (int l = 0; l < mask_.lambda.rows(); ++l)
        for (int i = 0; i < mask_.lambda.cols(); ++i)
            if (mask_.lambda(l, i)) names_.push_back(tag2("lambda", l, i));
    for (int l = 0; l < mask_.g.rows(); ++l)
        for (int i = 0; i < mask_.g.cols(); ++i)
            if (mask_.g(l, i)) names_.push_back(tag2("g", l, i));
}

Eigen::VectorXd ParamPacker::pack(const IclvParams& p) const {
    std::vector<double> out;
    out.reserve(names_.size());
    for (size_t l = 0; l < mask_.alpha.size(); ++l)
        for (int k = 0; k < mask_.alpha[l].size(); ++k)
            if (mask_.alpha[l](k)) out.push_back(p.structural.alpha[l](k));
    for (int l = 0; l < mask_.delta.size(); ++l)
        if (mask_.delta(l)) out.push_back(logit01(p.structural.delta(l)));
    if (mask_.gamma_corr) {
        const Eigen::VectorXd ang =
            correlation_to_angles(p.structural.gamma_corr);
        for (int k = 0; k < ang.size(); ++k)
            out.push_back(logit01(ang(k) / kPi));
    }
    for (int k = 0; k < mask_.rho.size(); ++k)
        if (mask_.rho(k)) out.push_back(p.structural.rho(k));
    for (int h = 0; h < mask_.meas_gamma.rows(); ++h)
        for (int k = 0; k < mask_.meas_gamma.cols(); ++k)
            if (mask_.meas_gamma(h, k)) out.push_back(p.measurement.gamma(h, k));
    for (int h = 0; h < mask_.meas_d.rows(); ++h)
        for (int l = 0; l < mask_.meas_d.cols(); ++l)
            if (mask_.meas_d(h, l)) out.push_back(p.measurement.d(h, l));
    for (size_t h = 0; h < mask_.thresholds.size(); ++h)
        if (mask_.thresholds[h]) {
            const Eigen::VectorXd& psi = p.measurement.psi[h];
            const int levels = n_levels_of(psi);
            for (int j = 2; j < levels; ++j) {
                const double inc = psi(j) - (j == 2 ? 0.0 : psi(j - 1));
                out.push_back(std::log(std::max(inc, 1e-12)));
            }
        }
    for (int i = 0; i < mask_.b.size(); ++i)
        if (mask_.b(i)) out.push_back(p.choice.b(i));
    for (int l = 0; l < mask_.lambda.rows(); ++l)
        for (int i = 0; i < mask_.lambda.cols(); ++i)
            if (mask_.lambda(l, i)) out.push_back(p.choice.lambda(l, i));
    for (int l = 0; l < mask_.g.rows(); ++l)
        for (int i = 0; i < mask_.g.cols(); ++i)
            if (mask_.g(l, i)) out.push_back(p.choice.g(l, i));
    Eigen::VectorXd v(static_cast<Eigen::Index>(out.size()));
    for (size_t i = 0; i < out.size(); ++i)
        v(static_cast<Eigen::Index>(i)) = out[i];
    return v;
}

IclvParams ParamPacker::unpack(const Eigen::VectorXd& packed) const {
    if (packed.size() != dim())
        throw std::invalid_argument("unpack: packed vector has wrong length");
    IclvParams p = ref_;
    int at = 0;
    const auto next = [&]() { return packed(at++); };
    for (size_t l = 0; l < mask_.alpha.size(); ++l)
        for (int k = 0; k < mask_.alpha[l].size(); ++k)
            if (mask_.alpha[l](k)) p.structural.alpha[l](k) = next();
    for (int l = 0; l < mask_.delta.size(); ++l)
        if (mask_.delta(l)) p.structural.delta(l) = logistic(next());
    if (mask_.gamma_corr) {
        const int l = static_cast<int>(ref_.structural.gamma_corr.rows());
        Eigen::VectorXd ang(l * (l - 1) / 2);
        for (int k = 0; k < ang.size(); ++k) ang(k) = kPi * logistic(next());
        p.structural.gamma_corr = angles_to_correlation(ang, l);
    }
    for (int k = 0; k < mask_.rho.size(); ++k)
        if (mask_.rho(k)) p.structural.rho(k) = next();
    for (int h = 0; h < mask_.meas_gamma.rows(); ++h)
        for (int k = 0; k < mask_.meas_gamma.cols(); ++k)
            if (mask_.meas_gamma(h, k)) p.measurement.gamma(h, k) = next();
    for (int h = 0; h < mask_.meas_d.rows(); ++h)
        for (int l = 0; l < mask_.meas_d.cols(); ++l)
            if (mask_.meas_d(h, l)) p.measurement.d(h, l) = next();
    for (size_t h = 0; h < mask_.thresholds.size(); ++h)
        if (mask_.thresholds[h]) {
            Eigen::VectorXd& psi = p.measurement.psi[h];
            const int levels = n_levels_of(psi);
            double prev = 0.0;
            for (int j = 2; j < levels; ++j) {
                prev += std::exp(next());
                psi(j) = prev;
            }
        }
    for (int i = 0; i < mask_.b.size(); ++i)
        if (mask_.b(i)) p.choice.b(i) = next();
    for (int l = 0; l < mask_.lambda.rows(); ++l)
        for (int i = 0; i < mask_.lambda.cols(); ++i)
            if (mask_.lambda(l, i)) p.choice.lambda(l, i) = next();
    for (int l = 0; l < mask_.g.rows(); ++l)
        for (int i = 0; i < mask_.g.cols(); ++i)
            if (mask_.g(l, i)) p.choice.g(l, i) = next();
    return p;
}

Eigen::VectorXd ParamPacker::natural(const IclvParams& p) const {
    std::vector<double> out;
    out.reserve(names_.size());
    for (size_t l = 0; l < mask_.alpha.size(); ++l)
        for (int k = 0; k < mask_.alpha[l].size(); ++k)
            if (mask_.alpha[l](k)) out.push_back(p.structural.alpha[l](k));
    for (int l = 0; l < mask_.delta.size(); ++l)
        if (mask_.delta(l)) out.push_back(p.structural.delta(l));
    if (mask_.gamma_corr) {
        const int l = static_cast<int>(p.structural.gamma_corr.rows());
        for (int i = 1; i < l; ++i)
            for (int j = 0; j < i; ++j)
                out.push_back(p.structural.gamma_corr(i, j));
    }
    for (int k = 0; k < mask_.rho.size(); ++k)
        if (mask_.rho(k)) out.push_back(p.structural.rho(k));
    for (int h = 0; h < mask_.meas_gamma.rows(); ++h)
        for (int k = 0; k < mask_.meas_gamma.cols(); ++k)
            if (mask_.meas_gamma(h, k)) out.push_back(p.measurement.gamma(h, k));
    for (int h = 0; h < mask_.meas_d.rows(); ++h)
        for (int l = 0; l < mask_.meas_d.cols(); ++l)
            if (mask_.meas_d(h, l)) out.push_back(p.measurement.d(h, l));
    for (size_t h = 0; h < mask_.thresholds.size(); ++h)
        if (mask_.thresholds[h]) {
            const Eigen::VectorXd& psi = p.measurement.psi[h];
            const int levels = n_levels_of(psi);
            for (int j = 2; j < levels; ++j) out.push_back(psi(j));
        }
    for (int i = 0; i < mask_.b.size(); ++i)
        if (mask_.b(i)) out.push_back(p.choice.b(i));
    for (int l = 0; l < mask_.lambda.rows(); ++l)
        for (int i = 0; i < mask_.lambda.cols(); ++i)
            if (mask_.lambda(l, i)) out.push_back(p.choice.lambda(l, i));
    for (int l = 0; l < mask_.g.rows(); ++l)
        for (int i = 0; i < mask_.g.cols(); ++i)
            if (mask_.g(l, i)) out.push_back(p.choice.g(l, i));
    Eigen::VectorXd v(static_cast<Eigen::Index>(out.size()));
    for (size_t i = 0; i < out.size(); ++i)
        v(static_cast<Eigen::Index>(i)) = out[i];
    return v;
}

}  // namespace iclv
