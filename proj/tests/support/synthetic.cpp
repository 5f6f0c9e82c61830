#include "support/synthetic.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "iclv/moments.hpp"
#include "iclv/spatial.hpp"

namespace testsup {

namespace {
const double kInf = std::numeric_limits<double>::infinity();
}

iclv::IclvParams make_params(const FixtureDims& dims, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coef(-0.5, 0.5);
    std::uniform_real_distribution<double> load(0.5, 1.2);
    const int l = dims.n_latents;
    const int h = dims.n_indicators;

    iclv::IclvParams p;
    auto& st = p.structural;
    for (int i = 0; i < l; ++i) {
        Eigen::VectorXd a(dims.structural_covariates[i]);
        for (int j = 0; j < a.size(); ++j) a(j) = coef(rng);
        st.alpha.push_back(a);
    }
    st.delta = Eigen::VectorXd::Zero(l);
    st.delta(0) = 0.25;
    st.gamma_corr = Eigen::MatrixXd::Identity(l, l);
    st.k_pattern = Eigen::MatrixXi::Zero(l, l);
    if (l >= 2) {
        st.gamma_corr(0, 1) = st.gamma_corr(1, 0) = 0.35;
        st.k_pattern(1, 0) = 1;
        st.rho = Eigen::VectorXd::Constant(1, -0.8);
    } else {
        st.rho = Eigen::VectorXd(0);
    }

    auto& me = p.measurement;
    me.gamma = Eigen::MatrixXd::Zero(h, dims.n_meas_covariates);
    for (int r = 0; r < h; ++r) me.gamma(r, 0) = 1.5 + 0.3 * coef(rng);
    me.d = Eigen::MatrixXd::Zero(h, l);
    for (int r = 0; r < h; ++r) {
        // split indicators across latents, one loading per indicator
        const int owner = (r * l) / h;
        me.d(r, owner) = load(rng);
    }
    for (int r = 0; r < h; ++r) {
        Eigen::VectorXd psi(dims.n_levels + 1);
        psi(0) = -kInf;
        psi(1) = 0.0;
        for (int j = 2; j < dims.n_levels; ++j)
            psi(j) = psi(j - 1) + 0.8 + 0.3 * std::fabs(coef(rng));
        psi(dims.n_levels) = kInf;
        me.psi.push_back(psi);
    }

    auto& ch = p.choice;
    ch.b = Eigen::VectorXd(dims.n_attributes);
    ch.b(0) = 0.9;
    for (int m = 1; m < dims.n_attributes; ++m) ch.b(m) = (m == 1 ? -2.4 : 1.0) + coef(rng);
    ch.base_alternative = 1;
    ch.lambda = Eigen::MatrixXd::Zero(l, dims.n_alternatives);
    for (int i = 1; i < dims.n_alternatives; ++i)
        for (int r = 0; r < l; ++r) ch.lambda(r, i) = 0.6 * coef(rng) + (r == 0 ? 0.5 : -0.4);
    ch.g = Eigen::MatrixXd::Zero(l, dims.n_attributes);
    ch.g(0, 1) = 0.6;
    if (dims.n_attributes > 3) ch.g(0, 3) = 0.35;
    ch.lambda_diff = Eigen::MatrixXd::Identity(dims.n_alternatives - 1,
                                               dims.n_alternatives - 1);
    iclv::validate(p);
    return p;
}

iclv::Sample make_covariates(const FixtureDims& dims, int q, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    iclv::Sample s;
    s.n_latents = dims.n_latents;
    s.n_indicators = dims.n_indicators;
    s.n_levels = dims.n_levels;
    s.n_tasks = dims.n_tasks;
    s.n_alternatives = dims.n_alternatives;
    s.n_attributes = dims.n_attributes;
    s.n_meas_covariates = dims.n_meas_covariates;

    for (int i = 0; i < q; ++i) {
        iclv::Individual ind;
        ind.id = "syn" + std::to_string(i);
        for (int j = 0; j < dims.n_latents; ++j) {
            Eigen::VectorXd sv(dims.structural_covariates[j]);
            for (int f = 0; f < sv.size(); ++f)
                sv(f) = (f == 0) ? 1.0 : (unit(rng) < 0.5 ? 0.0 : 1.0) + 0.2 * gauss(rng);
            ind.s.push_back(sv);
        }
        ind.x_star = Eigen::MatrixXd::Ones(dims.n_indicators, dims.n_meas_covariates);
        ind.y = Eigen::VectorXi::Ones(dims.n_indicators);
        for (int t = 0; t < dims.n_tasks; ++t) {
            iclv::ChoiceTask task;
            task.x = Eigen::MatrixXd::Zero(dims.n_attributes, dims.n_alternatives);
            const int last = dims.n_alternatives - 1;
            task.x(0, last) = 1.0;  // alternative-specific constant
            for (int m = 1; m < dims.n_attributes; ++m)
                task.x(m, last) = (m == 1) ? 0.8 + 1.2 * unit(rng) : unit(rng);
            task.chosen = 1;
            ind.tasks.push_back(task);
        }
        s.individuals.push_back(std::move(ind));
    }
    return s;
}

void simulate_responses(const iclv::IclvParams& params, const iclv::WeightMatrix& w,
                        iclv::Sample& sample, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int l = sample.n_latents;
    const int q = sample.q();

    // latent draw: z = D S (s alpha + eta), eta_q ~ N(0, Gamma)
    const Eigen::MatrixXd gamma_chol =
        Eigen::LLT<Eigen::MatrixXd>(params.structural.gamma_corr).matrixL();
    Eigen::VectorXd shocks(q * l);
    for (int i = 0; i < q; ++i) {
        Eigen::VectorXd e(l);
        for (int j = 0; j < l; ++j) e(j) = gauss(rng);
        shocks.segment(i * l, l) = gamma_chol * e;
    }
    for (int i = 0; i < q; ++i)
        for (int j = 0; j < l; ++j)
            shocks(i * l + j) += params.structural.alpha[j].dot(sample.individuals[i].s[j]);
    const auto s_op = iclv::build_S(w, params.structural.delta);
    const auto d_op =
        iclv::build_D(q, params.structural.k_pattern, params.structural.rho);
    const Eigen::VectorXd z = d_op.apply(s_op.apply(shocks));

    // kernel-error factor for the task utilities (degenerate first component)
    const int n_alt = sample.n_alternatives;
    Eigen::MatrixXd lam_chol = Eigen::MatrixXd::Zero(n_alt, n_alt);
    if (n_alt > 1)
        lam_chol.bottomRightCorner(n_alt - 1, n_alt - 1) =
            Eigen::LLT<Eigen::MatrixXd>(params.choice.lambda_diff).matrixL();

    for (int i = 0; i < q; ++i) {
        auto& ind = sample.individuals[i];
        const Eigen::VectorXd zq = z.segment(i * l, l);
        for (int h = 0; h < sample.n_indicators; ++h) {
            const double ystar = params.measurement.gamma.row(h).dot(ind.x_star.row(h)) +
                                 params.measurement.d.row(h).dot(zq) + gauss(rng);
            const auto& psi = params.measurement.psi[h];
            int level = 1;
            while (level < sample.n_levels && ystar > psi(level)) ++level;
            ind.y(h) = level;
        }
        for (auto& task : ind.tasks) {
            Eigen::VectorXd u = iclv::choice_utility_systematic(params.choice, zq, task.x);
            Eigen::VectorXd e(n_alt);
            for (int a = 0; a < n_alt; ++a) e(a) = gauss(rng);
            u += lam_chol * e;
            int best = 0;
            for (int a = 1; a < n_alt; ++a)
                if (u(a) > u(best)) best = a;
            task.chosen = best + 1;
        }
    }
}

std::vector<iclv::IndividualProfile> synthetic_profiles(int q, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> age(18.0, 80.0);
    std::uniform_real_distribution<double> income(20.0, 250.0);
    std::uniform_int_distribution<int> four(0, 3);
    const char* edus[] = {"hs", "some_college", "bachelor", "graduate"};
    const char* eths[] = {"white", "black", "hispanic", "asian"};
    std::vector<iclv::IndividualProfile> out;
    for (int i = 0; i < q; ++i) {
        iclv::IndividualProfile p;
        p.id = "syn" + std::to_string(i);
        p.has_centroid = true;
        p.lat = 36.0 + std::generate_canonical<double, 53>(rng);
        p.lon = -87.0 + std::generate_canonical<double, 53>(rng);
        p.names = {"age", "income", "gender", "education", "ethnicity"};
        p.types = {iclv::AttrType::continuous, iclv::AttrType::continuous,
                   iclv::AttrType::categorical, iclv::AttrType::categorical,
                   iclv::AttrType::categorical};
        p.values = {age(rng), income(rng), 0.0, 0.0, 0.0};
        p.labels = {"", "", four(rng) % 2 ? "female" : "male", edus[four(rng)],
                    eths[four(rng)]};
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace testsup
