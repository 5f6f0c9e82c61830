#include "iclv/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "iclv/errors.hpp"
#include "iclv/moments.hpp"
#include "iclv/normal.hpp"

namespace iclv {

namespace {

constexpr std::uint64_t kTagAdopt = 1;
constexpr std::uint64_t kTagSatisfied = 2;
constexpr std::uint64_t kTagMedia = 3;

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Unweighted adopted fraction among each agent's ties.
Eigen::VectorXd network_shares(const std::vector<Agent>& agents,
                               const WeightMatrix& w) {
    const int n = static_cast<int>(agents.size());
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
        const auto& ties = w.ties[static_cast<size_t>(i)];
        if (ties.empty()) continue;
        int adopted = 0;
        for (const auto& [nbr, wt] : ties)
            if (agents[static_cast<size_t>(nbr)].adopted) ++adopted;
        out(i) = static_cast<double>(adopted) / static_cast<double>(ties.size());
    }
    return out;
}

void set_slot(Eigen::VectorXd& s, int slot, double value) {
    if (slot < 0) return;
    if (slot >= s.size())
        throw ConfigError("structural covariate slot " + std::to_string(slot) +
                          " is outside the covariate vector");
    s(slot) = value;
}

}  // namespace

void validate(const ScenarioConfig& cfg) {
    if (!(cfg.starting_price > 0.0))
        throw ConfigError("starting price must be positive");
    if (!(cfg.yearly_discount_rate >= 0.0 && cfg.yearly_discount_rate < 1.0))
        throw ConfigError("yearly discount rate must lie in [0,1)");
    if (!(cfg.proportion_satisfied >= 0.0 && cfg.proportion_satisfied <= 1.0))
        throw ConfigError("proportion of satisfied agents must lie in [0,1]");
    if (!(cfg.curvature_crash > 0.0) || !(cfg.curvature_legal > 0.0))
        throw ConfigError("curvature values must be positive");
    if (!(cfg.crash_upper > 0.0) || !(cfg.legal_upper > 0.0))
        throw ConfigError("information ceilings must be positive");
    if (cfg.horizon_years < 1) throw ConfigError("horizon must be at least one year");
    if (cfg.seeds.empty()) throw ConfigError("at least one seed required");
}

double price_at(const ScenarioConfig& cfg, int t) {
    if (t < 1) throw std::invalid_argument("year index starts at 1");
    return cfg.starting_price *
           std::pow(1.0 - cfg.yearly_discount_rate, t - 1);
}

double info_value(double upper_limit, double curvature, int t) {
    if (!(upper_limit > 0.0) || !(curvature > 0.0) || t < 1)
        throw std::invalid_argument("info_value needs positive ceiling, "
                                    "curvature and a year index >= 1");
    const double raw = upper_limit -
                       std::sqrt(upper_limit) * (static_cast<double>(t) / curvature) -
                       1.0;
    return std::max(raw, 0.0);
}

double media_fraction(int t) {
    if (t < 1) throw std::invalid_argument("year index starts at 1");
    return std::min(2.0 * std::sqrt(static_cast<double>(t)) + 2.0 * t + 1.0,
                    100.0);
}

double sim_uniform(std::uint64_t seed, std::uint64_t tag, std::uint64_t a,
                   std::uint64_t b) {
    const std::uint64_t h = mix64(seed ^ mix64(tag ^ mix64(a ^ mix64(b))));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

void assign_info_sources(std::vector<Agent>& agents, const SimulationModel& model,
                         const Eigen::VectorXd& network_share, int t,
                         double crash_value, double legal_value,
                         std::uint64_t seed) {
    const int n = static_cast<int>(agents.size());

    // media reach accumulates along a seed-fixed random order; because the
    // target count is non-decreasing in t, the reached set only ever grows
    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> key(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
        key[static_cast<size_t>(i)] =
            sim_uniform(seed, kTagMedia, static_cast<std::uint64_t>(i), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double ka = key[static_cast<size_t>(a)];
        const double kb = key[static_cast<size_t>(b)];
        return ka != kb ? ka < kb : a < b;
    });
    const long target =
        std::lround(media_fraction(t) / 100.0 * static_cast<double>(n));
    for (long j = 0; j < target && j < n; ++j)
        agents[static_cast<size_t>(order[static_cast<size_t>(j)])].media_reached =
            true;

    for (int i = 0; i < n; ++i) {
        Agent& a = agents[static_cast<size_t>(i)];
        if (network_share(i) > 0.40) a.friend_reached = true;
        Eigen::VectorXd& s0 = a.s.front();
        set_slot(s0, model.structural.crash,
                 crash_value * model.structural.crash_scale);
        set_slot(s0, model.structural.legal, legal_value);
        set_slot(s0, model.structural.src_friend, a.friend_reached ? 1.0 : 0.0);
        set_slot(s0, model.structural.src_media, a.media_reached ? 1.0 : 0.0);
    }
}

void evaluate_latents(std::vector<Agent>& agents, const SimulationModel& model,
                      const WeightMatrix& w, bool independent) {
    const int n = static_cast<int>(agents.size());
    const StructuralParams& st = model.params.structural;
    const int l_count = static_cast<int>(st.alpha.size());
    const Eigen::MatrixXd r = cross_loading_matrix(st.k_pattern, st.rho);

    Eigen::MatrixXd z(n, l_count);
    for (int l = 0; l < l_count; ++l) {
        Eigen::VectorXd rhs(n);
        for (int i = 0; i < n; ++i) {
            const Agent& a = agents[static_cast<size_t>(i)];
            double v = st.alpha[static_cast<size_t>(l)].dot(
                a.s[static_cast<size_t>(l)]);
            for (int m = 0; m < l; ++m) v += r(l, m) * z(i, m);
            rhs(i) = v;
        }

        // adopters with a satisfaction verdict broadcast their pinned WOM;
        // everyone else solves the network system around those fixed values
        std::vector<char> pinned(static_cast<size_t>(n), 0);
        if (l == 0 && !independent) {
            for (int i = 0; i < n; ++i)
                if (agents[static_cast<size_t>(i)].satisfied.has_value())
                    pinned[static_cast<size_t>(i)] = 1;
        }

        const double delta = independent ? 0.0 : st.delta(l);
        if (delta == 0.0) {
            for (int i = 0; i < n; ++i)
                z(i, l) = pinned[static_cast<size_t>(i)]
                              ? agents[static_cast<size_t>(i)].wom
                              : rhs(i);
        } else {
            std::vector<Eigen::Triplet<double>> trip;
            trip.reserve(static_cast<size_t>(n) * (static_cast<size_t>(w.k) + 1));
            for (int i = 0; i < n; ++i) {
                trip.emplace_back(i, i, 1.0);
                if (pinned[static_cast<size_t>(i)]) {
                    rhs(i) = agents[static_cast<size_t>(i)].wom;
                    continue;
                }
                for (const auto& [nbr, wt] : w.ties[static_cast<size_t>(i)])
                    trip.emplace_back(i, nbr, -delta * wt);
            }
            Eigen::SparseMatrix<double> sys(n, n);
            sys.setFromTriplets(trip.begin(), trip.end());
            sys.makeCompressed();
            Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
            lu.compute(sys);
            if (lu.info() != Eigen::Success)
                throw ConditioningError(
                    "latent network system is singular in simulation");
            z.col(l) = lu.solve(rhs);
        }
    }

    for (int i = 0; i < n; ++i) {
        Agent& a = agents[static_cast<size_t>(i)];
        a.wom = z(i, 0);
        if (l_count > 1) a.risk_aversion = z(i, 1);
    }
}

int adoption_step(std::vector<Agent>& agents, const SimulationModel& model,
                  const Eigen::VectorXd& network_share, double city_share,
                  double av_price, int t, std::uint64_t seed) {
    const ChoiceParams& ch = model.params.choice;
    const AttributeSlots& at = model.attributes;
    const int m = static_cast<int>(ch.b.size());
    const int n_alt = static_cast<int>(ch.lambda.cols());
    const int l_count = static_cast<int>(ch.lambda.rows());
    if (n_alt != 2)
        throw ConfigError("the purchase simulation needs a binary choice model");
    const int base = 1 - at.av_alternative;

    int new_adopters = 0;
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(m, n_alt);
    Eigen::VectorXd z(l_count);
    for (size_t i = 0; i < agents.size(); ++i) {
        Agent& a = agents[i];
        if (a.adopted) continue;
        x.col(at.av_alternative).setZero();
        auto cell = [&](int slot, double value) {
            if (slot < 0) return;
            if (slot >= m)
                throw ConfigError("attribute slot " + std::to_string(slot) +
                                  " is outside the attribute vector");
            x(slot, at.av_alternative) = value;
        };
        cell(at.constant, 1.0);
        cell(at.social, network_share(static_cast<Eigen::Index>(i)));
        cell(at.city, city_share);
        if (!(a.cv_price > 0.0))
            throw ConfigError("agent " + a.id +
                              " has no positive conventional-vehicle price");
        cell(at.price_ratio, av_price / a.cv_price);

        z.setZero();
        z(0) = a.wom;
        if (l_count > 1) z(1) = a.risk_aversion;
        const Eigen::VectorXd v = choice_utility_systematic(ch, z, x);
        const double p = std_normal_cdf(v(at.av_alternative) - v(base));
        const double u =
            0.5 + 0.5 * sim_uniform(seed, kTagAdopt,
                                    static_cast<std::uint64_t>(i),
                                    static_cast<std::uint64_t>(t));
        if (p > u) {
            a.adopted = true;
            a.adoption_year = t;
            ++new_adopters;
        }
    }
    return new_adopters;
}

void post_purchase_update(std::vector<Agent>& agents, const WeightMatrix& w,
                          double proportion_satisfied, int t,
                          std::uint64_t seed) {
    const int n = static_cast<int>(agents.size());
    for (int i = 0; i < n; ++i) {
        Agent& a = agents[static_cast<size_t>(i)];
        if (a.adopted && a.adoption_year == t - 1 && !a.satisfied.has_value())
            a.satisfied = sim_uniform(seed, kTagSatisfied,
                                      static_cast<std::uint64_t>(i), 0) <
                          proportion_satisfied;
    }

    // snapshot first so the override of one adopter cannot feed another's
    // within the same year
    Eigen::VectorXd womvec(n);
    for (int i = 0; i < n; ++i) womvec(i) = agents[static_cast<size_t>(i)].wom;
    for (int i = 0; i < n; ++i) {
        Agent& a = agents[static_cast<size_t>(i)];
        if (!a.satisfied.has_value()) continue;
        const auto& ties = w.ties[static_cast<size_t>(i)];
        if (ties.empty()) continue;
        double best = *a.satisfied ? -std::numeric_limits<double>::infinity()
                                   : std::numeric_limits<double>::infinity();
        for (const auto& [nbr, wt] : ties) {
            const double v = womvec(nbr);
            best = *a.satisfied ? std::max(best, v) : std::min(best, v);
        }
        a.wom = best;
    }
}

ScenarioResult run_scenario(const ScenarioConfig& cfg,
                            const SimulationModel& model,
                            const std::vector<Agent>& initial_agents,
                            const WeightMatrix& w) {
    validate(cfg);
    validate(model.params);
    const int n = static_cast<int>(initial_agents.size());
    if (n == 0) throw ConfigError("simulation needs at least one agent");
    if (w.q != n)
        throw ConfigError("tie matrix covers " + std::to_string(w.q) +
                          " agents but the population has " + std::to_string(n));
    const size_t l_count = model.params.structural.alpha.size();
    for (const Agent& a : initial_agents) {
        if (a.s.size() != l_count)
            throw ConfigError("agent " + a.id +
                              " carries the wrong number of covariate vectors");
        for (size_t l = 0; l < l_count; ++l)
            if (a.s[l].size() != model.params.structural.alpha[l].size())
                throw ConfigError("agent " + a.id +
                                  " covariates do not match the model layout");
        if (!(a.cv_price > 0.0))
            throw ConfigError("agent " + a.id +
                              " has no positive conventional-vehicle price");
    }

    ScenarioResult result;
    result.cfg = cfg;
    result.runs.reserve(cfg.seeds.size());

    for (const std::uint64_t seed : cfg.seeds) {
        SeedTrajectory run;
        run.seed = seed;
        run.agents = initial_agents;
        run.years.reserve(static_cast<size_t>(cfg.horizon_years));

        Eigen::VectorXd network_share = Eigen::VectorXd::Zero(n);
        double city_share = 0.0;
        for (int t = 1; t <= cfg.horizon_years; ++t) {
            const double av_price = price_at(cfg, t);
            const double crash =
                info_value(cfg.crash_upper, cfg.curvature_crash, t);
            const double legal =
                info_value(cfg.legal_upper, cfg.curvature_legal, t);

            assign_info_sources(run.agents, model, network_share, t, crash,
                                legal, seed);
            evaluate_latents(run.agents, model, w, cfg.independent);
            adoption_step(run.agents, model, network_share, city_share,
                          av_price, t, seed);
            if (!cfg.independent)
                post_purchase_update(run.agents, w, cfg.proportion_satisfied,
                                     t, seed);

            int adopted = 0;
            for (const Agent& a : run.agents)
                if (a.adopted) ++adopted;
            city_share = static_cast<double>(adopted) / static_cast<double>(n);
            network_share = network_shares(run.agents, w);

            YearRecord rec;
            rec.year = t;
            rec.city_share = city_share;
            rec.av_price = av_price;
            rec.crash_value = crash;
            rec.legal_value = legal;
            rec.media_fraction = media_fraction(t);
            rec.network_share = network_share;
            run.years.push_back(std::move(rec));
        }
        result.runs.push_back(std::move(run));
    }

    const int horizon = cfg.horizon_years;
    const double n_seeds = static_cast<double>(cfg.seeds.size());
    result.mean_share.assign(static_cast<size_t>(horizon), 0.0);
    result.sd_share.assign(static_cast<size_t>(horizon), 0.0);
    for (int t = 0; t < horizon; ++t) {
        double sum = 0.0;
        for (const auto& run : result.runs)
            sum += run.years[static_cast<size_t>(t)].city_share;
        const double mean = sum / n_seeds;
        double ss = 0.0;
        for (const auto& run : result.runs) {
            const double d =
                run.years[static_cast<size_t>(t)].city_share - mean;
            ss += d * d;
        }
        result.mean_share[static_cast<size_t>(t)] = mean;
        result.sd_share[static_cast<size_t>(t)] = std::sqrt(ss / n_seeds);
    }

    // interpolated first crossing of one half on the mean trajectory,
    // counting from a zero share at year zero
    result.years_to_half = std::numeric_limits<double>::quiet_NaN();
    double prev = 0.0;
    for (int t = 0; t < horizon; ++t) {
        const double cur = result.mean_share[static_cast<size_t>(t)];
        if (cur >= 0.5) {
            result.years_to_half =
                static_cast<double>(t) + (0.5 - prev) / (cur - prev);
            break;
        }
        prev = cur;
    }
    return result;
}

}  // namespace iclv
