#include "iclv/io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <utility>

#include "iclv/errors.hpp"
#include "iclv/textio.hpp"
#include "iclv/version.hpp"

namespace iclv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int find_name(const std::vector<std::string>& names, const std::string& name) {
    for (size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return static_cast<int>(i);
    return -1;
}

int require_latent(const std::vector<std::string>& names, const std::string& name,
                   const std::string& ctx) {
    const int idx = find_name(names, name);
    if (idx < 0)
        throw SchemaError(ctx + ": unknown latent '" + name +
                          "' (latents are declared by structural rows)");
    return idx;
}

bool parse_fixed(const std::string& text, const std::string& ctx) {
    if (text == "0") return false;
    if (text == "1") return true;
    throw SchemaError(ctx + ": fixed must be 0 or 1, got '" + text + "'");
}

}  // namespace

ParameterFile load_parameters(const std::string& path) {
    const CsvTable t = read_csv(path);
    const int c_block = t.require_column("block", path);
    const int c_label = t.require_column("label", path);
    const int c_latent = t.require_column("latent", path);
    const int c_value = t.require_column("value", path);
    const int c_fixed = t.require_column("fixed", path);

    ParameterFile pf;
    pf.comments = t.comments;

    struct Row {
        std::string block, label, latent, ctx;
        double value = 0.0;
        bool fixed = true;
    };
    std::vector<Row> rows;
    rows.reserve(t.rows.size());
    for (size_t r = 0; r < t.rows.size(); ++r) {
        Row row;
        row.block = t.rows[r][static_cast<size_t>(c_block)];
        row.label = t.rows[r][static_cast<size_t>(c_label)];
        row.latent = t.rows[r][static_cast<size_t>(c_latent)];
        row.ctx = path + " row " + std::to_string(r + 1) + " (" + row.block +
                  "," + row.label + ")";
        row.value = parse_number(t.rows[r][static_cast<size_t>(c_value)], row.ctx);
        row.fixed = parse_fixed(t.rows[r][static_cast<size_t>(c_fixed)], row.ctx);
        rows.push_back(std::move(row));
    }

    // Discovery sweep: latent order from structural rows, indicator order
    // from the measurement blocks, attribute order from attribute rows,
    // meta settings.  Values are kept alongside so one container owns both.
    int meta_levels = 0;
    int n_alternatives = 2;
    int base_alternative = 1;
    double crash_scale = 0.01;
    std::set<std::string> meta_seen;
    std::vector<std::vector<double>> alpha_vals;
    std::vector<std::vector<bool>> alpha_free;
    std::vector<double> b_vals;
    std::vector<bool> b_free;
    static const std::set<std::string> known_blocks = {
        "meta",     "structural",     "delta",     "cross",
        "corr",     "loading",        "meas_intercept",
        "threshold", "attribute",     "choice_loading", "interaction"};
    for (const Row& row : rows) {
        if (!known_blocks.count(row.block))
            throw SchemaError(row.ctx + ": unknown block '" + row.block + "'");
        if (row.block == "meta") {
            if (!meta_seen.insert(row.label).second)
                throw SchemaError(row.ctx + ": duplicate meta setting");
            if (row.label == "n_levels")
                meta_levels = static_cast<int>(row.value);
            else if (row.label == "n_alternatives")
                n_alternatives = static_cast<int>(row.value);
            else if (row.label == "base_alternative")
                base_alternative = static_cast<int>(row.value);
            else if (row.label == "crash_scale")
                crash_scale = row.value;
            else
                throw SchemaError(row.ctx + ": unknown meta setting");
        } else if (row.block == "structural") {
            int li = find_name(pf.latent_names, row.latent);
            if (li < 0) {
                if (row.latent.empty())
                    throw SchemaError(row.ctx + ": structural rows need a latent");
                li = static_cast<int>(pf.latent_names.size());
                pf.latent_names.push_back(row.latent);
                pf.structural_names.emplace_back();
                alpha_vals.emplace_back();
                alpha_free.emplace_back();
            }
            auto& names = pf.structural_names[static_cast<size_t>(li)];
            if (find_name(names, row.label) >= 0)
                throw SchemaError(row.ctx + ": duplicate covariate for latent '" +
                                  row.latent + "'");
            names.push_back(row.label);
            alpha_vals[static_cast<size_t>(li)].push_back(row.value);
            alpha_free[static_cast<size_t>(li)].push_back(!row.fixed);
        } else if (row.block == "loading" || row.block == "meas_intercept" ||
                   row.block == "threshold") {
            if (find_name(pf.indicator_names, row.label) < 0)
                pf.indicator_names.push_back(row.label);
        } else if (row.block == "attribute") {
            if (find_name(pf.attribute_names, row.label) >= 0)
                throw SchemaError(row.ctx + ": duplicate attribute");
            pf.attribute_names.push_back(row.label);
            b_vals.push_back(row.value);
            b_free.push_back(!row.fixed);
        }
    }

    const int L = static_cast<int>(pf.latent_names.size());
    const int H = static_cast<int>(pf.indicator_names.size());
    const int M = static_cast<int>(pf.attribute_names.size());
    if (L == 0) throw SchemaError(path + ": no structural rows, no latents");
    if (H == 0) throw SchemaError(path + ": no measurement rows, no indicators");
    if (M == 0) throw SchemaError(path + ": no attribute rows");
    if (n_alternatives < 2)
        throw SchemaError(path + ": n_alternatives must be at least 2");
    if (base_alternative < 1 || base_alternative > n_alternatives)
        throw SchemaError(path + ": base_alternative outside 1..n_alternatives");

    // Resolution sweep over the latent/indicator-referencing blocks.
    std::vector<double> delta_vals(static_cast<size_t>(L), 0.0);
    std::vector<bool> delta_free(static_cast<size_t>(L), false);
    std::set<int> delta_seen;
    std::map<std::pair<int, int>, std::pair<double, bool>> cross_cells;
    Eigen::MatrixXd corr_vals = Eigen::MatrixXd::Identity(L, L);
    std::set<std::pair<int, int>> corr_seen;
    int corr_free = -1;  // -1 unset, else 0/1; all corr rows must agree
    Eigen::MatrixXd d_vals = Eigen::MatrixXd::Zero(H, L);
    Eigen::MatrixXd d_free = Eigen::MatrixXd::Zero(H, L);
    std::set<std::pair<int, int>> d_seen;
    std::vector<double> icpt_vals(static_cast<size_t>(H), 0.0);
    std::vector<bool> icpt_free(static_cast<size_t>(H), false);
    std::set<int> icpt_seen;
    std::vector<std::map<int, std::pair<double, bool>>> th_cells(
        static_cast<size_t>(H));
    std::vector<double> lam_vals(static_cast<size_t>(L), 0.0);
    std::vector<bool> lam_free(static_cast<size_t>(L), false);
    std::set<int> lam_seen;
    Eigen::MatrixXd g_vals = Eigen::MatrixXd::Zero(L, M);
    Eigen::MatrixXd g_free = Eigen::MatrixXd::Zero(L, M);
    std::set<std::pair<int, int>> g_seen;

    for (const Row& row : rows) {
        if (row.block == "delta") {
            const int li = require_latent(pf.latent_names, row.latent, row.ctx);
            if (!delta_seen.insert(li).second)
                throw SchemaError(row.ctx + ": duplicate delta row");
            delta_vals[static_cast<size_t>(li)] = row.value;
            delta_free[static_cast<size_t>(li)] = !row.fixed;
        } else if (row.block == "cross") {
            const int src = require_latent(pf.latent_names, row.label, row.ctx);
            const int tgt = require_latent(pf.latent_names, row.latent, row.ctx);
            if (tgt <= src)
                throw SchemaError(row.ctx +
                                  ": cross rows load an earlier latent onto a "
                                  "later one (source must come first)");
            if (!cross_cells.emplace(std::make_pair(tgt, src),
                                     std::make_pair(row.value, !row.fixed))
                     .second)
                throw SchemaError(row.ctx + ": duplicate cross row");
        } else if (row.block == "corr") {
            const int a = require_latent(pf.latent_names, row.label, row.ctx);
            const int b = require_latent(pf.latent_names, row.latent, row.ctx);
            if (a == b) throw SchemaError(row.ctx + ": corr needs two latents");
            const auto key = std::minmax(a, b);
            if (!corr_seen.insert(key).second)
                throw SchemaError(row.ctx + ": duplicate corr row");
            corr_vals(a, b) = corr_vals(b, a) = row.value;
            const int fr = row.fixed ? 0 : 1;
            if (corr_free >= 0 && corr_free != fr)
                throw SchemaError(row.ctx +
                                  ": correlation entries are estimated as one "
                                  "block and must share one fixed flag");
            corr_free = fr;
        } else if (row.block == "loading") {
            const int h = find_name(pf.indicator_names, row.label);
            const int li = require_latent(pf.latent_names, row.latent, row.ctx);
            if (!d_seen.insert({h, li}).second)
                throw SchemaError(row.ctx + ": duplicate loading row");
            d_vals(h, li) = row.value;
            d_free(h, li) = row.fixed ? 0.0 : 1.0;
        } else if (row.block == "meas_intercept") {
            const int h = find_name(pf.indicator_names, row.label);
            if (!icpt_seen.insert(h).second)
                throw SchemaError(row.ctx + ": duplicate intercept row");
            icpt_vals[static_cast<size_t>(h)] = row.value;
            icpt_free[static_cast<size_t>(h)] = !row.fixed;
        } else if (row.block == "threshold") {
            const int h = find_name(pf.indicator_names, row.label);
            if (row.latent.size() < 4 || row.latent.compare(0, 3, "psi") != 0)
                throw SchemaError(row.ctx +
                                  ": threshold rows name the cutpoint as "
                                  "psi<k> in the latent column");
            const long k = parse_integer(row.latent.substr(3), row.ctx);
            if (k < 3)
                throw SchemaError(row.ctx +
                                  ": psi1 and psi2 are pinned at -inf and 0 "
                                  "and are never listed");
            if (!th_cells[static_cast<size_t>(h)]
                     .emplace(static_cast<int>(k),
                              std::make_pair(row.value, !row.fixed))
                     .second)
                throw SchemaError(row.ctx + ": duplicate threshold row");
        } else if (row.block == "choice_loading") {
            const int li = require_latent(pf.latent_names, row.latent.empty()
                                                               ? row.label
                                                               : row.latent,
                                          row.ctx);
            if (!lam_seen.insert(li).second)
                throw SchemaError(row.ctx + ": duplicate choice_loading row");
            lam_vals[static_cast<size_t>(li)] = row.value;
            lam_free[static_cast<size_t>(li)] = !row.fixed;
        } else if (row.block == "interaction") {
            const int m = find_name(pf.attribute_names, row.label);
            if (m < 0)
                throw SchemaError(row.ctx + ": unknown attribute '" + row.label +
                                  "'");
            const int li = require_latent(pf.latent_names, row.latent, row.ctx);
            if (!g_seen.insert({li, m}).second)
                throw SchemaError(row.ctx + ": duplicate interaction row");
            g_vals(li, m) = row.value;
            g_free(li, m) = row.fixed ? 0.0 : 1.0;
        }
    }

    // Likert depth: explicit meta wins, otherwise the highest cutpoint index
    // listed anywhere (psi<J> is the last interior cutpoint of a J-point
    // scale; psi<J+1> is +inf and never listed).
    int J = meta_levels;
    if (J == 0) {
        for (const auto& cells : th_cells)
            for (const auto& [k, cell] : cells) J = std::max(J, k);
        if (J == 0)
            throw SchemaError(path +
                              ": n_levels not declared and no threshold rows "
                              "to infer it from");
    }
    if (J < 2) throw SchemaError(path + ": n_levels must be at least 2");
    for (int h = 0; h < H; ++h) {
        for (const auto& [k, cell] : th_cells[static_cast<size_t>(h)])
            if (k > J)
                throw SchemaError(path + ": indicator '" +
                                  pf.indicator_names[static_cast<size_t>(h)] +
                                  "' lists psi" + std::to_string(k) +
                                  " beyond a " + std::to_string(J) +
                                  "-point scale");
        for (int k = 3; k <= J; ++k)
            if (!th_cells[static_cast<size_t>(h)].count(k))
                throw SchemaError(path + ": indicator '" +
                                  pf.indicator_names[static_cast<size_t>(h)] +
                                  "' is missing threshold psi" +
                                  std::to_string(k));
        bool first = true, free_flag = false;
        for (const auto& [k, cell] : th_cells[static_cast<size_t>(h)]) {
            if (first) free_flag = cell.second, first = false;
            else if (cell.second != free_flag)
                throw SchemaError(path + ": indicator '" +
                                  pf.indicator_names[static_cast<size_t>(h)] +
                                  "' thresholds are estimated as one block "
                                  "and must share one fixed flag");
        }
    }
    pf.n_levels = J;

    // Assemble the parameter set.
    IclvParams& p = pf.params;
    p.structural.alpha.resize(static_cast<size_t>(L));
    for (int l = 0; l < L; ++l) {
        const auto& vals = alpha_vals[static_cast<size_t>(l)];
        p.structural.alpha[static_cast<size_t>(l)] =
            Eigen::Map<const Eigen::VectorXd>(vals.data(),
                                              static_cast<long>(vals.size()));
    }
    p.structural.delta = Eigen::Map<const Eigen::VectorXd>(
        delta_vals.data(), static_cast<long>(delta_vals.size()));
    p.structural.gamma_corr = corr_vals;
    p.structural.k_pattern = Eigen::MatrixXi::Zero(L, L);
    std::vector<double> rho_vals;
    std::vector<bool> rho_free;
    for (int a = 0; a < L; ++a)
        for (int b = 0; b < a; ++b) {
            const auto it = cross_cells.find({a, b});
            if (it == cross_cells.end()) continue;
            p.structural.k_pattern(a, b) = 1;
            rho_vals.push_back(it->second.first);
            rho_free.push_back(it->second.second);
        }
    p.structural.rho = Eigen::Map<const Eigen::VectorXd>(
        rho_vals.data(), static_cast<long>(rho_vals.size()));

    p.measurement.gamma = Eigen::MatrixXd::Zero(H, 1);
    for (int h = 0; h < H; ++h)
        p.measurement.gamma(h, 0) = icpt_vals[static_cast<size_t>(h)];
    p.measurement.d = d_vals;
    p.measurement.psi.resize(static_cast<size_t>(H));
    for (int h = 0; h < H; ++h) {
        Eigen::VectorXd psi = Eigen::VectorXd::Zero(J + 1);
        psi(0) = -kInf;
        psi(1) = 0.0;
        psi(J) = kInf;
        for (const auto& [k, cell] : th_cells[static_cast<size_t>(h)])
            psi(k - 1) = cell.first;
        p.measurement.psi[static_cast<size_t>(h)] = psi;
    }

    const int I = n_alternatives;
    p.choice.b = Eigen::Map<const Eigen::VectorXd>(
        b_vals.data(), static_cast<long>(b_vals.size()));
    p.choice.base_alternative = base_alternative;
    const int av_col = base_alternative == 1 ? 1 : 0;
    p.choice.lambda = Eigen::MatrixXd::Zero(L, I);
    for (int l = 0; l < L; ++l)
        p.choice.lambda(l, av_col) = lam_vals[static_cast<size_t>(l)];
    p.choice.g = g_vals;
    p.choice.lambda_diff = Eigen::MatrixXd::Identity(I - 1, I - 1);

    // Mask: shaped off the assembled values, then flag the free cells.
    pf.mask = mask_none(p);
    for (int l = 0; l < L; ++l)
        for (size_t j = 0; j < alpha_free[static_cast<size_t>(l)].size(); ++j)
            pf.mask.alpha[static_cast<size_t>(l)](static_cast<long>(j)) =
                alpha_free[static_cast<size_t>(l)][j];
    for (int l = 0; l < L; ++l)
        pf.mask.delta(l) = delta_free[static_cast<size_t>(l)];
    pf.mask.gamma_corr = corr_free == 1;
    for (size_t i = 0; i < rho_free.size(); ++i)
        pf.mask.rho(static_cast<long>(i)) = rho_free[i];
    for (int h = 0; h < H; ++h) {
        pf.mask.meas_gamma(h, 0) = icpt_free[static_cast<size_t>(h)];
        for (int l = 0; l < L; ++l)
            pf.mask.meas_d(h, l) = d_free(h, l) != 0.0;
        const auto& cells = th_cells[static_cast<size_t>(h)];
        pf.mask.thresholds[static_cast<size_t>(h)] =
            !cells.empty() && cells.begin()->second.second;
    }
    for (int m = 0; m < M; ++m) pf.mask.b(m) = b_free[static_cast<size_t>(m)];
    for (int l = 0; l < L; ++l)
        pf.mask.lambda(l, av_col) = lam_free[static_cast<size_t>(l)];
    for (int l = 0; l < L; ++l)
        for (int m = 0; m < M; ++m) pf.mask.g(l, m) = g_free(l, m) != 0.0;

    // Reserved names wire the year loop; anything absent leaves the slot off.
    pf.slots.crash = find_name(pf.structural_names[0], "crashes_av_hundreds");
    pf.slots.legal = find_name(pf.structural_names[0], "unclear_liability_share");
    pf.slots.src_friend = find_name(pf.structural_names[0], "src_friend");
    pf.slots.src_media = find_name(pf.structural_names[0], "src_media");
    pf.slots.crash_scale = crash_scale;
    pf.attr_slots.constant = find_name(pf.attribute_names, "constant");
    pf.attr_slots.social = find_name(pf.attribute_names, "social_adoption");
    pf.attr_slots.city = find_name(pf.attribute_names, "city_adoption");
    pf.attr_slots.price_ratio = find_name(pf.attribute_names, "price_ratio");
    pf.attr_slots.av_alternative = av_col;

    try {
        validate(p);
    } catch (const std::invalid_argument& e) {
        throw SchemaError(path + ": " + e.what());
    }
    return pf;
}

void save_parameters(const std::string& path, const ParameterFile& pf) {
    CsvTable t;
    t.comments = pf.comments;
    t.header = {"block", "label", "latent", "value", "fixed"};
    auto put = [&](const std::string& block, const std::string& label,
                   const std::string& latent, double value, bool free) {
        t.rows.push_back({block, label, latent, format_number(value),
                          free ? "0" : "1"});
    };

    const IclvParams& p = pf.params;
    const int L = static_cast<int>(pf.latent_names.size());
    const int H = static_cast<int>(pf.indicator_names.size());
    const int M = static_cast<int>(pf.attribute_names.size());
    const int I = static_cast<int>(p.choice.lambda.cols());
    const int av_col = pf.attr_slots.av_alternative;

    put("meta", "n_levels", "", pf.n_levels, false);
    if (I != 2) put("meta", "n_alternatives", "", I, false);
    if (p.choice.base_alternative != 1)
        put("meta", "base_alternative", "", p.choice.base_alternative, false);
    if (pf.slots.crash_scale != 0.01)
        put("meta", "crash_scale", "", pf.slots.crash_scale, false);

    for (int l = 0; l < L; ++l)
        for (size_t j = 0; j < pf.structural_names[static_cast<size_t>(l)].size();
             ++j)
            put("structural", pf.structural_names[static_cast<size_t>(l)][j],
                pf.latent_names[static_cast<size_t>(l)],
                p.structural.alpha[static_cast<size_t>(l)](static_cast<long>(j)),
                pf.mask.alpha[static_cast<size_t>(l)](static_cast<long>(j)));
    for (int l = 0; l < L; ++l)
        put("delta", pf.latent_names[static_cast<size_t>(l)],
            pf.latent_names[static_cast<size_t>(l)], p.structural.delta(l),
            pf.mask.delta(l));
    int rho_idx = 0;
    for (int a = 0; a < L; ++a)
        for (int b = 0; b < a; ++b)
            if (p.structural.k_pattern(a, b)) {
                put("cross", pf.latent_names[static_cast<size_t>(b)],
                    pf.latent_names[static_cast<size_t>(a)],
                    p.structural.rho(rho_idx), pf.mask.rho(rho_idx));
                ++rho_idx;
            }
    for (int a = 0; a < L; ++a)
        for (int b = a + 1; b < L; ++b)
            put("corr", pf.latent_names[static_cast<size_t>(a)],
                pf.latent_names[static_cast<size_t>(b)],
                p.structural.gamma_corr(a, b), pf.mask.gamma_corr);

    for (int h = 0; h < H; ++h)
        for (int l = 0; l < L; ++l)
            if (p.measurement.d(h, l) != 0.0 || pf.mask.meas_d(h, l))
                put("loading", pf.indicator_names[static_cast<size_t>(h)],
                    pf.latent_names[static_cast<size_t>(l)],
                    p.measurement.d(h, l), pf.mask.meas_d(h, l));
    for (int h = 0; h < H; ++h)
        put("meas_intercept", pf.indicator_names[static_cast<size_t>(h)], "",
            p.measurement.gamma(h, 0), pf.mask.meas_gamma(h, 0));
    for (int h = 0; h < H; ++h)
        for (int k = 3; k <= pf.n_levels; ++k)
            put("threshold", pf.indicator_names[static_cast<size_t>(h)],
                "psi" + std::to_string(k),
                p.measurement.psi[static_cast<size_t>(h)](k - 1),
                pf.mask.thresholds[static_cast<size_t>(h)]);

    for (int m = 0; m < M; ++m)
        put("attribute", pf.attribute_names[static_cast<size_t>(m)], "",
            p.choice.b(m), pf.mask.b(m));
    for (int l = 0; l < L; ++l)
        put("choice_loading", pf.latent_names[static_cast<size_t>(l)],
            pf.latent_names[static_cast<size_t>(l)], p.choice.lambda(l, av_col),
            pf.mask.lambda(l, av_col));
    for (int l = 0; l < L; ++l)
        for (int m = 0; m < M; ++m)
            if (p.choice.g(l, m) != 0.0 || pf.mask.g(l, m))
                put("interaction", pf.attribute_names[static_cast<size_t>(m)],
                    pf.latent_names[static_cast<size_t>(l)], p.choice.g(l, m),
                    pf.mask.g(l, m));

    write_csv(path, t);
}

SimulationModel simulation_model(const ParameterFile& pf) {
    return SimulationModel{pf.params, pf.slots, pf.attr_slots};
}

namespace {

// Resolved column positions of the raw person record shared by population
// and survey files.
struct PersonCols {
    int education, income, n_workers, n_children, male, n_vehicles,
        acc_vehicle, acc_injury;
    int lat = -1, lon = -1;
};

PersonCols person_columns(const CsvTable& t, const std::string& path) {
    PersonCols pc;
    pc.education = t.require_column("education", path);
    pc.income = t.require_column("income", path);
    pc.n_workers = t.require_column("n_workers", path);
    pc.n_children = t.require_column("n_children", path);
    pc.male = t.require_column("male", path);
    pc.n_vehicles = t.require_column("n_vehicles", path);
    pc.acc_vehicle = t.require_column("acc_vehicle", path);
    pc.acc_injury = t.require_column("acc_injury", path);
    pc.lat = t.column("lat");
    pc.lon = t.column("lon");
    if ((pc.lat < 0) != (pc.lon < 0))
        throw SchemaError(path + ": lat and lon must come together");
    return pc;
}

double level_dummy(const std::string& got, const std::string& want) {
    return got == want ? 1.0 : 0.0;
}

void check_level(const std::string& got, const std::vector<std::string>& levels,
                 const std::string& ctx) {
    for (const auto& l : levels)
        if (got == l) return;
    std::string allowed;
    for (const auto& l : levels) allowed += (allowed.empty() ? "" : "|") + l;
    throw SchemaError(ctx + ": '" + got + "' is not one of " + allowed);
}

// Expand one person row into the dummy dictionary the structural covariate
// lists draw from.  Information-exposure entries start at zero; the survey
// loader overwrites them from its own columns.
std::map<std::string, double> person_dummies(const std::vector<std::string>& row,
                                             const PersonCols& pc,
                                             const std::string& ctx) {
    const std::string& edu = row[static_cast<size_t>(pc.education)];
    const std::string& inc = row[static_cast<size_t>(pc.income)];
    const std::string& accv = row[static_cast<size_t>(pc.acc_vehicle)];
    const std::string& acci = row[static_cast<size_t>(pc.acc_injury)];
    check_level(edu, {"below_college", "college_graduate", "ms_phd",
                      "professional"}, ctx + ", education");
    check_level(inc, {"le_35k", "36k_75k", "over_75k"}, ctx + ", income");
    check_level(accv, {"none", "minor", "major"}, ctx + ", acc_vehicle");
    check_level(acci, {"none", "minor", "severe"}, ctx + ", acc_injury");
    const long male = parse_integer(row[static_cast<size_t>(pc.male)],
                                    ctx + ", male");
    if (male != 0 && male != 1)
        throw SchemaError(ctx + ", male: must be 0 or 1");

    std::map<std::string, double> d;
    d["edu_some_college_or_below"] = level_dummy(edu, "below_college");
    d["edu_college_graduate"] = level_dummy(edu, "college_graduate");
    d["edu_ms_phd"] = level_dummy(edu, "ms_phd");
    d["edu_professional_degree"] = level_dummy(edu, "professional");
    d["hh_income_le_35k"] = level_dummy(inc, "le_35k");
    d["hh_income_36_75k"] = level_dummy(inc, "36k_75k");
    d["hh_income_over_75k"] = level_dummy(inc, "over_75k");
    d["n_workers"] = parse_number(row[static_cast<size_t>(pc.n_workers)],
                                  ctx + ", n_workers");
    d["n_children"] = parse_number(row[static_cast<size_t>(pc.n_children)],
                                   ctx + ", n_children");
    d["male"] = static_cast<double>(male);
    d["n_vehicles"] = parse_number(row[static_cast<size_t>(pc.n_vehicles)],
                                   ctx + ", n_vehicles");
    d["acc_vehicle_minor"] = level_dummy(accv, "minor");
    d["acc_vehicle_major"] = level_dummy(accv, "major");
    d["acc_injury_minor"] = level_dummy(acci, "minor");
    d["acc_injury_severe"] = level_dummy(acci, "severe");
    d["crashes_av_hundreds"] = 0.0;
    d["unclear_liability_share"] = 0.0;
    d["src_friend"] = 0.0;
    d["src_colleague"] = 0.0;
    d["src_media"] = 0.0;
    return d;
}

IndividualProfile person_profile(const std::vector<std::string>& row,
                                 const PersonCols& pc, const std::string& id,
                                 const std::string& ctx) {
    IndividualProfile pr;
    pr.id = id;
    pr.names = {"education", "income",     "acc_vehicle", "acc_injury",
                "male",      "n_workers",  "n_children",  "n_vehicles"};
    pr.types = {AttrType::categorical, AttrType::categorical,
                AttrType::categorical, AttrType::categorical,
                AttrType::categorical, AttrType::continuous,
                AttrType::continuous,  AttrType::continuous};
    pr.labels = {row[static_cast<size_t>(pc.education)],
                 row[static_cast<size_t>(pc.income)],
                 row[static_cast<size_t>(pc.acc_vehicle)],
                 row[static_cast<size_t>(pc.acc_injury)],
                 row[static_cast<size_t>(pc.male)],
                 "", "", ""};
    pr.values = {0.0, 0.0, 0.0, 0.0, 0.0,
                 parse_number(row[static_cast<size_t>(pc.n_workers)], ctx),
                 parse_number(row[static_cast<size_t>(pc.n_children)], ctx),
                 parse_number(row[static_cast<size_t>(pc.n_vehicles)], ctx)};
    if (pc.lat >= 0) {
        pr.has_centroid = true;
        pr.lat = parse_number(row[static_cast<size_t>(pc.lat)], ctx + ", lat");
        pr.lon = parse_number(row[static_cast<size_t>(pc.lon)], ctx + ", lon");
    }
    return pr;
}

std::vector<Eigen::VectorXd> build_covariates(
    const std::map<std::string, double>& dict, const ParameterFile& pf,
    const std::string& ctx) {
    std::vector<Eigen::VectorXd> s(pf.structural_names.size());
    for (size_t l = 0; l < pf.structural_names.size(); ++l) {
        const auto& names = pf.structural_names[l];
        s[l] = Eigen::VectorXd(static_cast<long>(names.size()));
        for (size_t j = 0; j < names.size(); ++j) {
            const auto it = dict.find(names[j]);
            if (it == dict.end())
                throw SchemaError(ctx + ": structural covariate '" + names[j] +
                                  "' is not derivable from the person columns");
            s[l](static_cast<long>(j)) = it->second;
        }
    }
    return s;
}

}  // namespace

Population load_population(const std::string& path, const ParameterFile& pf) {
    const CsvTable t = read_csv(path);
    const int c_id = t.require_column("id", path);
    const int c_zip = t.require_column("zip", path);
    const int c_cv = t.require_column("cv_price", path);
    const int c_area = t.column("zip_area_sqmi");
    const PersonCols pc = person_columns(t, path);

    Population pop;
    std::set<std::string> ids;
    for (const auto& row : t.rows) {
        const std::string& id = row[static_cast<size_t>(c_id)];
        const std::string ctx = path + ", id " + id;
        if (id.empty()) throw SchemaError(path + ": empty id");
        if (!ids.insert(id).second)
            throw SchemaError(path + ": duplicate id '" + id + "'");

        Agent a;
        a.id = id;
        a.zip = row[static_cast<size_t>(c_zip)];
        if (a.zip.empty()) throw SchemaError(ctx + ": empty zip");
        a.cv_price = parse_number(row[static_cast<size_t>(c_cv)],
                                  ctx + ", cv_price");
        if (!(a.cv_price > 0.0))
            throw SchemaError(ctx + ": cv_price must be positive");
        a.s = build_covariates(person_dummies(row, pc, ctx), pf, ctx);
        pop.agents.push_back(std::move(a));
        pop.profiles.push_back(person_profile(row, pc, id, ctx));

        double area = 1.0;
        if (c_area >= 0) {
            area = parse_number(row[static_cast<size_t>(c_area)],
                                ctx + ", zip_area_sqmi");
            if (!(area > 0.0))
                throw SchemaError(ctx + ": zip_area_sqmi must be positive");
        }
        const std::string& zip = row[static_cast<size_t>(c_zip)];
        const auto it = pop.zip_area.find(zip);
        if (it == pop.zip_area.end())
            pop.zip_area.emplace(zip, area);
        else if (it->second != area)
            throw SchemaError(ctx + ": zip_area_sqmi disagrees with an "
                              "earlier row for zip " + zip);
    }
    if (pop.agents.empty()) throw SchemaError(path + ": no rows");
    return pop;
}

SampleData load_sample(const std::string& path, const ParameterFile& pf) {
    const CsvTable t = read_csv(path);
    const int c_id = t.require_column("id", path);
    const PersonCols pc = person_columns(t, path);
    const int c_crash = t.require_column("crash", path);
    const int c_legal = t.require_column("legal", path);
    const int c_friend = t.require_column("src_friend", path);
    const int c_colleague = t.require_column("src_colleague", path);
    const int c_media = t.require_column("src_media", path);

    const int H = static_cast<int>(pf.indicator_names.size());
    const int M = static_cast<int>(pf.attribute_names.size());
    const int I = static_cast<int>(pf.params.choice.lambda.cols());
    const int J = pf.n_levels;
    std::vector<int> c_y(static_cast<size_t>(H));
    for (int h = 0; h < H; ++h)
        c_y[static_cast<size_t>(h)] =
            t.require_column("y" + std::to_string(h + 1), path);

    // Tasks are discovered from task<t>_chosen columns counting from 1.
    struct TaskCols {
        int chosen;
        std::vector<std::pair<int, int>> attrs;  // (attribute slot, column)
    };
    std::vector<TaskCols> tasks;
    for (int task = 1;; ++task) {
        const std::string stem = "task" + std::to_string(task) + "_";
        const int c_chosen = t.column(stem + "chosen");
        if (c_chosen < 0) break;
        TaskCols tc;
        tc.chosen = c_chosen;
        for (int m = 0; m < M; ++m) {
            if (m == pf.attr_slots.constant) continue;
            std::string name;
            if (m == pf.attr_slots.social) name = "social";
            else if (m == pf.attr_slots.city) name = "city";
            else if (m == pf.attr_slots.price_ratio) name = "price_ratio";
            else name = pf.attribute_names[static_cast<size_t>(m)];
            tc.attrs.emplace_back(m, t.require_column(stem + name, path));
        }
        tasks.push_back(std::move(tc));
    }
    if (tasks.empty())
        throw SchemaError(path + ": no choice tasks (task1_chosen missing)");

    SampleData out;
    out.sample.n_latents = static_cast<int>(pf.latent_names.size());
    out.sample.n_indicators = H;
    out.sample.n_levels = J;
    out.sample.n_tasks = static_cast<int>(tasks.size());
    out.sample.n_alternatives = I;
    out.sample.n_attributes = M;
    out.sample.n_meas_covariates = 1;

    const int av_col = pf.attr_slots.av_alternative;
    std::set<std::string> ids;
    for (const auto& row : t.rows) {
        const std::string& id = row[static_cast<size_t>(c_id)];
        const std::string ctx = path + ", id " + id;
        if (id.empty()) throw SchemaError(path + ": empty id");
        if (!ids.insert(id).second)
            throw SchemaError(path + ": duplicate id '" + id + "'");

        auto dict = person_dummies(row, pc, ctx);
        const double crash = parse_number(row[static_cast<size_t>(c_crash)],
                                          ctx + ", crash");
        if (!(crash >= 0.0))
            throw SchemaError(ctx + ": crash must be non-negative");
        const double legal = parse_number(row[static_cast<size_t>(c_legal)],
                                          ctx + ", legal");
        if (!(legal >= 0.0 && legal <= 1.0))
            throw SchemaError(ctx + ": legal must be a share in [0,1]");
        auto src = [&](int col, const char* name) {
            const long v = parse_integer(row[static_cast<size_t>(col)],
                                         ctx + std::string(", ") + name);
            if (v != 0 && v != 1)
                throw SchemaError(ctx + ": " + name + " must be 0 or 1");
            return static_cast<double>(v);
        };
        dict["crashes_av_hundreds"] = crash * pf.slots.crash_scale;
        dict["unclear_liability_share"] = legal;
        dict["src_friend"] = src(c_friend, "src_friend");
        dict["src_colleague"] = src(c_colleague, "src_colleague");
        dict["src_media"] = src(c_media, "src_media");

        Individual ind;
        ind.id = id;
        ind.s = build_covariates(dict, pf, ctx);
        ind.x_star = Eigen::MatrixXd::Ones(H, 1);
        ind.y = Eigen::VectorXi(H);
        for (int h = 0; h < H; ++h) {
            const std::string col = "y" + std::to_string(h + 1);
            const long y = parse_integer(
                row[static_cast<size_t>(c_y[static_cast<size_t>(h)])],
                ctx + ", " + col);
            if (y < 1 || y > J)
                throw SchemaError(ctx + ": " + col + " must be in 1.." +
                                  std::to_string(J));
            ind.y(h) = static_cast<int>(y);
        }
        for (size_t task = 0; task < tasks.size(); ++task) {
            const TaskCols& tc = tasks[task];
            const std::string tctx =
                ctx + ", task " + std::to_string(task + 1);
            ChoiceTask ct;
            ct.x = Eigen::MatrixXd::Zero(M, I);
            if (pf.attr_slots.constant >= 0)
                ct.x(pf.attr_slots.constant, av_col) = 1.0;
            for (const auto& [m, col] : tc.attrs) {
                const double v = parse_number(row[static_cast<size_t>(col)],
                                              tctx);
                if ((m == pf.attr_slots.social || m == pf.attr_slots.city) &&
                    !(v >= 0.0 && v <= 1.0))
                    throw SchemaError(tctx + ": adoption shares are written "
                                      "as fractions in [0,1], got " +
                                      format_number(v));
                if (m == pf.attr_slots.price_ratio && !(v > 0.0))
                    throw SchemaError(tctx + ": price_ratio must be positive");
                ct.x(m, av_col) = v;
            }
            const long chosen = parse_integer(
                row[static_cast<size_t>(tc.chosen)], tctx + ", chosen");
            if (chosen < 1 || chosen > I)
                throw SchemaError(tctx + ": chosen must be in 1.." +
                                  std::to_string(I));
            ct.chosen = static_cast<int>(chosen);
            ind.tasks.push_back(std::move(ct));
        }
        out.sample.individuals.push_back(std::move(ind));
        out.profiles.push_back(person_profile(row, pc, id, ctx));
    }
    if (out.sample.individuals.empty()) throw SchemaError(path + ": no rows");
    validate(out.sample);
    return out;
}

std::vector<std::string> header_comments(const OutputHeader& h) {
    return {" tool_version=" + std::string(kToolVersion),
            " config_hash=" + h.config_hash,
            " seed=" + std::to_string(h.seed)};
}

void write_estimates(const std::string& path, const OutputHeader& h,
                     const EstimationResult& result) {
    CsvTable t;
    t.comments = header_comments(h);
    t.header = {"name", "estimate", "std_error", "t_stat"};
    for (size_t i = 0; i < result.names.size(); ++i) {
        const double est = result.natural(static_cast<long>(i));
        const double se = result.std_errors(static_cast<long>(i));
        const double tstat =
            se > 0.0 ? est / se : std::numeric_limits<double>::quiet_NaN();
        t.rows.push_back({result.names[i], format_number(est),
                          format_number(se), format_number(tstat)});
    }
    write_csv(path, t);
}

void write_fit(const std::string& path, const OutputHeader& h,
               const EstimationResult& result) {
    const char* status = "converged";
    if (result.status == OptimStatus::max_iterations) status = "max_iterations";
    if (result.status == OptimStatus::line_search_failure)
        status = "line_search_failure";
    CsvTable t;
    t.comments = header_comments(h);
    t.header = {"statistic", "value"};
    t.rows = {
        {"composite_loglik", format_number(result.cml)},
        {"choice_loglik", format_number(result.choice_cml)},
        {"avg_choice_loglik_per_pair", format_number(result.avg_choice_per_pair)},
        {"clic_penalty", format_number(result.penalty)},
        {"clic", format_number(result.clic)},
        {"n_pairs", std::to_string(result.n_pairs)},
        {"floored_terms", std::to_string(result.floored)},
        {"iterations", std::to_string(result.iterations)},
        {"gradient_norm", format_number(result.gradient_norm)},
        {"status", status},
        {"covariance_rank_deficient", result.sandwich.singular ? "1" : "0"},
    };
    write_csv(path, t);
}

void write_weights(const std::string& path, const OutputHeader& h,
                   const WeightMatrix& w, const std::vector<std::string>& ids) {
    if (static_cast<int>(ids.size()) != w.q)
        throw SchemaError("weight matrix and id list disagree on size");
    CsvTable t;
    t.comments = header_comments(h);
    t.header = {"from_id", "to_id", "weight"};
    for (int row = 0; row < w.q; ++row)
        for (const auto& [nbr, wt] : w.ties[static_cast<size_t>(row)])
            t.rows.push_back({ids[static_cast<size_t>(row)],
                              ids[static_cast<size_t>(nbr)],
                              format_number(wt)});
    write_csv(path, t);
}

void write_trajectories(const std::string& path, const OutputHeader& h,
                        const std::vector<ScenarioResult>& results) {
    CsvTable t;
    t.comments = header_comments(h);
    t.header = {"scenario", "seed",        "year",
                "city_share", "av_price",  "crash_value",
                "legal_value", "media_fraction"};
    for (const auto& res : results)
        for (const auto& run : res.runs)
            for (const auto& rec : run.years)
                t.rows.push_back({res.cfg.label, std::to_string(run.seed),
                                  std::to_string(rec.year),
                                  format_number(rec.city_share),
                                  format_number(rec.av_price),
                                  format_number(rec.crash_value),
                                  format_number(rec.legal_value),
                                  format_number(rec.media_fraction)});
    write_csv(path, t);
}

void write_mean_trajectories(const std::string& path, const OutputHeader& h,
                             const std::vector<ScenarioResult>& results) {
    CsvTable t;
    t.comments = header_comments(h);
    t.header = {"scenario", "year", "mean_share", "sd_share"};
    for (const auto& res : results)
        for (size_t y = 0; y < res.mean_share.size(); ++y)
            t.rows.push_back({res.cfg.label, std::to_string(y + 1),
                              format_number(res.mean_share[y]),
                              format_number(res.sd_share[y])});
    write_csv(path, t);
}

void write_adopters(const std::string& path, const OutputHeader& h,
                    const std::vector<ScenarioResult>& results) {
    CsvTable t;
    t.comments = header_comments(h);
    t.header = {"scenario", "seed", "id", "adoption_year", "satisfied"};
    for (const auto& res : results)
        for (const auto& run : res.runs)
            for (const auto& a : run.agents) {
                if (!a.adopted) continue;
                std::string verdict = "na";  // bought in the final year
                if (a.satisfied.has_value()) verdict = *a.satisfied ? "1" : "0";
                t.rows.push_back({res.cfg.label, std::to_string(run.seed), a.id,
                                  std::to_string(a.adoption_year), verdict});
            }
    write_csv(path, t);
}

void write_density_by_zip(const std::string& path, const OutputHeader& h,
                          const std::vector<ScenarioResult>& results,
                          const std::map<std::string, double>& zip_area) {
    CsvTable t;
    t.comments = header_comments(h);
    t.header = {"scenario", "seed", "zip", "year", "density"};
    for (const auto& res : results)
        for (const auto& run : res.runs) {
            std::map<std::string, int> count;
            for (const auto& a : run.agents) count[a.zip] = 0;
            const int horizon = static_cast<int>(run.years.size());
            for (int year = 1; year <= horizon; ++year) {
                for (const auto& a : run.agents)
                    if (a.adopted && a.adoption_year == year) ++count[a.zip];
                for (const auto& [zip, n] : count) {
                    const auto it = zip_area.find(zip);
                    const double area =
                        it == zip_area.end() ? 1.0 : it->second;
                    t.rows.push_back({res.cfg.label, std::to_string(run.seed),
                                      zip, std::to_string(year),
                                      format_number(n / area)});
                }
            }
        }
    write_csv(path, t);
}

void write_summary(const std::string& path, const OutputHeader& h,
                   const std::vector<ScenarioResult>& results) {
    CsvTable t;
    t.comments = header_comments(h);
    t.header = {"scenario", "years_to_half", "final_mean_share",
                "final_sd_share"};
    for (const auto& res : results)
        t.rows.push_back({res.cfg.label, format_number(res.years_to_half),
                          format_number(res.mean_share.back()),
                          format_number(res.sd_share.back())});
    write_csv(path, t);
}

}  // namespace iclv
