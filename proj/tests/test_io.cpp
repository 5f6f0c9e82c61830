#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "iclv/errors.hpp"
#include "iclv/estimator.hpp"
#include "iclv/io.hpp"
#include "iclv/runner.hpp"
#include "iclv/textio.hpp"
#include "iclv/transform.hpp"

using iclv::ConfigError;
using iclv::CsvTable;
using iclv::OutputHeader;
using iclv::ParameterFile;
using iclv::SchemaError;

namespace {

const std::string kDataDir = TEST_DATA_DIR;

// Fresh scratch directory per test run; files are tiny and the OS temp dir
// cleans itself up.
std::string scratch_dir() {
    static const std::string dir = [] {
        auto d = std::filesystem::temp_directory_path() / "iclv_io_test";
        std::filesystem::remove_all(d);
        std::filesystem::create_directories(d);
        return d.string();
    }();
    return dir;
}

std::string scratch(const std::string& name) {
    return scratch_dir() + "/" + name;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// One population row with fixed demographics; field overrides by column name.
std::vector<std::string> person_row(
    const std::string& id, const std::map<std::string, std::string>& over = {}) {
    std::map<std::string, std::string> f = {
        {"id", id},           {"zip", "37201"},       {"lat", "36.16"},
        {"lon", "-86.78"},    {"zip_area_sqmi", "4"}, {"education", "ms_phd"},
        {"income", "36k_75k"}, {"n_workers", "2"},    {"n_children", "1"},
        {"male", "1"},        {"n_vehicles", "3"},    {"acc_vehicle", "minor"},
        {"acc_injury", "none"}, {"cv_price", "42000"}};
    for (const auto& [k, v] : over) f[k] = v;
    return {f["id"],        f["zip"],        f["lat"],         f["lon"],
            f["zip_area_sqmi"], f["education"], f["income"],  f["n_workers"],
            f["n_children"], f["male"],      f["n_vehicles"], f["acc_vehicle"],
            f["acc_injury"], f["cv_price"]};
}

const char* kPopulationHeader =
    "id,zip,lat,lon,zip_area_sqmi,education,income,n_workers,n_children,"
    "male,n_vehicles,acc_vehicle,acc_injury,cv_price";

std::string join(const std::vector<std::string>& fields) {
    std::string out;
    for (size_t i = 0; i < fields.size(); ++i)
        out += (i ? "," : "") + fields[i];
    return out;
}

}  // namespace

TEST_CASE("numbers survive the shortest round-trip text form") {
    for (const double v : {0.1, -0.0625, 1.0 / 3.0, 2.5e-17, 12345.0, -2.0,
                           0.9992000000000001}) {
        CHECK(iclv::parse_number(iclv::format_number(v), "t") == v);
    }
    CHECK(iclv::format_number(2.0) == "2");
    CHECK(iclv::format_number(0.25) == "0.25");

    CHECK_THROWS_WITH_AS(iclv::parse_number("1.2.3", "price column"),
                         doctest::Contains("price column"), SchemaError);
    CHECK_THROWS_AS(iclv::parse_number("", "t"), SchemaError);
    CHECK_THROWS_AS(iclv::parse_number("4x", "t"), SchemaError);
    CHECK_THROWS_AS(iclv::parse_integer("1.5", "t"), SchemaError);
    CHECK(iclv::parse_integer("-17", "t") == -17);
}

TEST_CASE("csv tables round-trip with comments and reject ragged rows") {
    CsvTable t;
    t.comments = {" provenance line"};
    t.header = {"a", "b"};
    t.rows = {{"1", "x"}, {"2", "y"}};
    const std::string path = scratch("round.csv");
    iclv::write_csv(path, t);
    const CsvTable back = iclv::read_csv(path);
    CHECK(back.comments == t.comments);
    CHECK(back.header == t.header);
    CHECK(back.rows == t.rows);
    CHECK(back.column("b") == 1);
    CHECK(back.column("c") == -1);
    CHECK_THROWS_WITH_AS(back.require_column("c", "here"),
                         doctest::Contains("here"), SchemaError);

    write_text(scratch("ragged.csv"), "a,b\n1\n");
    CHECK_THROWS_WITH_AS(iclv::read_csv(scratch("ragged.csv")),
                         doctest::Contains("line 2"), SchemaError);
    CHECK_THROWS_AS(iclv::read_csv(scratch("missing.csv")), SchemaError);

    CsvTable bad = t;
    bad.rows[0][1] = "x,y";
    CHECK_THROWS_AS(iclv::write_csv(scratch("bad.csv"), bad), SchemaError);
}

TEST_CASE("config files are strict flat key=value") {
    write_text(scratch("ok.cfg"),
               "# comment\n\n  draws = 16 \nout=somewhere\n");
    const auto cfg = iclv::read_config(scratch("ok.cfg"));
    CHECK(cfg.at("draws") == "16");
    CHECK(cfg.at("out") == "somewhere");
    CHECK(cfg.size() == 2);

    write_text(scratch("dup.cfg"), "a=1\na=2\n");
    CHECK_THROWS_WITH_AS(iclv::read_config(scratch("dup.cfg")),
                         doctest::Contains("duplicate"), ConfigError);
    write_text(scratch("noeq.cfg"), "just words\n");
    CHECK_THROWS_WITH_AS(iclv::read_config(scratch("noeq.cfg")),
                         doctest::Contains("line 1"), ConfigError);
}

TEST_CASE("config hashes fingerprint values, not map insertion order") {
    const std::map<std::string, std::string> a = {{"x", "1"}, {"y", "2"}};
    const std::map<std::string, std::string> b = {{"y", "2"}, {"x", "1"}};
    std::map<std::string, std::string> c = a;
    c["y"] = "3";
    CHECK(iclv::config_hash(a) == iclv::config_hash(b));
    CHECK(iclv::config_hash(a) != iclv::config_hash(c));
}

TEST_CASE("the reference parameter file loads with the documented layout") {
    const ParameterFile pf =
        iclv::load_parameters(kDataDir + "/reference_params.csv");

    REQUIRE(pf.latent_names ==
            std::vector<std::string>{"wom", "risk_aversion"});
    REQUIRE(pf.structural_names[0].size() == 17);
    REQUIRE(pf.structural_names[1].size() == 5);
    CHECK(pf.n_levels == 5);
    REQUIRE(pf.indicator_names.size() == 6);
    REQUIRE(pf.attribute_names ==
            std::vector<std::string>{"constant", "social_adoption",
                                     "city_adoption", "price_ratio"});

    const auto& st = pf.params.structural;
    CHECK(st.alpha[0](4) == 0.273);   // n_workers
    CHECK(st.alpha[0](9) == -0.624);  // unclear_liability_share
    CHECK(st.alpha[1](4) == -0.197);  // male
    CHECK(st.delta(0) == 0.244);
    CHECK(st.delta(1) == 0.0);
    CHECK(st.k_pattern(1, 0) == 1);
    CHECK(st.rho(0) == -1.07);
    CHECK(st.gamma_corr(0, 1) == 0.394);

    const auto& me = pf.params.measurement;
    CHECK(me.d(0, 0) == 1.160);
    CHECK(me.d(1, 0) == -0.338);
    CHECK(me.d(3, 1) == -0.574);
    CHECK(me.gamma(4, 0) == 2.621);
    const auto& psi0 = me.psi[0];
    CHECK(psi0(0) == -std::numeric_limits<double>::infinity());
    CHECK(psi0(1) == 0.0);
    CHECK(psi0(2) == 0.990);
    CHECK(psi0(3) == 2.402);
    CHECK(psi0(4) == 3.857);
    CHECK(psi0(5) == std::numeric_limits<double>::infinity());

    const auto& ch = pf.params.choice;
    CHECK(ch.b(0) == 0.987);
    CHECK(ch.b(3) == -2.529);
    CHECK(ch.lambda(0, 1) == 0.596);
    CHECK(ch.lambda(1, 1) == -0.634);
    CHECK(ch.lambda(0, 0) == 0.0);
    CHECK(ch.g(1, 1) == 1.125);
    CHECK(ch.g(0, 2) == 0.395);
    CHECK(ch.g(0, 3) == 0.672);
    CHECK(ch.g(1, 2) == 0.0);  // unlisted cell pinned at zero

    // the year loop's covariate wiring comes from the reserved names
    CHECK(pf.slots.crash == 8);
    CHECK(pf.slots.legal == 9);
    CHECK(pf.slots.src_friend == 10);
    CHECK(pf.slots.src_media == 12);
    CHECK(pf.slots.crash_scale == 0.01);
    CHECK(pf.attr_slots.constant == 0);
    CHECK(pf.attr_slots.social == 1);
    CHECK(pf.attr_slots.city == 2);
    CHECK(pf.attr_slots.price_ratio == 3);
    CHECK(pf.attr_slots.av_alternative == 1);

    // only the risk-aversion delta is pinned; everything else is free
    CHECK(pf.mask.delta(0));
    CHECK_FALSE(pf.mask.delta(1));
    CHECK(pf.mask.gamma_corr);
    CHECK(pf.mask.rho(0));
    CHECK(pf.mask.alpha[0].all());
    CHECK(pf.mask.b.all());
    CHECK(iclv::ParamPacker(pf.params, pf.mask).dim() == 64);
}

TEST_CASE("parameter files survive a save/load round trip") {
    const ParameterFile pf =
        iclv::load_parameters(kDataDir + "/reference_params.csv");
    const std::string path = scratch("params_rt.csv");
    iclv::save_parameters(path, pf);
    const ParameterFile back = iclv::load_parameters(path);

    CHECK(back.latent_names == pf.latent_names);
    CHECK(back.structural_names == pf.structural_names);
    CHECK(back.indicator_names == pf.indicator_names);
    CHECK(back.attribute_names == pf.attribute_names);
    CHECK(back.n_levels == pf.n_levels);
    for (size_t l = 0; l < pf.params.structural.alpha.size(); ++l)
        CHECK(back.params.structural.alpha[l] == pf.params.structural.alpha[l]);
    CHECK(back.params.structural.delta == pf.params.structural.delta);
    CHECK(back.params.structural.gamma_corr == pf.params.structural.gamma_corr);
    CHECK(back.params.structural.rho == pf.params.structural.rho);
    CHECK(back.params.measurement.d == pf.params.measurement.d);
    CHECK(back.params.measurement.gamma == pf.params.measurement.gamma);
    for (size_t h = 0; h < pf.params.measurement.psi.size(); ++h)
        CHECK(back.params.measurement.psi[h] == pf.params.measurement.psi[h]);
    CHECK(back.params.choice.b == pf.params.choice.b);
    CHECK(back.params.choice.lambda == pf.params.choice.lambda);
    CHECK(back.params.choice.g == pf.params.choice.g);
    for (int l = 0; l < 2; ++l) {
        CHECK(back.mask.delta(l) == pf.mask.delta(l));
        CHECK((back.mask.alpha[static_cast<size_t>(l)] ==
               pf.mask.alpha[static_cast<size_t>(l)])
                  .all());
    }
    CHECK(back.mask.gamma_corr == pf.mask.gamma_corr);
    CHECK(back.slots.crash == pf.slots.crash);
    CHECK(back.attr_slots.price_ratio == pf.attr_slots.price_ratio);

    // a second save writes the same bytes: the emission is canonical
    const std::string again = scratch("params_rt2.csv");
    iclv::save_parameters(again, back);
    CHECK(read_text(again) == read_text(path));
}

TEST_CASE("parameter files reject structural mistakes with row context") {
    auto base = [](const std::string& extra) {
        return std::string("block,label,latent,value,fixed\n") +
               "meta,n_levels,,2,1\n"
               "structural,x1,wom,0.5,0\n"
               "structural,x2,risk,0.3,0\n"
               "loading,ind1,wom,1,0\n"
               "meas_intercept,ind1,,0.2,0\n"
               "attribute,constant,,0.9,0\n"
               "choice_loading,wom,wom,0.5,0\n" +
               extra;
    };
    auto load_with = [&](const std::string& extra) {
        const std::string path = scratch("bad_params.csv");
        write_text(path, base(extra));
        return iclv::load_parameters(path);
    };

    CHECK(load_with("").n_levels == 2);  // binary battery, no thresholds

    CHECK_THROWS_WITH_AS(load_with("structural,x1,wom,0.5,0\n"),
                         doctest::Contains("duplicate covariate"), SchemaError);
    CHECK_THROWS_WITH_AS(load_with("junk,a,b,1,0\n"),
                         doctest::Contains("unknown block"), SchemaError);
    CHECK_THROWS_WITH_AS(load_with("delta,ghost,ghost,0.2,0\n"),
                         doctest::Contains("unknown latent"), SchemaError);
    CHECK_THROWS_WITH_AS(load_with("cross,risk,wom,0.5,0\n"),
                         doctest::Contains("earlier latent"), SchemaError);
    CHECK_THROWS_WITH_AS(load_with("threshold,ind1,psi2,1,0\n"),
                         doctest::Contains("pinned"), SchemaError);
    CHECK_THROWS_WITH_AS(load_with("structural,x3,wom,0.5,2\n"),
                         doctest::Contains("fixed must be 0 or 1"), SchemaError);
    CHECK_THROWS_WITH_AS(load_with("delta,wom,wom,1.5,0\n"),
                         doctest::Contains("delta"), SchemaError);

    // a 5-point battery must list psi3..psi5 for every indicator
    const std::string path = scratch("gap_params.csv");
    std::string text = base("threshold,ind1,psi3,0.7,0\nthreshold,ind1,psi4,1.5,0\n");
    text.replace(text.find("meta,n_levels,,2,1"), 18, "meta,n_levels,,5,1");
    write_text(path, text);
    CHECK_THROWS_WITH_AS(iclv::load_parameters(path),
                         doctest::Contains("psi5"), SchemaError);
}

TEST_CASE("population rows expand the raw person record into model covariates") {
    const ParameterFile pf =
        iclv::load_parameters(kDataDir + "/reference_params.csv");
    const std::string path = scratch("pop.csv");
    write_text(path, std::string(kPopulationHeader) + "\n" +
                         join(person_row("a1")) + "\n" +
                         join(person_row("a2", {{"education", "below_college"},
                                                {"income", "le_35k"},
                                                {"male", "0"},
                                                {"acc_injury", "severe"},
                                                {"zip", "37215"},
                                                {"zip_area_sqmi", "12"}})) +
                         "\n");
    const iclv::Population pop = iclv::load_population(path, pf);
    REQUIRE(pop.agents.size() == 2);

    // a1: ms_phd, 36k_75k, 2 workers, 1 child, male, 3 vehicles, minor damage
    Eigen::VectorXd wom(17);
    wom << 0, 0, 0, 1, 2, 1, 1, 3, 0, 0, 0, 0, 0, 1, 0, 0, 0;
    Eigen::VectorXd risk(5);
    risk << 0, 1, 2, 1, 1;
    CHECK(pop.agents[0].s[0] == wom);
    CHECK(pop.agents[0].s[1] == risk);
    CHECK(pop.agents[0].cv_price == 42000.0);
    CHECK(pop.agents[1].s[0](0) == 1.0);   // below_college dummy
    CHECK(pop.agents[1].s[0](2) == 1.0);   // le_35k dummy
    CHECK(pop.agents[1].s[0](16) == 1.0);  // severe injury dummy
    CHECK(pop.agents[1].s[1](0) == 0.0);   // not a college graduate

    CHECK(pop.zip_area.at("37201") == 4.0);
    CHECK(pop.zip_area.at("37215") == 12.0);
    REQUIRE(pop.profiles.size() == 2);
    CHECK(pop.profiles[0].labels[0] == "ms_phd");
    CHECK(pop.profiles[0].values[5] == 2.0);  // n_workers is continuous
    CHECK(pop.profiles[0].has_centroid);

    SUBCASE("schema violations point at the row") {
        write_text(path, std::string(kPopulationHeader) + "\n" +
                             join(person_row("a1", {{"education", "phd"}})) +
                             "\n");
        CHECK_THROWS_WITH_AS(iclv::load_population(path, pf),
                             doctest::Contains("a1"), SchemaError);
        write_text(path, std::string(kPopulationHeader) + "\n" +
                             join(person_row("a1")) + "\n" +
                             join(person_row("a1")) + "\n");
        CHECK_THROWS_WITH_AS(iclv::load_population(path, pf),
                             doctest::Contains("duplicate id"), SchemaError);
        write_text(path, std::string(kPopulationHeader) + "\n" +
                             join(person_row("a1", {{"cv_price", "0"}})) + "\n");
        CHECK_THROWS_AS(iclv::load_population(path, pf), SchemaError);
        write_text(path,
                   std::string(kPopulationHeader) + "\n" +
                       join(person_row("a1")) + "\n" +
                       join(person_row("a2", {{"zip_area_sqmi", "9"}})) + "\n");
        CHECK_THROWS_WITH_AS(iclv::load_population(path, pf),
                             doctest::Contains("disagrees"), SchemaError);
    }
}

TEST_CASE("survey rows build estimation-ready individuals") {
    const ParameterFile pf =
        iclv::load_parameters(kDataDir + "/reference_params.csv");
    const std::string header =
        "id,education,income,n_workers,n_children,male,n_vehicles,"
        "acc_vehicle,acc_injury,crash,legal,src_friend,src_colleague,"
        "src_media,y1,y2,y3,y4,y5,y6,"
        "task1_social,task1_city,task1_price_ratio,task1_chosen,"
        "task2_social,task2_city,task2_price_ratio,task2_chosen";
    const std::string row1 =
        "r1,ms_phd,36k_75k,2,1,1,3,minor,none,290,0.2,1,0,0,"
        "4,2,3,1,5,3,0.3,0.6,1.2,2,0.9,0.3,1.5,1";
    const std::string path = scratch("sample.csv");
    write_text(path, header + "\n" + row1 + "\n");

    const iclv::SampleData data = iclv::load_sample(path, pf);
    REQUIRE(data.sample.q() == 1);
    CHECK(data.sample.n_tasks == 2);
    CHECK(data.sample.n_indicators == 6);
    CHECK(data.sample.n_levels == 5);
    CHECK(data.sample.n_alternatives == 2);

    const iclv::Individual& ind = data.sample.individuals[0];
    CHECK(ind.s[0](8) == doctest::Approx(2.90));  // 290 crashes in hundreds
    CHECK(ind.s[0](9) == 0.2);
    CHECK(ind.s[0](10) == 1.0);  // friend source
    CHECK(ind.s[0](12) == 0.0);
    CHECK(ind.y(0) == 4);
    CHECK(ind.y(3) == 1);
    CHECK(ind.x_star == Eigen::MatrixXd::Ones(6, 1));
    const Eigen::MatrixXd& x = ind.tasks[0].x;
    CHECK(x(0, 1) == 1.0);  // constant on the AV alternative
    CHECK(x(1, 1) == 0.3);
    CHECK(x(2, 1) == 0.6);
    CHECK(x(3, 1) == 1.2);
    CHECK(x.col(0).isZero());
    CHECK(ind.tasks[0].chosen == 2);
    CHECK(ind.tasks[1].chosen == 1);
    CHECK_FALSE(data.profiles[0].has_centroid);  // no lat/lon columns

    SUBCASE("row errors carry the id and the column") {
        auto broken = [&](const std::string& from, const std::string& to) {
            std::string text = header + "\n" + row1 + "\n";
            const auto at = text.find(from);
            REQUIRE(at != std::string::npos);
            text.replace(at, from.size(), to);
            write_text(path, text);
        };
        broken(",4,2,3,1,5,3,", ",4,2,9,1,5,3,");
        CHECK_THROWS_WITH_AS(iclv::load_sample(path, pf),
                             doctest::Contains("y3"), SchemaError);
        broken(",0.3,0.6,1.2,2,", ",0.3,0.6,1.2,3,");
        CHECK_THROWS_WITH_AS(iclv::load_sample(path, pf),
                             doctest::Contains("chosen"), SchemaError);
        broken(",0.9,0.3,1.5,1", ",9,0.3,1.5,1");
        CHECK_THROWS_WITH_AS(iclv::load_sample(path, pf),
                             doctest::Contains("fractions"), SchemaError);
        write_text(path, header + "\n");
        CHECK_THROWS_AS(iclv::load_sample(path, pf), SchemaError);
    }
}

TEST_CASE("the bundled example survey is loadable and model-consistent") {
    const ParameterFile pf =
        iclv::load_parameters(kDataDir + "/reference_params.csv");
    const iclv::SampleData data =
        iclv::load_sample(kDataDir + "/example_sample.csv", pf);
    CHECK(data.sample.q() == 40);
    CHECK(data.sample.n_tasks == 3);
    int av = 0, likert_spread = 0;
    std::map<int, int> levels;
    for (const auto& ind : data.sample.individuals) {
        for (const auto& task : ind.tasks) av += task.chosen == 2;
        for (int h = 0; h < 6; ++h) ++levels[ind.y(h)];
    }
    for (const auto& [lvl, n] : levels) likert_spread += n > 0;
    CHECK(av > 10);            // some stated AV purchases...
    CHECK(av < 100);           // ...but not a degenerate column
    CHECK(likert_spread == 5);  // every response level occurs
}

TEST_CASE("output writers stamp provenance and format numbers canonically") {
    OutputHeader h;
    h.config_hash = "abc123";
    h.seed = 7;

    iclv::EstimationResult r;
    r.names = {"b:price", "delta:wom"};
    r.natural = Eigen::Vector2d(-2.5, 0.25);
    r.std_errors = Eigen::Vector2d(0.5, 0.0);
    r.cml = -1234.5;
    r.choice_cml = -321.25;
    r.avg_choice_per_pair = -0.125;
    r.penalty = 11.5;
    r.clic = -1246.0;
    r.n_pairs = 42;
    r.floored = 1;
    r.iterations = 9;
    r.gradient_norm = 5e-5;
    r.status = iclv::OptimStatus::converged;

    const std::string est = scratch("estimates.csv");
    iclv::write_estimates(est, h, r);
    const CsvTable t = iclv::read_csv(est);
    REQUIRE(t.comments.size() == 3);
    CHECK(t.comments[0] == " tool_version=0.1.0");
    CHECK(t.comments[1] == " config_hash=abc123");
    CHECK(t.comments[2] == " seed=7");
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0][0] == "b:price");
    CHECK(t.rows[0][3] == "-5");     // t statistic -2.5 / 0.5
    CHECK(t.rows[1][3] == "nan");    // zero standard error

    const std::string fit = scratch("fit.csv");
    iclv::write_fit(fit, h, r);
    const CsvTable f = iclv::read_csv(fit);
    std::map<std::string, std::string> stats;
    for (const auto& row : f.rows) stats[row[0]] = row[1];
    CHECK(stats.at("composite_loglik") == "-1234.5");
    CHECK(stats.at("clic_penalty") == "11.5");
    CHECK(stats.at("n_pairs") == "42");
    CHECK(stats.at("status") == "converged");

    // writing the same content twice gives the same bytes
    const std::string fit2 = scratch("fit2.csv");
    iclv::write_fit(fit2, h, r);
    CHECK(read_text(fit) == read_text(fit2));
}

TEST_CASE("run_command maps failures onto documented exit codes") {
    std::map<std::string, std::string> cfg;
    CHECK(iclv::run_command(cfg) == 2);  // no command at all
    cfg["command"] = "transmogrify";
    CHECK(iclv::run_command(cfg) == 2);

    cfg = {{"command", "validate"}};
    CHECK(iclv::run_command(cfg) == 2);  // parameters missing

    cfg = {{"command", "validate"},
           {"parameters", kDataDir + "/reference_params.csv"},
           {"frobnicate", "1"}};
    CHECK(iclv::run_command(cfg) == 2);  // unknown key

    write_text(scratch("broken.csv"), "block,label\nmeta,n_levels\n");
    cfg = {{"command", "validate"}, {"parameters", scratch("broken.csv")}};
    CHECK(iclv::run_command(cfg) == 3);  // schema problem in an input

    cfg = {{"command", "validate"},
           {"parameters", kDataDir + "/reference_params.csv"},
           {"sample", kDataDir + "/example_sample.csv"},
           {"population", kDataDir + "/example_population.csv"}};
    CHECK(iclv::run_command(cfg) == 0);

    cfg = {{"command", "weights"},
           {"parameters", kDataDir + "/reference_params.csv"},
           {"population", kDataDir + "/example_population.csv"},
           {"sample", kDataDir + "/example_sample.csv"}};
    CHECK(iclv::run_command(cfg) == 2);  // both inputs at once
}

TEST_CASE("the simulate command sweeps the scenario grid deterministically") {
    const std::string pop = scratch("grid_pop.csv");
    std::string text = std::string(kPopulationHeader) + "\n";
    for (int i = 0; i < 30; ++i) {
        std::map<std::string, std::string> over = {
            {"education", i % 3 == 0 ? "below_college" : "college_graduate"},
            {"income", i % 4 == 0 ? "le_35k" : "over_75k"},
            {"n_workers", std::to_string(i % 4)},
            {"n_children", std::to_string((i / 2) % 3)},
            {"male", std::to_string(i % 2)},
            {"n_vehicles", std::to_string(1 + i % 3)},
            {"zip", i % 2 ? "37201" : "37215"},
            {"zip_area_sqmi", i % 2 ? "4" : "12"},
            {"cv_price", std::to_string(38000 + 400 * i)}};
        text += join(person_row("g" + std::to_string(i), over)) + "\n";
    }
    write_text(pop, text);

    const std::string out1 = scratch("grid_out1");
    std::map<std::string, std::string> cfg = {
        {"command", "simulate"},
        {"parameters", kDataDir + "/reference_params.csv"},
        {"population", pop},
        {"out", out1},
        {"horizon_years", "6"},
        {"n_seeds", "2"},
        {"ties", "4"},
        {"discount_rates", "0.01,0.05"},
        {"satisfaction", "0.3,0.9"}};
    REQUIRE(iclv::run_command(cfg) == 0);

    const CsvTable summary = iclv::read_csv(out1 + "/summary.csv");
    REQUIRE(summary.rows.size() == 4);
    CHECK(summary.rows[0][0] == "disc1_sat30");
    CHECK(summary.rows[1][0] == "disc1_sat90");
    CHECK(summary.rows[2][0] == "disc5_sat30");
    CHECK(summary.rows[3][0] == "disc5_sat90");

    const CsvTable traj = iclv::read_csv(out1 + "/trajectory.csv");
    CHECK(traj.rows.size() == 4 * 2 * 6);  // scenarios x seeds x years

    SUBCASE("a re-run to a different directory writes identical bytes") {
        const std::string out2 = scratch("grid_out2");
        cfg["out"] = out2;
        REQUIRE(iclv::run_command(cfg) == 0);
        for (const char* name :
             {"trajectory.csv", "mean_trajectory.csv", "adopters.csv",
              "density_by_zip.csv", "summary.csv"}) {
            CHECK(read_text(out1 + "/" + name) ==
                  read_text(out2 + "/" + name));
        }
    }

    SUBCASE("independent mode relabels its scenarios") {
        cfg["out"] = scratch("grid_out_ind");
        cfg["independent"] = "1";
        cfg["discount_rates"] = "0.05";
        cfg["satisfaction"] = "0.9";
        REQUIRE(iclv::run_command(cfg) == 0);
        const CsvTable s = iclv::read_csv(cfg["out"] + "/summary.csv");
        REQUIRE(s.rows.size() == 1);
        CHECK(s.rows[0][0] == "indep_disc5_sat90");
    }
}
