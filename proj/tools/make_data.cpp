// Writes the bundled data files: a 2000-agent forecasting population, a
// small example population, and an example survey sample whose responses
// are drawn from the reference calibration itself (so an estimation demo
// starts near a model that actually generated the data).
//
//   make_data [parameter_csv] [out_dir]
//
// Regeneration is deterministic: person records come from the same
// counter-hash uniforms the simulator uses, survey responses from a fixed
// mt19937_64 stream.
#include <cmath>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "iclv/io.hpp"
#include "iclv/simulate.hpp"
#include "iclv/textio.hpp"
#include "iclv/weight_matrix.hpp"
#include "support/synthetic.hpp"

namespace {

using iclv::CsvTable;
using iclv::format_number;

// Generator-private tags, away from the simulator's decision tags.
constexpr std::uint64_t kTagPerson = 100;

struct ZipInfo {
    const char* zip;
    double area_sqmi;
    double lat, lon;
};
// Eight districts of a mid-sized metro area, smallest areas downtown.
const ZipInfo kZips[] = {
    {"37201", 4.0, 36.165, -86.778}, {"37203", 6.5, 36.151, -86.791},
    {"37206", 8.0, 36.180, -86.733}, {"37209", 13.5, 36.152, -86.853},
    {"37211", 17.0, 36.070, -86.724}, {"37214", 15.5, 36.163, -86.662},
    {"37215", 12.0, 36.083, -86.829}, {"37221", 21.0, 36.066, -86.963},
};

struct Person {
    std::string id, zip, education, income, acc_vehicle, acc_injury;
    int n_workers = 0, n_children = 0, male = 0, n_vehicles = 0;
    double lat = 0.0, lon = 0.0, cv_price = 0.0, area = 0.0;
};

const char* pick(double u, const std::vector<double>& cuts,
                 const std::vector<const char*>& levels) {
    for (size_t i = 0; i + 1 < cuts.size(); ++i)
        if (u < cuts[i]) return levels[i];
    return levels.back();
}

Person make_person(const std::string& id, std::uint64_t seed, std::uint64_t i) {
    auto u = [&](std::uint64_t field) {
        return iclv::sim_uniform(seed, kTagPerson, i, field);
    };
    Person p;
    p.id = id;
    p.education = pick(u(1), {0.35, 0.70, 0.90, 1.0},
                       {"below_college", "college_graduate", "ms_phd",
                        "professional"});
    p.income = pick(u(2), {0.25, 0.65, 1.0}, {"le_35k", "36k_75k", "over_75k"});
    p.n_workers = static_cast<int>(
        pick(u(3), {0.10, 0.40, 0.80, 1.0}, {"0", "1", "2", "3"})[0] - '0');
    p.n_children = static_cast<int>(
        pick(u(4), {0.35, 0.65, 0.87, 1.0}, {"0", "1", "2", "3"})[0] - '0');
    p.male = u(5) < 0.5 ? 1 : 0;
    p.n_vehicles = static_cast<int>(
        pick(u(6), {0.45, 0.87, 1.0}, {"1", "2", "3"})[0] - '0');
    p.acc_vehicle = pick(u(7), {0.70, 0.92, 1.0}, {"none", "minor", "major"});
    p.acc_injury = pick(u(8), {0.80, 0.94, 1.0}, {"none", "minor", "severe"});
    p.cv_price = std::round(35000.0 + 20000.0 * u(9));
    const auto& z = kZips[static_cast<size_t>(u(10) * 8.0) % 8];
    p.zip = z.zip;
    p.area = z.area_sqmi;
    p.lat = z.lat + 0.04 * (u(11) - 0.5);
    p.lon = z.lon + 0.04 * (u(12) - 0.5);
    return p;
}

std::vector<std::string> person_fields(const Person& p) {
    return {p.education,
            p.income,
            std::to_string(p.n_workers),
            std::to_string(p.n_children),
            std::to_string(p.male),
            std::to_string(p.n_vehicles),
            p.acc_vehicle,
            p.acc_injury};
}

void write_population(const std::string& path, int n, std::uint64_t seed,
                      const std::string& id_prefix) {
    CsvTable t;
    t.header = {"id",        "zip",        "lat",        "lon",
                "zip_area_sqmi", "education", "income",   "n_workers",
                "n_children", "male",      "n_vehicles", "acc_vehicle",
                "acc_injury", "cv_price"};
    for (int i = 0; i < n; ++i) {
        const Person p = make_person(id_prefix + std::to_string(i + 1), seed,
                                     static_cast<std::uint64_t>(i));
        std::vector<std::string> row = {p.id, p.zip, format_number(p.lat),
                                        format_number(p.lon),
                                        format_number(p.area)};
        for (auto& f : person_fields(p)) row.push_back(f);
        row.push_back(format_number(p.cv_price));
        t.rows.push_back(std::move(row));
    }
    write_csv(path, t);
    std::cout << "wrote " << path << " (" << n << " agents)\n";
}

void write_sample(const std::string& path, const iclv::ParameterFile& pf,
                  int q, std::uint64_t seed) {
    const int n_ind = static_cast<int>(pf.indicator_names.size());
    const double socials[] = {0.3, 0.6, 0.9};
    const double cities[] = {0.3, 0.6, 0.9};
    const double ratios[] = {1.2, 1.3, 1.4, 1.5};
    const double crashes[] = {207.0, 290.0, 415.0};
    const double legals[] = {0.10, 0.20, 0.30};
    const int n_tasks = 3;

    CsvTable t;
    t.header = {"id",        "education",  "income",      "n_workers",
                "n_children", "male",      "n_vehicles",  "acc_vehicle",
                "acc_injury", "lat",       "lon",         "crash",
                "legal",     "src_friend", "src_colleague", "src_media"};
    for (int h = 0; h < n_ind; ++h)
        t.header.push_back("y" + std::to_string(h + 1));
    for (int task = 1; task <= n_tasks; ++task) {
        const std::string stem = "task" + std::to_string(task) + "_";
        t.header.insert(t.header.end(), {stem + "social", stem + "city",
                                         stem + "price_ratio", stem + "chosen"});
    }

    for (int i = 0; i < q; ++i) {
        const Person p = make_person("r" + std::to_string(i + 1), seed,
                                     static_cast<std::uint64_t>(i));
        std::vector<std::string> row = {p.id};
        for (auto& f : person_fields(p)) row.push_back(f);
        row.push_back(format_number(p.lat));
        row.push_back(format_number(p.lon));
        row.push_back(format_number(crashes[i % 3]));
        row.push_back(format_number(legals[(i / 3) % 3]));
        const int source = i % 4;  // none / friend / colleague / media
        row.push_back(source == 1 ? "1" : "0");
        row.push_back(source == 2 ? "1" : "0");
        row.push_back(source == 3 ? "1" : "0");
        for (int h = 0; h < n_ind; ++h) row.push_back("1");  // placeholder
        for (int task = 0; task < n_tasks; ++task) {
            row.push_back(format_number(socials[(i + task) % 3]));
            row.push_back(format_number(cities[(i + 2 * task) % 3]));
            row.push_back(format_number(ratios[(i + 3 * task) % 4]));
            row.push_back("1");  // placeholder
        }
        t.rows.push_back(std::move(row));
    }
    write_csv(path, t);

    // Load the placeholder file through the real loader, draw responses from
    // the calibrated model over the gower tie network, and patch them in.
    iclv::SampleData data = iclv::load_sample(path, pf);
    const iclv::WeightMatrix w =
        iclv::build_weight_matrix(data.profiles, iclv::TieMetric::gower, 5);
    testsup::simulate_responses(pf.params, w, data.sample,
                                static_cast<unsigned>(seed));
    for (int i = 0; i < q; ++i) {
        const auto& ind = data.sample.individuals[static_cast<size_t>(i)];
        for (int h = 0; h < n_ind; ++h) {
            const int col = t.column("y" + std::to_string(h + 1));
            t.rows[static_cast<size_t>(i)][static_cast<size_t>(col)] =
                std::to_string(ind.y(h));
        }
        for (int task = 0; task < n_tasks; ++task) {
            const int col =
                t.column("task" + std::to_string(task + 1) + "_chosen");
            t.rows[static_cast<size_t>(i)][static_cast<size_t>(col)] =
                std::to_string(ind.tasks[static_cast<size_t>(task)].chosen);
        }
    }
    write_csv(path, t);
    std::cout << "wrote " << path << " (" << q << " respondents)\n";
}

}  // namespace

int main(int argc, char** argv) {
    const std::string params_path =
        argc > 1 ? argv[1] : "data/reference_params.csv";
    const std::string out = argc > 2 ? argv[2] : "data";
    try {
        const iclv::ParameterFile pf = iclv::load_parameters(params_path);
        std::filesystem::create_directories(out);
        write_population(out + "/population_2000.csv", 2000, 9001, "p");
        write_population(out + "/example_population.csv", 60, 9002, "e");
        write_sample(out + "/example_sample.csv", pf, 40, 9003);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
