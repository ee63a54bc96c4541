#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "lpfno/harness/report.hpp"

using namespace lpfno;
using namespace lpfno::harness;
namespace fs = std::filesystem;

namespace {

SetMetrics set_of(const std::string& name, const std::string& family, const std::string& split,
                  std::size_t res, double l1, double l2) {
    SetMetrics s;
    s.name = name;
    s.family = family;
    s.split = split;
    s.resolution = res;
    s.mean_rel_l1 = l1;
    s.mean_rel_l2 = l2;
    s.count = 4;
    s.per_sample_l1 = {l1, l1, l1, l1};
    s.per_sample_l2 = {l2, l2, l2, l2};
    return s;
}

MetricsReport report_of(const std::string& model, std::size_t train_res) {
    MetricsReport r;
    r.model_kind = model;
    r.train_resolution = train_res;
    r.seed = 1;
    r.sets.push_back(set_of("id", "gaussian", "id", train_res, 0.01, 0.02));
    r.sets.push_back(set_of("ood-g", "gaussian", "ood", 64, 0.03, 0.04));
    r.sets.push_back(set_of("ood-s", "sinusoidal", "ood", 64, 0.05, 0.06));
    r.sets.push_back(set_of("ood-p", "polynomial", "ood", 64, 0.07, 0.08));
    return r;
}

std::size_t count_lines(const std::string& s) {
    std::size_t n = 0;
    for (char c : s)
        if (c == '\n') ++n;
    return n;
}

}  // namespace

TEST_CASE("long csv emits one row per model x resolutions x family x split") {
    std::vector<MetricsReport> reports{report_of("lpfno", 32), report_of("fno2d", 64)};
    auto csv = long_csv(reports);
    CHECK(count_lines(csv) == 1 + 8);  // header + 4 sets per report
    CHECK(csv.rfind("model,train_resolution,test_resolution,family,split,set,samples,"
                    "degenerate,mean_rel_l1,mean_rel_l2\n",
                    0) == 0);
    CHECK(csv.find("lpfno,32,32,gaussian,id,id,4,0,0.01") != std::string::npos);
    CHECK(csv.find("fno2d,64,64,sinusoidal,ood,ood-s,4,0,0.05") != std::string::npos);
}

TEST_CASE("loss curve csv lists epoch train and test mse") {
    std::vector<EpochStat> curve{{0, 1e-3, 0.5, 0.75},
                                 {1, 1e-3, 0.25, std::numeric_limits<double>::quiet_NaN()}};
    auto csv = loss_curve_csv(curve);
    std::istringstream is(csv);
    std::string line;
    std::getline(is, line);
    CHECK(line == "epoch,train_mse,test_mse");
    std::getline(is, line);
    CHECK(line == "0,0.5,0.75");
    std::getline(is, line);
    CHECK(line == "1,0.25,");  // no test set that epoch
}

TEST_CASE("accuracy table keeps a null placeholder for the external encoder") {
    auto j = accuracy_table_json({report_of("lpfno", 32)});
    REQUIRE(j.at("rows").size() == 2);
    CHECK(j.at("rows")[0].at("model") == "tencoder");
    CHECK(j.at("rows")[0].at("cells").is_null());

    const auto& row = j.at("rows")[1];
    CHECK(row.at("model") == "lpfno");
    CHECK(row.at("cells").at("id").at("rel_l2") == 0.02);
    CHECK(row.at("cells").at("ood_gaussian").at("rel_l2") == 0.04);
    CHECK(row.at("cells").at("ood_sinusoidal").at("rel_l1") == 0.05);
    CHECK(row.at("cells").at("ood_polynomial").at("rel_l2") == 0.08);
}

TEST_CASE("missing test families appear as null cells") {
    MetricsReport r;
    r.model_kind = "lpfno";
    r.train_resolution = 32;
    r.sets.push_back(set_of("id", "gaussian", "id", 32, 0.01, 0.02));
    auto j = accuracy_table_json({r});
    const auto& cells = j.at("rows")[1].at("cells");
    CHECK_FALSE(cells.at("id").is_null());
    CHECK(cells.at("ood_gaussian").is_null());
    CHECK(cells.at("ood_polynomial").is_null());
}

TEST_CASE("resolution table embeds each model matrix beside the null encoder row") {
    ResolutionMatrix m;
    m.model_kind = "fno2d";
    m.train_resolutions = {32, 64};
    m.test_resolutions = {32, 64};
    m.cells = {{0.1, 0.3}, {0.2, 0.05}};
    auto j = resolution_table_json({m});
    REQUIRE(j.at("rows").size() == 2);
    CHECK(j.at("rows")[0].at("matrix").is_null());
    CHECK(j.at("rows")[1].at("model") == "fno2d");
    CHECK(j.at("rows")[1].at("matrix").at("cells")[1][1] == 0.05);
}

TEST_CASE("write_text_file round trips and refuses bad paths") {
    auto dir = fs::temp_directory_path() /
               ("lpfno-report-" + std::to_string(Catch::rngSeed()));
    fs::create_directories(dir);
    write_text_file(dir / "a.csv", "x,y\n1,2\n");
    std::ifstream in(dir / "a.csv", std::ios::binary);
    std::string body{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    CHECK(body == "x,y\n1,2\n");
    CHECK_THROWS_AS(write_text_file(dir / "missing" / "b.csv", "x"), IoError);
    fs::remove_all(dir);
}
