#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <memory>
#include <numeric>
#include <vector>

#include "lpfno/data/dataset.hpp"
#include "lpfno/harness/evaluate.hpp"
#include "lpfno/harness/resolution.hpp"
#include "lpfno/harness/train.hpp"

using namespace lpfno;
using namespace lpfno::harness;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("lpfno-eval-" + std::to_string(Catch::rngSeed()) + "-" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

data::Dataset tiny_dataset(std::size_t count, std::size_t n, std::uint64_t seed,
                           data::BoundaryFamily family = data::BoundaryFamily::Gaussian,
                           data::Split split = data::Split::ID) {
    data::GenerationConfig gc;
    gc.grid.n = n;
    gc.count = count;
    gc.families = {family};
    gc.split = split;
    gc.seed = seed;
    return data::generate_dataset(gc);
}

/// The target fields handed back as predictions, chunk by chunk.
Predictor oracle_for(const data::Dataset& d) {
    auto targets = std::make_shared<Tensor<double>>(solution_tensor<double>(d));
    auto offset = std::make_shared<std::size_t>(0);
    return [targets, offset](const Tensor<double>& g) {
        const std::size_t b = g.shape()[0];
        std::vector<std::size_t> idx(b);
        std::iota(idx.begin(), idx.end(), *offset);
        *offset += b;
        return gather_rows(*targets, idx);
    };
}

models::AnyModel<float> tiny_model(std::uint64_t seed) {
    return models::make_model<float>(
        "lpfno", {{"embedding_width", 8}, {"modes", 4}, {"layers_per_branch", 1}}, seed);
}

}  // namespace

TEST_CASE("a perfect oracle scores zero on every metric") {
    auto d = tiny_dataset(6, 12, 300);
    auto m = evaluate_set(oracle_for(d), d, "id", 4);
    CHECK(m.mean_rel_l1 == 0.0);
    CHECK(m.mean_rel_l2 == 0.0);
    CHECK(m.count == 6);
    CHECK(m.degenerate == 0);
    CHECK(m.name == "id");
    CHECK(m.family == "gaussian");
    CHECK(m.split == "id");
    CHECK(m.resolution == 12);
    REQUIRE(m.per_sample_l1.size() == 6);
    for (double v : m.per_sample_l2) CHECK(v == 0.0);
}

TEST_CASE("zero-norm targets are excluded from the mean but counted") {
    auto d = tiny_dataset(3, 8, 301);
    // overwrite one sample with the degenerate all-zero field
    for (auto& v : d.samples[1].solution.flat()) v = 0.0;
    for (auto& v : d.samples[1].boundary.flat()) v = 0.0;

    auto m = evaluate_set(oracle_for(d), d, "id", 3);
    CHECK(m.count == 2);
    CHECK(m.degenerate == 1);
    CHECK(m.per_sample_l1.size() == 2);
    CHECK(m.mean_rel_l1 == 0.0);

    // a biased predictor shows the degenerate sample does not pollute the mean
    auto plus_one = [&](const Tensor<double>& g) {
        auto p = oracle_for(d)(g);  // fresh oracle: full set in one chunk
        for (auto& v : p.flat()) v += 0.5;
        return p;
    };
    auto biased = evaluate_set(plus_one, d, "biased", 3);
    CHECK(biased.count == 2);
    CHECK(biased.degenerate == 1);
    CHECK(biased.mean_rel_l2 > 0.0);
    CHECK(biased.mean_rel_l2 ==
          Catch::Approx((biased.per_sample_l2[0] + biased.per_sample_l2[1]) / 2.0)
              .margin(1e-15));
}

TEST_CASE("reported means equal a recomputation from saved predictions") {
    auto d = tiny_dataset(5, 10, 302);
    auto model = tiny_model(7);
    Tensor<double> saved;
    auto m = evaluate_set(model_predictor(model), d, "id", 2, &saved);
    REQUIRE(saved.shape() == Shape{5, 10, 10, 1});
    REQUIRE(m.count == 5);

    // independent recomputation with naive loops over the saved tensor
    auto targets = solution_tensor<double>(d);
    double sum_l1 = 0.0, sum_l2 = 0.0;
    for (std::size_t s = 0; s < 5; ++s) {
        double n1 = 0, d1 = 0, n2 = 0, d2 = 0;
        for (std::size_t e = 0; e < 100; ++e) {
            const double p = saved[s * 100 + e], t = targets[s * 100 + e];
            n1 += std::abs(p - t);
            d1 += std::abs(t);
            n2 += (p - t) * (p - t);
            d2 += t * t;
        }
        sum_l1 += n1 / d1;
        sum_l2 += std::sqrt(n2) / std::sqrt(d2);
    }
    CHECK(m.mean_rel_l1 == Catch::Approx(sum_l1 / 5.0).epsilon(1e-13));
    CHECK(m.mean_rel_l2 == Catch::Approx(sum_l2 / 5.0).epsilon(1e-13));
}

TEST_CASE("chunked and single-batch evaluation agree bitwise") {
    auto d = tiny_dataset(7, 10, 303);
    auto model = tiny_model(8);
    auto chunked = evaluate_set(model_predictor(model), d, "id", 2);
    auto whole = evaluate_set(model_predictor(model), d, "id", 7);
    CHECK(chunked.mean_rel_l2 == whole.mean_rel_l2);
    CHECK(chunked.per_sample_l2 == whole.per_sample_l2);
}

TEST_CASE("evaluate_model walks every configured test set") {
    TempDir dir;
    auto id = tiny_dataset(4, 12, 304, data::BoundaryFamily::Gaussian, data::Split::ID);
    auto ood = tiny_dataset(3, 12, 305, data::BoundaryFamily::Sinusoidal, data::Split::OOD);
    data::save_dataset(id, dir.path / "id");
    data::save_dataset(ood, dir.path / "ood");

    auto model = tiny_model(9);
    std::vector<TestSetRef> sets{{"id-12", (dir.path / "id").string()},
                                 {"ood-12", (dir.path / "ood").string()}};
    auto report = evaluate_model(model, sets, 12, 9, "f32");
    CHECK(report.model_kind == "lpfno");
    CHECK(report.train_resolution == 12);
    CHECK(report.seed == 9);
    REQUIRE(report.sets.size() == 2);
    CHECK(report.sets[0].name == "id-12");
    CHECK(report.sets[0].split == "id");
    CHECK(report.sets[1].family == "sinusoidal");
    CHECK(report.sets[1].split == "ood");
    for (const auto& s : report.sets) {
        CHECK(s.mean_rel_l1 >= 0.0);
        CHECK(s.mean_rel_l2 >= 0.0);
        CHECK(s.count == s.per_sample_l2.size());
    }
    CHECK_THROWS_AS(
        evaluate_model(model, {{"missing", (dir.path / "nope").string()}}, 12, 9, "f32"),
        IoError);
}

TEST_CASE("metrics survive a checkpoint round trip bit for bit") {
    TempDir dir;
    auto train = tiny_dataset(8, 12, 306);
    ExperimentConfig cfg;
    cfg.train_dataset = "in-memory";
    cfg.model = "lpfno";
    cfg.model_config = {{"embedding_width", 8}, {"modes", 4}, {"layers_per_branch", 1}};
    cfg.epochs = 2;
    cfg.batch_size = 4;
    cfg.seed = 21;
    auto model = models::make_model<float>(cfg.model, cfg.model_config, cfg.seed);
    auto out = train_loop<float>(std::move(model), cfg, boundary_tensor<float>(train),
                                 solution_tensor<float>(train), {}, {});

    auto before = evaluate_set(model_predictor(out.model), train, "train", 4);
    models::save_model_checkpoint(dir.path / "ckpt", out.model, cfg.seed, cfg.epochs);
    auto loaded = models::model_from_checkpoint<float>(models::load_checkpoint(dir.path / "ckpt"));
    auto after = evaluate_set(model_predictor(loaded), train, "train", 4);
    CHECK(before.mean_rel_l1 == after.mean_rel_l1);
    CHECK(before.mean_rel_l2 == after.mean_rel_l2);
    CHECK(before.per_sample_l2 == after.per_sample_l2);
}

TEST_CASE("metrics report serializes losslessly") {
    MetricsReport r;
    r.model_kind = "fno2d";
    r.train_resolution = 32;
    r.seed = 4;
    r.precision = "f32";
    SetMetrics s;
    s.name = "id-32";
    s.family = "gaussian";
    s.split = "id";
    s.resolution = 32;
    s.mean_rel_l1 = 0.125;
    s.mean_rel_l2 = 0.25;
    s.count = 2;
    s.degenerate = 1;
    s.per_sample_l1 = {0.1, 0.15};
    s.per_sample_l2 = {0.2, 0.3};
    r.sets.push_back(s);
    r.curve.push_back({0, 1e-3, 0.5, std::numeric_limits<double>::quiet_NaN()});
    r.curve.push_back({1, 1e-3, 0.25, 0.3});

    auto back = MetricsReport::from_json(r.to_json());
    CHECK(back.model_kind == r.model_kind);
    CHECK(back.train_resolution == 32);
    REQUIRE(back.sets.size() == 1);
    CHECK(back.sets[0] == s);
    REQUIRE(back.curve.size() == 2);
    CHECK(std::isnan(back.curve[0].test_mse));
    CHECK(back.curve[1] == r.curve[1]);
    CHECK_THROWS_WITH(MetricsReport::from_json({{"model", "x"}, {"bogus", 1}}),
                      Catch::Matchers::ContainsSubstring("bogus"));
}

TEST_CASE("resolution matrix cross-evaluates checkpoints against datasets") {
    TempDir dir;
    auto train = tiny_dataset(6, 8, 307);
    auto d8 = tiny_dataset(4, 8, 308);
    auto d16 = tiny_dataset(4, 16, 309);
    data::save_dataset(d8, dir.path / "d8");
    data::save_dataset(d16, dir.path / "d16");

    ExperimentConfig cfg;
    cfg.train_dataset = "in-memory";
    cfg.model = "lpfno";
    cfg.model_config = {{"embedding_width", 8}, {"modes", 3}, {"layers_per_branch", 1}};
    cfg.epochs = 1;
    cfg.batch_size = 3;
    cfg.seed = 5;
    auto out = train_loop<float>(models::make_model<float>(cfg.model, cfg.model_config, cfg.seed),
                                 cfg, boundary_tensor<float>(train), solution_tensor<float>(train),
                                 {}, {});
    models::save_model_checkpoint(dir.path / "ckpt8", out.model, cfg.seed, cfg.epochs);

    auto m = build_resolution_matrix<float>(
        {{8, (dir.path / "ckpt8").string()}},
        {{8, (dir.path / "d8").string()}, {16, (dir.path / "d16").string()}});
    CHECK(m.model_kind == "lpfno");
    REQUIRE(m.cells.size() == 1);
    REQUIRE(m.cells[0].size() == 2);

    // the diagonal cell is the native evaluation, same computation path
    auto native = evaluate_set(model_predictor(out.model), d8, "native");
    CHECK(m.at(8, 8) == native.mean_rel_l2);
    CHECK(m.at(8, 16) > 0.0);
    CHECK_THROWS_AS(m.at(32, 8), InvalidArgument);

    SECTION("missing checkpoint surfaces as IoError") {
        CHECK_THROWS_AS(build_resolution_matrix<float>({{8, (dir.path / "gone").string()}},
                                                       {{8, (dir.path / "d8").string()}}),
                        IoError);
    }
    SECTION("JSON and CSV round trip") {
        auto back = ResolutionMatrix::from_json(m.to_json());
        CHECK(back.model_kind == m.model_kind);
        CHECK(back.cells == m.cells);
        auto csv = m.to_csv();
        CHECK(csv.find("train_resolution,test_8,test_16") == 0);
        CHECK(csv.find("\n8,") != std::string::npos);
    }
}
