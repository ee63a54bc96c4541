#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <vector>

#include "lpfno/data/dataset.hpp"
#include "lpfno/harness/train.hpp"
#include "lpfno/optim/adam.hpp"

using namespace lpfno;
using namespace lpfno::harness;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("lpfno-train-" + std::to_string(Catch::rngSeed()) + "-" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

data::Dataset tiny_dataset(std::size_t count, std::size_t n, std::uint64_t seed) {
    data::GenerationConfig gc;
    gc.grid.n = n;
    gc.count = count;
    gc.families = {data::BoundaryFamily::Gaussian, data::BoundaryFamily::Sinusoidal};
    gc.seed = seed;
    return data::generate_dataset(gc);
}

nlohmann::json tiny_lpfno_config() {
    return {{"embedding_width", 8}, {"modes", 4}, {"layers_per_branch", 1}};
}

ExperimentConfig loop_config(std::size_t epochs, std::size_t batch, std::uint64_t seed) {
    ExperimentConfig cfg;
    cfg.train_dataset = "in-memory";
    cfg.model = "lpfno";
    cfg.model_config = tiny_lpfno_config();
    cfg.epochs = epochs;
    cfg.batch_size = batch;
    cfg.seed = seed;
    return cfg;
}

template <typename T>
TrainOutcome<T> run_loop(const ExperimentConfig& cfg, const data::Dataset& train,
                         const data::Dataset* test = nullptr,
                         const EpochCallback& cb = {}) {
    auto model = models::make_model<T>(cfg.model, cfg.model_config, cfg.seed);
    Tensor<T> ti = boundary_tensor<T>(train), tt = solution_tensor<T>(train);
    Tensor<T> vi, vt;
    if (test) {
        vi = boundary_tensor<T>(*test);
        vt = solution_tensor<T>(*test);
    }
    return train_loop<T>(std::move(model), cfg, ti, tt, vi, vt, cb);
}

}  // namespace

TEST_CASE("one epoch of 8 samples at batch 4 takes exactly 2 optimizer steps") {
    auto train = tiny_dataset(8, 12, 900);
    auto out = run_loop<float>(loop_config(1, 4, 1), train);
    CHECK(out.total_steps == 2);
    CHECK(out.curve.size() == 1);
}

TEST_CASE("a partial final batch still counts as a step") {
    auto train = tiny_dataset(6, 12, 901);
    auto out = run_loop<float>(loop_config(1, 4, 1), train);
    CHECK(out.total_steps == 2);
}

TEST_CASE("20 epochs beat 1 epoch on the 64-sample smoke set") {
    auto train = tiny_dataset(64, 16, 902);
    auto cfg1 = loop_config(1, 16, 3);
    auto cfg20 = loop_config(20, 16, 3);
    auto out1 = run_loop<float>(cfg1, train);
    auto out20 = run_loop<float>(cfg20, train);
    INFO("1 epoch " << out1.curve.back().train_mse << ", 20 epochs "
                    << out20.curve.back().train_mse);
    CHECK(out20.curve.back().train_mse < out1.curve.back().train_mse);
    CHECK(out20.curve.size() == 20);
    // the first epoch of both runs is the same computation (test_mse is NaN
    // for both, so compare the fields that carry values)
    CHECK(out20.curve.front().train_mse == out1.curve.front().train_mse);
    CHECK(out20.curve.front().lr == out1.curve.front().lr);
}

TEST_CASE("same seed reproduces the run bit for bit") {
    auto train = tiny_dataset(12, 12, 903);
    auto test = tiny_dataset(4, 12, 904);
    auto cfg = loop_config(3, 4, 5);
    auto a = run_loop<float>(cfg, train, &test);
    auto b = run_loop<float>(cfg, train, &test);
    REQUIRE(a.curve.size() == b.curve.size());
    for (std::size_t e = 0; e < a.curve.size(); ++e) CHECK(a.curve[e] == b.curve[e]);
    CHECK(a.total_steps == b.total_steps);

    auto c = run_loop<float>(loop_config(3, 4, 6), train, &test);
    CHECK(c.curve.back().train_mse != a.curve.back().train_mse);
}

TEST_CASE("non-finite loss aborts naming the epoch and batch") {
    auto train = tiny_dataset(8, 12, 905);
    auto cfg = loop_config(2, 4, 1);
    auto model = models::make_model<float>(cfg.model, cfg.model_config, cfg.seed);
    Tensor<float> ti = boundary_tensor<float>(train);
    Tensor<float> tt = solution_tensor<float>(train);
    for (auto& v : tt.flat()) v = std::numeric_limits<float>::quiet_NaN();
    CHECK_THROWS_WITH(
        train_loop<float>(std::move(model), cfg, ti, tt, {}, {}),
        Catch::Matchers::ContainsSubstring("epoch 0") &&
            Catch::Matchers::ContainsSubstring("batch 0"));
}

TEST_CASE("learning rate follows the step schedule") {
    auto train = tiny_dataset(4, 12, 906);
    auto cfg = loop_config(5, 4, 2);
    cfg.base_lr = 1e-3;
    cfg.scheduler.step = 2;
    cfg.scheduler.gamma = 0.5;
    std::vector<double> lrs;
    auto out = run_loop<float>(cfg, train, nullptr,
                               [&](const EpochStat& s) { lrs.push_back(s.lr); });
    const std::vector<double> expected{1e-3, 1e-3, 5e-4, 5e-4, 2.5e-4};
    REQUIRE(lrs.size() == expected.size());
    for (std::size_t e = 0; e < lrs.size(); ++e) {
        CHECK(lrs[e] == Catch::Approx(expected[e]).epsilon(1e-12));
        CHECK(out.curve[e].lr == lrs[e]);
        CHECK(out.curve[e].epoch == e);
    }
}

TEST_CASE("generalized step_lr agrees with the fixed decade schedule") {
    CHECK(optim::step_lr(0, 1e-3, 2, 0.5) == 1e-3);
    CHECK(optim::step_lr(3, 1e-3, 2, 0.5) == Catch::Approx(5e-4));
    CHECK(optim::step_lr(4, 1e-3, 2, 0.5) == Catch::Approx(2.5e-4));
    for (std::size_t e : {0u, 99u, 100u, 199u, 200u})
        CHECK(optim::step_lr(e, 1e-3) == optim::step_lr(e, 1e-3, 100, 0.1));
    CHECK_THROWS_AS(optim::step_lr(1, 1e-3, 0, 0.1), InvalidArgument);
}

TEST_CASE("batch size larger than the training set is rejected") {
    auto train = tiny_dataset(4, 12, 907);
    CHECK_THROWS_WITH(run_loop<float>(loop_config(1, 8, 1), train),
                      Catch::Matchers::ContainsSubstring("batch size 8"));
}

TEST_CASE("run_training loads datasets from the config paths") {
    TempDir dir;
    auto train = tiny_dataset(8, 12, 908);
    auto test = tiny_dataset(4, 12, 909);
    data::save_dataset(train, dir.path / "train");
    data::save_dataset(test, dir.path / "test");

    ExperimentConfig cfg;
    cfg.train_dataset = (dir.path / "train").string();
    cfg.test_sets = {{"id", (dir.path / "test").string()}};
    cfg.model = "fno2d";
    cfg.model_config = {{"width", 4}, {"modes", 2}, {"layers", 1}, {"projection_hidden", 8}};
    cfg.epochs = 2;
    cfg.batch_size = 4;
    cfg.seed = 11;

    auto out = run_training<float>(cfg);
    CHECK(out.model.kind() == "fno2d");
    REQUIRE(out.curve.size() == 2);
    for (const auto& e : out.curve) {
        CHECK(std::isfinite(e.train_mse));
        CHECK(std::isfinite(e.test_mse));
        CHECK(e.train_mse >= 0.0);
    }
    CHECK(out.total_steps == 4);
}

TEST_CASE("training without a test set records NaN test MSE") {
    auto train = tiny_dataset(4, 12, 910);
    auto out = run_loop<float>(loop_config(1, 4, 1), train);
    CHECK(std::isnan(out.curve[0].test_mse));
    CHECK(std::isfinite(out.curve[0].train_mse));
}

TEST_CASE("experiment config parses strictly with documented defaults") {
    SECTION("defaults") {
        auto cfg = ExperimentConfig::from_json({{"train_dataset", "d"}});
        CHECK(cfg.epochs == 200);
        CHECK(cfg.batch_size == 128);
        CHECK(cfg.base_lr == 1e-3);
        CHECK(cfg.scheduler.step == 100);
        CHECK(cfg.scheduler.gamma == 0.1);
        CHECK(cfg.model == "lpfno");
        CHECK(cfg.precision == "f32");
        CHECK(cfg.seed == 0);
        CHECK(cfg.test_sets.empty());
    }
    SECTION("round trip") {
        ExperimentConfig cfg;
        cfg.train_dataset = "data/train-32";
        cfg.test_sets = {{"id-32", "data/test-id-32"}, {"ood", "data/test-ood-64"}};
        cfg.model = "fno2d";
        cfg.model_config = {{"width", 16}};
        cfg.epochs = 50;
        cfg.batch_size = 32;
        cfg.base_lr = 2e-3;
        cfg.scheduler = {50, 0.5};
        cfg.seed = 77;
        cfg.precision = "f64";
        auto back = ExperimentConfig::from_json(cfg.to_json());
        CHECK(back.train_dataset == cfg.train_dataset);
        CHECK(back.test_sets == cfg.test_sets);
        CHECK(back.model_config == cfg.model_config);
        CHECK(back.scheduler == cfg.scheduler);
        CHECK(back.precision == "f64");
    }
    SECTION("unknown keys are named") {
        CHECK_THROWS_WITH(ExperimentConfig::from_json({{"train_dataset", "d"}, {"epochz", 5}}),
                          Catch::Matchers::ContainsSubstring("epochz"));
        CHECK_THROWS_WITH(
            ExperimentConfig::from_json(
                {{"train_dataset", "d"}, {"scheduler", {{"steps", 10}}}}),
            Catch::Matchers::ContainsSubstring("steps"));
        CHECK_THROWS_WITH(
            ExperimentConfig::from_json(
                {{"train_dataset", "d"},
                 {"test_sets", nlohmann::json::array({{{"name", "a"}, {"dir", "x"}}})}}),
            Catch::Matchers::ContainsSubstring("dir"));
    }
    SECTION("invalid values") {
        CHECK_THROWS_AS(ExperimentConfig::from_json({{"train_dataset", "d"}, {"epochs", 0}}),
                        InvalidArgument);
        CHECK_THROWS_AS(ExperimentConfig::from_json({{"train_dataset", "d"}, {"model", "mlp"}}),
                        InvalidArgument);
        CHECK_THROWS_AS(
            ExperimentConfig::from_json({{"train_dataset", "d"}, {"precision", "f16"}}),
            InvalidArgument);
        CHECK_THROWS_AS(ExperimentConfig::from_json(nlohmann::json::object()), InvalidArgument);
    }
}
