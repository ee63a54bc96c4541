#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include "lpfno/harness/evaluate.hpp"
#include "lpfno/harness/train.hpp"
#include "lpfno/models/checkpoint.hpp"

// Canonical experiment definitions shared by the CLI examples, the benchmark
// drivers, and the acceptance suite. Everything that wants "the standard
// training run at resolution N" goes through here so the artifacts are
// interchangeable: same data seeds, same optimizer settings, same model seed.
//
// Conventions:
//   training data   2048 samples, gaussian+sinusoidal, in-distribution, seed 2024
//   test data       256 samples per set; in-distribution seed 9000+n,
//                   out-of-distribution seed 5000 + 100*family_index + n
//   training        200 epochs, batch 128, lr 1e-3 stepped (x0.1 every 100),
//                   model seed 7, f32
//   smoke variant   512 samples, 50 epochs, otherwise identical

namespace lpfno::harness::protocol {

namespace fs = std::filesystem;

inline constexpr std::uint64_t kTrainSeed = 2024;
inline constexpr std::uint64_t kModelSeed = 7;
inline constexpr std::size_t kTrainCount = 2048;
inline constexpr std::size_t kSmokeCount = 512;
inline constexpr std::size_t kTestCount = 256;

inline std::uint64_t id_test_seed(std::size_t n) { return 9000 + n; }

inline std::uint64_t ood_seed(data::BoundaryFamily f, std::size_t n) {
    return 5000 + 100 * static_cast<std::uint64_t>(f) + n;
}

/// Generation spec for the standard in-distribution training set at n x n.
inline data::GenerationConfig train_data_config(std::size_t n, std::size_t count = kTrainCount) {
    data::GenerationConfig gc;
    gc.grid.n = n;
    gc.count = count;
    gc.families = {data::BoundaryFamily::Gaussian, data::BoundaryFamily::Sinusoidal};
    gc.split = data::Split::ID;
    gc.seed = kTrainSeed;
    return gc;
}

/// Generation spec for the in-distribution test set at n x n.
inline data::GenerationConfig id_test_data_config(std::size_t n) {
    data::GenerationConfig gc;
    gc.grid.n = n;
    gc.count = kTestCount;
    gc.families = {data::BoundaryFamily::Gaussian, data::BoundaryFamily::Sinusoidal};
    gc.split = data::Split::ID;
    gc.seed = id_test_seed(n);
    return gc;
}

/// Generation spec for a single-family out-of-distribution test set at n x n.
inline data::GenerationConfig ood_test_data_config(data::BoundaryFamily f, std::size_t n) {
    data::GenerationConfig gc;
    gc.grid.n = n;
    gc.count = kTestCount;
    gc.families = {f};
    gc.split = data::Split::OOD;
    gc.seed = ood_seed(f, n);
    return gc;
}

/// The standard training recipe (dataset paths left for the caller to fill).
inline ExperimentConfig standard_config(const std::string& model_kind) {
    ExperimentConfig cfg;
    cfg.model = model_kind;
    cfg.epochs = 200;
    cfg.batch_size = 128;
    cfg.base_lr = 1e-3;
    cfg.scheduler.step = 100;
    cfg.scheduler.gamma = 0.1;
    cfg.seed = kModelSeed;
    cfg.precision = "f32";
    return cfg;
}

inline ExperimentConfig smoke_config(const std::string& model_kind) {
    ExperimentConfig cfg = standard_config(model_kind);
    cfg.epochs = 50;
    return cfg;
}

/// Dataset directory names inside a shared artifact cache.
inline std::string train_set_name(std::size_t n) { return "train-" + std::to_string(n); }
inline std::string id_test_set_name(std::size_t n) { return "test-" + std::to_string(n) + "-id"; }
inline std::string ood_test_set_name(data::BoundaryFamily f, std::size_t n) {
    return "test-" + std::to_string(n) + "-ood-" + data::family_name(f);
}
inline std::string checkpoint_name(const std::string& kind, std::size_t n) {
    return "ckpt-" + kind + std::to_string(n);
}

/// Generates and saves a dataset under cache/datasets/<name> unless it is
/// already there; returns its directory either way.
inline fs::path ensure_dataset(const fs::path& cache, const std::string& name,
                               const data::GenerationConfig& gc) {
    const fs::path dir = cache / "datasets" / name;
    if (fs::exists(dir / "manifest.json")) return dir;
    data::Dataset d = data::generate_dataset(gc);
    data::save_dataset(d, dir);
    return dir;
}

/// Trains the standard run for (kind, n) unless its checkpoint is already in
/// the cache; returns the checkpoint directory. Also maintains a loss-curve
/// CSV next to the checkpoint, appended as epochs finish so a long run can be
/// watched from outside.
template <typename T>
fs::path ensure_trained(const fs::path& cache, const std::string& kind, std::size_t n,
                        const EpochCallback& on_epoch = {}) {
    const fs::path ckpt = cache / checkpoint_name(kind, n);
    if (fs::exists(ckpt / "checkpoint.json")) return ckpt;

    ExperimentConfig cfg = standard_config(kind);
    cfg.train_dataset = ensure_dataset(cache, train_set_name(n), train_data_config(n)).string();
    cfg.test_sets = {{id_test_set_name(n),
                      ensure_dataset(cache, id_test_set_name(n), id_test_data_config(n)).string()}};

    fs::create_directories(cache / "curves");
    const fs::path curve_path = cache / "curves" / (checkpoint_name(kind, n) + ".csv");
    std::ofstream curve(curve_path, std::ios::trunc);
    curve << "epoch,lr,train_mse,test_mse\n";

    TrainOutcome<T> out = run_training<T>(cfg, [&](const EpochStat& s) {
        curve << s.epoch << "," << s.lr << "," << s.train_mse << "," << s.test_mse << "\n";
        curve.flush();
        if (on_epoch) on_epoch(s);
    });
    models::save_model_checkpoint(ckpt, out.model, cfg.seed, cfg.epochs);
    return ckpt;
}

}  // namespace lpfno::harness::protocol
