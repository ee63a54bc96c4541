// Warms the shared experiment cache: trains the standard run for one
// (model, resolution) pair and writes its checkpoint, datasets, and loss
// curve. Safe to re-run; existing artifacts are reused. Intended for kicking
// off the long runs ahead of the acceptance suite.

#include <chrono>
#include <iostream>
#include <string>

#include "lpfno/harness/protocol.hpp"
#include "lpfno/harness/resolution.hpp"

using namespace lpfno;
using namespace lpfno::harness;
using Clock = std::chrono::steady_clock;

int main(int argc, char** argv) {
    if (argc < 4) {
        std::cerr << "usage: train_cache <lpfno|fno2d> <resolution> <cache_dir>\n";
        return 1;
    }
    const std::string kind = argv[1];
    const std::size_t n = std::stoul(argv[2]);
    const std::filesystem::path cache = argv[3];

    const auto t0 = Clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - t0).count(); };

    try {
        const auto ckpt = protocol::ensure_trained<float>(
            cache, kind, n, [&](const EpochStat& s) {
                std::cerr << kind << n << " epoch " << s.epoch << " lr " << s.lr << " train "
                          << s.train_mse << " test " << s.test_mse << " (" << elapsed() << "s)\n";
            });

        // native-resolution headline number
        auto test = data::load_dataset(cache / "datasets" / protocol::id_test_set_name(n));
        auto loaded = models::model_from_checkpoint<float>(models::load_checkpoint(ckpt));
        auto metrics = evaluate_set(model_predictor(loaded), test, protocol::id_test_set_name(n));
        std::cout << kind << n << ": checkpoint " << ckpt << "\n"
                  << kind << n << ": native mean rel L2 " << metrics.mean_rel_l2 << ", rel L1 "
                  << metrics.mean_rel_l1 << " (" << elapsed() << "s total)\n";
    } catch (const Error& e) {
        std::cerr << "train_cache: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
