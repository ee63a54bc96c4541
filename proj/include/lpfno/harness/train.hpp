#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "lpfno/autodiff/ops.hpp"
#include "lpfno/core/rng.hpp"
#include "lpfno/harness/config.hpp"
#include "lpfno/harness/data_tensors.hpp"
#include "lpfno/harness/metrics.hpp"
#include "lpfno/models/checkpoint.hpp"
#include "lpfno/optim/adam.hpp"

// Shuffled mini-batch MSE training with Adam and a step learning-rate
// schedule. The loop is a pure function of (config, datasets): batch order
// comes from a per-epoch PRNG stream derived from the seed, the loss
// accumulates in float64, and the optimizer keeps float64 moments, so two
// runs with the same seed agree to the last bit.

namespace lpfno::harness {

struct EpochStat {
    std::size_t epoch = 0;  // zero-based
    double lr = 0.0;
    double train_mse = 0.0;
    double test_mse = 0.0;  // NaN when the config lists no test set

    bool operator==(const EpochStat&) const = default;
};

template <typename T>
struct TrainOutcome {
    models::AnyModel<T> model;
    std::vector<EpochStat> curve;  // one entry per epoch
    std::size_t total_steps = 0;   // optimizer steps across all epochs
};

/// Called after every epoch; wired to the per-epoch progress line by the CLI.
using EpochCallback = std::function<void(const EpochStat&)>;

namespace detail {

inline constexpr std::uint64_t kShuffleStream = 0x7368756666ull;  // "shuff"

/// Full-set MSE without touching gradients, chunked so the autodiff graph of
/// one chunk is freed before the next is built.
template <typename T>
double dataset_mse(models::AnyModel<T>& model, const Tensor<T>& inputs, const Tensor<T>& targets,
                   std::size_t chunk) {
    const std::size_t count = inputs.shape()[0];
    const std::size_t per = targets.size() / count;
    double sse = 0.0;
    std::vector<std::size_t> idx;
    for (std::size_t lo = 0; lo < count; lo += chunk) {
        const std::size_t hi = std::min(count, lo + chunk);
        idx.resize(hi - lo);
        std::iota(idx.begin(), idx.end(), lo);
        auto pred = model.forward(gather_rows(inputs, idx));
        sse += mse(pred.value(), gather_rows(targets, idx)) * double((hi - lo) * per);
    }
    return sse / double(count * per);
}

}  // namespace detail

/// Trains `model` in place on in-memory tensors. `test_inputs`/`test_targets`
/// drive the per-epoch test MSE curve and may be empty (curve records NaN).
template <typename T>
TrainOutcome<T> train_loop(models::AnyModel<T> model, const ExperimentConfig& cfg,
                           const Tensor<T>& train_inputs, const Tensor<T>& train_targets,
                           const Tensor<T>& test_inputs, const Tensor<T>& test_targets,
                           const EpochCallback& on_epoch = {}) {
    cfg.validate();
    const std::size_t count = train_inputs.shape().empty() ? 0 : train_inputs.shape()[0];
    if (count == 0) throw InvalidArgument("training set is empty");
    if (train_targets.shape().empty() || train_targets.shape()[0] != count)
        throw InvalidArgument("training inputs and targets disagree on sample count");
    if (cfg.batch_size > count)
        throw InvalidArgument("batch size " + std::to_string(cfg.batch_size) +
                              " exceeds training set size " + std::to_string(count));
    const bool have_test = !test_inputs.shape().empty() && test_inputs.shape()[0] > 0;
    const std::size_t per = train_targets.size() / count;

    optim::Adam<T> opt;
    TrainOutcome<T> out{std::move(model), {}, 0};
    out.curve.reserve(cfg.epochs);

    std::vector<std::size_t> order(count);
    std::vector<std::size_t> batch_idx;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = optim::step_lr(epoch, cfg.base_lr, cfg.scheduler.step, cfg.scheduler.gamma);
        opt.set_lr(lr);

        std::iota(order.begin(), order.end(), 0);
        Rng epoch_rng = Rng(cfg.seed, detail::kShuffleStream).split(epoch);
        epoch_rng.shuffle(order);

        double sse = 0.0;
        std::size_t batch_no = 0;
        for (std::size_t lo = 0; lo < count; lo += cfg.batch_size, ++batch_no) {
            const std::size_t hi = std::min(count, lo + cfg.batch_size);
            batch_idx.assign(order.begin() + lo, order.begin() + hi);

            models::zero_grads(out.model.params());
            auto pred = out.model.forward(gather_rows(train_inputs, batch_idx));
            auto loss = autodiff::mse_loss(pred, gather_rows(train_targets, batch_idx));
            const double loss_value = double(loss.value()[0]);
            if (!std::isfinite(loss_value))
                throw NumericalError("non-finite training loss at epoch " +
                                     std::to_string(epoch) + ", batch " +
                                     std::to_string(batch_no));
            autodiff::backward(loss);
            opt.step(out.model.params());
            ++out.total_steps;
            sse += loss_value * double((hi - lo) * per);
        }

        EpochStat stat;
        stat.epoch = epoch;
        stat.lr = lr;
        stat.train_mse = sse / double(count * per);
        stat.test_mse = have_test
                            ? detail::dataset_mse(out.model, test_inputs, test_targets,
                                                  std::max<std::size_t>(cfg.batch_size, 1))
                            : std::numeric_limits<double>::quiet_NaN();
        out.curve.push_back(stat);
        if (on_epoch) on_epoch(stat);
    }
    return out;
}

/// Loads datasets from the config's paths, builds a fresh model from
/// `model_config` and the seed, and runs the loop. The first test set (if
/// any) supplies the per-epoch test MSE curve.
template <typename T>
TrainOutcome<T> run_training(const ExperimentConfig& cfg, const EpochCallback& on_epoch = {}) {
    cfg.validate();
    data::Dataset train = data::load_dataset(cfg.train_dataset);
    Tensor<T> train_in = boundary_tensor<T>(train);
    Tensor<T> train_out = solution_tensor<T>(train);
    Tensor<T> test_in, test_out;
    if (!cfg.test_sets.empty()) {
        data::Dataset test = data::load_dataset(cfg.test_sets.front().path);
        test_in = boundary_tensor<T>(test);
        test_out = solution_tensor<T>(test);
    }
    models::AnyModel<T> model = models::make_model<T>(cfg.model, cfg.model_config, cfg.seed);
    return train_loop<T>(std::move(model), cfg, train_in, train_out, test_in, test_out, on_epoch);
}

}  // namespace lpfno::harness
