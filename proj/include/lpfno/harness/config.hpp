#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "lpfno/core/errors.hpp"
#include "lpfno/core/jsonutil.hpp"

// Everything a training or evaluation run needs, as one strict-parsing config
// struct. Unknown keys are rejected by name so config typos fail loudly
// instead of silently training with a default.

namespace lpfno::harness {

struct SchedulerConfig {
    std::size_t step = 100;  // epochs between learning-rate drops
    double gamma = 0.1;      // multiplicative drop

    bool operator==(const SchedulerConfig&) const = default;

    void validate() const {
        if (step == 0) throw InvalidArgument("scheduler step must be positive");
        if (!(gamma > 0.0)) throw InvalidArgument("scheduler gamma must be positive");
    }

    nlohmann::json to_json() const { return {{"step", step}, {"gamma", gamma}}; }

    static SchedulerConfig from_json(const nlohmann::json& j) {
        reject_unknown_keys(j, {"step", "gamma"}, "scheduler config");
        SchedulerConfig s;
        if (j.contains("step")) s.step = j.at("step").get<std::size_t>();
        if (j.contains("gamma")) s.gamma = j.at("gamma").get<double>();
        s.validate();
        return s;
    }
};

/// A labeled evaluation dataset. The label names the set in reports and
/// metrics files; family/split/resolution detail is read from the dataset's
/// own manifest when it is loaded.
struct TestSetRef {
    std::string name;
    std::string path;

    bool operator==(const TestSetRef&) const = default;

    nlohmann::json to_json() const { return {{"name", name}, {"path", path}}; }

    static TestSetRef from_json(const nlohmann::json& j) {
        reject_unknown_keys(j, {"name", "path"}, "test set reference");
        TestSetRef r;
        r.name = require_key(j, "name", "test set reference").get<std::string>();
        r.path = require_key(j, "path", "test set reference").get<std::string>();
        if (r.name.empty()) throw InvalidArgument("test set reference: empty name");
        return r;
    }
};

struct ExperimentConfig {
    std::string train_dataset;       // directory of the training dataset
    std::vector<TestSetRef> test_sets;  // first entry also drives the per-epoch test MSE curve
    std::string model = "lpfno";     // "lpfno" or "fno2d"
    nlohmann::json model_config = nlohmann::json::object();
    std::size_t epochs = 200;
    std::size_t batch_size = 128;
    double base_lr = 1e-3;
    SchedulerConfig scheduler;
    std::uint64_t seed = 0;
    std::string precision = "f32";   // "f32" or "f64"

    void validate() const {
        if (train_dataset.empty()) throw InvalidArgument("config: train_dataset is required");
        if (model != "lpfno" && model != "fno2d")
            throw InvalidArgument("config: unknown model '" + model +
                                  "', expected 'lpfno' or 'fno2d'");
        if (epochs == 0) throw InvalidArgument("config: epochs must be positive");
        if (batch_size == 0) throw InvalidArgument("config: batch_size must be positive");
        if (!(base_lr > 0.0)) throw InvalidArgument("config: base_lr must be positive");
        if (precision != "f32" && precision != "f64")
            throw InvalidArgument("config: unknown precision '" + precision +
                                  "', expected 'f32' or 'f64'");
        scheduler.validate();
    }

    nlohmann::json to_json() const {
        nlohmann::json sets = nlohmann::json::array();
        for (const auto& s : test_sets) sets.push_back(s.to_json());
        return {{"train_dataset", train_dataset},
                {"test_sets", std::move(sets)},
                {"model", model},
                {"model_config", model_config},
                {"epochs", epochs},
                {"batch_size", batch_size},
                {"base_lr", base_lr},
                {"scheduler", scheduler.to_json()},
                {"seed", seed},
                {"precision", precision}};
    }

    static ExperimentConfig from_json(const nlohmann::json& j) {
        reject_unknown_keys(j,
                            {"train_dataset", "test_sets", "model", "model_config", "epochs",
                             "batch_size", "base_lr", "scheduler", "seed", "precision"},
                            "experiment config");
        ExperimentConfig c;
        c.train_dataset = require_key(j, "train_dataset", "experiment config").get<std::string>();
        if (j.contains("test_sets")) {
            if (!j.at("test_sets").is_array())
                throw InvalidArgument("experiment config: test_sets must be an array");
            for (const auto& item : j.at("test_sets"))
                c.test_sets.push_back(TestSetRef::from_json(item));
        }
        if (j.contains("model")) c.model = j.at("model").get<std::string>();
        if (j.contains("model_config")) c.model_config = j.at("model_config");
        if (j.contains("epochs")) c.epochs = j.at("epochs").get<std::size_t>();
        if (j.contains("batch_size")) c.batch_size = j.at("batch_size").get<std::size_t>();
        if (j.contains("base_lr")) c.base_lr = j.at("base_lr").get<double>();
        if (j.contains("scheduler")) c.scheduler = SchedulerConfig::from_json(j.at("scheduler"));
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("precision")) c.precision = j.at("precision").get<std::string>();
        c.validate();
        return c;
    }
};

}  // namespace lpfno::harness
