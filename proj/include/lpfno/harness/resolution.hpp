#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "lpfno/harness/evaluate.hpp"

// The train-resolution x test-resolution cross-evaluation grid. One model
// checkpoint per training resolution, one test dataset per testing
// resolution; each cell is the mean relative L2 error of that checkpoint on
// that dataset. Diagonal cells are by construction the native-resolution
// evaluation results.

namespace lpfno::harness {

struct ResolutionMatrix {
    std::string model_kind;
    std::vector<std::size_t> train_resolutions;  // rows
    std::vector<std::size_t> test_resolutions;   // columns
    std::vector<std::vector<double>> cells;      // [row][col] mean relative L2

    double at(std::size_t train_res, std::size_t test_res) const {
        for (std::size_t r = 0; r < train_resolutions.size(); ++r)
            if (train_resolutions[r] == train_res)
                for (std::size_t c = 0; c < test_resolutions.size(); ++c)
                    if (test_resolutions[c] == test_res) return cells[r][c];
        throw InvalidArgument("resolution matrix has no cell (" + std::to_string(train_res) +
                              ", " + std::to_string(test_res) + ")");
    }

    nlohmann::json to_json() const {
        return {{"model", model_kind},
                {"train_resolutions", train_resolutions},
                {"test_resolutions", test_resolutions},
                {"cells", cells}};
    }

    static ResolutionMatrix from_json(const nlohmann::json& j) {
        reject_unknown_keys(j, {"model", "train_resolutions", "test_resolutions", "cells"},
                            "resolution matrix");
        ResolutionMatrix m;
        m.model_kind = j.at("model").get<std::string>();
        m.train_resolutions = j.at("train_resolutions").get<std::vector<std::size_t>>();
        m.test_resolutions = j.at("test_resolutions").get<std::vector<std::size_t>>();
        m.cells = j.at("cells").get<std::vector<std::vector<double>>>();
        if (m.cells.size() != m.train_resolutions.size())
            throw InvalidArgument("resolution matrix: row count mismatch");
        for (const auto& row : m.cells)
            if (row.size() != m.test_resolutions.size())
                throw InvalidArgument("resolution matrix: column count mismatch");
        return m;
    }

    /// Header row of test resolutions, one line per training resolution.
    std::string to_csv() const {
        std::ostringstream os;
        os << "train_resolution";
        for (std::size_t t : test_resolutions) os << ",test_" << t;
        os << "\n";
        for (std::size_t r = 0; r < train_resolutions.size(); ++r) {
            os << train_resolutions[r];
            for (double v : cells[r]) os << "," << format_double(v);
            os << "\n";
        }
        return os.str();
    }

private:
    static std::string format_double(double v) {
        std::ostringstream os;
        os.precision(17);
        os << v;
        return os.str();
    }
};

/// One checkpoint or dataset per resolution, in row/column order.
struct ResolutionEntry {
    std::size_t resolution = 0;
    std::string path;
};

/// Cross-evaluates every checkpoint on every test dataset. All checkpoints
/// must hold the same model kind; a missing checkpoint or dataset surfaces as
/// the underlying IoError naming the path.
template <typename T>
ResolutionMatrix build_resolution_matrix(const std::vector<ResolutionEntry>& checkpoints,
                                         const std::vector<ResolutionEntry>& test_sets,
                                         std::size_t batch = 64) {
    if (checkpoints.empty() || test_sets.empty())
        throw InvalidArgument("resolution matrix needs at least one checkpoint and one test set");

    ResolutionMatrix m;
    std::vector<data::Dataset> datasets;
    for (const auto& t : test_sets) {
        m.test_resolutions.push_back(t.resolution);
        datasets.push_back(data::load_dataset(t.path));
        if (datasets.back().grid.n != t.resolution)
            throw InvalidArgument("dataset at " + t.path + " has resolution " +
                                  std::to_string(datasets.back().grid.n) + ", expected " +
                                  std::to_string(t.resolution));
    }
    for (const auto& c : checkpoints) {
        models::AnyModel<T> model = models::model_from_checkpoint<T>(
            models::load_checkpoint(c.path));
        if (m.model_kind.empty())
            m.model_kind = model.kind();
        else if (m.model_kind != model.kind())
            throw InvalidArgument("resolution matrix mixes model kinds '" + m.model_kind +
                                  "' and '" + model.kind() + "'");
        m.train_resolutions.push_back(c.resolution);
        Predictor predict = model_predictor(model);
        std::vector<double> row;
        for (std::size_t t = 0; t < datasets.size(); ++t)
            row.push_back(evaluate_set(predict, datasets[t], "cross", batch).mean_rel_l2);
        m.cells.push_back(std::move(row));
    }
    return m;
}

}  // namespace lpfno::harness
