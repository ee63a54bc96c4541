#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "json.hpp"
#include "lpfno/harness/config.hpp"
#include "lpfno/harness/data_tensors.hpp"
#include "lpfno/harness/metrics.hpp"
#include "lpfno/harness/train.hpp"
#include "lpfno/models/checkpoint.hpp"

// Test-set evaluation: run a predictor over a dataset, score every sample
// with relative L1/L2 norms, and aggregate by the arithmetic mean. Samples
// whose target field has zero norm are excluded from the mean but counted,
// so the report always accounts for the whole set.

namespace lpfno::harness {

/// Maps a batch of boundaries [B, n, 1] to predicted fields [B, n, n, 1],
/// both float64. Keeping this a plain function lets tests substitute oracles
/// for trained models.
using Predictor = std::function<Tensor<double>(const Tensor<double>&)>;

/// Wraps a model as a Predictor, casting through the model's precision.
template <typename T>
Predictor model_predictor(models::AnyModel<T>& model) {
    return [&model](const Tensor<double>& g) {
        return cast<double>(model.forward(cast<T>(g)).value());
    };
}

struct SetMetrics {
    std::string name;
    std::string family;      // "gaussian" / "sinusoidal" / "polynomial" / "mixed"
    std::string split;       // "id" / "ood"
    std::size_t resolution = 0;
    double mean_rel_l1 = 0.0;  // 0 when no sample was included
    double mean_rel_l2 = 0.0;
    std::size_t count = 0;       // samples included in the means
    std::size_t degenerate = 0;  // zero-norm targets excluded from the means
    std::vector<double> per_sample_l1, per_sample_l2;  // included samples, in order

    bool operator==(const SetMetrics&) const = default;

    nlohmann::json to_json() const {
        return {{"name", name},       {"family", family},
                {"split", split},     {"resolution", resolution},
                {"mean_rel_l1", mean_rel_l1}, {"mean_rel_l2", mean_rel_l2},
                {"count", count},     {"degenerate", degenerate},
                {"per_sample_l1", per_sample_l1}, {"per_sample_l2", per_sample_l2}};
    }

    static SetMetrics from_json(const nlohmann::json& j) {
        reject_unknown_keys(j,
                            {"name", "family", "split", "resolution", "mean_rel_l1",
                             "mean_rel_l2", "count", "degenerate", "per_sample_l1",
                             "per_sample_l2"},
                            "set metrics");
        SetMetrics m;
        m.name = j.at("name").get<std::string>();
        m.family = j.at("family").get<std::string>();
        m.split = j.at("split").get<std::string>();
        m.resolution = j.at("resolution").get<std::size_t>();
        m.mean_rel_l1 = j.at("mean_rel_l1").get<double>();
        m.mean_rel_l2 = j.at("mean_rel_l2").get<double>();
        m.count = j.at("count").get<std::size_t>();
        m.degenerate = j.at("degenerate").get<std::size_t>();
        m.per_sample_l1 = j.at("per_sample_l1").get<std::vector<double>>();
        m.per_sample_l2 = j.at("per_sample_l2").get<std::vector<double>>();
        return m;
    }
};

struct MetricsReport {
    std::string model_kind;
    std::size_t train_resolution = 0;
    std::uint64_t seed = 0;
    std::string precision = "f32";
    std::vector<SetMetrics> sets;
    std::vector<EpochStat> curve;

    nlohmann::json to_json() const {
        auto num = [](double v) {
            return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
        };
        nlohmann::json set_list = nlohmann::json::array();
        for (const auto& s : sets) set_list.push_back(s.to_json());
        nlohmann::json curve_list = nlohmann::json::array();
        for (const auto& e : curve)
            curve_list.push_back({{"epoch", e.epoch},
                                  {"lr", e.lr},
                                  {"train_mse", num(e.train_mse)},
                                  {"test_mse", num(e.test_mse)}});
        return {{"model", model_kind},   {"train_resolution", train_resolution},
                {"seed", seed},          {"precision", precision},
                {"sets", std::move(set_list)}, {"curve", std::move(curve_list)}};
    }

    static MetricsReport from_json(const nlohmann::json& j) {
        reject_unknown_keys(j, {"model", "train_resolution", "seed", "precision", "sets", "curve"},
                            "metrics report");
        auto num = [](const nlohmann::json& v) {
            return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
        };
        MetricsReport r;
        r.model_kind = j.at("model").get<std::string>();
        r.train_resolution = j.at("train_resolution").get<std::size_t>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.precision = j.at("precision").get<std::string>();
        for (const auto& s : j.at("sets")) r.sets.push_back(SetMetrics::from_json(s));
        for (const auto& e : j.at("curve")) {
            EpochStat stat;
            stat.epoch = e.at("epoch").get<std::size_t>();
            stat.lr = e.at("lr").get<double>();
            stat.train_mse = num(e.at("train_mse"));
            stat.test_mse = num(e.at("test_mse"));
            r.curve.push_back(stat);
        }
        return r;
    }
};

/// Scores one dataset. When `predictions_out` is given it receives every
/// prediction [S, n, n, 1], including those of degenerate samples, so the
/// reported means can be recomputed from saved predictions.
inline SetMetrics evaluate_set(const Predictor& predict, const data::Dataset& d,
                               const std::string& name, std::size_t batch = 64,
                               Tensor<double>* predictions_out = nullptr) {
    if (batch == 0) throw InvalidArgument("evaluate_set: batch must be positive");
    const std::size_t count = d.samples.size(), n = d.grid.n;
    Tensor<double> inputs = boundary_tensor<double>(d);
    Tensor<double> targets = solution_tensor<double>(d);

    SetMetrics m;
    m.name = name;
    m.family = dataset_family(d);
    m.split = data::split_name(d.split);
    m.resolution = n;
    if (predictions_out) *predictions_out = Tensor<double>(Shape{count, n, n, 1});

    const std::size_t per = n * n;
    std::vector<std::size_t> idx;
    double sum_l1 = 0.0, sum_l2 = 0.0;
    for (std::size_t lo = 0; lo < count; lo += batch) {
        const std::size_t hi = std::min(count, lo + batch);
        idx.resize(hi - lo);
        std::iota(idx.begin(), idx.end(), lo);
        Tensor<double> pred = predict(gather_rows(inputs, idx));
        if (pred.shape() != Shape{hi - lo, n, n, 1})
            throw InvalidArgument("predictor returned shape " + shape_str(pred.shape()) +
                                  ", expected " + shape_str(Shape{hi - lo, n, n, 1}));
        for (std::size_t s = lo; s < hi; ++s) {
            Tensor<double> ps(Shape{n, n}), ts(Shape{n, n});
            for (std::size_t e = 0; e < per; ++e) {
                ps[e] = pred[(s - lo) * per + e];
                ts[e] = targets[s * per + e];
            }
            if (predictions_out)
                for (std::size_t e = 0; e < per; ++e) (*predictions_out)[s * per + e] = ps[e];
            try {
                const double l1 = rel_norm(ps, ts, 1);
                const double l2 = rel_norm(ps, ts, 2);
                sum_l1 += l1;
                sum_l2 += l2;
                m.per_sample_l1.push_back(l1);
                m.per_sample_l2.push_back(l2);
                ++m.count;
            } catch (const DegenerateSampleError&) {
                ++m.degenerate;
            }
        }
    }
    if (m.count > 0) {
        m.mean_rel_l1 = sum_l1 / double(m.count);
        m.mean_rel_l2 = sum_l2 / double(m.count);
    }
    return m;
}

/// Evaluates a model over every configured test set and assembles the report.
template <typename T>
MetricsReport evaluate_model(models::AnyModel<T>& model, const std::vector<TestSetRef>& sets,
                             std::size_t train_resolution, std::uint64_t seed,
                             const std::string& precision, std::size_t batch = 64) {
    MetricsReport r;
    r.model_kind = model.kind();
    r.train_resolution = train_resolution;
    r.seed = seed;
    r.precision = precision;
    Predictor predict = model_predictor(model);
    for (const auto& ref : sets) {
        data::Dataset d = data::load_dataset(ref.path);
        r.sets.push_back(evaluate_set(predict, d, ref.name, batch));
    }
    return r;
}

}  // namespace lpfno::harness
