#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "lpfno/harness/evaluate.hpp"
#include "lpfno/harness/resolution.hpp"

// Report emission. Three artifact shapes: a long CSV with one row per
// model x train-resolution x test-resolution x family x split, accuracy-table
// JSON (per-model ID/OOD columns, with a null slot for the external encoder
// baseline we do not implement), and per-epoch loss curves as plain CSV for
// external plotting.

namespace lpfno::harness {

namespace detail {

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace detail

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << text;
    if (!out) throw IoError("write failed: " + path.string());
}

/// One row per evaluated set of every report.
inline std::string long_csv(const std::vector<MetricsReport>& reports) {
    std::ostringstream os;
    os << "model,train_resolution,test_resolution,family,split,set,samples,degenerate,"
          "mean_rel_l1,mean_rel_l2\n";
    for (const auto& r : reports)
        for (const auto& s : r.sets)
            os << r.model_kind << ',' << r.train_resolution << ',' << s.resolution << ','
               << s.family << ',' << s.split << ',' << s.name << ',' << s.count << ','
               << s.degenerate << ',' << detail::fmt(s.mean_rel_l1) << ','
               << detail::fmt(s.mean_rel_l2) << '\n';
    return os.str();
}

/// epoch,train_mse,test_mse; a missing test curve prints empty cells.
inline std::string loss_curve_csv(const std::vector<EpochStat>& curve) {
    std::ostringstream os;
    os << "epoch,train_mse,test_mse\n";
    for (const auto& e : curve) {
        os << e.epoch << ',' << detail::fmt(e.train_mse) << ',';
        if (std::isfinite(e.test_mse)) os << detail::fmt(e.test_mse);
        os << '\n';
    }
    return os.str();
}

namespace detail {

inline const SetMetrics* find_set(const MetricsReport& r, const std::string& split,
                                  const std::string& family) {
    for (const auto& s : r.sets)
        if (s.split == split && (family.empty() || s.family == family)) return &s;
    return nullptr;
}

inline nlohmann::json cell_json(const SetMetrics* s) {
    if (!s) return nullptr;
    return {{"rel_l1", s->mean_rel_l1},
            {"rel_l2", s->mean_rel_l2},
            {"resolution", s->resolution},
            {"set", s->name}};
}

}  // namespace detail

/// Accuracy table: one row per model plus a null placeholder row for the
/// external encoder baseline. Columns: in-distribution, then the three OOD
/// families.
inline nlohmann::json accuracy_table_json(const std::vector<MetricsReport>& reports) {
    nlohmann::json rows = nlohmann::json::array();
    rows.push_back({{"model", "tencoder"}, {"cells", nullptr}});
    for (const auto& r : reports) {
        nlohmann::json cells{
            {"id", detail::cell_json(detail::find_set(r, "id", ""))},
            {"ood_gaussian", detail::cell_json(detail::find_set(r, "ood", "gaussian"))},
            {"ood_sinusoidal", detail::cell_json(detail::find_set(r, "ood", "sinusoidal"))},
            {"ood_polynomial", detail::cell_json(detail::find_set(r, "ood", "polynomial"))}};
        rows.push_back({{"model", r.model_kind},
                        {"train_resolution", r.train_resolution},
                        {"seed", r.seed},
                        {"cells", std::move(cells)}});
    }
    return {{"columns", {"id", "ood_gaussian", "ood_sinusoidal", "ood_polynomial"}},
            {"rows", std::move(rows)}};
}

/// Resolution-independence table: one row per model, each holding its full
/// train x test matrix, plus the null encoder placeholder.
inline nlohmann::json resolution_table_json(const std::vector<ResolutionMatrix>& matrices) {
    nlohmann::json rows = nlohmann::json::array();
    rows.push_back({{"model", "tencoder"}, {"matrix", nullptr}});
    for (const auto& m : matrices) rows.push_back({{"model", m.model_kind}, {"matrix", m.to_json()}});
    return {{"rows", std::move(rows)}};
}

}  // namespace lpfno::harness
