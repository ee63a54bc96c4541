#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "lpfno/core/blob_io.hpp"
#include "lpfno/core/jsonutil.hpp"
#include "lpfno/models/fno2d.hpp"
#include "lpfno/models/lpfno.hpp"

// Checkpoint container: a directory holding checkpoint.json (format tag,
// model kind, config, seed, epoch, parameter index) and params.f64, all
// parameter tensors packed as float64 in registry order. Float64 on disk
// regardless of the training precision keeps the format single and lossless.

namespace lpfno::models {

inline constexpr const char* kCheckpointFormat = "lpfno-checkpoint/1";
inline constexpr const char* kCheckpointBlob = "params.f64";

struct CheckpointData {
    std::string model_kind;
    nlohmann::json config;
    std::uint64_t init_seed = 0;
    std::size_t epoch = 0;
    std::vector<std::pair<std::string, Tensor<double>>> params;
};

namespace detail {

inline void ensure_directory(const std::filesystem::path& dir) {
    std::error_code ec;
    if (std::filesystem::is_directory(dir, ec)) return;
    if (!std::filesystem::create_directory(dir, ec) || ec)
        throw IoError("cannot create directory: " + dir.string() +
                      (ec ? " (" + ec.message() + ")" : ""));
}

}  // namespace detail

template <typename T>
void save_checkpoint(const std::filesystem::path& dir, const std::string& model_kind,
                     const nlohmann::json& config, std::uint64_t init_seed, std::size_t epoch,
                     const std::vector<autodiff::NamedParam<T>>& params) {
    detail::ensure_directory(dir);

    std::vector<double> packed;
    nlohmann::json index = nlohmann::json::array();
    for (const auto& p : params) {
        const Tensor<T>& v = p.var.value();
        index.push_back({{"name", p.name},
                         {"shape", v.shape()},
                         {"offset", packed.size()},
                         {"count", v.size()}});
        packed.reserve(packed.size() + v.size());
        for (std::size_t i = 0; i < v.size(); ++i) packed.push_back(double(v[i]));
    }
    io::write_f64_blob(dir / kCheckpointBlob, packed.data(), packed.size());

    nlohmann::json header{{"format", kCheckpointFormat}, {"model", model_kind},
                          {"config", config},           {"init_seed", init_seed},
                          {"epoch", epoch},             {"blob", kCheckpointBlob},
                          {"params", index}};
    io::write_json_file(dir / "checkpoint.json", header);
}

inline CheckpointData load_checkpoint(const std::filesystem::path& dir) {
    const auto header_path = dir / "checkpoint.json";
    if (!std::filesystem::exists(header_path))
        throw IoError("no checkpoint at: " + dir.string());
    nlohmann::json header = io::read_json_file(header_path);
    reject_unknown_keys(header, {"format", "model", "config", "init_seed", "epoch", "blob", "params"},
                        "checkpoint header");
    const std::string format = require_key(header, "format", "checkpoint header");
    if (format != kCheckpointFormat)
        throw IoError("unsupported checkpoint format '" + format + "', expected '" +
                      std::string(kCheckpointFormat) + "'");

    CheckpointData data;
    data.model_kind = require_key(header, "model", "checkpoint header");
    data.config = require_key(header, "config", "checkpoint header");
    data.init_seed = require_key(header, "init_seed", "checkpoint header").get<std::uint64_t>();
    data.epoch = require_key(header, "epoch", "checkpoint header").get<std::size_t>();

    const nlohmann::json& index = require_key(header, "params", "checkpoint header");
    std::size_t total = 0;
    for (const auto& entry : index) {
        if (entry.at("offset").get<std::size_t>() != total)
            throw IoError("checkpoint parameter '" + entry.at("name").get<std::string>() +
                          "' is not stored contiguously");
        const Shape shape = entry.at("shape").get<Shape>();
        const std::size_t count = entry.at("count").get<std::size_t>();
        if (count != numel(shape))
            throw IoError("checkpoint parameter '" + entry.at("name").get<std::string>() +
                          "' count does not match its shape");
        total += count;
    }
    const std::string blob = header.value("blob", std::string(kCheckpointBlob));
    std::vector<double> packed = io::read_f64_blob(dir / blob, total);

    std::size_t offset = 0;
    for (const auto& entry : index) {
        const Shape shape = entry.at("shape").get<Shape>();
        const std::size_t count = entry.at("count").get<std::size_t>();
        Tensor<double> t(shape, std::vector<double>(packed.begin() + offset,
                                                    packed.begin() + offset + count));
        data.params.emplace_back(entry.at("name").get<std::string>(), std::move(t));
        offset += count;
    }
    return data;
}

/// Either model behind one interface, so the harness can train and evaluate
/// without caring which architecture it holds.
template <typename T>
class AnyModel {
public:
    explicit AnyModel(LPFNOModel<T> m) : model_(std::move(m)) {}
    explicit AnyModel(FNO2dModel<T> m) : model_(std::move(m)) {}

    std::string kind() const {
        return std::holds_alternative<LPFNOModel<T>>(model_) ? LPFNOModel<T>::kKind
                                                             : FNO2dModel<T>::kKind;
    }

    Var<T> forward(const Tensor<T>& g) const {
        return std::visit([&](const auto& m) { return m.forward(g); }, model_);
    }

    std::vector<autodiff::NamedParam<T>>& params() {
        return std::visit([](auto& m) -> std::vector<autodiff::NamedParam<T>>& { return m.params(); },
                          model_);
    }
    const std::vector<autodiff::NamedParam<T>>& params() const {
        return std::visit(
            [](const auto& m) -> const std::vector<autodiff::NamedParam<T>>& { return m.params(); },
            model_);
    }

    ParamCounts param_counts() const {
        return std::visit([](const auto& m) { return m.param_counts(); }, model_);
    }

    nlohmann::json config_json() const {
        return std::visit([](const auto& m) { return nlohmann::json(m.config()); }, model_);
    }

    std::size_t effective_modes(std::size_t n) const {
        return std::visit([&](const auto& m) { return m.config().effective_modes(n); }, model_);
    }

    std::size_t stored_modes() const {
        return std::visit([](const auto& m) { return m.config().modes; }, model_);
    }

    template <typename M>
    const M& as() const { return std::get<M>(model_); }

private:
    std::variant<LPFNOModel<T>, FNO2dModel<T>> model_;
};

template <typename T>
AnyModel<T> make_model(const std::string& kind, const nlohmann::json& config,
                       std::uint64_t init_seed) {
    if (kind == LPFNOModel<T>::kKind)
        return AnyModel<T>(LPFNOModel<T>(config.get<LPFNOConfig>(), init_seed));
    if (kind == FNO2dModel<T>::kKind)
        return AnyModel<T>(FNO2dModel<T>(config.get<FNO2dConfig>(), init_seed));
    throw InvalidArgument("unknown model kind '" + kind + "' (expected 'lpfno' or 'fno2d')");
}

/// Rebuilds the model a checkpoint describes and restores its parameters.
template <typename T>
AnyModel<T> model_from_checkpoint(const CheckpointData& data) {
    AnyModel<T> model = make_model<T>(data.model_kind, data.config, data.init_seed);
    assign_param_values(model.params(), data.params);
    return model;
}

template <typename T>
void save_model_checkpoint(const std::filesystem::path& dir, const AnyModel<T>& model,
                           std::uint64_t init_seed, std::size_t epoch) {
    save_checkpoint(dir, model.kind(), model.config_json(), init_seed, epoch, model.params());
}

}  // namespace lpfno::models
