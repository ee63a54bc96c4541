#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "lpfno/autodiff/graph.hpp"
#include "lpfno/autodiff/ops.hpp"
#include "lpfno/autodiff/spectral.hpp"
#include "lpfno/core/jsonutil.hpp"
#include "lpfno/core/rng.hpp"
#include "lpfno/models/common.hpp"

// Baseline: a standard 2D FNO fed the boundary function zero-padded over the
// whole domain. The boundary values occupy the x = 0 column of the input
// field and every other node is zero; lift, Fourier layers and projection
// then proceed exactly as in a generic FNO2d.

namespace lpfno::models {

using autodiff::Act;
using autodiff::NamedParam;
using autodiff::Var;

struct FNO2dConfig {
    std::size_t width = 16;            // channels inside the Fourier layers
    std::size_t modes = 16;            // retained modes per axis
    std::size_t layers = 4;
    std::string activation = "gelu";
    std::size_t channels = 1;          // physical channels m
    bool coord_channels = false;       // append normalized (y, x) coordinate fields
    std::size_t projection_hidden = 128;

    void validate() const {
        if (width < 1 || modes < 1 || layers < 1 || channels < 1)
            throw InvalidArgument("FNO2dConfig: width, modes, layers and channels must all be >= 1");
        autodiff::act_from_name(activation);
    }

    /// Modes actually mixed on an n x n grid. The y axis stores both
    /// frequency signs, so it is the binding constraint: 2k <= n.
    std::size_t effective_modes(std::size_t n) const { return std::min(modes, n / 2); }

    std::size_t lift_input_channels() const { return channels + (coord_channels ? 2 : 0); }

    bool operator==(const FNO2dConfig&) const = default;
};

inline void to_json(nlohmann::json& j, const FNO2dConfig& c) {
    j = nlohmann::json{{"width", c.width},
                       {"modes", c.modes},
                       {"layers", c.layers},
                       {"activation", c.activation},
                       {"channels", c.channels},
                       {"coord_channels", c.coord_channels},
                       {"projection_hidden", c.projection_hidden}};
}

inline void from_json(const nlohmann::json& j, FNO2dConfig& c) {
    reject_unknown_keys(j,
                        {"width", "modes", "layers", "activation", "channels", "coord_channels",
                         "projection_hidden"},
                        "fno2d config");
    c = FNO2dConfig{};
    if (j.contains("width")) j.at("width").get_to(c.width);
    if (j.contains("modes")) j.at("modes").get_to(c.modes);
    if (j.contains("layers")) j.at("layers").get_to(c.layers);
    if (j.contains("activation")) j.at("activation").get_to(c.activation);
    if (j.contains("channels")) j.at("channels").get_to(c.channels);
    if (j.contains("coord_channels")) j.at("coord_channels").get_to(c.coord_channels);
    if (j.contains("projection_hidden")) j.at("projection_hidden").get_to(c.projection_hidden);
    c.validate();
}

template <typename T>
class FNO2dModel {
public:
    static constexpr const char* kKind = "fno2d";

    explicit FNO2dModel(FNO2dConfig cfg, std::uint64_t init_seed) : cfg_(std::move(cfg)) {
        cfg_.validate();
        build_params(init_seed);
    }

    const FNO2dConfig& config() const { return cfg_; }
    std::vector<NamedParam<T>>& params() { return params_; }
    const std::vector<NamedParam<T>>& params() const { return params_; }

    ParamCounts param_counts() const {
        ParamCounts pc;
        pc.complex_as_two = param_count(params_);
        pc.complex_as_one = pc.complex_as_two - spectral_elems_ / 2;
        return pc;
    }

    /// g: [B, N, channels] -> prediction [B, N, N, channels].
    Var<T> forward(const Tensor<T>& g) const {
        return forward_with(cfg_, g, param_vars(params_));
    }

    static Var<T> forward_with(const FNO2dConfig& cfg, const Tensor<T>& g,
                               const std::vector<Var<T>>& flat_params) {
        if (g.rank() != 3 || g.dim(2) != cfg.channels)
            throw InvalidArgument("fno2d forward: boundary must be [B, N, " +
                                  std::to_string(cfg.channels) + "], got " +
                                  shape_str(g.shape()));
        const std::size_t N = g.dim(1);
        if (N < 2) throw InvalidArgument("fno2d forward: need at least 2 nodes");
        const std::size_t k_eff = cfg.effective_modes(N);
        if (k_eff < 1) throw InvalidArgument("fno2d forward: no usable modes at N=" +
                                             std::to_string(N));
        const Act act = autodiff::act_from_name(cfg.activation);

        Var<T> input = autodiff::constant(input_field(cfg, g));
        detail::ParamCursor<T> cur(flat_params);
        const Var<T>& lw = cur.next();
        const Var<T>& lb = cur.next();
        Var<T> h = autodiff::pointwise_linear(input, lw, lb);
        for (std::size_t l = 0; l < cfg.layers; ++l) {
            const Var<T>& re = cur.next();
            const Var<T>& im = cur.next();
            const Var<T>& ww = cur.next();
            const Var<T>& wb = cur.next();
            Var<T> s = autodiff::spectral_conv_2d(h, re, im, k_eff);
            Var<T> p = autodiff::pointwise_linear(h, ww, wb);
            h = autodiff::activation(autodiff::add(s, p), act);
        }
        Var<T> u;
        if (cfg.projection_hidden == 0) {
            const Var<T>& pw = cur.next();
            const Var<T>& pb = cur.next();
            u = autodiff::pointwise_linear(h, pw, pb);
        } else {
            const Var<T>& hw = cur.next();
            const Var<T>& hb = cur.next();
            const Var<T>& ow = cur.next();
            const Var<T>& ob = cur.next();
            Var<T> hidden = autodiff::activation(autodiff::pointwise_linear(h, hw, hb), act);
            u = autodiff::pointwise_linear(hidden, ow, ob);
        }
        cur.expect_exhausted();
        return u;
    }

    /// The zero-padded embedding: out[b, j, 0, c] = g[b, j, c] and zero at
    /// every column i > 0. Row index j runs along the boundary (y), column
    /// index i into the domain (x).
    static Tensor<T> embed_boundary(const Tensor<T>& g) {
        const std::size_t B = g.dim(0), N = g.dim(1), m = g.dim(2);
        Tensor<T> out(Shape{B, N, N, m});
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t j = 0; j < N; ++j)
                for (std::size_t c = 0; c < m; ++c) out(b, j, 0, c) = g(b, j, c);
        return out;
    }

    /// Embedded boundary plus, if configured, two coordinate channels holding
    /// the physical node positions y = j/(N-1) and x = i/(N-1).
    static Tensor<T> input_field(const FNO2dConfig& cfg, const Tensor<T>& g) {
        Tensor<T> padded = embed_boundary(g);
        if (!cfg.coord_channels) return padded;
        const std::size_t B = padded.dim(0), N = padded.dim(1), m = cfg.channels;
        Tensor<T> out(Shape{B, N, N, m + 2});
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t j = 0; j < N; ++j)
                for (std::size_t i = 0; i < N; ++i) {
                    for (std::size_t c = 0; c < m; ++c) out(b, j, i, c) = padded(b, j, i, c);
                    out(b, j, i, m) = T(double(j) / double(N - 1));
                    out(b, j, i, m + 1) = T(double(i) / double(N - 1));
                }
        return out;
    }

    void set_param_values(const std::vector<std::pair<std::string, Tensor<double>>>& values) {
        assign_param_values(params_, values);
    }

private:
    void build_params(std::uint64_t seed) {
        Rng rng(seed, kInitStream);
        const std::size_t cin = cfg_.lift_input_channels();
        const std::size_t w = cfg_.width;
        const std::size_t k = cfg_.modes;

        auto pointwise = [&](const std::string& name, std::size_t in, std::size_t out) {
            Tensor<T> wt(Shape{in, out}), b(Shape{out});
            detail::init_pointwise(rng, wt, in);
            detail::init_pointwise(rng, b, in);
            params_.push_back({name + ".weight", autodiff::parameter(std::move(wt))});
            params_.push_back({name + ".bias", autodiff::parameter(std::move(b))});
        };

        pointwise("lift", cin, w);
        for (std::size_t l = 0; l < cfg_.layers; ++l) {
            const std::string layer = "layer" + std::to_string(l);
            Tensor<T> re(Shape{2, k, k, w, w}), im(Shape{2, k, k, w, w});
            detail::init_spectral(rng, re, w, w);
            detail::init_spectral(rng, im, w, w);
            spectral_elems_ += re.size() + im.size();
            params_.push_back({layer + ".spectral.re", autodiff::parameter(std::move(re))});
            params_.push_back({layer + ".spectral.im", autodiff::parameter(std::move(im))});
            pointwise(layer + ".pointwise", w, w);
        }
        if (cfg_.projection_hidden == 0) {
            pointwise("projection", w, cfg_.channels);
        } else {
            pointwise("projection.hidden", w, cfg_.projection_hidden);
            pointwise("projection.out", cfg_.projection_hidden, cfg_.channels);
        }
    }

    static constexpr std::uint64_t kInitStream = 0x696e6974ull;  // "init"

    FNO2dConfig cfg_;
    std::vector<NamedParam<T>> params_;
    std::size_t spectral_elems_ = 0;
};

}  // namespace lpfno::models
