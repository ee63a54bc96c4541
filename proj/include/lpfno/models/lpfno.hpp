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
#include "lpfno/models/lifting.hpp"

// LP-FNO: two independent 1D FNO branches process the boundary function, the
// lifting product combines their outputs into a 2D field (one branch spans
// the y axis, the other the x axis), and a pointwise projection maps the
// embedding channels back to the physical ones. Parameters never depend on
// the grid size, so a trained model evaluates at any resolution.

namespace lpfno::models {

using autodiff::Act;
using autodiff::NamedParam;
using autodiff::Var;

struct LPFNOConfig {
    std::size_t embedding_width = 64;    // n_e, channels inside each branch
    std::size_t modes = 16;              // retained Fourier modes k
    std::size_t layers_per_branch = 4;   // FNO layers after the lift
    std::string activation = "gelu";
    std::size_t channels = 1;            // physical channels m
    bool coord_feature = true;           // append the normalized node coordinate to g
    std::size_t projection_hidden = 0;   // 0 = single linear projection

    void validate() const {
        if (embedding_width < 1 || modes < 1 || layers_per_branch < 1 || channels < 1)
            throw InvalidArgument("LPFNOConfig: embedding_width, modes, layers_per_branch and "
                                  "channels must all be >= 1");
        autodiff::act_from_name(activation);  // throws on unknown tags
    }

    /// Modes actually mixed at grid size n: the stored k when it fits, else
    /// everything the half-spectrum offers.
    std::size_t effective_modes(std::size_t n) const { return std::min(modes, n / 2 + 1); }

    std::size_t branch_input_channels() const { return channels + (coord_feature ? 1 : 0); }

    bool operator==(const LPFNOConfig&) const = default;
};

inline void to_json(nlohmann::json& j, const LPFNOConfig& c) {
    j = nlohmann::json{{"embedding_width", c.embedding_width},
                       {"modes", c.modes},
                       {"layers_per_branch", c.layers_per_branch},
                       {"activation", c.activation},
                       {"channels", c.channels},
                       {"coord_feature", c.coord_feature},
                       {"projection_hidden", c.projection_hidden}};
}

inline void from_json(const nlohmann::json& j, LPFNOConfig& c) {
    reject_unknown_keys(j,
                        {"embedding_width", "modes", "layers_per_branch", "activation",
                         "channels", "coord_feature", "projection_hidden"},
                        "lpfno config");
    c = LPFNOConfig{};
    if (j.contains("embedding_width")) j.at("embedding_width").get_to(c.embedding_width);
    if (j.contains("modes")) j.at("modes").get_to(c.modes);
    if (j.contains("layers_per_branch")) j.at("layers_per_branch").get_to(c.layers_per_branch);
    if (j.contains("activation")) j.at("activation").get_to(c.activation);
    if (j.contains("channels")) j.at("channels").get_to(c.channels);
    if (j.contains("coord_feature")) j.at("coord_feature").get_to(c.coord_feature);
    if (j.contains("projection_hidden")) j.at("projection_hidden").get_to(c.projection_hidden);
    c.validate();
}

/// Intermediate fields of one forward pass, mainly for tests and diagnostics:
/// the two branch outputs, the lifted field w = v1 (x) v2, and the projected
/// prediction u.
template <typename T>
struct LPFNOParts {
    Var<T> v1, v2, w, u;
};

template <typename T>
class LPFNOModel {
public:
    static constexpr const char* kKind = "lpfno";

    explicit LPFNOModel(LPFNOConfig cfg, std::uint64_t init_seed) : cfg_(std::move(cfg)) {
        cfg_.validate();
        build_params(init_seed);
    }

    const LPFNOConfig& config() const { return cfg_; }
    std::vector<NamedParam<T>>& params() { return params_; }
    const std::vector<NamedParam<T>>& params() const { return params_; }

    ParamCounts param_counts() const {
        ParamCounts pc;
        pc.complex_as_two = param_count(params_);
        pc.complex_as_one = pc.complex_as_two - spectral_elems_ / 2;
        return pc;
    }

    /// g: [B, N, channels] -> prediction [B, N, N, channels]; row index runs
    /// along the boundary (y), column index into the domain (x).
    Var<T> forward(const Tensor<T>& g) const {
        return forward_with(cfg_, g, param_vars(params_)).u;
    }

    LPFNOParts<T> forward_parts(const Tensor<T>& g) const {
        return forward_with(cfg_, g, param_vars(params_));
    }

    /// Forward pass over an explicit flat parameter list in registry order.
    /// The training path and the finite-difference gradient checks share this
    /// exact code, so whatever gets checked is what trains.
    static LPFNOParts<T> forward_with(const LPFNOConfig& cfg, const Tensor<T>& g,
                                      const std::vector<Var<T>>& flat_params) {
        if (g.rank() != 3 || g.dim(2) != cfg.channels)
            throw InvalidArgument("lpfno forward: boundary must be [B, N, " +
                                  std::to_string(cfg.channels) + "], got " +
                                  shape_str(g.shape()));
        const std::size_t N = g.dim(1);
        if (N < 2) throw InvalidArgument("lpfno forward: need at least 2 nodes");
        const std::size_t k_eff = cfg.effective_modes(N);
        const Act act = autodiff::act_from_name(cfg.activation);

        // Both branches read the same input field.
        Var<T> input = autodiff::constant(branch_input(cfg, g));
        detail::ParamCursor<T> cur(flat_params);
        Var<T> v[2];
        for (int branch = 0; branch < 2; ++branch) {
            const Var<T>& qw = cur.next();
            const Var<T>& qb = cur.next();
            Var<T> h = autodiff::pointwise_linear(input, qw, qb);
            for (std::size_t l = 0; l < cfg.layers_per_branch; ++l) {
                const Var<T>& re = cur.next();
                const Var<T>& im = cur.next();
                const Var<T>& ww = cur.next();
                const Var<T>& wb = cur.next();
                Var<T> s = autodiff::spectral_conv_1d(h, re, im, k_eff);
                Var<T> p = autodiff::pointwise_linear(h, ww, wb);
                h = autodiff::activation(autodiff::add(s, p), act);
            }
            v[branch] = h;
        }

        LPFNOParts<T> parts;
        parts.v1 = v[0];
        parts.v2 = v[1];
        // w[b, i, j, ch] = v1[b, i, ch] * v2[b, j, ch]: v1 spans rows (y,
        // boundary-parallel), v2 columns (x, into the domain).
        parts.w = lifting_product_1d2d(parts.v1, parts.v2);
        if (cfg.projection_hidden == 0) {
            const Var<T>& pw = cur.next();
            const Var<T>& pb = cur.next();
            parts.u = autodiff::pointwise_linear(parts.w, pw, pb);
        } else {
            const Var<T>& hw = cur.next();
            const Var<T>& hb = cur.next();
            const Var<T>& ow = cur.next();
            const Var<T>& ob = cur.next();
            Var<T> hidden = autodiff::activation(autodiff::pointwise_linear(parts.w, hw, hb), act);
            parts.u = autodiff::pointwise_linear(hidden, ow, ob);
        }
        cur.expect_exhausted();
        return parts;
    }

    /// The constant input each branch sees: the boundary values, plus the
    /// normalized node coordinate j/(N-1) when coord_feature is on. The
    /// coordinate is the physical position in [0, 1], so the feature means
    /// the same thing at every resolution.
    static Tensor<T> branch_input(const LPFNOConfig& cfg, const Tensor<T>& g) {
        if (!cfg.coord_feature) return g;
        const std::size_t B = g.dim(0), N = g.dim(1), m = g.dim(2);
        Tensor<T> out(Shape{B, N, m + 1});
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t j = 0; j < N; ++j) {
                for (std::size_t c = 0; c < m; ++c) out(b, j, c) = g(b, j, c);
                out(b, j, m) = T(double(j) / double(N - 1));
            }
        return out;
    }

    void set_param_values(const std::vector<std::pair<std::string, Tensor<double>>>& values) {
        assign_param_values(params_, values);
    }

private:
    void build_params(std::uint64_t seed) {
        Rng rng(seed, kInitStream);
        const std::size_t cin = cfg_.branch_input_channels();
        const std::size_t ne = cfg_.embedding_width;
        const std::size_t k = cfg_.modes;
        const std::size_t m = cfg_.channels;

        auto pointwise = [&](const std::string& name, std::size_t in, std::size_t out) {
            Tensor<T> w(Shape{in, out}), b(Shape{out});
            detail::init_pointwise(rng, w, in);
            detail::init_pointwise(rng, b, in);
            params_.push_back({name + ".weight", autodiff::parameter(std::move(w))});
            params_.push_back({name + ".bias", autodiff::parameter(std::move(b))});
        };

        for (int branch = 1; branch <= 2; ++branch) {
            const std::string prefix = "branch" + std::to_string(branch);
            pointwise(prefix + ".lift", cin, ne);
            for (std::size_t l = 0; l < cfg_.layers_per_branch; ++l) {
                const std::string layer = prefix + ".layer" + std::to_string(l);
                Tensor<T> re(Shape{k, ne, ne}), im(Shape{k, ne, ne});
                detail::init_spectral(rng, re, ne, ne);
                detail::init_spectral(rng, im, ne, ne);
                spectral_elems_ += re.size() + im.size();
                params_.push_back({layer + ".spectral.re", autodiff::parameter(std::move(re))});
                params_.push_back({layer + ".spectral.im", autodiff::parameter(std::move(im))});
                pointwise(layer + ".pointwise", ne, ne);
            }
        }
        if (cfg_.projection_hidden == 0) {
            pointwise("projection", ne, m);
        } else {
            pointwise("projection.hidden", ne, cfg_.projection_hidden);
            pointwise("projection.out", cfg_.projection_hidden, m);
        }
    }

    static constexpr std::uint64_t kInitStream = 0x696e6974ull;  // "init"

    LPFNOConfig cfg_;
    std::vector<NamedParam<T>> params_;
    std::size_t spectral_elems_ = 0;
};

}  // namespace lpfno::models
