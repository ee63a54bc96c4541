#pragma once

#include <string>
#include <vector>

#include "lpfno/autodiff/gradcheck.hpp"
#include "lpfno/autodiff/ops.hpp"
#include "lpfno/autodiff/spectral.hpp"
#include "lpfno/core/rng.hpp"
#include "lpfno/models/fno2d.hpp"
#include "lpfno/models/lifting.hpp"
#include "lpfno/models/lpfno.hpp"

// The standing finite-difference check list: every differentiable primitive
// plus both full models at tiny configurations, each as a named case. The
// gradcheck CLI command and the release gate both run exactly this list, so
// "gradients are verified" always means the same thing.

namespace lpfno::harness {

struct GradcheckCase {
    std::string name;
    autodiff::GradcheckReport report;
};

inline constexpr double kGradcheckTol = 1e-4;

namespace detail {

inline Tensor<double> rand_t(const Shape& s, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Tensor<double> t(s);
    for (auto& v : t.flat()) v = rng.uniform(lo, hi);
    return t;
}

/// Values bounded away from zero, for kinked activations where a central
/// difference straddling the kink would report a bogus mismatch.
inline Tensor<double> rand_away_from_zero(const Shape& s, Rng& rng) {
    Tensor<double> t(s);
    for (auto& v : t.flat()) {
        const double m = rng.uniform(0.2, 1.0);
        v = rng.uniform(0.0, 1.0) < 0.5 ? -m : m;
    }
    return t;
}

}  // namespace detail

/// Runs the whole list and returns per-case reports in a stable order.
inline std::vector<GradcheckCase> run_gradcheck_suite() {
    using namespace autodiff;
    using detail::rand_t;
    std::vector<GradcheckCase> out;
    Rng rng(424242);

    auto run = [&](const std::string& name, const GradcheckFn& f, const GradcheckInputs& in) {
        out.push_back({name, gradcheck(f, in)});
    };

    run("add",
        [](const std::vector<Var<double>>& v) { return sum(add(v[0], v[1])); },
        {{"a", rand_t(Shape{3, 4}, rng)}, {"b", rand_t(Shape{3, 4}, rng)}});

    run("scaled",
        [](const std::vector<Var<double>>& v) { return sum(scaled(v[0], -1.7)); },
        {{"x", rand_t(Shape{6}, rng)}});

    run("sum",
        [](const std::vector<Var<double>>& v) { return sum(v[0]); },
        {{"x", rand_t(Shape{5}, rng)}});

    {
        Tensor<double> target = rand_t(Shape{2, 3}, rng);
        run("mse_loss",
            [target](const std::vector<Var<double>>& v) { return mse_loss(v[0], target); },
            {{"pred", rand_t(Shape{2, 3}, rng)}});
    }

    run("pointwise_linear",
        [](const std::vector<Var<double>>& v) {
            return sum(pointwise_linear(v[0], v[1], v[2]));
        },
        {{"x", rand_t(Shape{2, 5, 3}, rng)},
         {"W", rand_t(Shape{3, 4}, rng)},
         {"b", rand_t(Shape{4}, rng)}});

    run("pointwise_linear_no_bias",
        [](const std::vector<Var<double>>& v) { return sum(pointwise_linear(v[0], v[1])); },
        {{"x", rand_t(Shape{2, 5, 3}, rng)}, {"W", rand_t(Shape{3, 4}, rng)}});

    for (Act kind : {Act::Gelu, Act::Relu, Act::Tanh}) {
        run("activation_" + act_name(kind),
            [kind](const std::vector<Var<double>>& v) { return sum(activation(v[0], kind)); },
            {{"x", kind == Act::Relu ? detail::rand_away_from_zero(Shape{17}, rng)
                                     : rand_t(Shape{17}, rng)}});
    }

    // weighted sums keep the reductions sensitive to every output position
    Tensor<double> w2d = rand_t(Shape{2, 8, 2}, rng);
    run("spectral_conv_1d",
        [w2d](const std::vector<Var<double>>& v) {
            auto y = spectral_conv_1d(v[0], v[1], v[2]);
            return mse_loss(y, w2d);
        },
        {{"h", rand_t(Shape{2, 8, 3}, rng)},
         {"re", rand_t(Shape{5, 3, 2}, rng)},
         {"im", rand_t(Shape{5, 3, 2}, rng)}});

    run("spectral_conv_1d_clamped",
        [w2d](const std::vector<Var<double>>& v) {
            auto y = spectral_conv_1d(v[0], v[1], v[2], 3);
            return mse_loss(y, w2d);
        },
        {{"h", rand_t(Shape{2, 8, 3}, rng)},
         {"re", rand_t(Shape{5, 3, 2}, rng)},
         {"im", rand_t(Shape{5, 3, 2}, rng)}});

    Tensor<double> w4d = rand_t(Shape{2, 8, 8, 2}, rng);
    run("spectral_conv_2d",
        [w4d](const std::vector<Var<double>>& v) {
            auto y = spectral_conv_2d(v[0], v[1], v[2]);
            return mse_loss(y, w4d);
        },
        {{"h", rand_t(Shape{2, 8, 8, 3}, rng)},
         {"re", rand_t(Shape{2, 4, 4, 3, 2}, rng)},
         {"im", rand_t(Shape{2, 4, 4, 3, 2}, rng)}});

    run("spectral_conv_2d_clamped",
        [w4d](const std::vector<Var<double>>& v) {
            auto y = spectral_conv_2d(v[0], v[1], v[2], 2);
            return mse_loss(y, w4d);
        },
        {{"h", rand_t(Shape{2, 8, 8, 3}, rng)},
         {"re", rand_t(Shape{2, 4, 4, 3, 2}, rng)},
         {"im", rand_t(Shape{2, 4, 4, 3, 2}, rng)}});

    run("lifting_product_1d2d",
        [](const std::vector<Var<double>>& v) {
            return sum(models::lifting_product_1d2d(v[0], v[1]));
        },
        {{"a", rand_t(Shape{2, 4, 3}, rng)}, {"b", rand_t(Shape{2, 4, 3}, rng)}});

    run("lifting_product_2d3d",
        [](const std::vector<Var<double>>& v) {
            return sum(models::lifting_product_2d3d(v[0], v[1]));
        },
        {{"a", rand_t(Shape{3, 4, 2}, rng)}, {"b", rand_t(Shape{3, 5, 2}, rng)}});

    {
        models::LPFNOConfig cfg;
        cfg.embedding_width = 4;
        cfg.modes = 3;
        cfg.layers_per_branch = 1;
        models::LPFNOModel<double> model(cfg, 11);
        Tensor<double> g = rand_t(Shape{2, 8, 1}, rng);
        Tensor<double> target = rand_t(Shape{2, 8, 8, 1}, rng);
        GradcheckInputs inputs;
        for (const auto& p : model.params()) inputs.emplace_back(p.name, p.var.value());
        run("lpfno_tiny",
            [cfg, g, target](const std::vector<Var<double>>& params) {
                return mse_loss(models::LPFNOModel<double>::forward_with(cfg, g, params).u,
                                target);
            },
            inputs);
    }

    {
        models::FNO2dConfig cfg;
        cfg.width = 4;
        cfg.modes = 2;
        cfg.layers = 1;
        cfg.projection_hidden = 3;
        models::FNO2dModel<double> model(cfg, 13);
        Tensor<double> g = rand_t(Shape{2, 8, 1}, rng);
        Tensor<double> target = rand_t(Shape{2, 8, 8, 1}, rng);
        GradcheckInputs inputs;
        for (const auto& p : model.params()) inputs.emplace_back(p.name, p.var.value());
        run("fno2d_tiny",
            [cfg, g, target](const std::vector<Var<double>>& params) {
                return mse_loss(models::FNO2dModel<double>::forward_with(cfg, g, params), target);
            },
            inputs);
    }

    return out;
}

}  // namespace lpfno::harness
