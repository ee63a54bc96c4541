#pragma once

#include <cstddef>
#include <cstdint>
#include <cmath>
#include <string>
#include <vector>

#include "lpfno/autodiff/graph.hpp"
#include "lpfno/core/errors.hpp"
#include "lpfno/core/rng.hpp"
#include "lpfno/core/tensor.hpp"

namespace lpfno::models {

/// Scalar parameter totals under both complex-counting conventions. Spectral
/// weights are stored as separate real and imaginary tensors, so the plain
/// sum of elements counts every complex coefficient twice; the second figure
/// counts each coefficient once, which is the convention some frameworks
/// report.
struct ParamCounts {
    std::size_t complex_as_two = 0;
    std::size_t complex_as_one = 0;
};

namespace detail {

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for pointwise weights and their
/// biases, matching the common dense-layer default.
template <typename T>
void init_pointwise(Rng& rng, Tensor<T>& t, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(double(fan_in));
    for (auto& v : t.flat()) v = T(rng.uniform(-bound, bound));
}

/// Uniform[0, 1/(c_in*c_out)) per real and imaginary part, the customary
/// spectral-weight scale that keeps layer outputs O(1) across mode counts.
template <typename T>
void init_spectral(Rng& rng, Tensor<T>& t, std::size_t cin, std::size_t cout) {
    const double scale = 1.0 / (double(cin) * double(cout));
    for (auto& v : t.flat()) v = T(rng.uniform() * scale);
}

/// Sequential reader over a flat parameter list; forward passes consume the
/// list in registry order, and the cursor catches any drift between the
/// registry builder and the forward graph.
template <typename T>
class ParamCursor {
public:
    explicit ParamCursor(const std::vector<autodiff::Var<T>>& params) : params_(params) {}

    const autodiff::Var<T>& next() {
        if (pos_ >= params_.size())
            throw InvalidArgument("model forward expected more than " +
                                  std::to_string(params_.size()) + " parameter tensors");
        return params_[pos_++];
    }

    void expect_exhausted() const {
        if (pos_ != params_.size())
            throw InvalidArgument("model forward consumed " + std::to_string(pos_) + " of " +
                                  std::to_string(params_.size()) + " parameter tensors");
    }

private:
    const std::vector<autodiff::Var<T>>& params_;
    std::size_t pos_ = 0;
};

}  // namespace detail

template <typename T>
std::vector<autodiff::Var<T>> param_vars(const std::vector<autodiff::NamedParam<T>>& params) {
    std::vector<autodiff::Var<T>> out;
    out.reserve(params.size());
    for (const auto& p : params) out.push_back(p.var);
    return out;
}

/// Total scalar count over a registry (complex coefficients appear as two
/// scalars because re/im are stored separately).
template <typename T>
std::size_t param_count(const std::vector<autodiff::NamedParam<T>>& params) {
    std::size_t n = 0;
    for (const auto& p : params) n += p.var.value().size();
    return n;
}

template <typename T>
void zero_grads(std::vector<autodiff::NamedParam<T>>& params) {
    for (auto& p : params) p.var.zero_grad();
}

/// Overwrites registry values from (name, tensor) pairs, requiring an exact
/// match of names, order, and shapes. Used by checkpoint restore.
template <typename T>
void assign_param_values(std::vector<autodiff::NamedParam<T>>& params,
                         const std::vector<std::pair<std::string, Tensor<double>>>& values) {
    if (values.size() != params.size())
        throw InvalidArgument("parameter list has " + std::to_string(values.size()) +
                              " tensors, model expects " + std::to_string(params.size()));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto& [name, value] = values[i];
        if (name != params[i].name)
            throw InvalidArgument("parameter " + std::to_string(i) + " is '" + name +
                                  "', model expects '" + params[i].name + "'");
        Tensor<T>& dst = params[i].var.mutable_value();
        if (value.shape() != dst.shape())
            throw InvalidArgument("parameter '" + name + "' has shape " +
                                  shape_str(value.shape()) + ", model expects " +
                                  shape_str(dst.shape()));
        for (std::size_t e = 0; e < dst.size(); ++e) dst[e] = T(value[e]);
    }
}

}  // namespace lpfno::models
