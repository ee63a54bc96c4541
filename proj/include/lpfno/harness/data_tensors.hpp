#pragma once

#include <string>
#include <vector>

#include "lpfno/core/tensor.hpp"
#include "lpfno/data/dataset.hpp"

// Bridges between the dataset layer (per-sample fields) and the model layer
// (batched tensors). Boundaries become [S, n, 1] inputs, solutions [S, n, n, 1]
// targets; gather_rows slices mini-batches by index.

namespace lpfno::harness {

template <typename T>
Tensor<T> boundary_tensor(const data::Dataset& d) {
    const std::size_t count = d.samples.size(), n = d.grid.n;
    Tensor<T> g(Shape{count, n, 1});
    for (std::size_t s = 0; s < count; ++s)
        for (std::size_t j = 0; j < n; ++j) g(s, j, 0) = T(d.samples[s].boundary(j));
    return g;
}

template <typename T>
Tensor<T> solution_tensor(const data::Dataset& d) {
    const std::size_t count = d.samples.size(), n = d.grid.n;
    Tensor<T> u(Shape{count, n, n, 1});
    for (std::size_t s = 0; s < count; ++s)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t i = 0; i < n; ++i) u(s, j, i, 0) = T(d.samples[s].solution(j, i));
    return u;
}

/// New tensor holding rows (leading-axis slices) of `t` at the given indices,
/// in order.
template <typename T>
Tensor<T> gather_rows(const Tensor<T>& t, const std::vector<std::size_t>& indices) {
    if (t.shape().empty()) throw InvalidArgument("gather_rows: rank-0 tensor");
    Shape out_shape = t.shape();
    out_shape[0] = indices.size();
    const std::size_t row = t.size() / (t.shape()[0] == 0 ? 1 : t.shape()[0]);
    Tensor<T> out(out_shape);
    for (std::size_t r = 0; r < indices.size(); ++r) {
        if (indices[r] >= t.shape()[0])
            throw InvalidArgument("gather_rows: index " + std::to_string(indices[r]) +
                                  " out of range " + std::to_string(t.shape()[0]));
        for (std::size_t i = 0; i < row; ++i) out[r * row + i] = t[indices[r] * row + i];
    }
    return out;
}

/// "gaussian" / "sinusoidal" / "polynomial" when every sample agrees,
/// otherwise "mixed".
inline std::string dataset_family(const data::Dataset& d) {
    if (d.samples.empty()) return "empty";
    const data::BoundaryFamily first = d.samples.front().params.family;
    for (const auto& s : d.samples)
        if (s.params.family != first) return "mixed";
    return data::family_name(first);
}

}  // namespace lpfno::harness
