#pragma once

#include <cmath>
#include <string>

#include "lpfno/core/errors.hpp"
#include "lpfno/core/tensor.hpp"

// Relative error norms used by every evaluation path. A test-set metric is
// always the arithmetic mean of per-sample relative norms; the norms run over
// all grid nodes of a sample, boundary included.

namespace lpfno::harness {

/// Thrown when a target field has zero norm, so a relative error against it
/// is undefined. Callers evaluating a test set exclude the sample and count
/// the exclusion in their report.
struct DegenerateSampleError : NumericalError {
    using NumericalError::NumericalError;
};

/// ||pred - target||_p / ||target||_p over every element, p in {1, 2}.
/// Accumulates in float64 regardless of the input precision.
template <typename T>
double rel_norm(const Tensor<T>& pred, const Tensor<T>& target, int p) {
    if (!pred.same_shape(target))
        throw InvalidArgument("rel_norm: shape " + shape_str(pred.shape()) + " vs " +
                              shape_str(target.shape()));
    if (p != 1 && p != 2) throw InvalidArgument("rel_norm: p must be 1 or 2");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = double(pred[i]) - double(target[i]);
        const double t = double(target[i]);
        if (p == 1) {
            num += std::abs(d);
            den += std::abs(t);
        } else {
            num += d * d;
            den += t * t;
        }
    }
    if (den == 0.0)
        throw DegenerateSampleError("rel_norm: target has zero " +
                                    std::string(p == 1 ? "L1" : "L2") + " norm");
    return p == 1 ? num / den : std::sqrt(num) / std::sqrt(den);
}

/// Plain mean squared error between two same-shaped tensors, f64 accumulated.
template <typename T>
double mse(const Tensor<T>& pred, const Tensor<T>& target) {
    if (!pred.same_shape(target))
        throw InvalidArgument("mse: shape " + shape_str(pred.shape()) + " vs " +
                              shape_str(target.shape()));
    if (pred.size() == 0) throw InvalidArgument("mse: empty tensors");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = double(pred[i]) - double(target[i]);
        acc += d * d;
    }
    return acc / double(pred.size());
}

}  // namespace lpfno::harness
