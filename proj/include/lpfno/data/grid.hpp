#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "lpfno/core/errors.hpp"

namespace lpfno::data {

/// Uniform square grid on [0,1]^2 whose nodes include the boundary, so axis
/// coordinates are j*h with h = 1/(n-1). Solutions are stored full-grid,
/// boundary rows/columns included.
struct GridSpec {
    std::size_t n = 0;
    bool includes_boundary = true;

    void validate() const {
        if (n < 4) throw InvalidArgument("grid needs n >= 4, got " + std::to_string(n));
    }

    double h() const { return 1.0 / double(n - 1); }

    std::vector<double> nodes() const {
        std::vector<double> y(n);
        for (std::size_t j = 0; j < n; ++j) y[j] = double(j) * h();
        return y;
    }

    bool operator==(const GridSpec&) const = default;
};

}  // namespace lpfno::data
