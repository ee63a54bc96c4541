#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "lpfno/autodiff/graph.hpp"

// Central finite-difference verification of backward rules. The op under test
// is wrapped as a scalar-valued function of named float64 tensors; the driver
// compares its reverse-mode gradient against (f(x+h) - f(x-h)) / 2h per
// coordinate. Errors are scaled per tensor by the largest gradient magnitude
// in it (floored at 1), so tiny and huge gradients are judged on the same
// footing.

namespace lpfno::autodiff {

struct GradcheckReport {
    double max_rel_err = 0.0;
    std::string worst_param;
    std::size_t worst_index = 0;

    bool pass(double tol) const { return max_rel_err <= tol; }
};

using GradcheckFn = std::function<Var<double>(const std::vector<Var<double>>&)>;
using GradcheckInputs = std::vector<std::pair<std::string, Tensor<double>>>;

inline GradcheckReport gradcheck(const GradcheckFn& f, const GradcheckInputs& inputs,
                                 double step = 1e-5) {
    std::vector<Var<double>> leaves;
    leaves.reserve(inputs.size());
    for (const auto& [name, t] : inputs) leaves.push_back(parameter(t));
    Var<double> loss = f(leaves);
    backward(loss);

    std::vector<Tensor<double>> analytic;
    for (std::size_t p = 0; p < inputs.size(); ++p) {
        const Tensor<double>& g = leaves[p].grad();
        analytic.push_back(g.empty() ? Tensor<double>(inputs[p].second.shape()) : g);
    }

    auto eval = [&](const std::vector<Tensor<double>>& values) {
        std::vector<Var<double>> consts;
        consts.reserve(values.size());
        for (const auto& v : values) consts.push_back(constant(v));
        return double(f(consts).value()[0]);
    };

    std::vector<Tensor<double>> work;
    for (const auto& [name, t] : inputs) work.push_back(t);

    GradcheckReport report;
    for (std::size_t p = 0; p < inputs.size(); ++p) {
        double max_a = 0, max_fd = 0;
        Tensor<double> fd(work[p].shape());
        for (std::size_t i = 0; i < work[p].size(); ++i) {
            const double orig = work[p][i];
            work[p][i] = orig + step;
            const double plus = eval(work);
            work[p][i] = orig - step;
            const double minus = eval(work);
            work[p][i] = orig;
            fd[i] = (plus - minus) / (2.0 * step);
            max_a = std::max(max_a, std::abs(analytic[p][i]));
            max_fd = std::max(max_fd, std::abs(fd[i]));
        }
        const double scale = std::max({1.0, max_a, max_fd});
        for (std::size_t i = 0; i < work[p].size(); ++i) {
            const double rel = std::abs(analytic[p][i] - fd[i]) / scale;
            if (rel > report.max_rel_err) {
                report.max_rel_err = rel;
                report.worst_param = inputs[p].first;
                report.worst_index = i;
            }
        }
    }
    return report;
}

}  // namespace lpfno::autodiff
