#pragma once

#include <cmath>
#include <numbers>

#include "lpfno/autodiff/graph.hpp"

// Differentiable primitives on real tensors: elementwise arithmetic, the
// pointwise (per-grid-node) affine map, activations, and scalar reductions.
// Backward rules accumulate with +=, so shared subexpressions just work.

namespace lpfno::autodiff {

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
    if (!a.value().same_shape(b.value()))
        throw InvalidArgument("add: shape " + shape_str(a.value().shape()) + " vs " +
                              shape_str(b.value().shape()));
    Tensor<T> out = a.value() + b.value();
    GradNode<T>*an = a.ptr().get(), *bn = b.ptr().get();
    return detail::make_op<T>(
        std::move(out), {a.ptr(), b.ptr()}, [an, bn](GradNode<T>& self) {
            const Tensor<T>& g = self.accumulated_grad;
            if (an->requires_grad) an->grad() += g;
            if (bn->requires_grad) bn->grad() += g;
        });
}

template <typename T>
Var<T> scaled(const Var<T>& x, T s) {
    Tensor<T> out = x.value() * s;
    GradNode<T>* xn = x.ptr().get();
    return detail::make_op<T>(std::move(out), {x.ptr()}, [xn, s](GradNode<T>& self) {
        if (!xn->requires_grad) return;
        Tensor<T>& gx = xn->grad();
        const Tensor<T>& g = self.accumulated_grad;
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += s * g[i];
    });
}

/// Affine map over the trailing channel axis: y[..., o] = sum_c x[..., c]
/// W[c, o] + b[o]. Every leading position shares the same W and b.
template <typename T>
Var<T> pointwise_linear(const Var<T>& x, const Var<T>& W, const Var<T>& b) {
    const Tensor<T>& xv = x.value();
    const Tensor<T>& wv = W.value();
    if (xv.rank() < 1 || wv.rank() != 2 || xv.shape().back() != wv.shape()[0])
        throw InvalidArgument("pointwise_linear: x " + shape_str(xv.shape()) + " vs W " +
                              shape_str(wv.shape()));
    const std::size_t cin = wv.shape()[0];
    const std::size_t cout = wv.shape()[1];
    const bool with_bias = b.valid();
    if (with_bias && b.value().shape() != Shape{cout})
        throw InvalidArgument("pointwise_linear: bias shape " + shape_str(b.value().shape()) +
                              " vs cout " + std::to_string(cout));
    const std::size_t rows = xv.size() / cin;

    Shape out_shape = xv.shape();
    out_shape.back() = cout;
    Tensor<T> out(out_shape);
    // accumulate each output row in a local buffer: the compiler can prove it
    // aliases nothing and vectorize the inner loops
    std::vector<T> acc(cout);
    for (std::size_t r = 0; r < rows; ++r) {
        const T* xr = xv.data() + r * cin;
        T* yr = out.data() + r * cout;
        if (with_bias) {
            const T* bv = b.value().data();
            for (std::size_t o = 0; o < cout; ++o) acc[o] = bv[o];
        } else {
            for (std::size_t o = 0; o < cout; ++o) acc[o] = T(0);
        }
        for (std::size_t c = 0; c < cin; ++c) {
            const T xc = xr[c];
            const T* wr = wv.data() + c * cout;
            for (std::size_t o = 0; o < cout; ++o) acc[o] += xc * wr[o];
        }
        for (std::size_t o = 0; o < cout; ++o) yr[o] = acc[o];
    }

    std::vector<std::shared_ptr<GradNode<T>>> parents{x.ptr(), W.ptr()};
    if (with_bias) parents.push_back(b.ptr());
    GradNode<T>*xn = x.ptr().get(), *wn = W.ptr().get(),
               *bn = with_bias ? b.ptr().get() : nullptr;
    return detail::make_op<T>(
        std::move(out), std::move(parents),
        [xn, wn, bn, rows, cin, cout](GradNode<T>& self) {
            const Tensor<T>& g = self.accumulated_grad;
            if (xn->requires_grad) {
                // walk W transposed so the inner loop is a vectorizable axpy
                // over c instead of a serial dot-product reduction over o; the
                // per-element accumulation order is unchanged (o ascending,
                // summed apart before the += into the grad tensor)
                Tensor<T>& gx = xn->grad();
                const T* wv = wn->value.data();
                std::vector<T> wt(cout * cin), accd(cin);
                for (std::size_t c = 0; c < cin; ++c)
                    for (std::size_t o = 0; o < cout; ++o) wt[o * cin + c] = wv[c * cout + o];
                for (std::size_t r = 0; r < rows; ++r) {
                    const T* gr = g.data() + r * cout;
                    T* gxr = gx.data() + r * cin;
                    for (std::size_t c = 0; c < cin; ++c) accd[c] = T(0);
                    for (std::size_t o = 0; o < cout; ++o) {
                        const T go = gr[o];
                        const T* wtr = wt.data() + o * cin;
                        for (std::size_t c = 0; c < cin; ++c) accd[c] += go * wtr[c];
                    }
                    for (std::size_t c = 0; c < cin; ++c) gxr[c] += accd[c];
                }
            }
            if (wn->requires_grad) {
                Tensor<T>& gw = wn->grad();
                const T* xv = xn->value.data();
                std::vector<T> gbuf(cout);
                for (std::size_t r = 0; r < rows; ++r) {
                    const T* xr = xv + r * cin;
                    const T* gr = g.data() + r * cout;
                    for (std::size_t o = 0; o < cout; ++o) gbuf[o] = gr[o];
                    for (std::size_t c = 0; c < cin; ++c) {
                        const T xc = xr[c];
                        T* gwr = gw.data() + c * cout;
                        for (std::size_t o = 0; o < cout; ++o) gwr[o] += xc * gbuf[o];
                    }
                }
            }
            if (bn && bn->requires_grad) {
                Tensor<T>& gb = bn->grad();
                std::vector<T> bacc(cout);
                for (std::size_t r = 0; r < rows; ++r) {
                    const T* gr = g.data() + r * cout;
                    for (std::size_t o = 0; o < cout; ++o) bacc[o] += gr[o];
                }
                for (std::size_t o = 0; o < cout; ++o) gb[o] += bacc[o];
            }
        });
}

template <typename T>
Var<T> pointwise_linear(const Var<T>& x, const Var<T>& W) {
    return pointwise_linear(x, W, Var<T>{});
}

enum class Act { Gelu, Relu, Tanh };

inline Act act_from_name(const std::string& s) {
    if (s == "gelu") return Act::Gelu;
    if (s == "relu") return Act::Relu;
    if (s == "tanh") return Act::Tanh;
    throw InvalidArgument("unknown activation '" + s + "'");
}

inline std::string act_name(Act a) {
    switch (a) {
        case Act::Gelu: return "gelu";
        case Act::Relu: return "relu";
        case Act::Tanh: return "tanh";
    }
    throw InvalidArgument("bad activation tag");
}

template <typename T>
Var<T> activation(const Var<T>& x, Act kind) {
    const Tensor<T>& xv = x.value();
    Tensor<T> out(xv.shape());
    const T inv_sqrt2 = T(1) / std::sqrt(T(2));
    // gelu keeps its erf factor around for the backward pass; erf is by far
    // the most expensive thing in this op and shows up in both directions
    Tensor<T> phi;
    if (kind == Act::Gelu) {
        phi = Tensor<T>(xv.shape());
        for (std::size_t i = 0; i < xv.size(); ++i) {
            const T v = xv[i];
            phi[i] = T(0.5) * (T(1) + std::erf(v * inv_sqrt2));
            out[i] = v * phi[i];
        }
    } else {
        for (std::size_t i = 0; i < xv.size(); ++i) {
            const T v = xv[i];
            out[i] = kind == Act::Relu ? (v > T(0) ? v : T(0)) : std::tanh(v);
        }
    }
    GradNode<T>* xn = x.ptr().get();
    return detail::make_op<T>(
        std::move(out), {x.ptr()}, [xn, kind, phi = std::move(phi)](GradNode<T>& self) {
            if (!xn->requires_grad) return;
            const Tensor<T>& g = self.accumulated_grad;
            const Tensor<T>& xv = xn->value;
            Tensor<T>& gx = xn->grad();
            const T inv_sqrt2pi = T(1) / std::sqrt(T(2) * std::numbers::pi_v<T>);
            for (std::size_t i = 0; i < g.size(); ++i) {
                const T v = xv[i];
                T d;
                switch (kind) {
                    case Act::Gelu:
                        d = phi[i] + v * inv_sqrt2pi * std::exp(T(-0.5) * v * v);
                        break;
                    case Act::Relu: d = v > T(0) ? T(1) : T(0); break;
                    default: {
                        // forward output is tanh(v); reuse it
                        const T t = self.value[i];
                        d = T(1) - t * t;
                    }
                }
                gx[i] += d * g[i];
            }
        });
}

/// Mean over all elements of the squared difference against a fixed target.
template <typename T>
Var<T> mse_loss(const Var<T>& pred, Tensor<T> target) {
    const Tensor<T>& pv = pred.value();
    if (!pv.same_shape(target))
        throw InvalidArgument("mse_loss: shape " + shape_str(pv.shape()) + " vs " +
                              shape_str(target.shape()));
    double acc = 0;
    for (std::size_t i = 0; i < pv.size(); ++i) {
        const double d = double(pv[i]) - double(target[i]);
        acc += d * d;
    }
    Tensor<T> out(Shape{1}, T(acc / double(pv.size())));
    GradNode<T>* pn = pred.ptr().get();
    return detail::make_op<T>(
        std::move(out), {pred.ptr()}, [pn, target = std::move(target)](GradNode<T>& self) {
            if (!pn->requires_grad) return;
            const T g = self.accumulated_grad[0];
            const Tensor<T>& pv = pn->value;
            Tensor<T>& gp = pn->grad();
            const T scale = T(2) / T(pv.size());
            for (std::size_t i = 0; i < pv.size(); ++i)
                gp[i] += g * scale * (pv[i] - target[i]);
        });
}

/// Scalar sum of all elements, the standard reduction for gradient checking.
template <typename T>
Var<T> sum(const Var<T>& x) {
    double acc = 0;
    for (std::size_t i = 0; i < x.value().size(); ++i) acc += double(x.value()[i]);
    Tensor<T> out(Shape{1}, T(acc));
    GradNode<T>* xn = x.ptr().get();
    return detail::make_op<T>(std::move(out), {x.ptr()}, [xn](GradNode<T>& self) {
        if (!xn->requires_grad) return;
        const T g = self.accumulated_grad[0];
        Tensor<T>& gx = xn->grad();
        for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g;
    });
}

}  // namespace lpfno::autodiff
