#pragma once

#include <cstddef>

#include "lpfno/autodiff/graph.hpp"
#include "lpfno/core/errors.hpp"
#include "lpfno/core/tensor.hpp"

// The lifting product: the channel-wise outer product that raises two
// lower-dimensional feature fields onto a higher-dimensional grid. This is
// the junction where the two 1D branch outputs become a 2D field.

namespace lpfno::models {

using autodiff::GradNode;
using autodiff::Var;

/// c[i, j, ch] = a[i, ch] * b[j, ch], channel by channel. Accepts either
/// unbatched [N, C] inputs (result [N, N, C]) or batched [B, N, C] inputs
/// (result [B, N, N, C]); a and b must have identical shapes. The first
/// factor spans the leading (row) spatial axis of the result, the second the
/// trailing (column) axis.
template <typename T>
Var<T> lifting_product_1d2d(const Var<T>& a, const Var<T>& b) {
    const Tensor<T>& av = a.value();
    const Tensor<T>& bv = b.value();
    if (!av.same_shape(bv))
        throw InvalidArgument("lifting_product_1d2d: shape mismatch " + shape_str(av.shape()) +
                              " vs " + shape_str(bv.shape()));
    if (av.rank() != 2 && av.rank() != 3)
        throw InvalidArgument("lifting_product_1d2d: expected [N, C] or [B, N, C], got " +
                              shape_str(av.shape()));
    const bool batched = av.rank() == 3;
    const std::size_t B = batched ? av.dim(0) : 1;
    const std::size_t N = av.dim(batched ? 1 : 0);
    const std::size_t C = av.dim(batched ? 2 : 1);

    Shape out_shape = batched ? Shape{B, N, N, C} : Shape{N, N, C};
    Tensor<T> out(out_shape);
    const std::size_t plane = N * C;
    for (std::size_t bt = 0; bt < B; ++bt) {
        const T* ap = av.data() + bt * plane;
        const T* bp = bv.data() + bt * plane;
        T* op = out.data() + bt * N * plane;
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j < N; ++j) {
                const T* ai = ap + i * C;
                const T* bj = bp + j * C;
                T* oij = op + (i * N + j) * C;
                for (std::size_t ch = 0; ch < C; ++ch) oij[ch] = ai[ch] * bj[ch];
            }
    }

    GradNode<T>*an = a.ptr().get(), *bn = b.ptr().get();
    return autodiff::detail::make_op<T>(
        std::move(out), {a.ptr(), b.ptr()}, [an, bn, B, N, C, plane](GradNode<T>& self) {
            const Tensor<T>& g = self.accumulated_grad;
            // d/da[i,ch] = sum_j g[i,j,ch] b[j,ch]; symmetric for b.
            if (an->requires_grad) {
                Tensor<T>& ga = an->grad();
                const T* bv = bn->value.data();
                for (std::size_t bt = 0; bt < B; ++bt)
                    for (std::size_t i = 0; i < N; ++i) {
                        T* gai = ga.data() + bt * plane + i * C;
                        for (std::size_t j = 0; j < N; ++j) {
                            const T* gij = g.data() + bt * N * plane + (i * N + j) * C;
                            const T* bj = bv + bt * plane + j * C;
                            for (std::size_t ch = 0; ch < C; ++ch) gai[ch] += gij[ch] * bj[ch];
                        }
                    }
            }
            if (bn->requires_grad) {
                Tensor<T>& gb = bn->grad();
                const T* av = an->value.data();
                for (std::size_t bt = 0; bt < B; ++bt)
                    for (std::size_t i = 0; i < N; ++i) {
                        const T* ai = av + bt * plane + i * C;
                        for (std::size_t j = 0; j < N; ++j) {
                            const T* gij = g.data() + bt * N * plane + (i * N + j) * C;
                            T* gbj = gb.data() + bt * plane + j * C;
                            for (std::size_t ch = 0; ch < C; ++ch) gbj[ch] += gij[ch] * ai[ch];
                        }
                    }
            }
        });
}

/// The 2D -> 3D lifting product: c[k, i, j, ch] = a[i, j, ch] * b[i, k, ch]
/// for a: [N, M, C] and b: [N, K, C] sharing the first axis. Property-tested
/// but not wired into any model; the experiments here are all 1D -> 2D.
template <typename T>
Var<T> lifting_product_2d3d(const Var<T>& a, const Var<T>& b) {
    const Tensor<T>& av = a.value();
    const Tensor<T>& bv = b.value();
    if (av.rank() != 3 || bv.rank() != 3)
        throw InvalidArgument("lifting_product_2d3d: expected rank-3 inputs, got " +
                              shape_str(av.shape()) + " and " + shape_str(bv.shape()));
    if (av.dim(0) != bv.dim(0) || av.dim(2) != bv.dim(2))
        throw InvalidArgument("lifting_product_2d3d: first axis and channels must match, got " +
                              shape_str(av.shape()) + " and " + shape_str(bv.shape()));
    const std::size_t N = av.dim(0), M = av.dim(1), K = bv.dim(1), C = av.dim(2);

    Tensor<T> out(Shape{K, N, M, C});
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j < M; ++j) {
                const T* aij = av.data() + (i * M + j) * C;
                const T* bik = bv.data() + (i * K + k) * C;
                T* o = out.data() + ((k * N + i) * M + j) * C;
                for (std::size_t ch = 0; ch < C; ++ch) o[ch] = aij[ch] * bik[ch];
            }

    GradNode<T>*an = a.ptr().get(), *bn = b.ptr().get();
    return autodiff::detail::make_op<T>(
        std::move(out), {a.ptr(), b.ptr()}, [an, bn, N, M, K, C](GradNode<T>& self) {
            const Tensor<T>& g = self.accumulated_grad;
            if (an->requires_grad) {
                Tensor<T>& ga = an->grad();
                const T* bv = bn->value.data();
                for (std::size_t k = 0; k < K; ++k)
                    for (std::size_t i = 0; i < N; ++i)
                        for (std::size_t j = 0; j < M; ++j) {
                            const T* gk = g.data() + ((k * N + i) * M + j) * C;
                            const T* bik = bv + (i * K + k) * C;
                            T* gaij = ga.data() + (i * M + j) * C;
                            for (std::size_t ch = 0; ch < C; ++ch) gaij[ch] += gk[ch] * bik[ch];
                        }
            }
            if (bn->requires_grad) {
                Tensor<T>& gb = bn->grad();
                const T* av = an->value.data();
                for (std::size_t k = 0; k < K; ++k)
                    for (std::size_t i = 0; i < N; ++i)
                        for (std::size_t j = 0; j < M; ++j) {
                            const T* gk = g.data() + ((k * N + i) * M + j) * C;
                            const T* aij = av + (i * M + j) * C;
                            T* gbik = gb.data() + (i * K + k) * C;
                            for (std::size_t ch = 0; ch < C; ++ch) gbik[ch] += gk[ch] * aij[ch];
                        }
            }
        });
}

}  // namespace lpfno::models
