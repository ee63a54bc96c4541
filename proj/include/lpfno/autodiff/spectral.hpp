#pragma once

#include <algorithm>
#include <complex>
#include <vector>

#include "lpfno/autodiff/graph.hpp"
#include "lpfno/core/fft.hpp"

// Spectral convolutions as single graph nodes. The complex arithmetic
// (transform, mode truncation, per-mode channel mixing, inverse transform)
// stays inside the node; parameters are the real and imaginary parts of the
// mode-mixing weights as two real tensors, so the optimizer and the gradient
// checker only ever see real data.
//
// Backward rules use the adjoints of the real transforms under the convention
// of fft.hpp (unnormalized forward, 1/N inverse, DC/Nyquist imaginaries
// ignored):
//   adjoint(rfft)  : G -> Re(unnormalized inverse FFT of G zero-padded to N)
//   adjoint(irfft) : g -> (c_m / N) * rfft(g), c_m = 1 at DC and Nyquist, 2
//                    elsewhere
// and for a product y = w * x of complex numbers, G_x = conj(w) * G_y,
// G_w = conj(x) * G_y.

namespace lpfno::autodiff {

namespace detail {

template <typename T>
Tensor<T> channels_first(const Tensor<T>& x) {
    // [B, S..., C] -> [B, C, S...], rank 3 or 4
    if (x.rank() == 3) {
        const std::size_t B = x.dim(0), N = x.dim(1), C = x.dim(2);
        Tensor<T> out(Shape{B, C, N});
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t n = 0; n < N; ++n)
                for (std::size_t c = 0; c < C; ++c) out(b, c, n) = x(b, n, c);
        return out;
    }
    const std::size_t B = x.dim(0), Ny = x.dim(1), Nx = x.dim(2), C = x.dim(3);
    Tensor<T> out(Shape{B, C, Ny, Nx});
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t j = 0; j < Ny; ++j)
            for (std::size_t i = 0; i < Nx; ++i)
                for (std::size_t c = 0; c < C; ++c) out(b, c, j, i) = x(b, j, i, c);
    return out;
}

template <typename T>
Tensor<T> channels_last(const Tensor<T>& x) {
    if (x.rank() == 3) {
        const std::size_t B = x.dim(0), C = x.dim(1), N = x.dim(2);
        Tensor<T> out(Shape{B, N, C});
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t c = 0; c < C; ++c)
                for (std::size_t n = 0; n < N; ++n) out(b, n, c) = x(b, c, n);
        return out;
    }
    const std::size_t B = x.dim(0), C = x.dim(1), Ny = x.dim(2), Nx = x.dim(3);
    Tensor<T> out(Shape{B, Ny, Nx, C});
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t c = 0; c < C; ++c)
            for (std::size_t j = 0; j < Ny; ++j)
                for (std::size_t i = 0; i < Nx; ++i) out(b, j, i, c) = x(b, c, j, i);
    return out;
}

/// Fold weights of the real transform: 2 everywhere except DC and (even n)
/// Nyquist, divided by n. Applied bin-wise to the last axis.
template <typename T>
void scale_adjoint_bins(Tensor<std::complex<T>>& sp, std::size_t n) {
    const std::size_t m_count = sp.shape().back();
    const std::size_t lines = sp.size() / m_count;
    const T inv_n = T(1) / T(n);
    for (std::size_t l = 0; l < lines; ++l) {
        std::complex<T>* row = sp.data() + l * m_count;
        for (std::size_t m = 0; m < m_count; ++m) {
            const bool fold_once = m == 0 || (n % 2 == 0 && m == n / 2);
            row[m] *= fold_once ? inv_n : T(2) * inv_n;
        }
    }
}

/// Re(unnormalized inverse FFT of the zero-padded spectrum), the adjoint of
/// rfft over the last axis.
template <typename T>
Tensor<T> adjoint_rfft_last(const Tensor<std::complex<T>>& sp, std::size_t n) {
    Shape full_shape = sp.shape();
    full_shape.back() = n;
    Tensor<std::complex<T>> full(full_shape);
    const std::size_t m_count = sp.shape().back();
    const std::size_t lines = sp.size() / m_count;
    for (std::size_t l = 0; l < lines; ++l)
        for (std::size_t m = 0; m < m_count; ++m) full.data()[l * n + m] = sp.data()[l * m_count + m];
    fft::transform_last(full, true);
    Tensor<T> out(full_shape);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = full[i].real();
    return out;
}

}  // namespace detail

/// y = irfft(pad_k(R . truncate_k(rfft(h)))) over the middle axis of
/// h: [B, N, c_in], with R given as re/im parts of shape [k, c_in, c_out].
/// The same weights apply at any N with k <= floor(N/2)+1. When the grid is
/// too coarse for the stored modes, pass k_use < k to mix only the k_use
/// lowest frequencies; the remaining weight rows stay inert (zero gradient).
/// k_use = 0 means "use all stored rows".
template <typename T>
Var<T> spectral_conv_1d(const Var<T>& h, const Var<T>& r_re, const Var<T>& r_im,
                        std::size_t k_use = 0) {
    const Tensor<T>& hv = h.value();
    const Tensor<T>& re = r_re.value();
    const Tensor<T>& im = r_im.value();
    if (hv.rank() != 3) throw InvalidArgument("spectral_conv_1d: input must be [B, N, c], got " +
                                              shape_str(hv.shape()));
    if (re.rank() != 3 || !re.same_shape(im))
        throw InvalidArgument("spectral_conv_1d: weight shapes " + shape_str(re.shape()) +
                              " vs " + shape_str(im.shape()));
    const std::size_t B = hv.dim(0), N = hv.dim(1), cin = hv.dim(2);
    const std::size_t k = re.dim(0), cout = re.dim(2);
    const std::size_t m_count = N / 2 + 1;
    const std::size_t ku = k_use == 0 ? k : k_use;
    if (re.dim(1) != cin)
        throw InvalidArgument("spectral_conv_1d: weights expect c_in " +
                              std::to_string(re.dim(1)) + ", input has " + std::to_string(cin));
    if (ku > k)
        throw InvalidArgument("spectral_conv_1d: k_use=" + std::to_string(ku) +
                              " exceeds stored modes " + std::to_string(k));
    if (ku > m_count)
        throw InvalidArgument("spectral_conv_1d: k=" + std::to_string(ku) +
                              " exceeds available modes " + std::to_string(m_count) +
                              " at N=" + std::to_string(N));

    auto H = fft::rfft_1d(detail::channels_first(hv));  // [B, cin, M]
    Tensor<std::complex<T>> Y(Shape{B, cout, m_count});
    {
        const std::complex<T>* Hd = H.data();
        std::complex<T>* Yd = Y.data();
        const T *red = re.data(), *imd = im.data();
        std::vector<std::complex<T>> acc(cout);
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t m = 0; m < ku; ++m) {
                const std::complex<T>* hcol = Hd + b * cin * m_count + m;
                std::fill(acc.begin(), acc.end(), std::complex<T>{});
                for (std::size_t c = 0; c < cin; ++c) {
                    const std::complex<T> hb = hcol[c * m_count];
                    const T* wre = red + (m * cin + c) * cout;
                    const T* wim = imd + (m * cin + c) * cout;
                    for (std::size_t o = 0; o < cout; ++o)
                        acc[o] += std::complex<T>(wre[o], wim[o]) * hb;
                }
                std::complex<T>* ycol = Yd + b * cout * m_count + m;
                for (std::size_t o = 0; o < cout; ++o) ycol[o * m_count] = acc[o];
            }
    }
    Tensor<T> out = detail::channels_last(fft::irfft_1d(Y, N));

    GradNode<T>*hn = h.ptr().get(), *ren = r_re.ptr().get(), *imn = r_im.ptr().get();
    return detail::make_op<T>(
        std::move(out), {h.ptr(), r_re.ptr(), r_im.ptr()},
        [hn, ren, imn, H = std::move(H), B, N, cin, cout, ku, m_count](GradNode<T>& self) {
            auto GY = fft::rfft_1d(detail::channels_first(self.accumulated_grad));  // [B,cout,M]
            detail::scale_adjoint_bins(GY, N);

            if (ren->requires_grad || imn->requires_grad) {
                Tensor<T>&gre = ren->grad(), &gim = imn->grad();
                const std::complex<T>*Hd = H.data(), *Gd = GY.data();
                std::vector<std::complex<T>> hbuf(B * cin), gbuf(B * cout);
                for (std::size_t m = 0; m < ku; ++m) {
                    for (std::size_t b = 0; b < B; ++b)
                        for (std::size_t c = 0; c < cin; ++c)
                            hbuf[b * cin + c] = std::conj(Hd[(b * cin + c) * m_count + m]);
                    for (std::size_t b = 0; b < B; ++b)
                        for (std::size_t o = 0; o < cout; ++o)
                            gbuf[b * cout + o] = Gd[(b * cout + o) * m_count + m];
                    for (std::size_t c = 0; c < cin; ++c)
                        for (std::size_t o = 0; o < cout; ++o) {
                            std::complex<T> acc = 0;
                            for (std::size_t b = 0; b < B; ++b)
                                acc += hbuf[b * cin + c] * gbuf[b * cout + o];
                            gre[(m * cin + c) * cout + o] += acc.real();
                            gim[(m * cin + c) * cout + o] += acc.imag();
                        }
                }
            }
            if (hn->requires_grad) {
                Tensor<std::complex<T>> GH(Shape{B, cin, m_count});
                const Tensor<T>&re = ren->value, &im = imn->value;
                const T *red = re.data(), *imd = im.data();
                const std::complex<T>* Gd = GY.data();
                std::complex<T>* GHd = GH.data();
                std::vector<std::complex<T>> gy(cout);
                for (std::size_t b = 0; b < B; ++b)
                    for (std::size_t m = 0; m < ku; ++m) {
                        const std::complex<T>* gcol = Gd + b * cout * m_count + m;
                        for (std::size_t o = 0; o < cout; ++o) gy[o] = gcol[o * m_count];
                        for (std::size_t c = 0; c < cin; ++c) {
                            const T* wre = red + (m * cin + c) * cout;
                            const T* wim = imd + (m * cin + c) * cout;
                            std::complex<T> acc = 0;
                            for (std::size_t o = 0; o < cout; ++o)
                                acc += std::complex<T>(wre[o], -wim[o]) * gy[o];
                            GHd[(b * cin + c) * m_count + m] = acc;
                        }
                    }
                hn->grad() += detail::channels_last(detail::adjoint_rfft_last(GH, N));
            }
        });
}

/// 2D spectral convolution over h: [B, Ny, Nx, c_in]. The retained modes are
/// two k x k corner blocks of the half-plane spectrum: row blocks [0,k) and
/// [Ny-k, Ny) crossed with columns [0,k), which together hold the lowest k
/// spatial frequencies of both signs in y and the non-negative ones in x.
/// Weights are re/im of shape [2, k, k, c_in, c_out]. As in the 1D case,
/// k_use < k restricts mixing to the k_use lowest frequencies per axis; the
/// second corner block then reads its highest-index weight rows, keeping each
/// retained weight attached to the same signed frequency at every grid size.
template <typename T>
Var<T> spectral_conv_2d(const Var<T>& h, const Var<T>& r_re, const Var<T>& r_im,
                        std::size_t k_use = 0) {
    const Tensor<T>& hv = h.value();
    const Tensor<T>& re = r_re.value();
    const Tensor<T>& im = r_im.value();
    if (hv.rank() != 4)
        throw InvalidArgument("spectral_conv_2d: input must be [B, Ny, Nx, c], got " +
                              shape_str(hv.shape()));
    if (re.rank() != 5 || re.dim(0) != 2 || re.dim(1) != re.dim(2) || !re.same_shape(im))
        throw InvalidArgument("spectral_conv_2d: weight shapes " + shape_str(re.shape()) +
                              " vs " + shape_str(im.shape()));
    const std::size_t B = hv.dim(0), Ny = hv.dim(1), Nx = hv.dim(2), cin = hv.dim(3);
    const std::size_t k = re.dim(1), cout = re.dim(4);
    const std::size_t mx = Nx / 2 + 1;
    const std::size_t ku = k_use == 0 ? k : k_use;
    if (re.dim(3) != cin)
        throw InvalidArgument("spectral_conv_2d: weights expect c_in " +
                              std::to_string(re.dim(3)) + ", input has " + std::to_string(cin));
    if (ku > k)
        throw InvalidArgument("spectral_conv_2d: k_use=" + std::to_string(ku) +
                              " exceeds stored modes " + std::to_string(k));
    if (ku > mx || 2 * ku > Ny)
        throw InvalidArgument("spectral_conv_2d: k=" + std::to_string(ku) +
                              " exceeds available modes at " + std::to_string(Ny) + "x" +
                              std::to_string(Nx));

    auto H = fft::rfft_2d(detail::channels_first(hv));  // [B, cin, Ny, mx]
    Tensor<std::complex<T>> Y(Shape{B, cout, Ny, mx});
    {
        const std::complex<T>* Hd = H.data();
        std::complex<T>* Yd = Y.data();
        const T *red = re.data(), *imd = im.data();
        const std::size_t plane = Ny * mx;
        std::vector<std::complex<T>> acc(cout);
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t t = 0; t < 2; ++t)
                for (std::size_t rr = 0; rr < ku; ++rr) {
                    const std::size_t row = t == 0 ? rr : Ny - ku + rr;
                    const std::size_t wr = t == 0 ? rr : k - ku + rr;
                    for (std::size_t m = 0; m < ku; ++m) {
                        const std::complex<T>* hcol = Hd + (b * cin) * plane + row * mx + m;
                        std::fill(acc.begin(), acc.end(), std::complex<T>{});
                        for (std::size_t c = 0; c < cin; ++c) {
                            const std::complex<T> hb = hcol[c * plane];
                            const std::size_t wbase = (((t * k + wr) * k + m) * cin + c) * cout;
                            const T* wre = red + wbase;
                            const T* wim = imd + wbase;
                            for (std::size_t o = 0; o < cout; ++o)
                                acc[o] += std::complex<T>(wre[o], wim[o]) * hb;
                        }
                        std::complex<T>* ycol = Yd + (b * cout) * plane + row * mx + m;
                        for (std::size_t o = 0; o < cout; ++o) ycol[o * plane] = acc[o];
                    }
                }
    }
    Tensor<T> out = detail::channels_last(fft::irfft_2d(Y, Ny, Nx));

    GradNode<T>*hn = h.ptr().get(), *ren = r_re.ptr().get(), *imn = r_im.ptr().get();
    return detail::make_op<T>(
        std::move(out), {h.ptr(), r_re.ptr(), r_im.ptr()},
        [hn, ren, imn, H = std::move(H), B, Ny, Nx, cin, cout, k, ku, mx](GradNode<T>& self) {
            auto GY = fft::rfft_2d(detail::channels_first(self.accumulated_grad));
            // adjoint of irfft_2d: fold weights along x, then 1/Ny from the
            // adjoint of the normalized inverse along y
            detail::scale_adjoint_bins(GY, Nx);
            const T inv_ny = T(1) / T(Ny);
            for (auto& v : GY.flat()) v *= inv_ny;

            const std::size_t plane = Ny * mx;
            if (ren->requires_grad || imn->requires_grad) {
                Tensor<T>&gre = ren->grad(), &gim = imn->grad();
                const std::complex<T>*Hd = H.data(), *Gd = GY.data();
                std::vector<std::complex<T>> hbuf(B * cin), gbuf(B * cout);
                for (std::size_t t = 0; t < 2; ++t)
                    for (std::size_t rr = 0; rr < ku; ++rr) {
                        const std::size_t row = t == 0 ? rr : Ny - ku + rr;
                        const std::size_t wr = t == 0 ? rr : k - ku + rr;
                        for (std::size_t m = 0; m < ku; ++m) {
                            for (std::size_t b = 0; b < B; ++b)
                                for (std::size_t c = 0; c < cin; ++c)
                                    hbuf[b * cin + c] =
                                        std::conj(Hd[(b * cin + c) * plane + row * mx + m]);
                            for (std::size_t b = 0; b < B; ++b)
                                for (std::size_t o = 0; o < cout; ++o)
                                    gbuf[b * cout + o] = Gd[(b * cout + o) * plane + row * mx + m];
                            const std::size_t wbase = ((t * k + wr) * k + m) * cin * cout;
                            for (std::size_t c = 0; c < cin; ++c)
                                for (std::size_t o = 0; o < cout; ++o) {
                                    std::complex<T> acc = 0;
                                    for (std::size_t b = 0; b < B; ++b)
                                        acc += hbuf[b * cin + c] * gbuf[b * cout + o];
                                    gre[wbase + c * cout + o] += acc.real();
                                    gim[wbase + c * cout + o] += acc.imag();
                                }
                        }
                    }
            }
            if (hn->requires_grad) {
                Tensor<std::complex<T>> GH(Shape{B, cin, Ny, mx});
                const Tensor<T>&re = ren->value, &im = imn->value;
                const T *red = re.data(), *imd = im.data();
                const std::complex<T>* Gd = GY.data();
                std::complex<T>* GHd = GH.data();
                std::vector<std::complex<T>> gy(cout);
                for (std::size_t b = 0; b < B; ++b)
                    for (std::size_t t = 0; t < 2; ++t)
                        for (std::size_t rr = 0; rr < ku; ++rr) {
                            const std::size_t row = t == 0 ? rr : Ny - ku + rr;
                            const std::size_t wr = t == 0 ? rr : k - ku + rr;
                            for (std::size_t m = 0; m < ku; ++m) {
                                const std::complex<T>* gcol =
                                    Gd + (b * cout) * plane + row * mx + m;
                                for (std::size_t o = 0; o < cout; ++o) gy[o] = gcol[o * plane];
                                for (std::size_t c = 0; c < cin; ++c) {
                                    const std::size_t wbase =
                                        (((t * k + wr) * k + m) * cin + c) * cout;
                                    const T* wre = red + wbase;
                                    const T* wim = imd + wbase;
                                    std::complex<T> acc = 0;
                                    for (std::size_t o = 0; o < cout; ++o)
                                        acc += std::complex<T>(wre[o], -wim[o]) * gy[o];
                                    GHd[(b * cin + c) * plane + row * mx + m] = acc;
                                }
                            }
                        }
                // adjoint of rfft_2d: undo the y transform, then the adjoint
                // of the row-wise real transform
                fft::transform_rows(GH, true);
                hn->grad() += detail::channels_last(detail::adjoint_rfft_last(GH, Nx));
            }
        });
}

}  // namespace lpfno::autodiff
