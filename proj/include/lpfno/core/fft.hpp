#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include "lpfno/core/tensor.hpp"

// Self-contained FFT kernels. Forward transforms are unnormalized DFTs; the
// real inverses apply the 1/N factor. Power-of-two lengths take the iterative
// radix-2 path with cached plans; any other length falls back to a direct
// O(N^2) transform, which is plenty for the odd grid sizes the data pipeline
// uses.
//
// Convention note: irfft ignores the imaginary parts of the DC and (for even
// N) Nyquist bins, like every c2r transform. Spectral-layer gradients depend
// on this.

namespace lpfno::fft {

namespace detail {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

template <typename T>
struct Radix2Plan {
    std::size_t n;
    std::vector<std::uint32_t> bitrev;     // permutation, size n
    std::vector<std::complex<T>> twiddle;  // exp(-2*pi*i*j/n), j < n/2
};

/// Plans are cached per length. The twiddle table is valid for any n; the
/// bitrev permutation is only meaningful when n is a power of two, and
/// transform() checks that before using it.
template <typename T>
const Radix2Plan<T>& plan_for(std::size_t n) {
    static std::mutex mtx;
    static std::map<std::size_t, std::unique_ptr<Radix2Plan<T>>> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) {
        auto plan = std::make_unique<Radix2Plan<T>>();
        plan->n = n;
        plan->bitrev.resize(n);
        std::uint32_t bits = 0;
        while ((std::size_t(1) << bits) < n) ++bits;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t r = 0;
            for (std::uint32_t b = 0; b < bits; ++b) r |= ((i >> b) & 1u) << (bits - 1 - b);
            plan->bitrev[i] = static_cast<std::uint32_t>(r);
        }
        plan->twiddle.resize(n / 2);
        for (std::size_t j = 0; j < n / 2; ++j) {
            double ang = -2.0 * std::numbers::pi * double(j) / double(n);
            plan->twiddle[j] = std::complex<T>(T(std::cos(ang)), T(std::sin(ang)));
        }
        it = cache.emplace(n, std::move(plan)).first;
    }
    return *it->second;
}

template <typename T>
void naive_transform(std::complex<T>* x, std::size_t n, bool inverse) {
    std::vector<std::complex<double>> w(n), acc(n);
    const double sgn = inverse ? 2.0 : -2.0;
    for (std::size_t j = 0; j < n; ++j) {
        double ang = sgn * std::numbers::pi * double(j) / double(n);
        w[j] = {std::cos(ang), std::sin(ang)};
    }
    for (std::size_t m = 0; m < n; ++m) {
        std::complex<double> s = 0;
        for (std::size_t j = 0; j < n; ++j)
            s += std::complex<double>(x[j].real(), x[j].imag()) * w[(m * j) % n];
        acc[m] = s;
    }
    for (std::size_t m = 0; m < n; ++m)
        x[m] = std::complex<T>(T(acc[m].real()), T(acc[m].imag()));
}

}  // namespace detail

/// In-place unnormalized DFT (inverse = conjugated kernel, still unnormalized).
template <typename T>
void transform(std::complex<T>* x, std::size_t n, bool inverse) {
    if (n <= 1) return;
    if (!detail::is_pow2(n)) {
        detail::naive_transform(x, n, inverse);
        return;
    }
    const auto& plan = detail::plan_for<T>(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t j = plan.bitrev[i];
        if (i < j) std::swap(x[i], x[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len >> 1;
        const std::size_t stride = n / len;
        for (std::size_t base = 0; base < n; base += len) {
            for (std::size_t j = 0; j < half; ++j) {
                std::complex<T> w = plan.twiddle[j * stride];
                if (inverse) w = std::conj(w);
                const std::complex<T> u = x[base + j];
                const std::complex<T> v = x[base + j + half] * w;
                x[base + j] = u + v;
                x[base + j + half] = u - v;
            }
        }
    }
}

namespace detail {

template <typename T>
std::vector<std::complex<T>>& scratch() {
    thread_local std::vector<std::complex<T>> buf;
    return buf;
}

}  // namespace detail

/// Real-to-complex DFT of one contiguous line: out[m], m <= n/2, unnormalized.
template <typename T>
void rfft_line(const T* in, std::complex<T>* out, std::size_t n) {
    const std::size_t m_count = n / 2 + 1;
    if (n % 2 != 0) {
        // direct transform for odd lengths
        auto& z = detail::scratch<T>();
        z.assign(n, {});
        for (std::size_t j = 0; j < n; ++j) z[j] = {in[j], T(0)};
        transform(z.data(), n, false);
        for (std::size_t m = 0; m < m_count; ++m) out[m] = z[m];
        return;
    }
    // pack the even/odd samples into a half-length complex transform; the
    // unpack twiddles exp(-2*pi*i*m/n) come from the cached plan table
    const std::size_t h = n / 2;
    const auto& unpack = detail::plan_for<T>(n).twiddle;  // m < h
    auto& z = detail::scratch<T>();
    z.assign(h, {});
    for (std::size_t k = 0; k < h; ++k) z[k] = {in[2 * k], in[2 * k + 1]};
    transform(z.data(), h, false);
    for (std::size_t m = 0; m <= h; ++m) {
        const std::complex<T> zm = z[m % h];
        const std::complex<T> zc = std::conj(z[(h - m) % h]);
        const std::complex<T> even = (zm + zc) * T(0.5);
        const std::complex<T> odd = (zm - zc) * std::complex<T>(T(0), T(-0.5));
        const std::complex<T> w = m < h ? unpack[m] : std::complex<T>(T(-1), T(0));
        out[m] = even + w * odd;
    }
}

/// Complex-to-real inverse with 1/n normalization; exact inverse of rfft_line.
template <typename T>
void irfft_line(const std::complex<T>* in, T* out, std::size_t n) {
    const std::size_t m_count = n / 2 + 1;
    if (n % 2 != 0) {
        auto& z = detail::scratch<T>();
        z.assign(n, {});
        z[0] = {in[0].real(), T(0)};
        for (std::size_t m = 1; m < m_count; ++m) {
            z[m] = in[m];
            z[n - m] = std::conj(in[m]);
        }
        transform(z.data(), n, true);
        const T inv = T(1) / T(n);
        for (std::size_t j = 0; j < n; ++j) out[j] = z[j].real() * inv;
        return;
    }
    const std::size_t h = n / 2;
    const auto& unpack = detail::plan_for<T>(n).twiddle;  // exp(-2*pi*i*m/n), m < h
    auto& z = detail::scratch<T>();
    z.assign(h, {});
    for (std::size_t m = 0; m < h; ++m) {
        // DC and Nyquist imaginary parts are not part of the representation
        std::complex<T> xm = (m == 0) ? std::complex<T>(in[0].real(), T(0)) : in[m];
        std::complex<T> xh = (m == 0) ? std::complex<T>(in[h].real(), T(0)) : std::conj(in[h - m]);
        const std::complex<T> even = (xm + xh) * T(0.5);
        const std::complex<T> w = std::conj(unpack[m]);
        const std::complex<T> odd = (xm - xh) * T(0.5) * w;
        z[m] = even + std::complex<T>(T(0), T(1)) * odd;
    }
    transform(z.data(), h, true);
    const T inv = T(1) / T(h);
    for (std::size_t k = 0; k < h; ++k) {
        out[2 * k] = z[k].real() * inv;
        out[2 * k + 1] = z[k].imag() * inv;
    }
}

/// rfft over the last axis of a tensor of any rank.
template <typename T>
Tensor<std::complex<T>> rfft_1d(const Tensor<T>& x) {
    if (x.rank() < 1 || x.shape().back() < 2)
        throw InvalidArgument("rfft_1d: last axis must have length >= 2, got shape " +
                              shape_str(x.shape()));
    const std::size_t n = x.shape().back();
    const std::size_t m_count = n / 2 + 1;
    Shape out_shape = x.shape();
    out_shape.back() = m_count;
    Tensor<std::complex<T>> out(out_shape);
    const std::size_t lines = x.size() / n;
    for (std::size_t l = 0; l < lines; ++l)
        rfft_line(x.data() + l * n, out.data() + l * m_count, n);
    return out;
}

template <typename T>
Tensor<T> irfft_1d(const Tensor<std::complex<T>>& sp, std::size_t n) {
    if (sp.rank() < 1 || n < 2 || sp.shape().back() != n / 2 + 1)
        throw InvalidArgument("irfft_1d: spectrum shape " + shape_str(sp.shape()) +
                              " inconsistent with target length " + std::to_string(n));
    const std::size_t m_count = n / 2 + 1;
    Shape out_shape = sp.shape();
    out_shape.back() = n;
    Tensor<T> out(out_shape);
    const std::size_t lines = out.size() / n;
    for (std::size_t l = 0; l < lines; ++l)
        irfft_line(sp.data() + l * m_count, out.data() + l * n, n);
    return out;
}

/// rfft over the last two axes: full transform along axis -2, real transform
/// along axis -1.
template <typename T>
Tensor<std::complex<T>> rfft_2d(const Tensor<T>& x) {
    if (x.rank() < 2)
        throw InvalidArgument("rfft_2d: need rank >= 2, got " + shape_str(x.shape()));
    const std::size_t ny = x.shape()[x.rank() - 2];
    const std::size_t nx = x.shape().back();
    if (ny < 2 || nx < 2)
        throw InvalidArgument("rfft_2d: axes must have length >= 2, got " + shape_str(x.shape()));
    const std::size_t mx = nx / 2 + 1;
    Shape out_shape = x.shape();
    out_shape[x.rank() - 2] = ny;
    out_shape.back() = mx;
    Tensor<std::complex<T>> out(out_shape);
    const std::size_t planes = x.size() / (ny * nx);
    std::vector<std::complex<T>> col(ny);
    for (std::size_t p = 0; p < planes; ++p) {
        const T* src = x.data() + p * ny * nx;
        std::complex<T>* dst = out.data() + p * ny * mx;
        for (std::size_t r = 0; r < ny; ++r) rfft_line(src + r * nx, dst + r * mx, nx);
        for (std::size_t c = 0; c < mx; ++c) {
            for (std::size_t r = 0; r < ny; ++r) col[r] = dst[r * mx + c];
            transform(col.data(), ny, false);
            for (std::size_t r = 0; r < ny; ++r) dst[r * mx + c] = col[r];
        }
    }
    return out;
}

template <typename T>
Tensor<T> irfft_2d(const Tensor<std::complex<T>>& sp, std::size_t ny, std::size_t nx) {
    if (sp.rank() < 2 || sp.shape()[sp.rank() - 2] != ny || sp.shape().back() != nx / 2 + 1)
        throw InvalidArgument("irfft_2d: spectrum shape " + shape_str(sp.shape()) +
                              " inconsistent with target " + std::to_string(ny) + "x" +
                              std::to_string(nx));
    const std::size_t mx = nx / 2 + 1;
    Shape out_shape = sp.shape();
    out_shape[sp.rank() - 2] = ny;
    out_shape.back() = nx;
    Tensor<T> out(out_shape);
    const std::size_t planes = out.size() / (ny * nx);
    std::vector<std::complex<T>> col(ny), plane(ny * mx);
    const T inv_ny = T(1) / T(ny);
    for (std::size_t p = 0; p < planes; ++p) {
        const std::complex<T>* src = sp.data() + p * ny * mx;
        T* dst = out.data() + p * ny * nx;
        for (std::size_t c = 0; c < mx; ++c) {
            for (std::size_t r = 0; r < ny; ++r) col[r] = src[r * mx + c];
            transform(col.data(), ny, true);
            for (std::size_t r = 0; r < ny; ++r) plane[r * mx + c] = col[r] * inv_ny;
        }
        for (std::size_t r = 0; r < ny; ++r) irfft_line(plane.data() + r * mx, dst + r * nx, nx);
    }
    return out;
}

/// In-place unnormalized complex DFT over the last axis of every line.
template <typename T>
void transform_last(Tensor<std::complex<T>>& x, bool inverse) {
    if (x.rank() < 1) throw InvalidArgument("transform_last: rank must be >= 1");
    const std::size_t n = x.shape().back();
    const std::size_t lines = x.size() / n;
    for (std::size_t l = 0; l < lines; ++l) transform(x.data() + l * n, n, inverse);
}

/// In-place unnormalized complex DFT along the second-to-last axis (down each
/// column of every trailing plane).
template <typename T>
void transform_rows(Tensor<std::complex<T>>& x, bool inverse) {
    if (x.rank() < 2) throw InvalidArgument("transform_rows: rank must be >= 2");
    const std::size_t ny = x.shape()[x.rank() - 2];
    const std::size_t nx = x.shape().back();
    const std::size_t planes = x.size() / (ny * nx);
    std::vector<std::complex<T>> col(ny);
    for (std::size_t p = 0; p < planes; ++p) {
        std::complex<T>* base = x.data() + p * ny * nx;
        for (std::size_t c = 0; c < nx; ++c) {
            for (std::size_t r = 0; r < ny; ++r) col[r] = base[r * nx + c];
            transform(col.data(), ny, inverse);
            for (std::size_t r = 0; r < ny; ++r) base[r * nx + c] = col[r];
        }
    }
}

/// Type-I discrete sine transform, unnormalized:
///   out[m] = sum_{j=0}^{len-1} in[j] * sin(pi*(m+1)*(j+1)/(len+1)).
/// Self-inverse up to the factor 2/(len+1). Implemented through a complex
/// transform of the odd extension (length 2*(len+1), power of two for all the
/// grid sizes the Poisson solver cares about).
inline void dst1(const double* in, double* out, std::size_t len) {
    const std::size_t ext = 2 * (len + 1);
    thread_local std::vector<std::complex<double>> v;
    v.assign(ext, {});
    for (std::size_t j = 0; j < len; ++j) {
        v[j + 1] = {in[j], 0.0};
        v[ext - 1 - j] = {-in[j], 0.0};
    }
    transform(v.data(), ext, false);
    for (std::size_t m = 0; m < len; ++m) out[m] = -0.5 * v[m + 1].imag();
}

}  // namespace lpfno::fft
