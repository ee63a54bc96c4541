#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "lpfno/core/errors.hpp"

namespace lpfno {

using Shape = std::vector<std::size_t>;

template <typename T>
inline constexpr bool is_complex_v = false;
template <typename T>
inline constexpr bool is_complex_v<std::complex<T>> = true;

template <typename T>
struct real_of {
    using type = T;
};
template <typename T>
struct real_of<std::complex<T>> {
    using type = T;
};

inline std::size_t numel(const Shape& s) {
    std::size_t n = 1;
    for (std::size_t d : s) n *= d;
    return n;
}

inline std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
    os << ")";
    return os.str();
}

/// Dense n-dimensional array, row-major and contiguous. E is one of
/// float, double, std::complex<float>, std::complex<double>.
template <typename E>
class Tensor {
public:
    using value_type = E;
    using real_type = typename real_of<E>::type;

    Tensor() = default;

    explicit Tensor(Shape shape) : shape_(std::move(shape)), data_(numel(shape_), E{}) {
        compute_strides();
    }

    Tensor(Shape shape, E fill) : shape_(std::move(shape)), data_(numel(shape_), fill) {
        compute_strides();
    }

    Tensor(Shape shape, std::vector<E> data) : shape_(std::move(shape)), data_(std::move(data)) {
        if (data_.size() != numel(shape_))
            throw InvalidArgument("tensor data size " + std::to_string(data_.size()) +
                                  " does not match shape " + shape_str(shape_));
        compute_strides();
    }

    static Tensor scalar(E v) { return Tensor(Shape{1}, std::vector<E>{v}); }

    const Shape& shape() const { return shape_; }
    const Shape& strides() const { return strides_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    std::size_t dim(std::size_t i) const { return shape_[i]; }
    bool empty() const { return data_.empty(); }

    E* data() { return data_.data(); }
    const E* data() const { return data_.data(); }
    std::span<E> flat() { return {data_.data(), data_.size()}; }
    std::span<const E> flat() const { return {data_.data(), data_.size()}; }

    E& operator[](std::size_t i) { return data_[i]; }
    const E& operator[](std::size_t i) const { return data_[i]; }

    template <typename... I>
    E& operator()(I... idx) {
        return data_[offset(idx...)];
    }
    template <typename... I>
    const E& operator()(I... idx) const {
        return data_[offset(idx...)];
    }

    template <typename... I>
    std::size_t offset(I... idx) const {
        static_assert((std::is_integral_v<I> && ...));
        std::size_t is[] = {static_cast<std::size_t>(idx)...};
        std::size_t off = 0;
        for (std::size_t d = 0; d < sizeof...(I); ++d) off += is[d] * strides_[d];
        return off;
    }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

    Tensor& operator+=(const Tensor& o) {
        check_same_shape(o, "+=");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }
    Tensor& operator-=(const Tensor& o) {
        check_same_shape(o, "-=");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }
    Tensor& operator*=(E s) {
        for (auto& v : data_) v *= s;
        return *this;
    }

    friend Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
    friend Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }
    friend Tensor operator*(Tensor a, E s) { return a *= s; }
    friend Tensor operator*(E s, Tensor a) { return a *= s; }

    bool operator==(const Tensor& o) const { return shape_ == o.shape_ && data_ == o.data_; }

    bool all_finite() const {
        for (const E& v : data_) {
            if constexpr (is_complex_v<E>) {
                if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
            } else {
                if (!std::isfinite(v)) return false;
            }
        }
        return true;
    }

    /// Same data, new shape; element count must match.
    Tensor reshaped(Shape s) const {
        if (numel(s) != data_.size())
            throw InvalidArgument("reshape " + shape_str(shape_) + " -> " + shape_str(s) +
                                  ": element count mismatch");
        Tensor out;
        out.shape_ = std::move(s);
        out.data_ = data_;
        out.compute_strides();
        return out;
    }

    void fill(E v) {
        for (auto& x : data_) x = v;
    }

private:
    void check_same_shape(const Tensor& o, const char* op) const {
        if (shape_ != o.shape_)
            throw InvalidArgument(std::string("tensor ") + op + ": shape " + shape_str(shape_) +
                                  " vs " + shape_str(o.shape_));
    }
    void compute_strides() {
        strides_.assign(shape_.size(), 1);
        for (std::size_t d = shape_.size(); d-- > 1;) strides_[d - 1] = strides_[d] * shape_[d];
    }

    Shape shape_;
    Shape strides_;
    std::vector<E> data_;
};

template <typename To, typename From>
Tensor<To> cast(const Tensor<From>& t) {
    std::vector<To> out(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) out[i] = static_cast<To>(t[i]);
    return Tensor<To>(t.shape(), std::move(out));
}

template <typename E>
double sum_abs2(const Tensor<E>& t) {
    double acc = 0;
    for (const E& v : t.flat()) {
        if constexpr (is_complex_v<E>)
            acc += double(v.real()) * v.real() + double(v.imag()) * v.imag();
        else
            acc += double(v) * v;
    }
    return acc;
}

template <typename E>
double max_abs(const Tensor<E>& t) {
    double m = 0;
    for (const E& v : t.flat()) m = std::max(m, double(std::abs(v)));
    return m;
}

template <typename E>
double max_abs_diff(const Tensor<E>& a, const Tensor<E>& b) {
    if (!a.same_shape(b))
        throw InvalidArgument("max_abs_diff: shape " + shape_str(a.shape()) + " vs " +
                              shape_str(b.shape()));
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, double(std::abs(a[i] - b[i])));
    return m;
}

}  // namespace lpfno
