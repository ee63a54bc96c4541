#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "lpfno/core/errors.hpp"
#include "lpfno/core/tensor.hpp"

// On-disk format helpers. Numeric payloads are raw little-endian float64
// arrays; everything structured lives in JSON manifests next to them.

namespace lpfno::io {

inline void write_f64_blob(const std::filesystem::path& path, const double* data,
                           std::size_t count) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path.string());
    if constexpr (std::endian::native == std::endian::little) {
        f.write(reinterpret_cast<const char*>(data),
                static_cast<std::streamsize>(count * sizeof(double)));
    } else {
        std::vector<unsigned char> buf(count * 8);
        for (std::size_t i = 0; i < count; ++i) {
            const auto u = std::bit_cast<std::uint64_t>(data[i]);
            for (int b = 0; b < 8; ++b) buf[i * 8 + b] = static_cast<unsigned char>(u >> (8 * b));
        }
        f.write(reinterpret_cast<const char*>(buf.data()),
                static_cast<std::streamsize>(buf.size()));
    }
    if (!f) throw IoError("write failed: " + path.string());
}

inline std::vector<double> read_f64_blob(const std::filesystem::path& path,
                                         std::size_t expected_count) {
    std::ifstream f(path, std::ios::binary | std::ios::ate);
    if (!f) throw IoError("cannot open: " + path.string());
    const auto bytes = static_cast<std::size_t>(f.tellg());
    if (bytes != expected_count * sizeof(double))
        throw IoError(path.string() + ": expected " + std::to_string(expected_count) +
                      " float64 values (" + std::to_string(expected_count * sizeof(double)) +
                      " bytes), file has " + std::to_string(bytes) + " bytes");
    f.seekg(0);
    std::vector<double> out(expected_count);
    if constexpr (std::endian::native == std::endian::little) {
        f.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(bytes));
    } else {
        std::vector<unsigned char> buf(bytes);
        f.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(bytes));
        for (std::size_t i = 0; i < expected_count; ++i) {
            std::uint64_t u = 0;
            for (int b = 0; b < 8; ++b) u |= std::uint64_t(buf[i * 8 + b]) << (8 * b);
            out[i] = std::bit_cast<double>(u);
        }
    }
    if (!f) throw IoError("read failed: " + path.string());
    return out;
}

/// Writes any real tensor as a float64 blob (row-major, shape tracked by the
/// caller's manifest).
template <typename T>
void write_tensor_f64(const std::filesystem::path& path, const Tensor<T>& t) {
    static_assert(!is_complex_v<T>);
    if constexpr (std::is_same_v<T, double>) {
        write_f64_blob(path, t.data(), t.size());
    } else {
        std::vector<double> tmp(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) tmp[i] = double(t.data()[i]);
        write_f64_blob(path, tmp.data(), tmp.size());
    }
}

template <typename T>
Tensor<T> read_tensor_f64(const std::filesystem::path& path, const Shape& shape) {
    static_assert(!is_complex_v<T>);
    Tensor<T> t(shape);
    auto raw = read_f64_blob(path, t.size());
    for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = static_cast<T>(raw[i]);
    return t;
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open: " + path.string());
    try {
        return nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

inline void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path.string());
    f << j.dump(2) << '\n';
    if (!f) throw IoError("write failed: " + path.string());
}

}  // namespace lpfno::io
