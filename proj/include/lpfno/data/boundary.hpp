#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "json.hpp"
#include "lpfno/core/errors.hpp"
#include "lpfno/core/rng.hpp"
#include "lpfno/core/tensor.hpp"
#include "lpfno/data/grid.hpp"

// Boundary-condition families for the left edge of the unit square. A sample
// is a low-dimensional parameter vector; the in-distribution box is fixed
// here, and the out-of-distribution split widens every interval by 50% of its
// width (split evenly between the two sides), enlarges the wavenumber pool to
// {1..5}, and rejection-samples until the vector leaves the ID box, so the two
// splits are disjoint in parameter space. The polynomial family only exists
// out-of-distribution; no model ever trains on it.

namespace lpfno::data {

enum class BoundaryFamily { Gaussian, Sinusoidal, Polynomial };
enum class Split { ID, OOD };

inline std::string family_name(BoundaryFamily f) {
    switch (f) {
        case BoundaryFamily::Gaussian: return "gaussian";
        case BoundaryFamily::Sinusoidal: return "sinusoidal";
        case BoundaryFamily::Polynomial: return "polynomial";
    }
    throw InvalidArgument("bad family tag");
}

inline BoundaryFamily family_from_name(const std::string& s) {
    if (s == "gaussian") return BoundaryFamily::Gaussian;
    if (s == "sinusoidal") return BoundaryFamily::Sinusoidal;
    if (s == "polynomial") return BoundaryFamily::Polynomial;
    throw InvalidArgument("unknown boundary family '" + s + "'");
}

inline std::string split_name(Split s) { return s == Split::ID ? "id" : "ood"; }

inline Split split_from_name(const std::string& s) {
    if (s == "id") return Split::ID;
    if (s == "ood") return Split::OOD;
    throw InvalidArgument("unknown split '" + s + "'");
}

struct Interval {
    double lo = 0, hi = 0;
    double width() const { return hi - lo; }
    bool contains(double v) const { return v >= lo && v <= hi; }
    /// Same center, width grown by the given fraction.
    Interval widened(double fraction) const {
        const double pad = 0.5 * fraction * width();
        return {lo - pad, hi + pad};
    }
};

namespace id_box {
inline constexpr Interval gaussian_amp{0.5, 1.5};
inline constexpr Interval gaussian_center{0.3, 0.7};
inline constexpr Interval gaussian_width{0.05, 0.15};
inline constexpr Interval sin_amp{0.5, 1.5};
inline constexpr Interval sin_phase{0.0, std::numbers::pi};
inline constexpr int sin_k_max = 3;
inline constexpr double ood_widen = 0.5;
inline constexpr int sin_k_max_ood = 5;
inline constexpr Interval poly_coeff{-1.0, 1.0};
}  // namespace id_box

struct BoundaryParams {
    BoundaryFamily family = BoundaryFamily::Gaussian;
    double amplitude = 1.0;  // gaussian, sinusoidal
    double center = 0.5;     // gaussian
    double width = 0.1;      // gaussian
    int wavenumber = 1;      // sinusoidal
    double phase = 0.0;      // sinusoidal
    std::array<double, 5> coeffs{};  // polynomial, c0..c4

    bool operator==(const BoundaryParams&) const = default;

    void validate() const {
        if (family == BoundaryFamily::Gaussian && !(width > 0))
            throw InvalidArgument("gaussian boundary needs width > 0");
        if (family == BoundaryFamily::Sinusoidal && wavenumber < 1)
            throw InvalidArgument("sinusoidal boundary needs wavenumber >= 1");
    }

    double operator()(double y) const {
        switch (family) {
            case BoundaryFamily::Gaussian: {
                const double d = y - center;
                return amplitude * std::exp(-d * d / (2.0 * width * width));
            }
            case BoundaryFamily::Sinusoidal:
                return amplitude * std::sin(std::numbers::pi * double(wavenumber) * y + phase);
            case BoundaryFamily::Polynomial: {
                double acc = 0;
                for (std::size_t d = coeffs.size(); d-- > 0;) acc = acc * y + coeffs[d];
                return acc;
            }
        }
        throw InvalidArgument("bad family tag");
    }

    nlohmann::json to_json() const {
        nlohmann::json j{{"family", family_name(family)}};
        switch (family) {
            case BoundaryFamily::Gaussian:
                j["amplitude"] = amplitude;
                j["center"] = center;
                j["width"] = width;
                break;
            case BoundaryFamily::Sinusoidal:
                j["amplitude"] = amplitude;
                j["wavenumber"] = wavenumber;
                j["phase"] = phase;
                break;
            case BoundaryFamily::Polynomial:
                j["coeffs"] = coeffs;
                break;
        }
        return j;
    }

    static BoundaryParams from_json(const nlohmann::json& j) {
        BoundaryParams p;
        p.family = family_from_name(j.at("family").get<std::string>());
        switch (p.family) {
            case BoundaryFamily::Gaussian:
                p.amplitude = j.at("amplitude").get<double>();
                p.center = j.at("center").get<double>();
                p.width = j.at("width").get<double>();
                break;
            case BoundaryFamily::Sinusoidal:
                p.amplitude = j.at("amplitude").get<double>();
                p.wavenumber = j.at("wavenumber").get<int>();
                p.phase = j.at("phase").get<double>();
                break;
            case BoundaryFamily::Polynomial:
                p.coeffs = j.at("coeffs").get<std::array<double, 5>>();
                break;
        }
        p.validate();
        return p;
    }
};

/// Draws a parameter vector for the requested family and split. Draw order is
/// part of the on-disk reproducibility contract: amplitude, center, width for
/// gaussians; amplitude, wavenumber, phase for sinusoids; c0..c4 for
/// polynomials. OOD vectors are redrawn until outside the ID box.
inline BoundaryParams sample_params(BoundaryFamily fam, Split split, Rng& rng) {
    using namespace id_box;
    BoundaryParams p;
    p.family = fam;
    switch (fam) {
        case BoundaryFamily::Gaussian: {
            const Interval ia = split == Split::ID ? gaussian_amp : gaussian_amp.widened(ood_widen);
            const Interval ic =
                split == Split::ID ? gaussian_center : gaussian_center.widened(ood_widen);
            const Interval iw =
                split == Split::ID ? gaussian_width : gaussian_width.widened(ood_widen);
            do {
                p.amplitude = rng.uniform(ia.lo, ia.hi);
                p.center = rng.uniform(ic.lo, ic.hi);
                p.width = rng.uniform(iw.lo, iw.hi);
            } while (split == Split::OOD && gaussian_amp.contains(p.amplitude) &&
                     gaussian_center.contains(p.center) && gaussian_width.contains(p.width));
            break;
        }
        case BoundaryFamily::Sinusoidal: {
            const Interval ia = split == Split::ID ? sin_amp : sin_amp.widened(ood_widen);
            const Interval ip = split == Split::ID ? sin_phase : sin_phase.widened(ood_widen);
            const int kmax = split == Split::ID ? sin_k_max : sin_k_max_ood;
            do {
                p.amplitude = rng.uniform(ia.lo, ia.hi);
                p.wavenumber = 1 + int(rng.uniform_int(std::uint64_t(kmax)));
                p.phase = rng.uniform(ip.lo, ip.hi);
            } while (split == Split::OOD && sin_amp.contains(p.amplitude) &&
                     p.wavenumber <= sin_k_max && sin_phase.contains(p.phase));
            break;
        }
        case BoundaryFamily::Polynomial: {
            if (split == Split::ID)
                throw InvalidArgument("polynomial boundaries are out-of-distribution only");
            for (auto& c : p.coeffs) c = rng.uniform(poly_coeff.lo, poly_coeff.hi);
            break;
        }
    }
    p.validate();
    return p;
}

/// Records the concrete numeric ranges a split draws from, for manifests.
inline nlohmann::json ranges_json(Split split) {
    using namespace id_box;
    auto iv = [&](Interval i) {
        if (split == Split::OOD) i = i.widened(ood_widen);
        return nlohmann::json{i.lo, i.hi};
    };
    nlohmann::json j;
    j["gaussian"] = {{"amplitude", iv(gaussian_amp)},
                     {"center", iv(gaussian_center)},
                     {"width", iv(gaussian_width)}};
    j["sinusoidal"] = {{"amplitude", iv(sin_amp)},
                       {"wavenumber", {1, split == Split::ID ? sin_k_max : sin_k_max_ood}},
                       {"phase", iv(sin_phase)}};
    if (split == Split::OOD)
        j["polynomial"] = {{"coeffs", nlohmann::json{poly_coeff.lo, poly_coeff.hi}}};
    return j;
}

/// g evaluated at the n left-edge nodes y_j = j*h.
inline Tensor<double> discretize(const BoundaryParams& p, const GridSpec& grid) {
    grid.validate();
    p.validate();
    Tensor<double> g(Shape{grid.n});
    const double h = grid.h();
    for (std::size_t j = 0; j < grid.n; ++j) g(j) = p(double(j) * h);
    if (!g.all_finite()) throw InvalidArgument("boundary values are not finite");
    return g;
}

}  // namespace lpfno::data
