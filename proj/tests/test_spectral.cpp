#include <catch2/catch_amalgamated.hpp>

#include <complex>

#include "lpfno/autodiff/gradcheck.hpp"
#include "lpfno/autodiff/ops.hpp"
#include "lpfno/autodiff/spectral.hpp"
#include "lpfno/core/fft.hpp"
#include "lpfno/core/rng.hpp"
#include "oracles.hpp"

using namespace lpfno;
using namespace lpfno::autodiff;
using cd = std::complex<double>;

namespace {

Tensor<double> random_tensor(const Shape& s, Rng& rng) {
    Tensor<double> t(s);
    for (auto& v : t.flat()) v = rng.uniform(-1.0, 1.0);
    return t;
}

/// Identity mode-mixing weights: w[m][c][o] = delta_co for every mode.
std::pair<Tensor<double>, Tensor<double>> identity_weights_1d(std::size_t k, std::size_t c) {
    Tensor<double> re(Shape{k, c, c}), im(Shape{k, c, c});
    for (std::size_t m = 0; m < k; ++m)
        for (std::size_t i = 0; i < c; ++i) re(m, i, i) = 1.0;
    return {re, im};
}

std::pair<Tensor<double>, Tensor<double>> identity_weights_2d(std::size_t k, std::size_t c) {
    Tensor<double> re(Shape{2, k, k, c, c}), im(Shape{2, k, k, c, c});
    for (std::size_t t = 0; t < 2; ++t)
        for (std::size_t r = 0; r < k; ++r)
            for (std::size_t m = 0; m < k; ++m)
                for (std::size_t i = 0; i < c; ++i) re(t, r, m, i, i) = 1.0;
    return {re, im};
}

/// Random signal with spectral support strictly below mode k.
Tensor<double> band_limited_batch(std::size_t B, std::size_t N, std::size_t C, std::size_t k,
                                  Rng& rng) {
    Tensor<double> out(Shape{B, N, C});
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t c = 0; c < C; ++c) {
            std::vector<cd> bins(N / 2 + 1, cd(0, 0));
            bins[0] = cd(rng.uniform(-1.0, 1.0), 0.0);
            for (std::size_t m = 1; m < k; ++m)
                bins[m] = cd(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
            auto line = oracle::irdft(bins, N);
            for (std::size_t j = 0; j < N; ++j) out(b, j, c) = line[j];
        }
    return out;
}

std::vector<cd> to_complex_weights(const Tensor<double>& re, const Tensor<double>& im) {
    std::vector<cd> w(re.size());
    for (std::size_t i = 0; i < re.size(); ++i) w[i] = cd(re[i], im[i]);
    return w;
}

}  // namespace

TEST_CASE("identity weights pass a band-limited signal through unchanged") {
    Rng rng(41);
    const std::size_t N = 16, k = 5, C = 2;
    auto x = band_limited_batch(2, N, C, k, rng);
    auto [re, im] = identity_weights_1d(k, C);
    auto y = spectral_conv_1d(constant(x), constant(re), constant(im));
    REQUIRE(max_abs_diff(y.value(), x) <= 1e-10);
}

TEST_CASE("a single identity mode passes a constant through") {
    const std::size_t N = 12, C = 3;
    Tensor<double> x(Shape{1, N, C});
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t j = 0; j < N; ++j) x(0, j, c) = 0.25 * double(c + 1);
    auto [re, im] = identity_weights_1d(1, C);
    auto y = spectral_conv_1d(constant(x), constant(re), constant(im));
    REQUIRE(max_abs_diff(y.value(), x) <= 1e-12);
}

TEST_CASE("matches the direct-transform reference") {
    Rng rng(42);
    const std::size_t B = 2, N = 16, k = 5, cin = 3, cout = 3;
    auto x = random_tensor(Shape{B, N, cin}, rng);
    auto re = random_tensor(Shape{k, cin, cout}, rng);
    auto im = random_tensor(Shape{k, cin, cout}, rng);
    auto y = spectral_conv_1d(constant(x), constant(re), constant(im));
    auto ref = oracle::spectral_conv_1d(x, to_complex_weights(re, im), k, cout);
    REQUIRE(max_abs_diff(y.value(), ref) <= 1e-9);
}

TEST_CASE("reference agreement on a non-power-of-two length with rectangular channels") {
    Rng rng(43);
    const std::size_t B = 1, N = 12, k = 4, cin = 2, cout = 3;
    auto x = random_tensor(Shape{B, N, cin}, rng);
    auto re = random_tensor(Shape{k, cin, cout}, rng);
    auto im = random_tensor(Shape{k, cin, cout}, rng);
    auto y = spectral_conv_1d(constant(x), constant(re), constant(im));
    auto ref = oracle::spectral_conv_1d(x, to_complex_weights(re, im), k, cout);
    REQUIRE(max_abs_diff(y.value(), ref) <= 1e-9);
}

TEST_CASE("1d gradients against finite differences") {
    Rng rng(44);
    const std::size_t B = 2, N = 8, k = 3, cin = 2, cout = 2;
    Tensor<double> target = random_tensor(Shape{B, N, cout}, rng);
    GradcheckInputs inputs{{"x", random_tensor(Shape{B, N, cin}, rng)},
                           {"re", random_tensor(Shape{k, cin, cout}, rng)},
                           {"im", random_tensor(Shape{k, cin, cout}, rng)}};
    auto f = [&](const std::vector<Var<double>>& v) {
        return mse_loss(spectral_conv_1d(v[0], v[1], v[2]), target);
    };
    auto report = gradcheck(f, inputs);
    INFO("worst " << report.worst_param << " rel " << report.max_rel_err);
    REQUIRE(report.pass(1e-5));
}

TEST_CASE("mode count limits") {
    Rng rng(45);
    auto x = constant(random_tensor(Shape{1, 8, 2}, rng));
    auto re = constant(random_tensor(Shape{6, 2, 2}, rng));
    auto im = constant(random_tensor(Shape{6, 2, 2}, rng));
    // N=8 has 5 half-spectrum modes, k=6 cannot be served
    REQUIRE_THROWS_AS(spectral_conv_1d(x, re, im), InvalidArgument);

    auto re5 = constant(random_tensor(Shape{5, 3, 2}, rng));
    auto im5 = constant(random_tensor(Shape{5, 3, 2}, rng));
    REQUIRE_THROWS_AS(spectral_conv_1d(x, re5, im5), InvalidArgument);  // c_in mismatch
}

TEST_CASE("same 1d weights serve two resolutions of one signal") {
    Rng rng(46);
    const std::size_t N = 16, k = 4, C = 2;
    // periodic low-mode signal sampled at N and 2N
    std::vector<std::vector<cd>> coeff(C, std::vector<cd>(k));
    for (auto& ch : coeff) {
        ch[0] = cd(rng.uniform(-1.0, 1.0), 0.0);
        for (std::size_t m = 1; m < k; ++m)
            ch[m] = cd(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    }
    auto sample_at = [&](std::size_t n) {
        Tensor<double> x(Shape{1, n, C});
        for (std::size_t c = 0; c < C; ++c)
            for (std::size_t j = 0; j < n; ++j) {
                double acc = coeff[c][0].real();
                for (std::size_t m = 1; m < k; ++m) {
                    const double ang = 2.0 * std::numbers::pi * double(m) * double(j) / double(n);
                    acc += 2.0 * (coeff[c][m].real() * std::cos(ang) -
                                  coeff[c][m].imag() * std::sin(ang));
                }
                x(0, j, c) = acc;
            }
        return x;
    };
    auto re = random_tensor(Shape{k, C, C}, rng);
    auto im = random_tensor(Shape{k, C, C}, rng);
    auto y_coarse = spectral_conv_1d(constant(sample_at(N)), constant(re), constant(im));
    auto y_fine = spectral_conv_1d(constant(sample_at(2 * N)), constant(re), constant(im));
    for (std::size_t j = 0; j < N; ++j)
        for (std::size_t c = 0; c < C; ++c)
            REQUIRE(std::abs(y_coarse.value()(0, j, c) - y_fine.value()(0, 2 * j, c)) <= 1e-8);
}

TEST_CASE("2d identity weights on a corner-band-limited field") {
    Rng rng(47);
    const std::size_t ny = 8, nx = 8, k = 2, C = 2;
    // band-limit by round-tripping through the corner mask
    auto x0 = random_tensor(Shape{1, C, ny, nx}, rng);
    auto sp = fft::rfft_2d(x0);
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t r = 0; r < ny; ++r)
            for (std::size_t m = 0; m < nx / 2 + 1; ++m) {
                // the DC column needs conjugate-symmetric row support to stay
                // a real field, so its kept rows are {0} u [1,k) u (ny-k, ny)
                const bool keep_row = m == 0 ? (r < k || ny - r < k) : (r < k || r >= ny - k);
                if (!(keep_row && m < k)) sp(0, c, r, m) = cd(0, 0);
            }
    auto x_planes = fft::irfft_2d(sp, ny, nx);
    Tensor<double> x(Shape{1, ny, nx, C});
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t j = 0; j < ny; ++j)
            for (std::size_t i = 0; i < nx; ++i) x(0, j, i, c) = x_planes(0, c, j, i);

    auto [re, im] = identity_weights_2d(k, C);
    auto y = spectral_conv_2d(constant(x), constant(re), constant(im));
    REQUIRE(max_abs_diff(y.value(), x) <= 1e-10);
}

TEST_CASE("2d reference agreement") {
    Rng rng(48);
    const std::size_t B = 1, ny = 8, nx = 8, k = 3, cin = 2, cout = 2;
    auto x = random_tensor(Shape{B, ny, nx, cin}, rng);
    auto re = random_tensor(Shape{2, k, k, cin, cout}, rng);
    auto im = random_tensor(Shape{2, k, k, cin, cout}, rng);
    auto y = spectral_conv_2d(constant(x), constant(re), constant(im));
    auto ref = oracle::spectral_conv_2d(x, to_complex_weights(re, im), k, cout);
    REQUIRE(max_abs_diff(y.value(), ref) <= 1e-9);
}

TEST_CASE("2d gradients against finite differences") {
    Rng rng(49);
    const std::size_t B = 1, ny = 8, nx = 8, k = 2, cin = 2, cout = 2;
    Tensor<double> target = random_tensor(Shape{B, ny, nx, cout}, rng);
    GradcheckInputs inputs{{"x", random_tensor(Shape{B, ny, nx, cin}, rng)},
                           {"re", random_tensor(Shape{2, k, k, cin, cout}, rng)},
                           {"im", random_tensor(Shape{2, k, k, cin, cout}, rng)}};
    auto f = [&](const std::vector<Var<double>>& v) {
        return mse_loss(spectral_conv_2d(v[0], v[1], v[2]), target);
    };
    auto report = gradcheck(f, inputs);
    INFO("worst " << report.worst_param << " rel " << report.max_rel_err);
    REQUIRE(report.pass(1e-5));
}

TEST_CASE("2d mode count limits") {
    Rng rng(50);
    auto x = constant(random_tensor(Shape{1, 8, 8, 2}, rng));
    auto re = constant(random_tensor(Shape{2, 5, 5, 2, 2}, rng));
    auto im = constant(random_tensor(Shape{2, 5, 5, 2, 2}, rng));
    // row blocks of size 5 overlap on an 8-row grid
    REQUIRE_THROWS_AS(spectral_conv_2d(x, re, im), InvalidArgument);
}

TEST_CASE("same 2d weights serve two resolutions of one field") {
    Rng rng(51);
    const std::size_t N = 8, k = 2, C = 1;
    // periodic field with support inside the corner mask
    struct Mode {
        std::size_t r, m;
        cd a;
    };
    std::vector<Mode> modes;
    for (std::size_t r : {std::size_t(0), std::size_t(1)})
        for (std::size_t m : {std::size_t(0), std::size_t(1)})
            modes.push_back({r, m, cd(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0))});
    auto sample_at = [&](std::size_t n) {
        Tensor<double> x(Shape{1, n, n, C});
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t i = 0; i < n; ++i) {
                double acc = 0;
                for (const auto& md : modes) {
                    const double ang = 2.0 * std::numbers::pi *
                                       (double(md.r) * double(j) + double(md.m) * double(i)) /
                                       double(n);
                    // real field: every mode plus its conjugate pair
                    acc += 2.0 * (md.a.real() * std::cos(ang) - md.a.imag() * std::sin(ang));
                }
                x(0, j, i, 0) = acc;
            }
        return x;
    };
    auto re = random_tensor(Shape{2, k, k, C, C}, rng);
    auto im = random_tensor(Shape{2, k, k, C, C}, rng);
    auto y_c = spectral_conv_2d(constant(sample_at(N)), constant(re), constant(im));
    auto y_f = spectral_conv_2d(constant(sample_at(2 * N)), constant(re), constant(im));
    for (std::size_t j = 0; j < N; ++j)
        for (std::size_t i = 0; i < N; ++i)
            REQUIRE(std::abs(y_c.value()(0, j, i, 0) - y_f.value()(0, 2 * j, 2 * i, 0)) <= 1e-8);
}

TEST_CASE("1d mode clamp matches explicitly sliced weights") {
    // Stored weights hold 6 mode rows; N=8 only offers 5. Mixing with
    // k_use=3 must equal a conv whose weights are literally rows [0, 3).
    Rng rng(660);
    const std::size_t C = 2, N = 8, k_stored = 6, k_use = 3;
    auto h = random_tensor(Shape{2, N, C}, rng);
    auto re = random_tensor(Shape{k_stored, C, C}, rng);
    auto im = random_tensor(Shape{k_stored, C, C}, rng);
    Tensor<double> re_s(Shape{k_use, C, C}), im_s(Shape{k_use, C, C});
    for (std::size_t m = 0; m < k_use; ++m)
        for (std::size_t c = 0; c < C; ++c)
            for (std::size_t o = 0; o < C; ++o) {
                re_s(m, c, o) = re(m, c, o);
                im_s(m, c, o) = im(m, c, o);
            }

    auto clamped = spectral_conv_1d(constant(h), constant(re), constant(im), k_use);
    auto sliced = spectral_conv_1d(constant(h), constant(re_s), constant(im_s));
    REQUIRE(clamped.value() == sliced.value());

    // Unused rows are inert: they receive no gradient. The imaginary
    // weight of the DC bin is inert too, because the DC coefficient of a
    // real signal is purely real.
    auto vre = parameter(re), vim = parameter(im);
    auto y = spectral_conv_1d(constant(h), vre, vim, k_use);
    backward(mse_loss(y, random_tensor(Shape{2, N, C}, rng)));
    for (std::size_t m = 0; m < k_stored; ++m)
        for (std::size_t c = 0; c < C; ++c)
            for (std::size_t o = 0; o < C; ++o) {
                const bool used = m < k_use;
                CHECK((vre.grad()(m, c, o) != 0.0) == used);
                CHECK((vim.grad()(m, c, o) != 0.0) == (used && m != 0));
            }
}

TEST_CASE("1d mode clamp gradients pass finite differences") {
    Rng rng(661);
    const std::size_t C = 2, N = 8, k_stored = 6, k_use = 3;
    GradcheckInputs inputs{{"h", random_tensor(Shape{2, N, C}, rng)},
                           {"re", random_tensor(Shape{k_stored, C, C}, rng)},
                           {"im", random_tensor(Shape{k_stored, C, C}, rng)}};
    auto target = random_tensor(Shape{2, N, C}, rng);
    auto report = gradcheck(
        [&](const std::vector<Var<double>>& p) {
            return mse_loss(spectral_conv_1d(p[0], p[1], p[2], k_use), target);
        },
        inputs);
    INFO(report.worst_param);
    CHECK(report.max_rel_err <= 1e-5);
    CHECK_THROWS_AS(
        spectral_conv_1d(constant(inputs[0].second), constant(inputs[1].second),
                         constant(inputs[2].second), k_stored + 1),
        InvalidArgument);
}

TEST_CASE("2d mode clamp stays aligned with signed frequencies") {
    // With k_use < k the second corner block must read its *last* rows, so
    // each weight keeps its signed y-frequency. Compare against a conv whose
    // smaller weights are sliced that way by hand.
    Rng rng(662);
    const std::size_t C = 2, N = 8, k_stored = 3, k_use = 2;
    auto h = random_tensor(Shape{1, N, N, C}, rng);
    auto re = random_tensor(Shape{2, k_stored, k_stored, C, C}, rng);
    auto im = random_tensor(Shape{2, k_stored, k_stored, C, C}, rng);
    Tensor<double> re_s(Shape{2, k_use, k_use, C, C}), im_s(Shape{2, k_use, k_use, C, C});
    for (std::size_t t = 0; t < 2; ++t)
        for (std::size_t r = 0; r < k_use; ++r) {
            const std::size_t src = t == 0 ? r : k_stored - k_use + r;
            for (std::size_t m = 0; m < k_use; ++m)
                for (std::size_t c = 0; c < C; ++c)
                    for (std::size_t o = 0; o < C; ++o) {
                        re_s(t, r, m, c, o) = re(t, src, m, c, o);
                        im_s(t, r, m, c, o) = im(t, src, m, c, o);
                    }
        }

    auto clamped = spectral_conv_2d(constant(h), constant(re), constant(im), k_use);
    auto sliced = spectral_conv_2d(constant(h), constant(re_s), constant(im_s));
    REQUIRE(clamped.value() == sliced.value());

    auto vre = parameter(re), vim = parameter(im);
    auto y = spectral_conv_2d(constant(h), vre, vim, k_use);
    backward(mse_loss(y, random_tensor(Shape{1, N, N, C}, rng)));
    for (std::size_t t = 0; t < 2; ++t)
        for (std::size_t r = 0; r < k_stored; ++r) {
            const bool used = t == 0 ? r < k_use : r >= k_stored - k_use;
            double norm = 0;
            for (std::size_t m = 0; m < k_use; ++m)
                for (std::size_t c = 0; c < C; ++c)
                    for (std::size_t o = 0; o < C; ++o)
                        norm += vre.grad()(t, r, m, c, o) * vre.grad()(t, r, m, c, o);
            CHECK((norm > 0.0) == used);
        }
}

TEST_CASE("2d mode clamp gradients pass finite differences") {
    Rng rng(663);
    const std::size_t C = 2, N = 8, k_stored = 4, k_use = 2;
    GradcheckInputs inputs{{"h", random_tensor(Shape{1, N, N, C}, rng)},
                           {"re", random_tensor(Shape{2, k_stored, k_stored, C, C}, rng)},
                           {"im", random_tensor(Shape{2, k_stored, k_stored, C, C}, rng)}};
    auto target = random_tensor(Shape{1, N, N, C}, rng);
    auto report = gradcheck(
        [&](const std::vector<Var<double>>& p) {
            return mse_loss(spectral_conv_2d(p[0], p[1], p[2], k_use), target);
        },
        inputs);
    INFO(report.worst_param);
    CHECK(report.max_rel_err <= 1e-5);
}
