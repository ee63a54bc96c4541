#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "lpfno/core/errors.hpp"
#include "lpfno/core/fft.hpp"
#include "lpfno/core/tensor.hpp"
#include "lpfno/data/grid.hpp"

// Five-point finite-difference solver for -lap(u) = f on the unit square,
// u = g on the left edge (corners included), u = 0 on the other three edges.
//
// Direct path: a type-I sine transform along y diagonalizes the vertical part
// of the stencil, leaving one symmetric tridiagonal solve along x per mode
// (Thomas algorithm), O(n^2 log n) for the grid sizes whose odd extension is a
// power of two and O(n^3)-ish otherwise, all in float64. A matrix-free
// conjugate-gradient path exists as a fallback and as an independent
// cross-check; it is the one that can legitimately fail, so it is the one
// carrying the non-convergence error.

namespace lpfno::data {

inline constexpr double kResidualTol = 1e-10;

struct SolveOptions {
    bool use_cg = false;
    double cg_tol = 1e-12;
    std::size_t cg_iter_cap = 0;  // 0 means the default cap of 10*n^2
};

namespace detail {

/// RHS of the interior system, source plus boundary data folded in:
/// b[jj][ii] = f + [ii == 0] * g[jj+1] / h^2, interior indices 0-based.
inline Tensor<double> interior_rhs(const Tensor<double>& g, double f, const GridSpec& grid) {
    const std::size_t m = grid.n - 2;
    const double inv_h2 = 1.0 / (grid.h() * grid.h());
    Tensor<double> b(Shape{m, m}, f);
    for (std::size_t jj = 0; jj < m; ++jj) b(jj, 0) += g(jj + 1) * inv_h2;
    return b;
}

/// Embeds the interior solution into the full grid with its boundary values.
inline Tensor<double> embed(const Tensor<double>& interior, const Tensor<double>& g,
                            const GridSpec& grid) {
    const std::size_t n = grid.n;
    Tensor<double> u(Shape{n, n});
    for (std::size_t j = 0; j < n; ++j) u(j, 0) = g(j);
    for (std::size_t jj = 0; jj + 2 < n; ++jj)
        for (std::size_t ii = 0; ii + 2 < n; ++ii) u(jj + 1, ii + 1) = interior(jj, ii);
    return u;
}

inline Tensor<double> solve_interior_direct(const Tensor<double>& b, const GridSpec& grid) {
    const std::size_t m = grid.n - 2;
    const double h2 = grid.h() * grid.h();
    const std::size_t L = grid.n - 1;  // sine basis period divisor

    // analysis along y, column by column
    Tensor<double> bh(Shape{m, m});
    std::vector<double> col(m), tr(m);
    for (std::size_t ii = 0; ii < m; ++ii) {
        for (std::size_t jj = 0; jj < m; ++jj) col[jj] = b(jj, ii);
        fft::dst1(col.data(), tr.data(), m);
        for (std::size_t jj = 0; jj < m; ++jj) bh(jj, ii) = tr[jj];
    }

    // per-mode tridiagonal solve along x
    Tensor<double> uh(Shape{m, m});
    std::vector<double> cp(m), rp(m);
    for (std::size_t mm = 0; mm < m; ++mm) {
        const double s = std::sin(std::numbers::pi * double(mm + 1) / (2.0 * double(L)));
        const double diag = 2.0 + 4.0 * s * s;
        cp[0] = -1.0 / diag;
        rp[0] = h2 * bh(mm, 0) / diag;
        for (std::size_t i = 1; i < m; ++i) {
            const double denom = diag + cp[i - 1];
            cp[i] = -1.0 / denom;
            rp[i] = (h2 * bh(mm, i) + rp[i - 1]) / denom;
        }
        uh(mm, m - 1) = rp[m - 1];
        for (std::size_t i = m - 1; i-- > 0;) uh(mm, i) = rp[i] - cp[i] * uh(mm, i + 1);
    }

    // synthesis along y
    Tensor<double> u(Shape{m, m});
    const double scale = 2.0 / double(L);
    for (std::size_t ii = 0; ii < m; ++ii) {
        for (std::size_t mm = 0; mm < m; ++mm) col[mm] = uh(mm, ii);
        fft::dst1(col.data(), tr.data(), m);
        for (std::size_t jj = 0; jj < m; ++jj) u(jj, ii) = scale * tr[jj];
    }
    return u;
}

/// y = (stencil) x on the interior lattice, zero Dirichlet halo.
inline void apply_stencil(const Tensor<double>& x, Tensor<double>& y, std::size_t m) {
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t i = 0; i < m; ++i) {
            double acc = 4.0 * x(j, i);
            if (j > 0) acc -= x(j - 1, i);
            if (j + 1 < m) acc -= x(j + 1, i);
            if (i > 0) acc -= x(j, i - 1);
            if (i + 1 < m) acc -= x(j, i + 1);
            y(j, i) = acc;
        }
}

inline Tensor<double> solve_interior_cg(const Tensor<double>& b, const GridSpec& grid,
                                        const SolveOptions& opts) {
    const std::size_t m = grid.n - 2;
    const double h2 = grid.h() * grid.h();
    const std::size_t cap = opts.cg_iter_cap ? opts.cg_iter_cap : 10 * grid.n * grid.n;

    Tensor<double> rhs = h2 * b;
    const double nb = std::sqrt(sum_abs2(rhs));
    Tensor<double> x(Shape{m, m});
    if (nb == 0.0) return x;
    Tensor<double> r = rhs, p = rhs, ap(Shape{m, m});
    double rs = sum_abs2(r);
    double achieved = 1.0;
    for (std::size_t it = 0; it < cap; ++it) {
        apply_stencil(p, ap, m);
        double p_ap = 0;
        for (std::size_t k = 0; k < p.size(); ++k) p_ap += p[k] * ap[k];
        const double alpha = rs / p_ap;
        for (std::size_t k = 0; k < x.size(); ++k) {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        const double rs_new = sum_abs2(r);
        achieved = std::sqrt(rs_new) / nb;
        if (achieved <= opts.cg_tol) return x;
        const double beta = rs_new / rs;
        rs = rs_new;
        for (std::size_t k = 0; k < p.size(); ++k) p[k] = r[k] + beta * p[k];
    }
    throw NumericalError("conjugate gradient did not converge within " + std::to_string(cap) +
                         " iterations, residual " + std::to_string(achieved));
}

}  // namespace detail

inline Tensor<double> solve_dirichlet(const Tensor<double>& g, double f, const GridSpec& grid,
                                      const SolveOptions& opts = {}) {
    grid.validate();
    if (g.shape() != Shape{grid.n})
        throw InvalidArgument("boundary vector shape " + shape_str(g.shape()) +
                              " does not match grid n=" + std::to_string(grid.n));
    if (!g.all_finite()) throw InvalidArgument("boundary values are not finite");
    const Tensor<double> b = detail::interior_rhs(g, f, grid);
    const Tensor<double> interior =
        opts.use_cg ? detail::solve_interior_cg(b, grid, opts) : detail::solve_interior_direct(b, grid);
    return detail::embed(interior, g, grid);
}

/// Relative euclidean residual of the stored field over the interior
/// equations: the 5-point stencil applied to u (boundary entries read from u
/// itself) minus the source, normalized by the assembled RHS norm. Absolute
/// norm when that RHS vanishes.
inline double relative_residual(const Tensor<double>& u, const Tensor<double>& g, double f,
                                const GridSpec& grid) {
    grid.validate();
    const std::size_t n = grid.n;
    const double inv_h2 = 1.0 / (grid.h() * grid.h());
    double rr = 0, bb = 0;
    for (std::size_t j = 1; j + 1 < n; ++j)
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double au =
                (4.0 * u(j, i) - u(j - 1, i) - u(j + 1, i) - u(j, i - 1) - u(j, i + 1)) * inv_h2;
            const double b = f + (i == 1 ? g(j) * inv_h2 : 0.0);
            rr += (au - f) * (au - f);
            bb += b * b;
        }
    const double num = std::sqrt(rr);
    const double den = std::sqrt(bb);
    return den == 0.0 ? num : num / den;
}

}  // namespace lpfno::data
