/**
 * @file linsolve.hpp
 * @brief Jacobi-preconditioned conjugate gradients for SPD systems and
 *        diagonally preconditioned MINRES for symmetric indefinite ones.
 *
 * Both solvers stop on the true relative residual ||b - A x|| / ||b||, which is
 * what SolveReport::residual carries.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>

#include "lgnc/error.hpp"
#include "lgnc/sparse.hpp"

namespace lgnc {

inline constexpr double kDefaultSolverTol = 1e-10;

struct SolveReport {
    int iterations = 0;
    double residual = 0.0;
    std::string method;
};

struct SolveResult {
    Vector x;
    SolveReport report;
};

inline double relative_residual(const SparseSymMatrix& a, std::span<const double> x, std::span<const double> b) {
    Vector r(b.size());
    a.multiply(x, r);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
    const double nb = norm2(b);
    return nb > 0.0 ? norm2(r) / nb : norm2(r);
}

namespace detail {

inline Vector residual(const SparseSymMatrix& a, std::span<const double> x, std::span<const double> b) {
    Vector r(b.size());
    a.multiply(x, r);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
    return r;
}

inline void check_sizes(const SparseSymMatrix& a, std::span<const double> b, const std::optional<Vector>& x0,
                        const char* who) {
    if (static_cast<int>(b.size()) != a.n() || (x0 && static_cast<int>(x0->size()) != a.n())) {
        throw InvalidArgument(std::string(who) + ": dimension mismatch");
    }
}

}  // namespace detail

/// Conjugate gradients with Jacobi preconditioner. Throws SolverFailure after
/// 10 n iterations.
inline SolveResult solve_spd(const SparseSymMatrix& a, std::span<const double> b, double tol = kDefaultSolverTol,
                             std::optional<Vector> x0 = std::nullopt) {
    detail::check_sizes(a, b, x0, "solve_spd");
    const int n = a.n();
    SolveResult out;
    out.report.method = "cg-jacobi";
    const double nb = norm2(b);
    if (nb == 0.0) {
        out.x.assign(n, 0.0);
        return out;
    }
    out.x = x0 ? std::move(*x0) : Vector(n, 0.0);
    Vector& x = out.x;
    Vector dinv = a.diagonal();
    for (double& d : dinv) d = d > 0.0 ? 1.0 / d : 1.0;

    Vector r = detail::residual(a, x, b);
    Vector z(n), p(n), q(n);
    const int max_iter = std::max(10 * n, 10);
    int it = 0;
    double rel = norm2(r) / nb;
    while (rel > tol && it < max_iter) {
        for (int i = 0; i < n; ++i) z[i] = dinv[i] * r[i];
        double rz = dot(r, z);
        p = z;
        for (; it < max_iter; ++it) {
            a.multiply(p, q);
            const double pq = dot(p, q);
            if (!(pq > 0.0)) break;
            const double alpha = rz / pq;
            for (int i = 0; i < n; ++i) {
                x[i] += alpha * p[i];
                r[i] -= alpha * q[i];
            }
            if (norm2(r) <= tol * nb) {
                ++it;
                break;
            }
            for (int i = 0; i < n; ++i) z[i] = dinv[i] * r[i];
            const double rz_new = dot(r, z);
            const double beta = rz_new / rz;
            rz = rz_new;
            for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        }
        // restart from the true residual
        r = detail::residual(a, x, b);
        const double new_rel = norm2(r) / nb;
        if (new_rel >= rel && new_rel > tol) {
            rel = new_rel;
            break;
        }
        rel = new_rel;
    }
    out.report.iterations = it;
    out.report.residual = relative_residual(a, x, b);
    if (!(out.report.residual <= tol)) {
        throw SolverFailure("solve_spd: no convergence after " + std::to_string(it) +
                                " iterations (relative residual " + std::to_string(out.report.residual) + ")",
                            it, out.report.residual);
    }
    return out;
}

/// Preconditioned MINRES (Paige & Saunders recurrences). `precond` is a
/// positive diagonal M; M^{-1} is applied. Defaults to |diag A| with zeros
/// replaced by 1.
inline SolveResult solve_sym_indefinite(const SparseSymMatrix& a, std::span<const double> b,
                                        double tol = kDefaultSolverTol, std::optional<Vector> precond = std::nullopt,
                                        std::optional<Vector> x0 = std::nullopt) {
    detail::check_sizes(a, b, x0, "solve_sym_indefinite");
    const int n = a.n();
    SolveResult out;
    out.report.method = "minres-diag";
    const double nb = norm2(b);
    if (nb == 0.0) {
        out.x.assign(n, 0.0);
        return out;
    }
    Vector minv = precond ? std::move(*precond) : a.diagonal();
    if (static_cast<int>(minv.size()) != n) throw InvalidArgument("solve_sym_indefinite: preconditioner size");
    for (double& d : minv) {
        d = std::abs(d);
        d = d > 0.0 ? 1.0 / d : 1.0;
    }
    out.x = x0 ? std::move(*x0) : Vector(n, 0.0);
    Vector& x = out.x;

    const int max_iter = std::max(10 * n, 10);
    const double eps = std::numeric_limits<double>::epsilon();
    int it = 0;
    double rel = relative_residual(a, x, b);
    Vector r1(n), r2(n), y(n), v(n), w(n), w1(n), w2(n);
    while (rel > tol && it < max_iter) {
        r1 = detail::residual(a, x, b);
        for (int i = 0; i < n; ++i) y[i] = minv[i] * r1[i];
        const double beta1 = std::sqrt(dot(r1, y));
        if (!(beta1 > 0.0)) break;
        r2 = r1;
        double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0, phibar = beta1;
        double cs = -1.0, sn = 0.0;
        std::fill(w.begin(), w.end(), 0.0);
        std::fill(w2.begin(), w2.end(), 0.0);
        const double start_rel = rel;
        int next_check = 0;
        for (int k = 1; it < max_iter; ++k) {
            ++it;
            const double s = 1.0 / beta;
            for (int i = 0; i < n; ++i) v[i] = s * y[i];
            a.multiply(v, y);
            if (k >= 2) {
                const double f = beta / oldb;
                for (int i = 0; i < n; ++i) y[i] -= f * r1[i];
            }
            const double alfa = dot(v, y);
            const double f = alfa / beta;
            for (int i = 0; i < n; ++i) y[i] -= f * r2[i];
            std::swap(r1, r2);
            r2 = y;
            for (int i = 0; i < n; ++i) y[i] = minv[i] * r2[i];
            oldb = beta;
            beta = std::sqrt(std::max(dot(r2, y), 0.0));
            const double oldeps = epsln;
            const double delta = cs * dbar + sn * alfa;
            const double gbar = sn * dbar - cs * alfa;
            epsln = sn * beta;
            dbar = -cs * beta;
            const double gamma = std::max(std::hypot(gbar, beta), eps);
            cs = gbar / gamma;
            sn = beta / gamma;
            const double phi = cs * phibar;
            phibar = sn * phibar;
            std::swap(w1, w2);
            std::swap(w2, w);
            for (int i = 0; i < n; ++i) {
                w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) / gamma;
                x[i] += phi * w[i];
            }
            // phibar tracks the M^{-1}-norm residual; confirm with the true one
            if ((phibar <= tol * beta1 && k >= next_check) || beta == 0.0) {
                rel = relative_residual(a, x, b);
                if (rel <= tol) break;
                next_check = k + 10;
                if (phibar <= eps * beta1 || beta == 0.0) break;  // estimate exhausted: restart
            }
        }
        rel = relative_residual(a, x, b);
        if (rel >= start_rel) break;
    }
    out.report.iterations = it;
    out.report.residual = relative_residual(a, x, b);
    if (!(out.report.residual <= tol)) {
        throw SolverFailure("solve_sym_indefinite: no convergence after " + std::to_string(it) +
                                " iterations (relative residual " + std::to_string(out.report.residual) + ")",
                            it, out.report.residual);
    }
    return out;
}

}  // namespace lgnc
