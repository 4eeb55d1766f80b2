#pragma once

// Fixed-step internal methods. Each produces one first-column entry T_{j,1}
// from n_j substeps of size h = dt / n_j.

#include <parex/errors.hpp>
#include <parex/linalg.hpp>

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace parex {

/// Row-private buffers; reused across steps so rows do not allocate.
template <class Real>
struct RowWorkspace {
    std::vector<Real> value;  // T_{j,1} on return
    std::vector<Real> u, prev, f, delta;
    LUFactors<Real> lu;  // factors of W = I - h J for the row's h

    void resize(std::size_t d) {
        for (auto* v : {&value, &u, &prev, &f, &delta}) v->resize(d);
    }
};

struct RowCounts {
    int rhs_calls = 0;
    int solves = 0;
};

template <class Real>
struct RowResult {
    std::vector<Real> value;
    int rhs_calls = 0;
    int solves = 0;
};

namespace detail {

template <class Real>
void require_finite_sum(const Real& s) {
    if (!finite(s)) throw NonFiniteState("internal step produced a non-finite state");
}

}  // namespace detail

/// Factors W = I - h J into ws.lu.
template <class Real>
void factor_iteration_matrix(const DenseMatrix<Real>& jac, const Real& h, RowWorkspace<Real>& ws) {
    const std::size_t d = jac.dim();
    auto& w = ws.lu.packed;
    if (w.dim() != d) w = DenseMatrix<Real>(d);
    auto src = jac.values();
    auto dst = w.values();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = -h * src[i];
    for (std::size_t i = 0; i < d; ++i) w(i, i) += Real(1);
    lu_factor_in_place(ws.lu);
}

/// Two-step explicit midpoint rule: u_1 = u_0 + h f(u_0), then
/// u_{m+1} = u_{m-1} + 2h f(u_m). Requires even n >= 2; n rhs calls.
template <class Real, class Rhs>
RowCounts explicit_midpoint_row(const Rhs& rhs, std::span<const Real> u0, std::span<const Real> p, const Real& t,
                                const Real& dt, int n, RowWorkspace<Real>& ws) {
    if (n < 2 || n % 2 != 0) throw ConfigError("explicit midpoint needs an even substep count");
    const std::size_t d = u0.size();
    ws.resize(d);
    const Real h = dt / Real(n);
    const Real h2 = h + h;
    auto& prev = ws.prev;
    auto& cur = ws.u;
    auto& f = ws.f;

    std::copy(u0.begin(), u0.end(), prev.begin());
    rhs(std::span<Real>(f), u0, p, t);
    Real sum(0);
    for (std::size_t i = 0; i < d; ++i) {
        cur[i] = prev[i] + h * f[i];
        sum += cur[i];
    }
    detail::require_finite_sum(sum);

    for (int m = 1; m < n; ++m) {
        rhs(std::span<Real>(f), std::span<const Real>(cur), p, t + Real(m) * h);
        sum = Real(0);
        for (std::size_t i = 0; i < d; ++i) {
            prev[i] += h2 * f[i];
            sum += prev[i];
        }
        detail::require_finite_sum(sum);
        std::swap(prev, cur);
    }
    std::copy(cur.begin(), cur.end(), ws.value.begin());
    return {n, 0};
}

/// Linearly-implicit Euler: u_{m+1} = u_m + W^{-1} h f(u_m) with ws.lu
/// holding W = I - h J. n rhs calls and n solves.
template <class Real, class Rhs>
RowCounts implicit_euler_row(const Rhs& rhs, std::span<const Real> u0, std::span<const Real> p, const Real& t,
                             const Real& dt, int n, RowWorkspace<Real>& ws) {
    if (n < 1) throw ConfigError("implicit Euler needs at least one substep");
    const std::size_t d = u0.size();
    ws.resize(d);
    const Real h = dt / Real(n);
    auto& u = ws.u;
    auto& f = ws.f;
    std::copy(u0.begin(), u0.end(), u.begin());

    for (int m = 0; m < n; ++m) {
        rhs(std::span<Real>(f), std::span<const Real>(u), p, t + Real(m) * h);
        for (std::size_t i = 0; i < d; ++i) f[i] *= h;
        lu_solve_in_place(ws.lu, std::span<Real>(f));
        Real sum(0);
        for (std::size_t i = 0; i < d; ++i) {
            u[i] += f[i];
            sum += u[i];
        }
        detail::require_finite_sum(sum);
    }
    std::copy(u.begin(), u.end(), ws.value.begin());
    return {n, n};
}

/// Linearly-implicit midpoint rule in increment form followed by Gragg
/// smoothing. With D_m = u_m - u_{m-1}:
///   D_1     = W^{-1} h f(u_0)
///   D_{m+1} = D_m + 2 W^{-1} (h f(u_m) - D_m)
/// and T_{j,1} = (u_{n-1} + u_{n+1}) / 2. Runs n + 1 substeps, so n + 1 rhs
/// calls and n + 1 solves. n must be a positive multiple of 4.
template <class Real, class Rhs>
RowCounts implicit_midpoint_smoothed_row(const Rhs& rhs, std::span<const Real> u0, std::span<const Real> p,
                                         const Real& t, const Real& dt, int n, RowWorkspace<Real>& ws) {
    if (n < 4 || n % 4 != 0) throw ConfigError("smoothed implicit midpoint needs a substep count divisible by 4");
    const std::size_t d = u0.size();
    ws.resize(d);
    const Real h = dt / Real(n);
    auto& u = ws.u;
    auto& prev = ws.prev;  // u_{n-1} once reached
    auto& f = ws.f;
    auto& delta = ws.delta;

    rhs(std::span<Real>(f), u0, p, t);
    for (std::size_t i = 0; i < d; ++i) delta[i] = h * f[i];
    lu_solve_in_place(ws.lu, std::span<Real>(delta));
    Real sum(0);
    for (std::size_t i = 0; i < d; ++i) {
        u[i] = u0[i] + delta[i];
        sum += u[i];
    }
    detail::require_finite_sum(sum);

    for (int m = 1; m <= n; ++m) {
        if (m == n - 1) std::copy(u.begin(), u.end(), prev.begin());
        rhs(std::span<Real>(f), std::span<const Real>(u), p, t + Real(m) * h);
        for (std::size_t i = 0; i < d; ++i) f[i] = h * f[i] - delta[i];
        lu_solve_in_place(ws.lu, std::span<Real>(f));
        sum = Real(0);
        for (std::size_t i = 0; i < d; ++i) {
            delta[i] += f[i] + f[i];
            u[i] += delta[i];
            sum += u[i];
        }
        detail::require_finite_sum(sum);
    }
    for (std::size_t i = 0; i < d; ++i) ws.value[i] = (prev[i] + u[i]) / Real(2);
    return {n + 1, n + 1};
}

namespace detail {

template <class Real>
RowResult<Real> to_result(RowWorkspace<Real>& ws, RowCounts c) {
    return {std::move(ws.value), c.rhs_calls, c.solves};
}

}  // namespace detail

// Convenience forms that allocate their own workspace.

template <class Real, class Rhs>
RowResult<Real> explicit_midpoint_row(const Rhs& rhs, std::span<const Real> u0, std::span<const Real> p, const Real& t,
                                      const Real& dt, int n) {
    RowWorkspace<Real> ws;
    auto c = explicit_midpoint_row(rhs, u0, p, t, dt, n, ws);
    return detail::to_result(ws, c);
}

template <class Real, class Rhs>
RowResult<Real> implicit_euler_row(const Rhs& rhs, const LUFactors<Real>& lu_of_w, std::span<const Real> u0,
                                   std::span<const Real> p, const Real& t, const Real& dt, int n) {
    RowWorkspace<Real> ws;
    ws.lu = lu_of_w;
    auto c = implicit_euler_row(rhs, u0, p, t, dt, n, ws);
    return detail::to_result(ws, c);
}

template <class Real, class Rhs>
RowResult<Real> implicit_midpoint_smoothed_row(const Rhs& rhs, const LUFactors<Real>& lu_of_w, std::span<const Real> u0,
                                               std::span<const Real> p, const Real& t, const Real& dt, int n) {
    RowWorkspace<Real> ws;
    ws.lu = lu_of_w;
    auto c = implicit_midpoint_smoothed_row(rhs, u0, p, t, dt, n, ws);
    return detail::to_result(ws, c);
}

}  // namespace parex
