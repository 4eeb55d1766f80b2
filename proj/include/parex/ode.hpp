#pragma once

// Problem, options and solution data model shared by every solver.

#include <parex/errors.hpp>
#include <parex/extrapolation.hpp>
#include <parex/linalg.hpp>

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace parex {

/// du = f(u, p, t). Must be re-entrant: rows call it concurrently.
template <class Real>
using RhsFunction = std::function<void(std::span<Real> du, std::span<const Real> u, std::span<const Real> p, Real t)>;

template <class Real>
using JacobianFunction =
    std::function<void(DenseMatrix<Real>& jac, std::span<const Real> u, std::span<const Real> p, Real t)>;

template <class Real>
struct ODEProblem {
    RhsFunction<Real> rhs;
    JacobianFunction<Real> jacobian;  // empty: finite differences
    std::vector<Real> u0;
    Real t0 = Real(0);
    Real tf = Real(1);
    std::vector<Real> params;

    [[nodiscard]] std::size_t dim() const noexcept { return u0.size(); }
    [[nodiscard]] bool has_jacobian() const noexcept { return static_cast<bool>(jacobian); }
};

template <class Real>
struct Tolerances {
    Real abstol = Real(1e-8);
    Real reltol = Real(1e-6);
};

enum class Family {
    midpoint_deuflhard,
    midpoint_hairer_wanner,
    implicit_euler,
    implicit_euler_barycentric,
    implicit_hairer_wanner,
};

inline constexpr Family all_families[] = {Family::midpoint_deuflhard, Family::midpoint_hairer_wanner,
                                          Family::implicit_euler, Family::implicit_euler_barycentric,
                                          Family::implicit_hairer_wanner};

inline constexpr Family implicit_families[] = {Family::implicit_euler, Family::implicit_euler_barycentric,
                                               Family::implicit_hairer_wanner};

inline std::string_view to_string(Family f) {
    switch (f) {
        case Family::midpoint_deuflhard:
            return "midpoint_deuflhard";
        case Family::midpoint_hairer_wanner:
            return "midpoint_hairer_wanner";
        case Family::implicit_euler:
            return "implicit_euler";
        case Family::implicit_euler_barycentric:
            return "implicit_euler_barycentric";
        case Family::implicit_hairer_wanner:
            return "implicit_hairer_wanner";
    }
    return "?";
}

inline Family parse_family(std::string_view s) {
    for (Family f : all_families)
        if (to_string(f) == s) return f;
    throw ConfigError("unknown algorithm '" + std::string(s) + "'");
}

inline bool is_explicit(Family f) { return f == Family::midpoint_deuflhard || f == Family::midpoint_hairer_wanner; }

/// Step-size controller and order-window settings. Orders count T-table rows.
struct SolverOptions {
    int min_order = 2;
    int init_order = 5;
    int max_order = 10;
    SequenceKind sequence = SequenceKind::harmonic;
    std::optional<bool> threading;  // unset: on when rows >= 4 and dim >= 10
    int num_workers = 1;
    double gamma = 0.9;
    double q_min = 0.2;
    double q_max = 10.0;
    std::optional<double> dt_init;  // default 1e-6 * (tf - t0)
    std::size_t max_steps = 100000;
    bool save_everystep = true;
};

enum class RetCode { success, max_steps_exceeded, step_underflow, singular_failure };

inline std::string_view to_string(RetCode r) {
    switch (r) {
        case RetCode::success:
            return "success";
        case RetCode::max_steps_exceeded:
            return "max_steps_exceeded";
        case RetCode::step_underflow:
            return "step_underflow";
        case RetCode::singular_failure:
            return "singular_failure";
    }
    return "?";
}

struct Stats {
    std::size_t nf = 0;      // rhs evaluations, including finite-difference Jacobian calls
    std::size_t njac = 0;    // Jacobian evaluations
    std::size_t nlu = 0;     // LU factorizations
    std::size_t nsolve = 0;  // forward/backward substitution pairs
    std::size_t naccept = 0;
    std::size_t nreject = 0;

    friend bool operator==(const Stats&, const Stats&) = default;
};

/// One attempted outer step.
template <class Real>
struct StepRecord {
    Real t;
    Real dt;
    int order;          // current order k of the attempt
    int rows_computed;  // rows 1..rows_computed were evaluated
    bool accepted;
};

template <class Real>
struct Solution {
    std::vector<Real> ts;
    std::vector<std::vector<Real>> us;
    Stats stats;
    RetCode retcode = RetCode::success;
    std::vector<StepRecord<Real>> trace;

    [[nodiscard]] bool ok() const noexcept { return retcode == RetCode::success; }
};

/// Throws ConfigError describing the first inconsistency found.
template <class Real>
void validate(const ODEProblem<Real>& problem, const SolverOptions& opts, const Tolerances<Real>& tol, Family family) {
    using std::isfinite;
    if (!problem.rhs) throw ConfigError("problem has no right-hand side");
    if (problem.u0.empty()) throw ConfigError("initial state is empty");
    if (!detail::all_finite<Real>(problem.u0)) throw ConfigError("initial state has non-finite entries");
    if (!detail::finite(problem.t0) || !detail::finite(problem.tf) || !(problem.tf > problem.t0))
        throw ConfigError("time span must satisfy t0 < tf");
    if (!(tol.abstol > Real(0)) || !(tol.reltol > Real(0)) || !detail::finite(tol.abstol) ||
        !detail::finite(tol.reltol))
        throw ConfigError("tolerances must be positive and finite");
    if (opts.min_order < 2) throw ConfigError("min_order must be at least 2 (the error estimate needs two rows)");
    if (!(opts.min_order <= opts.init_order && opts.init_order <= opts.max_order))
        throw ConfigError("order window must satisfy min_order <= init_order <= max_order");
    if (is_explicit(family) && opts.max_order > 15)
        throw ConfigError("explicit midpoint families are limited to max_order <= 15");
    if (opts.num_workers < 1) throw ConfigError("num_workers must be positive");
    if (!(opts.gamma > 0.0 && opts.gamma < 1.0)) throw ConfigError("safety factor gamma must lie in (0, 1)");
    if (!(opts.q_min > 0.0 && opts.q_min < 1.0 && opts.q_max > 1.0 && std::isfinite(opts.q_max)))
        throw ConfigError("step clamps must satisfy 0 < q_min < 1 < q_max");
    if (opts.dt_init && !(*opts.dt_init > 0.0 && std::isfinite(*opts.dt_init)))
        throw ConfigError("dt_init must be positive");
    if (opts.max_steps == 0) throw ConfigError("max_steps must be positive");
}

}  // namespace parex
