#pragma once

// Adaptive and fixed-step extrapolation solvers.
//
// Each outer step of size dt computes the first T-table column T_{j,1},
// j = 1..k, with one of the internal steppers (rows run concurrently on the
// static schedule), extrapolates to T_{k,k} and lets the controller pick the
// next order and step size.

#include <parex/controller.hpp>
#include <parex/extrapolation.hpp>
#include <parex/linalg.hpp>
#include <parex/ode.hpp>
#include <parex/scheduler.hpp>
#include <parex/steppers.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace parex {

enum class Extrapolator { aitken_neville, barycentric };

/// Fixed bindings of an algorithm family.
struct Algorithm {
    Family family;
    StepperKind stepper;
    Extrapolator extrapolator;
    int power;     // exponent of h in the error expansion
    int multiple;  // sequence multiple
};

inline Algorithm algorithm(Family f) {
    switch (f) {
        case Family::midpoint_deuflhard:
        case Family::midpoint_hairer_wanner:
            return {f, StepperKind::explicit_midpoint, Extrapolator::barycentric, 2, 2};
        case Family::implicit_euler:
            return {f, StepperKind::implicit_euler, Extrapolator::aitken_neville, 1, 1};
        case Family::implicit_euler_barycentric:
            return {f, StepperKind::implicit_euler, Extrapolator::barycentric, 1, 1};
        case Family::implicit_hairer_wanner:
            return {f, StepperKind::implicit_midpoint_smoothed, Extrapolator::barycentric, 2, 4};
    }
    throw ConfigError("unknown family");
}

inline bool is_implicit(const Algorithm& a) { return a.stepper != StepperKind::explicit_midpoint; }

namespace detail {

/// Per-solve state: sequence, tableau, work model, row buffers and the pool.
template <class Real>
class StepEngine {
public:
    StepEngine(const ODEProblem<Real>& problem, Family family, SequenceKind seq, int max_order, int num_workers,
               bool want_pool)
        : problem_(problem), alg_(algorithm(family)), d_(problem.dim()) {
        const auto max_rows = static_cast<std::size_t>(max_order);
        n_ = sequence_values({seq, alg_.multiple}, max_rows + 1);
        if (alg_.extrapolator == Extrapolator::barycentric)
            tableau_ = BarycentricTableau<Real>(n_, alg_.power, max_rows);
        work_ = WorkModel(alg_.stepper, n_, max_rows, WorkWeights::for_dimension(d_));
        workspaces_.resize(max_rows);
        column_.assign(max_rows, std::vector<Real>(d_));
        for (auto& ws : workspaces_) ws.resize(d_);
        schedules_.resize(max_rows + 1);
        if (want_pool && num_workers > 1) pool_ = std::make_unique<WorkerPool>(static_cast<std::size_t>(num_workers));
    }

    [[nodiscard]] const Algorithm& alg() const noexcept { return alg_; }
    [[nodiscard]] const WorkModel& work() const noexcept { return work_; }
    [[nodiscard]] std::span<const int> n() const noexcept { return n_; }
    [[nodiscard]] WorkerPool* pool() const noexcept { return pool_.get(); }

    /// Evaluates the Jacobian at (u, t) for the implicit steppers.
    void update_jacobian(std::span<const Real> u, const Real& t, Stats& stats) {
        if (!is_implicit(alg_)) return;
        if (jac_.dim() != d_) jac_ = DenseMatrix<Real>(d_);
        if (problem_.has_jacobian()) {
            problem_.jacobian(jac_, u, problem_.params, t);
        } else {
            finite_diff_jacobian(jac_, problem_.rhs, u, std::span<const Real>(problem_.params), t);
            stats.nf += d_ + 1;
        }
        ++stats.njac;
        for (const Real& v : jac_.values())
            if (!finite(v)) throw NonFiniteRHS("Jacobian has non-finite entries");
    }

    /// Computes rows [first, last) for a step of size dt from (u, t). Row
    /// results land in column(j); counters are added to stats.
    void compute_rows(std::size_t first, std::size_t last, std::span<const Real> u, const Real& t, const Real& dt,
                      bool threaded, Stats& stats) {
        auto task = [&](std::size_t local) -> RowCounts {
            const std::size_t j = first + local;
            auto& ws = workspaces_[j];
            const int nj = n_[j];
            const std::span<const Real> p(problem_.params);
            RowCounts c;
            switch (alg_.stepper) {
                case StepperKind::explicit_midpoint:
                    c = explicit_midpoint_row(problem_.rhs, u, p, t, dt, nj, ws);
                    break;
                case StepperKind::implicit_euler:
                    factor_iteration_matrix(jac_, dt / Real(nj), ws);
                    c = implicit_euler_row(problem_.rhs, u, p, t, dt, nj, ws);
                    break;
                case StepperKind::implicit_midpoint_smoothed:
                    factor_iteration_matrix(jac_, dt / Real(nj), ws);
                    c = implicit_midpoint_smoothed_row(problem_.rhs, u, p, t, dt, nj, ws);
                    break;
            }
            std::swap(ws.value, column_[j]);
            return c;
        };

        const std::size_t count = last - first;
        std::vector<RowCounts> counts;
        if (threaded && pool_ && count > 1) {
            counts = run_rows<RowCounts>(pool_.get(), schedule_for(first, count), task);
        } else {
            counts.resize(count);
            for (std::size_t i = 0; i < count; ++i) counts[i] = task(i);
        }
        for (const auto& c : counts) {
            stats.nf += static_cast<std::size_t>(c.rhs_calls);
            stats.nsolve += static_cast<std::size_t>(c.solves);
        }
        if (is_implicit(alg_)) stats.nlu += count;
    }

    /// Writes (T_{k,k}, T_{k,k-1}) built from rows 1..k.
    void extrapolate(std::size_t k, std::vector<Real>& t_kk, std::vector<Real>& t_kkm1) const {
        std::span<const std::vector<Real>> col(column_.data(), k);
        if (alg_.extrapolator == Extrapolator::aitken_neville) {
            auto [a, b] = aitken_neville<Real>(col, n_, alg_.power);
            t_kk = std::move(a);
            t_kkm1 = std::move(b);
            return;
        }
        t_kk.resize(d_);
        t_kkm1.resize(d_);
        barycentric_extrapolate(tableau_, k, col, std::span<Real>(t_kk));
        barycentric_extrapolate(tableau_, k > 1 ? k - 1 : 1, col, std::span<Real>(t_kkm1));
    }

private:
    // Rows [first, first + count) with first > 0 only occur for single probes,
    // which never reach the pool, so schedules are cached by count alone.
    const StaticSchedule& schedule_for(std::size_t first, std::size_t count) {
        auto& s = schedules_[count];
        if (!s) {
            std::span<const int> seq(n_.data() + first, count);
            s = build_schedule(seq, count, pool_->size());
        }
        return *s;
    }

    const ODEProblem<Real>& problem_;
    Algorithm alg_;
    std::size_t d_;
    std::vector<int> n_;
    BarycentricTableau<Real> tableau_;
    WorkModel work_;
    DenseMatrix<Real> jac_;
    std::vector<RowWorkspace<Real>> workspaces_;
    std::vector<std::vector<Real>> column_;
    std::vector<std::optional<StaticSchedule>> schedules_;
    std::unique_ptr<WorkerPool> pool_;
};

}  // namespace detail

/// Threads are used for a step when forced on, or by default when the step
/// has at least 4 rows and the system at least 10 equations.
inline bool use_threads(const SolverOptions& opts, std::size_t rows, std::size_t dim) {
    if (opts.threading) return *opts.threading;
    return rows >= 4 && dim >= 10;
}

/// Adaptive-order, adaptive-step integration over problem.tspan.
/// Failures are reported through Solution::retcode; only ConfigError throws.
template <class Real>
Solution<Real> solve(const ODEProblem<Real>& problem, Family family, const SolverOptions& opts,
                     const Tolerances<Real>& tol) {
    using std::abs;
    validate(problem, opts, tol, family);

    const bool may_thread = opts.threading.value_or(true);
    detail::StepEngine<Real> engine(problem, family, opts.sequence, opts.max_order, opts.num_workers, may_thread);
    const Algorithm& alg = engine.alg();
    const std::size_t d = problem.dim();
    const Real eps = std::numeric_limits<Real>::epsilon();

    Solution<Real> sol;
    sol.ts.push_back(problem.t0);
    sol.us.push_back(problem.u0);

    Real t = problem.t0;
    std::vector<Real> u = problem.u0;
    Real h = opts.dt_init ? Real(*opts.dt_init) : Real(1e-6) * (problem.tf - problem.t0);
    int k = opts.init_order;
    bool jacobian_current = false;
    bool last_failure_singular = false;

    std::vector<OrderEstimate<Real>> estimates;
    std::vector<std::vector<Real>> t_kk(3, std::vector<Real>(d)), t_kkm1(3, std::vector<Real>(d));
    std::size_t attempts = 0;

    auto estimate = [&](int order, std::size_t slot, const Real& dt) {
        engine.extrapolate(static_cast<std::size_t>(order), t_kk[slot], t_kkm1[slot]);
        Real err = scaled_error<Real>(t_kk[slot], t_kkm1[slot], t_kk[slot], u, tol);
        if (!detail::finite(err)) err = std::numeric_limits<Real>::infinity();
        Real h_opt = optimal_step(dt, err, extrapolant_order(alg.power, order), opts.gamma, opts.q_min, opts.q_max);
        estimates.push_back({order, err, h_opt});
    };

    while (t < problem.tf) {
        if (attempts >= opts.max_steps) {
            sol.retcode = RetCode::max_steps_exceeded;
            break;
        }
        Real dt = h;
        bool last = false;
        if (t + dt >= problem.tf) {
            dt = problem.tf - t;
            last = true;
        }
        if (!(dt > Real(1e3) * eps * abs(t)) || !(dt > Real(0))) {
            sol.retcode = last_failure_singular ? RetCode::singular_failure : RetCode::step_underflow;
            break;
        }
        ++attempts;

        const bool eager_probe = family == Family::midpoint_deuflhard && k + 1 <= opts.max_order;
        const std::size_t rows = static_cast<std::size_t>(k) + (eager_probe ? 1 : 0);
        StepRecord<Real> rec{t, dt, k, static_cast<int>(rows), false};

        StepDecision<Real> decision;
        try {
            if (!jacobian_current) {
                engine.update_jacobian(u, t, sol.stats);
                jacobian_current = true;
            }
            engine.compute_rows(0, rows, u, t, dt, use_threads(opts, rows, d), sol.stats);

            estimates.clear();
            if (k - 1 >= opts.min_order) estimate(k - 1, 0, dt);
            estimate(k, 1, dt);
            if (eager_probe) estimate(k + 1, 2, dt);

            decision = select_order<Real>(estimates, engine.work(), k, opts.min_order, opts.max_order);
            if (decision.accept && !eager_probe && k + 1 <= opts.max_order && family != Family::midpoint_deuflhard) {
                engine.compute_rows(rows, rows + 1, u, t, dt, false, sol.stats);
                rec.rows_computed += 1;
                estimate(k + 1, 2, dt);
                decision = select_order<Real>(estimates, engine.work(), k, opts.min_order, opts.max_order);
            }
        } catch (const SingularMatrix&) {
            decision = {false, dt / Real(2), k, 0};
            rec.rows_computed = 0;
            last_failure_singular = true;
        } catch (const NonFiniteState&) {
            decision = {false, dt / Real(2), k, 0};
            rec.rows_computed = 0;
            last_failure_singular = false;
        } catch (const NonFiniteRHS&) {
            if (!jacobian_current) {
                // The Jacobian at the last accepted state is unusable; no step size helps.
                sol.retcode = RetCode::singular_failure;
                sol.trace.push_back(rec);
                break;
            }
            decision = {false, dt / Real(2), k, 0};
            rec.rows_computed = 0;
            last_failure_singular = false;
        }

        if (!decision.accept) {
            ++sol.stats.nreject;
            sol.trace.push_back(rec);
            h = std::min<Real>(decision.next_h, dt);
            continue;
        }

        rec.accepted = true;
        sol.trace.push_back(rec);
        ++sol.stats.naccept;
        const std::size_t slot = static_cast<std::size_t>(decision.accepted_order - (k - 1));
        u = t_kk[slot];
        t = last ? problem.tf : t + dt;
        jacobian_current = false;
        last_failure_singular = false;
        if (opts.save_everystep || t == problem.tf) {
            sol.ts.push_back(t);
            sol.us.push_back(u);
        }
        k = decision.next_order;
        h = decision.next_h;
    }
    return sol;
}

/// Fixed order (k rows), fixed step dt. dt must divide tf - t0.
template <class Real>
Solution<Real> solve_fixed(const ODEProblem<Real>& problem, Family family, int k, const Real& dt,
                           SequenceKind seq = SequenceKind::harmonic) {
    using std::abs;
    using std::round;
    if (k < 1) throw ConfigError("solve_fixed: k must be positive");
    if (!(dt > Real(0))) throw ConfigError("solve_fixed: dt must be positive");
    if (!problem.rhs || problem.u0.empty() || !(problem.tf > problem.t0))
        throw ConfigError("solve_fixed: invalid problem");
    const Real span = problem.tf - problem.t0;
    const Real steps_real = round(span / dt);
    if (steps_real < Real(1) || abs(steps_real * dt - span) > Real(1e-9) * span)
        throw ConfigError("solve_fixed: dt must divide tf - t0");
    const auto steps = static_cast<long long>(steps_real);

    detail::StepEngine<Real> engine(problem, family, seq, k, 1, false);
    Solution<Real> sol;
    sol.ts.push_back(problem.t0);
    sol.us.push_back(problem.u0);
    std::vector<Real> u = problem.u0, t_kk, t_kkm1;
    try {
        for (long long i = 0; i < steps; ++i) {
            const Real t = problem.t0 + Real(i) * dt;
            engine.update_jacobian(u, t, sol.stats);
            engine.compute_rows(0, static_cast<std::size_t>(k), u, t, dt, false, sol.stats);
            engine.extrapolate(static_cast<std::size_t>(k), t_kk, t_kkm1);
            u = t_kk;
            ++sol.stats.naccept;
            sol.trace.push_back({t, dt, k, k, true});
            sol.ts.push_back(i + 1 == steps ? problem.tf : problem.t0 + Real(i + 1) * dt);
            sol.us.push_back(u);
        }
    } catch (const SingularMatrix&) {
        sol.retcode = RetCode::singular_failure;
    } catch (const NonFiniteRHS&) {
        sol.retcode = RetCode::singular_failure;
    } catch (const NonFiniteState&) {
        sol.retcode = RetCode::step_underflow;
    }
    return sol;
}

}  // namespace parex
