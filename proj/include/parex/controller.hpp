#pragma once

// Error estimation, step-size control and work-based order selection inside
// the (k-1, k+1) window.

#include <parex/extrapolation.hpp>
#include <parex/ode.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace parex {

/// Weighted RMS of (t_kk - t_kkm1), each component scaled by
/// abstol + reltol * max(|u_i|, |u_prev_i|).
template <class Real>
Real scaled_error(std::span<const Real> t_kk, std::span<const Real> t_kkm1, std::span<const Real> u,
                  std::span<const Real> u_prev, const Tolerances<Real>& tol) {
    using std::abs;
    using std::sqrt;
    const std::size_t d = t_kk.size();
    Real acc(0);
    for (std::size_t i = 0; i < d; ++i) {
        const Real sc = tol.abstol + std::max<Real>(abs(u[i]), abs(u_prev[i])) * tol.reltol;
        const Real e = (t_kk[i] - t_kkm1[i]) / sc;
        acc += e * e;
    }
    return sqrt(acc / Real(d));
}

/// Standard controller: q = clamp(err^(1/(p+1)) / gamma, q_min, q_max),
/// h_opt = h / q, with p the order of the extrapolant.
template <class Real>
Real optimal_step(const Real& h, const Real& err_scaled, int achieved_order, double gamma, double q_min, double q_max) {
    using std::pow;
    Real q = pow(err_scaled, Real(1) / Real(achieved_order + 1)) / Real(gamma);
    if (!detail::finite(q)) q = Real(q_max);
    q = std::max<Real>(Real(q_min), std::min<Real>(q, Real(q_max)));
    return h / q;
}

/// Order of the order-k (k rows) extrapolant used as the controller's p.
inline int extrapolant_order(int power, int k) { return power == 2 ? 2 * k : k; }

template <class Real>
struct OrderEstimate {
    int order;
    Real err;    // scaled error of T_{k,k} vs T_{k,k-1}
    Real h_opt;  // optimal_step for this order
};

template <class Real>
struct StepDecision {
    bool accept = false;
    Real next_h = Real(0);
    int next_order = 0;
    int accepted_order = 0;  // largest converged order when accepted
};

/// Relative margin a neighbouring order must win by; ties keep the current order.
inline constexpr double order_change_margin = 1e-9;

/// Accepts when some estimate has err < 1 and moves to the window order with
/// the smallest work rate A_k / h_opt(k). Rejection keeps the order and
/// proposes h_opt(current_k).
template <class Real>
StepDecision<Real> select_order(std::span<const OrderEstimate<Real>> estimates, const WorkModel& work, int current_k,
                                int min_order, int max_order) {
    StepDecision<Real> d;
    const OrderEstimate<Real>* current = nullptr;
    for (const auto& e : estimates)
        if (e.order == current_k) current = &e;
    if (current == nullptr) throw ConfigError("select_order: no estimate for the current order");

    for (const auto& e : estimates) {
        if (e.err < Real(1) && e.order > d.accepted_order) {
            d.accept = true;
            d.accepted_order = e.order;
        }
    }
    if (!d.accept) {
        d.next_order = current_k;
        d.next_h = current->h_opt;
        return d;
    }

    auto in_window = [&](int k) { return k >= min_order && k <= max_order && std::abs(k - current_k) <= 1; };
    auto rate = [&](const OrderEstimate<Real>& e) {
        return work(static_cast<std::size_t>(e.order)) / static_cast<double>(e.h_opt);
    };
    const OrderEstimate<Real>* best = current;
    double best_rate = rate(*current);
    for (const auto& e : estimates) {
        if (&e == current || !in_window(e.order)) continue;
        double r = rate(e);
        if (r < best_rate * (1.0 - order_change_margin)) {
            best = &e;
            best_rate = r;
        }
    }
    d.next_order = best->order;
    d.next_h = best->h_opt;
    return d;
}

}  // namespace parex
