#pragma once

// Built-in benchmark problems: ROBER, OREGO, HIRES, POLLU and a random
// diagonal linear system with 100 equations.

#include <parex/errors.hpp>
#include <parex/linalg.hpp>
#include <parex/ode.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace parex {

struct OrderWindow {
    int min_order;
    int init_order;
    int max_order;
};

struct TolerancePair {
    double reltol;
    double abstol;
};

struct NamedProblem {
    std::string name;
    ODEProblem<double> problem;  // jacobian left empty: finite differences
    JacobianFunction<double> analytic_jacobian;
    std::vector<TolerancePair> default_tol_grid;
    std::map<Family, OrderWindow> tuned_orders;
    std::function<std::vector<double>(double)> exact;  // only where a closed form exists
    std::vector<Family> benchmark_families;

    [[nodiscard]] std::size_t dim() const noexcept { return problem.dim(); }

    /// Order window tuned for `f`, or a generic (2, 5, 10) window.
    [[nodiscard]] OrderWindow orders_for(Family f) const {
        auto it = tuned_orders.find(f);
        return it != tuned_orders.end() ? it->second : OrderWindow{2, 5, 10};
    }

    [[nodiscard]] ODEProblem<double> with_analytic_jacobian() const {
        ODEProblem<double> p = problem;
        p.jacobian = analytic_jacobian;
        return p;
    }
};

namespace detail {

inline std::vector<TolerancePair> stiff_grid() { return {{1e-7, 1e-10}, {1e-8, 1e-11}, {1e-9, 1e-12}}; }

inline std::vector<Family> implicit_list() {
    return {Family::implicit_euler, Family::implicit_euler_barycentric, Family::implicit_hairer_wanner};
}

}  // namespace detail

inline NamedProblem rober() {
    NamedProblem np;
    np.name = "rober";
    np.problem.u0 = {1.0, 0.0, 0.0};
    np.problem.params = {0.04, 3e7, 1e4};
    np.problem.t0 = 0.0;
    np.problem.tf = 1e5;
    np.problem.rhs = [](std::span<double> du, std::span<const double> y, std::span<const double> k, double) {
        du[0] = -k[0] * y[0] + k[2] * y[1] * y[2];
        du[1] = k[0] * y[0] - k[1] * y[1] * y[1] - k[2] * y[1] * y[2];
        du[2] = k[1] * y[1] * y[1];
    };
    np.analytic_jacobian = [](DenseMatrix<double>& j, std::span<const double> y, std::span<const double> k, double) {
        j = DenseMatrix<double>{{-k[0], k[2] * y[2], k[2] * y[1]},
                                {k[0], -2.0 * k[1] * y[1] - k[2] * y[2], -k[2] * y[1]},
                                {0.0, 2.0 * k[1] * y[1], 0.0}};
    };
    np.default_tol_grid = detail::stiff_grid();
    np.tuned_orders = {{Family::implicit_euler, {3, 5, 12}},
                       {Family::implicit_euler_barycentric, {4, 5, 12}},
                       {Family::implicit_hairer_wanner, {2, 5, 10}}};
    np.benchmark_families = detail::implicit_list();
    return np;
}

/// `classical` is the standard Oregonator; `negated` negates dy1 and
/// blows up in finite time from the standard initial state.
enum class OregoForm { classical, negated };

inline NamedProblem orego(OregoForm form = OregoForm::classical) {
    const double sign = form == OregoForm::classical ? 1.0 : -1.0;
    NamedProblem np;
    np.name = form == OregoForm::classical ? "orego" : "orego_negated";
    np.problem.u0 = {1.0, 2.0, 3.0};
    np.problem.params = {77.27, 8.375e-6, 0.161};
    np.problem.t0 = 0.0;
    np.problem.tf = 30.0;
    np.problem.rhs = [sign](std::span<double> du, std::span<const double> y, std::span<const double> k, double) {
        du[0] = sign * k[0] * (y[1] + y[0] * (1.0 - k[1] * y[0] - y[1]));
        du[1] = (y[2] - (1.0 + y[0]) * y[1]) / k[0];
        du[2] = k[2] * (y[0] - y[2]);
    };
    np.analytic_jacobian = [sign](DenseMatrix<double>& j, std::span<const double> y, std::span<const double> k,
                                  double) {
        j = DenseMatrix<double>{{sign * k[0] * (1.0 - 2.0 * k[1] * y[0] - y[1]), sign * k[0] * (1.0 - y[0]), 0.0},
                                {-y[1] / k[0], -(1.0 + y[0]) / k[0], 1.0 / k[0]},
                                {k[2], 0.0, -k[2]}};
    };
    np.default_tol_grid = detail::stiff_grid();
    np.tuned_orders = {{Family::implicit_euler, {3, 4, 12}},
                       {Family::implicit_euler_barycentric, {3, 4, 12}},
                       {Family::implicit_hairer_wanner, {2, 5, 10}}};
    np.benchmark_families = detail::implicit_list();
    return np;
}

inline NamedProblem hires() {
    NamedProblem np;
    np.name = "hires";
    np.problem.u0 = {1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0057};
    np.problem.t0 = 0.0;
    np.problem.tf = 321.8122;
    np.problem.rhs = [](std::span<double> du, std::span<const double> y, std::span<const double>, double) {
        du[0] = -1.71 * y[0] + 0.43 * y[1] + 8.32 * y[2] + 0.0007;
        du[1] = 1.71 * y[0] - 8.75 * y[1];
        du[2] = -10.03 * y[2] + 0.43 * y[3] + 0.035 * y[4];
        du[3] = 8.32 * y[1] + 1.71 * y[2] - 1.12 * y[3];
        du[4] = -1.745 * y[4] + 0.43 * y[5] + 0.43 * y[6];
        du[5] = -280.0 * y[5] * y[7] + 0.69 * y[3] + 1.71 * y[4] - 0.43 * y[5] + 0.69 * y[6];
        du[6] = 280.0 * y[5] * y[7] - 1.81 * y[6];
        du[7] = -280.0 * y[5] * y[7] + 1.81 * y[6];
    };
    np.analytic_jacobian = [](DenseMatrix<double>& j, std::span<const double> y, std::span<const double>, double) {
        j = DenseMatrix<double>(8);
        j(0, 0) = -1.71, j(0, 1) = 0.43, j(0, 2) = 8.32;
        j(1, 0) = 1.71, j(1, 1) = -8.75;
        j(2, 2) = -10.03, j(2, 3) = 0.43, j(2, 4) = 0.035;
        j(3, 1) = 8.32, j(3, 2) = 1.71, j(3, 3) = -1.12;
        j(4, 4) = -1.745, j(4, 5) = 0.43, j(4, 6) = 0.43;
        j(5, 3) = 0.69, j(5, 4) = 1.71, j(5, 5) = -280.0 * y[7] - 0.43, j(5, 6) = 0.69, j(5, 7) = -280.0 * y[5];
        j(6, 5) = 280.0 * y[7], j(6, 6) = -1.81, j(6, 7) = 280.0 * y[5];
        j(7, 5) = -280.0 * y[7], j(7, 6) = 1.81, j(7, 7) = -280.0 * y[5];
    };
    np.default_tol_grid = detail::stiff_grid();
    np.tuned_orders = {{Family::implicit_euler, {4, 7, 12}},
                       {Family::implicit_euler_barycentric, {4, 7, 12}},
                       {Family::implicit_hairer_wanner, {3, 6, 10}}};
    np.benchmark_families = detail::implicit_list();
    return np;
}

namespace detail {

// POLLU as a reaction network, used for the analytic Jacobian: reaction r has
// rate k_r * y_a (* y_b) and changes species s by coeff.
struct PolluReaction {
    int a;
    int b;  // -1 for first-order reactions
    std::vector<std::pair<int, double>> effects;
};

inline const std::array<PolluReaction, 25>& pollu_reactions() {
    // Species and reactions are 0-based (y1 -> 0, k1 -> reaction 0).
    static const std::array<PolluReaction, 25> table{{
        {0, -1, {{0, -1}, {1, 1}, {2, 1}}},
        {1, 3, {{0, 1}, {1, -1}, {3, -1}}},
        {4, 1, {{0, 1}, {1, -1}, {4, -1}, {5, 1}}},
        {6, -1, {{4, 2}, {6, -1}, {7, 1}}},
        {6, -1, {{6, -1}, {7, 1}}},
        {6, 5, {{4, 1}, {5, -1}, {6, -1}, {7, 1}}},
        {8, -1, {{4, 1}, {7, 1}, {8, -1}, {9, 1}}},
        {8, 5, {{5, -1}, {8, -1}, {10, 1}}},
        {10, 1, {{0, 1}, {1, -1}, {9, 1}, {10, -1}, {11, 1}}},
        {10, 0, {{0, -1}, {10, -1}, {12, 1}}},
        {12, -1, {{0, 1}, {10, 1}, {12, -1}}},
        {9, 1, {{0, 1}, {1, -1}, {9, -1}, {13, 1}}},
        {13, -1, {{4, 1}, {6, 1}, {13, -1}}},
        {0, 5, {{0, -1}, {5, -1}, {14, 1}}},
        {2, -1, {{2, -1}, {3, 1}}},
        {3, -1, {{3, -1}, {15, 1}}},
        {3, -1, {{2, 1}, {3, -1}}},
        {15, -1, {{5, 2}, {15, -1}}},
        {15, -1, {{2, 1}, {15, -1}}},
        {16, 5, {{4, 1}, {5, -1}, {16, -1}, {17, 1}}},
        {18, -1, {{1, 1}, {18, -1}}},
        {18, -1, {{0, 1}, {2, 1}, {18, -1}}},
        {0, 3, {{0, -1}, {3, -1}, {18, 1}}},
        {18, 0, {{0, -1}, {18, -1}, {19, 1}}},
        {19, -1, {{0, 1}, {18, 1}, {19, -1}}},
    }};
    return table;
}

}  // namespace detail

inline NamedProblem pollu() {
    NamedProblem np;
    np.name = "pollu";
    np.problem.params = {0.35,    26.6,   12300.0, 0.00086, 0.00082, 15000.0, 0.00013, 24000.0, 16500.0,
                         9000.0,  0.022,  12000.0, 1.88,    16300.0, 4.8e6,   0.00035, 0.0175,  1.0e8,
                         4.44e11, 1240.0, 2.1,     5.78,    0.0474,  1780.0,  3.12};
    np.problem.u0 = {0.0, 0.2, 0.0, 0.04, 0.0, 0.0, 0.1,   0.3, 0.017, 0.0,
                     0.0, 0.0, 0.0, 0.0,  0.0, 0.0, 0.007, 0.0, 0.0,   0.0};
    np.problem.t0 = 0.0;
    np.problem.tf = 60.0;
    np.problem.rhs = [](std::span<double> du, std::span<const double> yv, std::span<const double> kv, double) {
        // 1-based aliases
        auto y = [&](int i) { return yv[i - 1]; };
        auto k = [&](int i) { return kv[i - 1]; };
        du[0] = -k(1) * y(1) - k(10) * y(11) * y(1) - k(14) * y(1) * y(6) - k(23) * y(1) * y(4) - k(24) * y(19) * y(1) +
                k(2) * y(2) * y(4) + k(3) * y(5) * y(2) + k(9) * y(11) * y(2) + k(11) * y(13) + k(12) * y(10) * y(2) +
                k(22) * y(19) + k(25) * y(20);
        du[1] = -k(2) * y(2) * y(4) - k(3) * y(5) * y(2) - k(9) * y(11) * y(2) - k(12) * y(10) * y(2) + k(1) * y(1) +
                k(21) * y(19);
        du[2] = -k(15) * y(3) + k(1) * y(1) + k(17) * y(4) + k(19) * y(16) + k(22) * y(19);
        du[3] = -k(2) * y(2) * y(4) - k(16) * y(4) - k(17) * y(4) - k(23) * y(1) * y(4) + k(15) * y(3);
        du[4] = -k(3) * y(5) * y(2) + 2.0 * k(4) * y(7) + k(6) * y(7) * y(6) + k(7) * y(9) + k(13) * y(14) +
                k(20) * y(17) * y(6);
        du[5] = -k(6) * y(7) * y(6) - k(8) * y(9) * y(6) - k(14) * y(1) * y(6) - k(20) * y(17) * y(6) +
                k(3) * y(5) * y(2) + 2.0 * k(18) * y(16);
        du[6] = -k(4) * y(7) - k(5) * y(7) - k(6) * y(7) * y(6) + k(13) * y(14);
        du[7] = k(4) * y(7) + k(5) * y(7) + k(6) * y(7) * y(6) + k(7) * y(9);
        du[8] = -k(7) * y(9) - k(8) * y(9) * y(6);
        du[9] = -k(12) * y(10) * y(2) + k(7) * y(9) + k(9) * y(11) * y(2);
        du[10] = -k(9) * y(11) * y(2) - k(10) * y(11) * y(1) + k(8) * y(9) * y(6) + k(11) * y(13);
        du[11] = k(9) * y(11) * y(2);
        du[12] = -k(11) * y(13) + k(10) * y(11) * y(1);
        du[13] = -k(13) * y(14) + k(12) * y(10) * y(2);
        du[14] = k(14) * y(1) * y(6);
        du[15] = -k(18) * y(16) - k(19) * y(16) + k(16) * y(4);
        du[16] = -k(20) * y(17) * y(6);
        du[17] = k(20) * y(17) * y(6);
        du[18] = -k(21) * y(19) - k(22) * y(19) - k(24) * y(19) * y(1) + k(23) * y(1) * y(4) + k(25) * y(20);
        du[19] = -k(25) * y(20) + k(24) * y(19) * y(1);
    };
    np.analytic_jacobian = [](DenseMatrix<double>& j, std::span<const double> y, std::span<const double> k, double) {
        j = DenseMatrix<double>(20);
        const auto& table = detail::pollu_reactions();
        for (std::size_t r = 0; r < table.size(); ++r) {
            const auto& rx = table[r];
            // d(rate)/dy_a and d(rate)/dy_b
            const double da = rx.b < 0 ? k[r] : k[r] * y[rx.b];
            const double db = rx.b < 0 ? 0.0 : k[r] * y[rx.a];
            for (auto [s, c] : rx.effects) {
                j(s, rx.a) += c * da;
                if (rx.b >= 0) j(s, rx.b) += c * db;
            }
        }
    };
    np.default_tol_grid = {{1e-8, 1e-10}, {1e-9, 1e-11}, {1e-10, 1e-13}};
    np.tuned_orders = {{Family::implicit_euler, {5, 6, 12}},
                       {Family::implicit_euler_barycentric, {5, 6, 12}},
                       {Family::implicit_hairer_wanner, {3, 6, 10}}};
    np.benchmark_families = detail::implicit_list();
    return np;
}

/// 100 independent equations u_i' = lambda_i u_i with lambda_i uniform in
/// [-1, 0) drawn from a 64-bit Mersenne Twister seeded with `seed`;
/// u(0) = 1, t in (0, 1). The rates live in problem.params.
inline NamedProblem linear_100(std::uint64_t seed = 20211) {
    constexpr std::size_t d = 100;
    NamedProblem np;
    np.name = "linear_100";
    std::mt19937_64 gen(seed);
    np.problem.params.resize(d);
    for (auto& lambda : np.problem.params) {
        const double unit = static_cast<double>(gen() >> 11) * 0x1.0p-53;  // [0, 1)
        lambda = unit - 1.0;
    }
    np.problem.u0.assign(d, 1.0);
    np.problem.t0 = 0.0;
    np.problem.tf = 1.0;
    np.problem.rhs = [](std::span<double> du, std::span<const double> u, std::span<const double> lambda, double) {
        for (std::size_t i = 0; i < du.size(); ++i) du[i] = lambda[i] * u[i];
    };
    np.analytic_jacobian = [](DenseMatrix<double>& j, std::span<const double> u, std::span<const double> lambda,
                              double) {
        j = DenseMatrix<double>(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) j(i, i) = lambda[i];
    };
    np.exact = [lambda = np.problem.params](double t) {
        std::vector<double> u(lambda.size());
        for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::exp(lambda[i] * t);
        return u;
    };
    for (int e = 7; e <= 13; ++e) {
        const double rt = std::pow(10.0, -e);
        np.default_tol_grid.push_back({rt, rt * 1e-3});
    }
    np.tuned_orders = {{Family::midpoint_deuflhard, {5, 10, 11}}, {Family::midpoint_hairer_wanner, {5, 10, 11}}};
    np.benchmark_families = {Family::midpoint_deuflhard, Family::midpoint_hairer_wanner};
    return np;
}

inline std::vector<std::string> problem_names() { return {"rober", "orego", "hires", "pollu", "linear_100"}; }

inline NamedProblem problem_by_name(std::string_view name) {
    if (name == "rober") return rober();
    if (name == "orego") return orego();
    if (name == "orego_negated") return orego(OregoForm::negated);
    if (name == "hires") return hires();
    if (name == "pollu") return pollu();
    if (name == "linear_100") return linear_100();
    throw ConfigError("unknown problem '" + std::string(name) + "'");
}

}  // namespace parex
