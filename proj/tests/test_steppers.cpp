#include <parex/steppers.hpp>

#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

using namespace parex;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const std::vector<double> no_params;

auto decay = [](std::span<double> du, std::span<const double> u, std::span<const double>, double) {
    for (std::size_t i = 0; i < u.size(); ++i) du[i] = -u[i];
};

auto zero_rhs = [](std::span<double> du, std::span<const double>, std::span<const double>, double) {
    for (auto& v : du) v = 0.0;
};

LUFactors<double> w_of(double jac, double h) { return lu_factor(DenseMatrix<double>{{1.0 - h * jac}}); }

double slope(const std::vector<double>& h, const std::vector<double>& err) {
    // least-squares slope of log err against log h
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < h.size(); ++i) mx += std::log(h[i]), my += std::log(err[i]);
    mx /= h.size(), my /= h.size();
    double num = 0, den = 0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        num += (std::log(h[i]) - mx) * (std::log(err[i]) - my);
        den += (std::log(h[i]) - mx) * (std::log(h[i]) - mx);
    }
    return num / den;
}

}  // namespace

TEST_CASE("explicit midpoint row") {
    std::vector<double> u0{1.5, -2.0};
    auto r0 = explicit_midpoint_row<double>(zero_rhs, u0, no_params, 0.0, 0.3, 4);
    CHECK(r0.value == u0);
    CHECK(r0.rhs_calls == 4);
    CHECK(r0.solves == 0);

    auto one = [](std::span<double> du, std::span<const double>, std::span<const double>, double) { du[0] = 1.0; };
    std::vector<double> s{2.0};
    CHECK(explicit_midpoint_row<double>(one, s, no_params, 0.0, 0.4, 2).value[0] == 2.0 + 0.4);

    std::vector<double> u{1.0};
    CHECK_THAT(explicit_midpoint_row<double>(decay, u, no_params, 0.0, 0.1, 2).value[0], WithinAbs(0.905, 1e-15));

    CHECK_THROWS_AS(explicit_midpoint_row<double>(decay, u, no_params, 0.0, 0.1, 3), ConfigError);
    CHECK_THROWS_AS(explicit_midpoint_row<double>(decay, u, no_params, 0.0, 0.1, 0), ConfigError);
}

TEST_CASE("implicit euler row") {
    std::vector<double> u0{3.0};
    auto r0 = implicit_euler_row<double>(zero_rhs, w_of(0.0, 0.1), u0, no_params, 0.0, 0.3, 3);
    CHECK(r0.value == u0);
    CHECK(r0.rhs_calls == 3);
    CHECK(r0.solves == 3);

    auto r = implicit_euler_row<double>(decay, w_of(-1.0, 0.5), u0, no_params, 0.0, 0.5, 1);
    CHECK_THAT(r.value[0], WithinRel(2.0, 1e-15));

    // J = 0 gives explicit Euler
    auto e = implicit_euler_row<double>(decay, w_of(0.0, 0.25), u0, no_params, 0.0, 0.5, 2);
    CHECK_THAT(e.value[0], WithinRel(3.0 * 0.75 * 0.75, 1e-15));
}

TEST_CASE("implicit euler is A-stable on a very stiff decay") {
    const double lambda = -1e6;
    auto f = [&](std::span<double> du, std::span<const double> u, std::span<const double>, double) {
        du[0] = lambda * u[0];
    };
    std::vector<double> u0{1.0};
    auto r = implicit_euler_row<double>(f, w_of(lambda, 1.0), u0, no_params, 0.0, 1.0, 1);
    CHECK(std::abs(r.value[0]) < 1.0);
    CHECK_THAT(r.value[0], WithinRel(1.0 / (1.0 + 1e6), 1e-8));
}

TEST_CASE("smoothed implicit midpoint row") {
    std::vector<double> u0{0.7, -0.2};
    auto r0 = implicit_midpoint_smoothed_row<double>(zero_rhs, lu_factor(DenseMatrix<double>::identity(2)), u0,
                                                     no_params, 0.0, 0.8, 8);
    CHECK(r0.value == u0);
    CHECK(r0.rhs_calls == 9);
    CHECK(r0.solves == 9);

    auto cst = [](std::span<double> du, std::span<const double>, std::span<const double>, double) {
        du[0] = 0.5;
        du[1] = -3.0;
    };
    auto rc = implicit_midpoint_smoothed_row<double>(cst, lu_factor(DenseMatrix<double>::identity(2)), u0, no_params,
                                                     0.0, 0.8, 8);
    CHECK_THAT(rc.value[0], WithinAbs(0.7 + 0.8 * 0.5, 1e-15));
    CHECK_THAT(rc.value[1], WithinAbs(-0.2 - 0.8 * 3.0, 1e-15));

    // independent exact-arithmetic transcription gives 900/1331
    std::vector<double> one{1.0};
    auto r = implicit_midpoint_smoothed_row<double>(decay, w_of(-1.0, 0.1), one, no_params, 0.0, 0.4, 4);
    CHECK_THAT(r.value[0], WithinRel(900.0 / 1331.0, 1e-14));

    CHECK_THROWS_AS(implicit_midpoint_smoothed_row<double>(decay, w_of(-1.0, 0.1), one, no_params, 0.0, 0.4, 6),
                    ConfigError);
}

TEST_CASE("single-row convergence orders") {
    const double dt = 0.5;
    const double exact = std::exp(-dt);
    std::vector<double> u0{1.0};
    std::vector<double> hs, e_mid, e_ie, e_ihw;
    for (int n : {4, 8, 16, 32}) {
        const double h = dt / n;
        hs.push_back(h);
        e_mid.push_back(std::abs(explicit_midpoint_row<double>(decay, u0, no_params, 0.0, dt, n).value[0] - exact));
        e_ie.push_back(
            std::abs(implicit_euler_row<double>(decay, w_of(-1.0, h), u0, no_params, 0.0, dt, n).value[0] - exact));
        e_ihw.push_back(std::abs(
            implicit_midpoint_smoothed_row<double>(decay, w_of(-1.0, h), u0, no_params, 0.0, dt, n).value[0] - exact));
    }
    CHECK_THAT(slope(hs, e_mid), WithinAbs(2.0, 0.2));
    CHECK_THAT(slope(hs, e_ihw), WithinAbs(2.0, 0.2));
    CHECK_THAT(slope(hs, e_ie), WithinAbs(1.0, 0.2));
}

TEST_CASE("non-finite iterates are reported") {
    auto blowup = [](std::span<double> du, std::span<const double> u, std::span<const double>, double) {
        du[0] = u[0] * u[0];
    };
    std::vector<double> u0{1e200};
    CHECK_THROWS_AS(explicit_midpoint_row<double>(blowup, u0, no_params, 0.0, 1.0, 2), NonFiniteState);
    CHECK_THROWS_AS(implicit_euler_row<double>(blowup, w_of(0.0, 0.5), u0, no_params, 0.0, 1.0, 2), NonFiniteState);
}

TEST_CASE("workspace rows match the convenience forms") {
    std::vector<double> u0{1.0, 2.0};
    RowWorkspace<double> ws;
    DenseMatrix<double> jac{{-1.0, 0.0}, {0.0, -1.0}};
    factor_iteration_matrix(jac, 0.05, ws);
    auto counts = implicit_midpoint_smoothed_row<double>(decay, u0, no_params, 0.0, 0.4, 8, ws);
    auto conv = implicit_midpoint_smoothed_row<double>(decay, lu_factor(DenseMatrix<double>{{1.05, 0}, {0, 1.05}}), u0,
                                                       no_params, 0.0, 0.4, 8);
    CHECK(counts.rhs_calls == 9);
    CHECK(ws.value == conv.value);
}
