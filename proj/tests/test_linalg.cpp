#include <parex/linalg.hpp>

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

using namespace parex;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

DenseMatrix<double> random_matrix(std::size_t d, std::mt19937_64& gen) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    DenseMatrix<double> a(d);
    for (auto& v : a.values()) v = dist(gen);
    for (std::size_t i = 0; i < d; ++i) a(i, i) += static_cast<double>(d);  // diagonally dominant
    return a;
}

// P·A, applying the recorded row swaps in order.
DenseMatrix<double> permuted(const LUFactors<double>& f, DenseMatrix<double> a) {
    for (std::size_t i = 0; i < f.pivots.size(); ++i)
        if (f.pivots[i] != i)
            for (std::size_t j = 0; j < a.dim(); ++j) std::swap(a(i, j), a(f.pivots[i], j));
    return a;
}

double frobenius(const DenseMatrix<double>& a) {
    double s = 0.0;
    for (double v : a.values()) s += v * v;
    return std::sqrt(s);
}

DenseMatrix<double> product(const DenseMatrix<double>& l, const DenseMatrix<double>& u) {
    const std::size_t d = l.dim();
    DenseMatrix<double> c(d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            for (std::size_t k = 0; k < d; ++k) c(i, j) += l(i, k) * u(k, j);
    return c;
}

}  // namespace

TEST_CASE("identity factors to identity with trivial pivots") {
    auto f = lu_factor(DenseMatrix<double>::identity(3));
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(f.pivots[i] == i);
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(f.lower()(i, j) == (i == j ? 1.0 : 0.0));
            CHECK(f.upper()(i, j) == (i == j ? 1.0 : 0.0));
        }
    }
}

TEST_CASE("2x2 factors reproduce PA = LU") {
    DenseMatrix<double> a{{2, 1}, {1, 3}};
    auto f = lu_factor(a);
    auto pa = permuted(f, a);
    auto lu = product(f.lower(), f.upper());
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) CHECK_THAT(lu(i, j), WithinAbs(pa(i, j), 1e-15));
}

TEST_CASE("rank-1 matrix is singular") {
    CHECK_THROWS_AS(lu_factor(DenseMatrix<double>{{1, 2}, {2, 4}}), SingularMatrix);
    CHECK_THROWS_AS(lu_factor(DenseMatrix<double>(3)), SingularMatrix);
}

TEST_CASE("non-finite entries are rejected") {
    DenseMatrix<double> a{{1, NAN}, {0, 1}};
    CHECK_THROWS_AS(lu_factor(a), NonFiniteState);
}

TEST_CASE("badly scaled rows are not spuriously singular") {
    DenseMatrix<double> a{{1e-20, 0}, {0, 1e20}};
    auto x = lu_solve<double>(lu_factor(a), std::vector<double>{1e-20, 1e20});
    CHECK_THAT(x[0], WithinRel(1.0, 1e-14));
    CHECK_THAT(x[1], WithinRel(1.0, 1e-14));
}

TEST_CASE("lu_solve hand cases") {
    auto id = lu_solve<double>(lu_factor(DenseMatrix<double>::identity(4)), std::vector<double>{1, 2, 3, 4});
    CHECK(id == std::vector<double>{1, 2, 3, 4});

    auto x = lu_solve<double>(lu_factor(DenseMatrix<double>{{2, 1}, {1, 3}}), std::vector<double>{3, 5});
    CHECK_THAT(x[0], WithinAbs(0.8, 1e-15));
    CHECK_THAT(x[1], WithinAbs(1.4, 1e-15));

    auto y = lu_solve<double>(lu_factor(DenseMatrix<double>{{2, 0}, {0, 2}}), std::vector<double>{2, 4});
    CHECK(y == std::vector<double>{1, 2});

    CHECK_THROWS_AS(lu_solve<double>(lu_factor(DenseMatrix<double>::identity(2)), std::vector<double>{1, 2, 3}),
                    ConfigError);
}

TEST_CASE("pivoting picks the large entry") {
    DenseMatrix<double> a{{1e-3, 1}, {1, 1}};
    auto f = lu_factor(a);
    CHECK(f.pivots[0] == 1);
    auto x = lu_solve<double>(f, std::vector<double>{1, 2});
    // exact: x0 = 1/(1 - 1e-3), x1 = 1 - 1e-3 x0
    CHECK_THAT(x[0], WithinRel(1.0 / 0.999, 1e-14));
    CHECK_THAT(x[1], WithinRel(1.0 - 1e-3 / 0.999, 1e-14));
}

TEST_CASE("random reconstruction and solve round trip") {
    std::mt19937_64 gen(7);
    for (std::size_t d : {1u, 2u, 5u, 13u, 31u, 50u}) {
        for (int rep = 0; rep < 4; ++rep) {
            auto a = random_matrix(d, gen);
            auto f = lu_factor(a);
            auto pa = permuted(f, a);
            auto lu = product(f.lower(), f.upper());
            DenseMatrix<double> diff(d);
            for (std::size_t i = 0; i < d * d; ++i) diff.values()[i] = pa.values()[i] - lu.values()[i];
            CHECK(frobenius(diff) / frobenius(a) <= 1e-12);

            std::vector<double> b(d);
            std::uniform_real_distribution<double> dist(-5, 5);
            for (auto& v : b) v = dist(gen);
            auto x = lu_solve(f, std::span<const double>(b));
            auto ax = a * std::span<const double>(x);
            double bmax = 0, rmax = 0;
            for (std::size_t i = 0; i < d; ++i) {
                bmax = std::max(bmax, std::abs(b[i]));
                rmax = std::max(rmax, std::abs(ax[i] - b[i]));
            }
            CHECK(rmax <= 1e-10 * bmax);
        }
    }
}

TEST_CASE("finite-difference Jacobians") {
    const std::vector<double> none;
    SECTION("linear map") {
        DenseMatrix<double> a{{1, -2, 0.5}, {3, 0, -1}, {0.25, 4, 2}};
        auto f = [&](std::span<double> du, std::span<const double> u, std::span<const double>, double) {
            a.multiply(u, du);
        };
        std::vector<double> u{0.3, -1.2, 5.0};
        auto j = finite_diff_jacobian<double>(f, u, none, 0.0);
        for (std::size_t r = 0; r < 3; ++r)
            for (std::size_t c = 0; c < 3; ++c) CHECK_THAT(j(r, c), WithinAbs(a(r, c), 1e-6));
    }
    SECTION("quadratic") {
        auto f = [](std::span<double> du, std::span<const double> u, std::span<const double>, double) {
            du[0] = u[0] * u[0];
            du[1] = u[1];
        };
        std::vector<double> u{2, 3};
        auto j = finite_diff_jacobian<double>(f, u, none, 0.0);
        CHECK_THAT(j(0, 0), WithinAbs(4.0, 1e-5));
        CHECK_THAT(j(0, 1), WithinAbs(0.0, 1e-5));
        CHECK_THAT(j(1, 0), WithinAbs(0.0, 1e-5));
        CHECK_THAT(j(1, 1), WithinAbs(1.0, 1e-5));
    }
    SECTION("constant rhs, including zero state") {
        int calls = 0;
        auto f = [&](std::span<double> du, std::span<const double>, std::span<const double>, double) {
            ++calls;
            du[0] = 7;
            du[1] = -1;
        };
        std::vector<double> u{0, 0};
        auto j = finite_diff_jacobian<double>(f, u, none, 0.0);
        for (double v : j.values()) CHECK_THAT(v, WithinAbs(0.0, 1e-12));
        CHECK(calls == 3);
    }
    SECTION("non-finite rhs") {
        auto f = [](std::span<double> du, std::span<const double> u, std::span<const double>, double) {
            du[0] = 1.0 / (u[0] - 1.0);
        };
        std::vector<double> u{1.0};
        CHECK_THROWS_AS(finite_diff_jacobian<double>(f, u, none, 0.0), NonFiniteRHS);
    }
}
