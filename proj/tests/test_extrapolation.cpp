#include <parex/extrapolation.hpp>

#include "oracles.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace parex;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

using Column = std::vector<std::vector<double>>;

Column scalar_column(const std::vector<double>& v) {
    Column c;
    for (double x : v) c.push_back({x});
    return c;
}

}  // namespace

TEST_CASE("sequence values") {
    CHECK(sequence_values({SequenceKind::harmonic, 1}, 8) == std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8});
    CHECK(sequence_values({SequenceKind::bulirsch, 1}, 8) == std::vector<int>{1, 2, 3, 4, 6, 8, 12, 16});
    CHECK(sequence_values({SequenceKind::harmonic, 4}, 3) == std::vector<int>{4, 8, 12});
    CHECK(sequence_values({SequenceKind::romberg, 1}, 5) == std::vector<int>{1, 2, 4, 8, 16});
    CHECK_THROWS_AS(sequence_values({SequenceKind::harmonic, 0}, 3), ConfigError);
}

TEST_CASE("sequences are strictly increasing") {
    for (auto kind : {SequenceKind::harmonic, SequenceKind::romberg, SequenceKind::bulirsch})
        for (int mult : {1, 2, 3, 4, 7}) {
            auto n = sequence_values({kind, mult}, 16);
            for (std::size_t j = 1; j < n.size(); ++j) CHECK(n[j] > n[j - 1]);
        }
}

TEST_CASE("sequence names round trip") {
    for (auto kind : {SequenceKind::harmonic, SequenceKind::romberg, SequenceKind::bulirsch})
        CHECK(parse_sequence_kind(to_string(kind)) == kind);
    CHECK_THROWS_AS(parse_sequence_kind("fibonacci"), ConfigError);
}

TEST_CASE("aitken-neville hand cases") {
    const std::vector<int> n{1, 2, 3, 4};
    SECTION("constant column") {
        auto [tkk, tkm] = aitken_neville<double>(scalar_column({2.5, 2.5, 2.5, 2.5}), n, 2);
        CHECK(tkk[0] == 2.5);
        CHECK(tkm[0] == 2.5);
    }
    SECTION("two rows, power 1") {
        auto [tkk, tkm] = aitken_neville<double>(scalar_column({3.0, 5.0}), n, 1);
        CHECK(tkk[0] == 2 * 5.0 - 3.0);
        CHECK(tkm[0] == 5.0);
    }
    SECTION("linear in h is recovered exactly") {
        // p(h) = 1.75 - 0.5 h at h = 1/n
        auto [tkk, tkm] = aitken_neville<double>(scalar_column({1.75 - 0.5, 1.75 - 0.25}), n, 1);
        CHECK_THAT(tkk[0], WithinAbs(1.75, 1e-15));
    }
    SECTION("one row") {
        auto [tkk, tkm] = aitken_neville<double>(scalar_column({0.3}), n, 2);
        CHECK(tkk[0] == 0.3);
        CHECK(tkm[0] == 0.3);
    }
}

TEST_CASE("barycentric tableau hand cases") {
    const std::vector<int> n{1, 2, 3, 4, 5};
    BarycentricTableau<double> tab(n, 2, 5);
    CHECK(tab.coefficients(1)[0] == 1.0);
    CHECK_THAT(tab.coefficients(2)[0], WithinAbs(-1.0 / 3.0, 1e-15));
    CHECK_THAT(tab.coefficients(2)[1], WithinAbs(4.0 / 3.0, 1e-15));

    auto col = scalar_column({0.9, 1.1});
    auto bc = barycentric_extrapolate<double>(tab, 2, col);
    auto [an, unused] = aitken_neville<double>(col, n, 2);
    CHECK_THAT(bc[0], WithinAbs(an[0], 1e-12));

    auto one = barycentric_extrapolate<double>(tab, 1, col);
    CHECK(one[0] == 0.9);

    auto cst = barycentric_extrapolate<double>(tab, 5, scalar_column({4, 4, 4, 4, 4}));
    CHECK_THAT(cst[0], WithinRel(4.0, 1e-13));

    CHECK_THROWS_AS(BarycentricTableau<double>(n, 3, 2), ConfigError);
    CHECK_THROWS_AS(barycentric_extrapolate<double>(tab, 6, col), ConfigError);
}

TEST_CASE("tableau rows sum to one") {
    for (int power : {1, 2})
        for (auto kind : {SequenceKind::harmonic, SequenceKind::bulirsch})
            for (int mult : {1, 2, 4}) {
                auto n = sequence_values({kind, mult}, 12);
                BarycentricTableau<double> tab(n, power, 12);
                for (std::size_t k = 1; k <= 12; ++k) {
                    double s = 0;
                    for (double c : tab.coefficients(k)) s += c;
                    CHECK_THAT(s, WithinAbs(1.0, 1e-9));
                }
            }
}

TEST_CASE("both extrapolators recover polynomial data") {
    std::mt19937_64 gen(42);
    std::uniform_real_distribution<double> dist(-1, 1);
    for (int power : {1, 2})
        for (int mult : {1, 2, 4}) {
            auto n = sequence_values({SequenceKind::harmonic, mult}, 10);
            BarycentricTableau<double> tab(n, power, 10);
            for (std::size_t k = 1; k <= 10; ++k) {
                auto x = oracle::nodes(n, k, power);
                std::vector<double> coef(k);
                for (auto& c : coef) c = dist(gen);
                std::vector<double> y(k);
                for (std::size_t j = 0; j < k; ++j) {
                    double p = 0;
                    for (std::size_t i = k; i-- > 0;) p = p * x[j] + coef[i];
                    y[j] = p;
                }
                const double expect = oracle::interpolate_at_zero(x, y);
                CHECK_THAT(expect, WithinAbs(coef[0], 1e-9 * std::max(1.0, std::abs(coef[0]))));
                auto col = scalar_column(y);
                auto [an, unused] = aitken_neville<double>(col, n, power);
                auto bc = barycentric_extrapolate<double>(tab, k, col);
                const double s = std::abs(expect);
                INFO("power " << power << " mult " << mult << " k " << k);
                CHECK(std::abs(an[0] - expect) <= 1e-10 * std::max(s, 1e-3));
                CHECK(std::abs(bc[0] - expect) <= 1e-10 * std::max(s, 1e-3));
            }
        }
}

TEST_CASE("barycentric and aitken-neville agree on random data") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> dist(-1, 1);
    for (int power : {1, 2})
        for (int mult : {1, 2, 4}) {
            auto n = sequence_values({SequenceKind::harmonic, mult}, 10);
            BarycentricTableau<double> tab(n, power, 10);
            for (std::size_t k = 1; k <= 10; ++k)
                for (int rep = 0; rep < 20; ++rep) {
                    Column col(k, std::vector<double>(3));
                    for (auto& v : col)
                        for (auto& e : v) e = dist(gen);
                    auto [an, unused] = aitken_neville<double>(col, n, power);
                    auto bc = barycentric_extrapolate<double>(tab, k, col);
                    for (std::size_t i = 0; i < 3; ++i) {
                        double s = std::abs(an[i]);
                        for (const auto& v : col) s = std::max(s, std::abs(v[i]));
                        CHECK(std::abs(an[i] - bc[i]) <= 1e-11 * s);
                    }
                }
        }
}

TEST_CASE("aitken-neville secondary output is the order k-1 extrapolant") {
    auto n = sequence_values({SequenceKind::harmonic, 1}, 6);
    BarycentricTableau<double> tab(n, 1, 6);
    auto col = scalar_column({0.1, -0.4, 0.35, 0.2, 0.9, -0.7});
    auto [tkk, tkm] = aitken_neville<double>(col, n, 1);
    // T_{k,k-1} uses rows 2..k; the oracle interpolates the same nodes
    auto x = oracle::nodes(n, 6, 1);
    std::vector<double> xs(x.begin() + 1, x.end()), ys;
    for (std::size_t j = 1; j < 6; ++j) ys.push_back(col[j][0]);
    CHECK_THAT(tkm[0], WithinAbs(oracle::interpolate_at_zero(xs, ys), 1e-9));
    CHECK_THAT(tkk[0], WithinAbs(barycentric_extrapolate<double>(tab, 6, col)[0], 1e-9));
}

TEST_CASE("stage counts") {
    auto n2 = sequence_values({SequenceKind::harmonic, 2}, 4);
    CHECK(stage_count(StepperKind::explicit_midpoint, n2, 1, {}) == 8.0);

    auto n1 = sequence_values({SequenceKind::harmonic, 1}, 4);
    CHECK(stage_count(StepperKind::implicit_euler, n1, 3, {}) == 16.0);

    auto n4 = sequence_values({SequenceKind::harmonic, 4}, 2);
    // rows of 4 and 8 substeps, each running one extra: (5+5+1) + (9+9+1) + 1
    CHECK(stage_count(StepperKind::implicit_midpoint_smoothed, n4, 2, {}) == 31.0);

    WorkWeights w = WorkWeights::for_dimension(20);
    CHECK(w.jacobian == 4.0);
    CHECK(stage_count(StepperKind::implicit_euler, n1, 1, w) == 1 + 1 + 1 + 4.0);

    WorkModel model(StepperKind::implicit_euler, n1, 4, {});
    for (std::size_t k = 1; k <= 4; ++k) CHECK(model(k) == stage_count(StepperKind::implicit_euler, n1, k, {}));
    for (std::size_t k = 2; k <= 4; ++k) CHECK(model(k) > model(k - 1));
    CHECK_THROWS_AS(stage_count(StepperKind::explicit_midpoint, n2, 4, {}), ConfigError);
}
