#include <doctest.h>

#include <cmath>
#include <random>

#include "tracekit/special.hpp"
#include "tracekit/types.hpp"

using namespace tracekit;
using namespace tracekit::special;

namespace {

// Closed forms used as independent oracles:
//   P(1,x)   = 1 - e^-x
//   P(2,x)   = 1 - e^-x (1 + x)
//   P(1/2,x) = erf(sqrt(x))
double p1(double x) { return 1.0 - std::exp(-x); }
double p2(double x) { return 1.0 - std::exp(-x) * (1.0 + x); }
double p_half(double x) { return std::erf(std::sqrt(x)); }

}  // namespace

TEST_CASE("reg_lower_gamma matches closed forms") {
    CHECK(reg_lower_gamma(1.0, 1.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-12));
    CHECK(std::abs(reg_lower_gamma(0.5, 1.0) - std::erf(1.0)) < 1e-12);
    CHECK(reg_lower_gamma(3.0, 0.0) == 0.0);
    CHECK(reg_lower_gamma(0.5, 0.0) == 0.0);

    for (double x : {0.01, 0.3, 0.9, 1.5, 4.0, 11.0, 40.0}) {
        CHECK(std::abs(reg_lower_gamma(1.0, x) - p1(x)) < 1e-13);
        CHECK(std::abs(reg_lower_gamma(2.0, x) - p2(x)) < 1e-13);
        CHECK(std::abs(reg_lower_gamma(0.5, x) - p_half(x)) < 1e-13);
    }
}

TEST_CASE("reg_lower_gamma is monotone and maps onto [0,1)") {
    for (double s : {0.5, 1.0, 2.0, 5.0, 50.0}) {
        double prev = 0.0;
        for (double x = 0.0; x <= 20.0 * s; x += 0.05 * s + 0.01) {
            const double p = reg_lower_gamma(s, x);
            CHECK(p >= prev - 1e-14);
            CHECK(p >= 0.0);
            CHECK(p < 1.0 + 1e-15);
            prev = p;
        }
        CHECK(reg_lower_gamma(s, 60.0 * s + 60.0) > 1.0 - 1e-9);
    }
}

TEST_CASE("reg_lower_gamma stays accurate at large shape parameters") {
    // Normal approximation check around the mean: P(s, s) -> 1/2.
    for (double s : {500.0, 5e3, 5e5}) {
        const double p = reg_lower_gamma(s, s);
        CHECK(p > 0.45);
        CHECK(p < 0.55);
        CHECK(reg_lower_gamma(s, s * 1.5) > 0.999);
    }
}

TEST_CASE("reg_lower_gamma domain errors") {
    CHECK_THROWS_AS(reg_lower_gamma(0.0, 1.0), DomainError);
    CHECK_THROWS_AS(reg_lower_gamma(-1.0, 1.0), DomainError);
    CHECK_THROWS_AS(reg_lower_gamma(1.0, -0.1), DomainError);
}

TEST_CASE("alpha_k closed forms at k = 2 and k = 4") {
    // k=2: P(1, alpha) = 1 - e^-alpha = delta  =>  alpha = -ln(1-delta).
    for (double delta : {0.01, 0.05, 0.1}) {
        const auto a = alpha_k(2, delta);
        CHECK_FALSE(a.clamped);
        CHECK(std::abs(a.value + std::log1p(-delta)) < 1e-10);
    }
    // k=4: root of P(2, 2 alpha) = 1 - e^{-2a}(1+2a) = delta, via an
    // independent bisection against the closed form.
    const double delta = 0.05;
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (p2(2.0 * mid) <= delta ? lo : hi) = mid;
    }
    const auto a4 = alpha_k(4, delta);
    CHECK_FALSE(a4.clamped);
    CHECK(std::abs(a4.value - 0.5 * (lo + hi)) < 1e-10);
    CHECK(a4.value > alpha_k(2, delta).value);
}

TEST_CASE("alpha_k sequence is monotone and solves the defining equation") {
    for (double delta : {0.01, 0.05, 0.1}) {
        double prev = 0.0;
        for (int64_t k = 1; k <= 200; ++k) {
            const auto a = alpha_k(k, delta);
            CHECK_FALSE(a.clamped);
            CHECK(a.value >= prev - 1e-12);
            const double residual =
                reg_lower_gamma(0.5 * k, a.value * 0.5 * k) - delta;
            CHECK(std::abs(residual) < 1e-10);
            prev = a.value;
        }
    }
}

TEST_CASE("alpha_k approaches 1 for large k") {
    const auto a = alpha_k(10000, 0.05);
    CHECK_FALSE(a.clamped);
    CHECK(a.value > 0.95);
    CHECK(a.value < 1.0);
}

TEST_CASE("alpha_k clamps when even alpha = 1 satisfies the constraint") {
    // P(1/2, 1/2) = erf(sqrt(1/2)) ~ 0.68; delta above that has no root.
    const auto a = alpha_k(1, 0.75);
    CHECK(a.clamped);
    CHECK(a.value == doctest::Approx(1.0 - 1e-12));
}

TEST_CASE("sample_constant") {
    CHECK(sample_constant({1.0, 2.0 / M_E, 0.0}) == doctest::Approx(4.0).epsilon(1e-12));
    const double c = sample_constant({0.1, 0.05, 0.0});
    CHECK(std::abs(c - 400.0 * std::log(40.0)) < 1e-9);
    CHECK(c == doctest::Approx(1475.55).epsilon(1e-4));
    // (1 + ell) acts linearly.
    for (double eps : {0.3, 1.7}) {
        for (double delta : {0.02, 0.4}) {
            CHECK(sample_constant({eps, delta, 1.0}) ==
                  doctest::Approx(2.0 * sample_constant({eps, delta, 0.0})));
        }
    }
}

TEST_CASE("min_samples_floor") {
    CHECK(min_samples_floor(2.0 / M_E, 1.0) == 8);
    CHECK(min_samples_floor(0.05, 1.0) == 30);  // ceil(8 log 40) = ceil(29.51)
    // Monotone decreasing in ell, tending to zero.
    CHECK(min_samples_floor(0.05, 10.0) < min_samples_floor(0.05, 1.0));
    CHECK(min_samples_floor(0.05, 1e6) <= 1);
    CHECK_THROWS_AS(min_samples_floor(0.05, 0.0), ParameterError);
    CHECK_THROWS_AS(min_samples_floor(0.05, -1.0), ParameterError);
}

TEST_CASE("hanson_wright_c") {
    // c -> 0+ limit is 1.
    const double near_zero = hanson_wright_c(1e-6);
    CHECK(near_zero > 1.0);
    CHECK(near_zero < 1.0 + 1e-4);
    // C(1/4) = -4 + 8 ln 2.
    CHECK(std::abs(hanson_wright_c(0.25) - (-4.0 + 8.0 * std::log(2.0))) < 1e-12);
    // C > 1 throughout the domain.
    std::mt19937 gen(7);
    std::uniform_real_distribution<double> dist(1e-9, 0.5 - 1e-9);
    for (int i = 0; i < 1000; ++i) CHECK(hanson_wright_c(dist(gen)) > 1.0);
    CHECK_THROWS_AS(hanson_wright_c(0.0), DomainError);
    CHECK_THROWS_AS(hanson_wright_c(0.5), DomainError);
    CHECK_THROWS_AS(hanson_wright_c(-0.1), DomainError);
}

TEST_CASE("hw_tail_bound") {
    // eps -> 0 makes the bound vacuous (2).
    CHECK(hw_tail_bound(1.0, 1.0, 5, 0.0, 0.25) == doctest::Approx(2.0));
    // Exponent is linear in m: bound(2m) = bound(m)^2 / 2.
    const double b1 = hw_tail_bound(2.0, 1.2, 3, 0.7, 0.1);
    const double b2 = hw_tail_bound(2.0, 1.2, 6, 0.7, 0.1);
    CHECK(b2 == doctest::Approx(b1 * b1 / 2.0).epsilon(1e-12));
    // Direct evaluation from the statement.
    const double c_val = hanson_wright_c(0.25);
    const double expect = 2.0 * std::exp(-std::min(1.0 / (4.0 * c_val), 0.125));
    CHECK(hw_tail_bound(1.0, 1.0, 1, 1.0, 0.25) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(hw_tail_bound(1.0, 1.0, 1, 1.0, 0.25) == doctest::Approx(1.765).epsilon(1e-3));
    // Monotone decreasing in m and eps.
    CHECK(hw_tail_bound(2.0, 1.0, 10, 0.5, 0.2) < hw_tail_bound(2.0, 1.0, 5, 0.5, 0.2));
    CHECK(hw_tail_bound(2.0, 1.0, 5, 1.0, 0.2) < hw_tail_bound(2.0, 1.0, 5, 0.5, 0.2));
    CHECK_THROWS_AS(hw_tail_bound(1.0, 2.0, 5, 0.5, 0.2), ParameterError);
    CHECK_THROWS_AS(hw_tail_bound(1.0, 1.0, 0, 0.5, 0.2), ParameterError);
}

TEST_CASE("floor and constant agree with the concentration statement") {
    // With m = ceil(C(eps,delta) F^2) and any ell > 0, the bound
    // 2 sqrt(1+ell) sqrt(log(2/delta)/m) F <= eps holds by construction.
    std::mt19937 gen(11);
    std::uniform_real_distribution<double> u(0.1, 3.0);
    for (int i = 0; i < 200; ++i) {
        const double eps = u(gen), ell = u(gen), frob = u(gen);
        const double delta = 0.01 + 0.5 * (u(gen) / 3.0);
        const double c = sample_constant({eps, delta, ell});
        const auto m = static_cast<int64_t>(std::ceil(c * frob * frob));
        const double bound =
            2.0 * std::sqrt(1.0 + ell) * std::sqrt(std::log(2.0 / delta) / m) * frob;
        CHECK(bound <= eps * (1.0 + 1e-12));
    }
}
