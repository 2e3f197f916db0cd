#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"

#include "dataecon/dynamics.hpp"
#include "dataecon/errors.hpp"
#include "dataecon/model.hpp"

using namespace dataecon;
using doctest::Approx;

namespace {

ModelParams at(double theta, double eta) { return ModelParams{}.with_policy(theta, eta); }

double relative(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("baseline parameters validate and sit in the decreasing-returns regime") {
    const auto p = validate_params(ModelParams{});
    CHECK(p.alpha == 0.6);
    CHECK(p.beta == 0.2);
    CHECK(p.w == 1.0);
    CHECK(p.delta == 0.08);
    CHECK(p.rho == 0.07);
    CHECK(p.regime().k_exponent_sign == -1);
    CHECK_FALSE(p.regime().singular);
}

TEST_CASE("validation reports every violated field") {
    ModelParams raw;
    raw.alpha = 1.2;
    try {
        validate_params(raw);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        REQUIRE_FALSE(e.violations().empty());
        CHECK(e.violations().front().field == "alpha");
        CHECK(std::string(e.what()).find("alpha") != std::string::npos);
    }

    raw = ModelParams{};
    raw.sigma = 1.0;
    raw.w = -1.0;
    raw.theta = 1.5;
    try {
        validate_params(raw);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.violations().size() == 3);
    }

    raw = ModelParams{};
    raw.alpha = 0.9;
    raw.beta = 0.2;
    CHECK_THROWS_AS(validate_params(raw), ValidationError);
    raw.eta = std::nan("");
    CHECK_THROWS_AS(validate_params(raw), ValidationError);
}

TEST_CASE("the band around eta = (1 - alpha - beta)/alpha is singular") {
    const auto p = at(0.5, 1.0 / 3.0);
    CHECK(p.regime().singular);
    CHECK(std::abs(p.composite_exponent()) < 1e-15);
    CHECK_THROWS_AS(require_regular(p), RegimeError);
    CHECK_THROWS_AS(steady_state(p), RegimeError);
    CHECK_FALSE(at(0.5, 0.2).regime().singular);
    CHECK(at(0.5, 0.8).regime().k_exponent_sign == 1);
    // Band edges: |0.6η − 0.2| < 0.02.
    CHECK(at(0.5, 0.301).regime().singular);
    CHECK_FALSE(at(0.5, 0.299).regime().singular);
    CHECK(at(0.5, 0.366).regime().singular);
    CHECK_FALSE(at(0.5, 0.368).regime().singular);
}

TEST_CASE("data volume and technology level") {
    CHECK(data_volume(2.0, 1.0) == 2.0);
    CHECK(data_volume(2.0, 0.5) == 1.0);
    CHECK(data_volume(0.0, 0.7) == 0.0);
    CHECK(technology(1.0, 0.5) == 1.0);
    CHECK(technology(4.0, 0.5) == Approx(2.0).epsilon(1e-15));
    CHECK(technology(0.673, 0.5) == Approx(0.82037).epsilon(1e-5));
    CHECK(technology(0.0, 0.5) == 0.0);
    CHECK_THROWS_AS(technology(0.0, 0.0), DomainError);
    CHECK_THROWS_AS(technology(-1.0, 0.5), DomainError);
}

TEST_CASE("output matches the fixed-point oracle") {
    CHECK(output(1.0, 1.0, at(1.0, 0.7)) == Approx(1.0).epsilon(1e-14));
    CHECK(output(1.0, 1.0, at(0.3, 0.0)) == Approx(1.0).epsilon(1e-14));

    const auto p = at(0.5, 0.5);
    const double y = output(2.0, 1.0, p);
    CHECK(y == Approx(oracle::output_fixed_point(2.0, 1.0, 0.6, 0.2, 0.5, 0.5)).epsilon(1e-12));
    CHECK(std::abs(y - 1.3460) <= 1e-4);
    CHECK(y == Approx(1.3459002).epsilon(1e-7));

    // The fixed-point technology level closes the loop: z = (θy)^η.
    const double z = technology(data_volume(y, p.theta), p.eta);
    CHECK(std::pow(z * 2.0, p.alpha) == Approx(y).epsilon(1e-12));

    CHECK_THROWS_AS(output(-1.0, 1.0, p), DomainError);
    CHECK_THROWS_AS(output(1.0, 1.0, at(0.0, 0.5)), DomainError);
    CHECK(output(1.0, 1.0, at(0.0, 0.0)) == Approx(1.0));
}

TEST_CASE("labor demand satisfies the first-order condition") {
    CHECK(labor_demand(1.0, at(0.5, 0.0)) == Approx(std::pow(0.2, 1.25)).epsilon(1e-12));
    CHECK(labor_demand(1.0, at(0.5, 0.0)) == Approx(0.13375).epsilon(1e-4));
    CHECK(labor_demand(51.199, at(0.5, 0.0)) == Approx(2.560).epsilon(1e-3));

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        auto p = at(0.05 + 0.9 * U(rng), 0.95 * U(rng));
        if (p.regime().singular) continue;
        const double k = std::exp(-3.0 + 8.0 * U(rng));
        const double l = labor_demand(k, p);
        // Finite-difference MPL against the fixed-point oracle, not the closed form.
        const double h = 1e-6 * l;
        const double mpl = oracle::central_difference(
            [&](double x) { return oracle::output_fixed_point(k, x, p.alpha, p.beta, p.theta, p.eta); }, l, h);
        CHECK(mpl == Approx(p.w).epsilon(1e-5));
        CHECK(marginal_product_labor(k, l, p) == Approx(p.w).epsilon(1e-10));
    }
}

TEST_CASE("profit coefficient matches the textbook reduction and the k = 1 profit") {
    const oracle::Textbook tb;
    CHECK(profit_coefficient(at(0.5, 0.0)) == Approx(tb.profit_coefficient()).epsilon(1e-12));
    CHECK(profit_coefficient(at(0.5, 0.0)) == Approx(0.53499).epsilon(1e-5));

    // Maximize y(1, l) − w l directly over l by golden section on log l.
    const auto p = at(0.5, 0.2);
    auto profit = [&](double ll) {
        const double l = std::exp(ll);
        return oracle::output_fixed_point(1.0, l, p.alpha, p.beta, p.theta, p.eta) - p.w * l;
    };
    double lo = -20.0, hi = 5.0;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int i = 0; i < 200; ++i) {
        const double m1 = hi - g * (hi - lo), m2 = lo + g * (hi - lo);
        (profit(m1) < profit(m2) ? lo : hi) = (profit(m1) < profit(m2) ? m1 : m2);
    }
    CHECK(relative(profit_coefficient(p), profit(0.5 * (lo + hi))) < 1e-8);
    CHECK(accounting_profit(1.0, p) == Approx(profit_coefficient(p)).epsilon(1e-14));
}

TEST_CASE("interest rate") {
    const oracle::Textbook tb;
    CHECK(interest_rate(1.0, at(0.5, 0.0)) == Approx(0.75 * tb.profit_coefficient()).epsilon(1e-12));
    CHECK(interest_rate(1.0, at(0.5, 0.0)) == Approx(0.40125).epsilon(1e-4));
    CHECK(interest_rate(51.199, at(0.5, 0.0)) == Approx(0.15).epsilon(1e-4));

    // r is the derivative of the maximized profit.
    for (double eta : {0.0, 0.2, 0.5, 0.8}) {
        const auto p = at(0.6, eta);
        for (double k : {0.5, 3.0, 40.0}) {
            const double fd = oracle::central_difference([&](double x) { return accounting_profit(x, p); }, k,
                                                         1e-5 * k);
            CHECK(interest_rate(k, p) == Approx(fd).epsilon(1e-7));
            const double slope_fd =
                oracle::central_difference([&](double x) { return interest_rate(x, p); }, k, 1e-5 * k);
            CHECK(interest_rate_slope(k, p) == Approx(slope_fd).epsilon(1e-6));
        }
    }
}

TEST_CASE("steady state at eta = 0 reproduces the textbook Ramsey model") {
    const oracle::Textbook tb;
    const auto ss = steady_state(at(0.5, 0.0));
    CHECK(relative(ss.k_star, tb.k_star()) < 1e-9);
    CHECK(relative(ss.c_star, tb.c_star()) < 1e-9);
    CHECK(ss.k_star == Approx(51.199).epsilon(0.01 / 51.199));
    CHECK(ss.c_star == Approx(8.706).epsilon(0.01 / 8.706));
    CHECK(ss.r_star == Approx(0.15).epsilon(1e-14));
    CHECK(ss.feasible);
    CHECK(steady_state(at(0.3, 0.0)) == steady_state(at(0.9, 0.0)));
}

TEST_CASE("steady state solves r(k*) = rho + delta and zeroes the dynamics") {
    for (double eta : {0.05, 0.2, 0.28, 0.4, 0.6, 0.9}) {
        for (double theta : {0.1, 0.5, 0.9}) {
            const auto p = at(theta, eta);
            const auto ss = steady_state(p);
            CHECK(interest_rate(ss.k_star, p) == Approx(0.15).epsilon(1e-12));
            const double k_bisect = std::exp(oracle::bisect(
                [&](double lk) { return std::log(interest_rate(std::exp(lk), p)) - std::log(0.15); }, -200.0,
                200.0));
            CHECK(relative(ss.k_star, k_bisect) < 1e-9);
            const auto f = rhs({ss.c_star, ss.k_star}, p);
            CHECK(std::abs(f.c_dot) < 1e-8 * ss.c_star);
            CHECK(std::abs(f.k_dot) < 1e-8 * ss.k_star);
            // c*/k* depends only on the technology exponents.
            CHECK(ss.c_star / ss.k_star == Approx(0.15 * (1 - 0.6 * eta) / 0.6 - 0.08).epsilon(1e-10));
            CHECK(ss.l_star == Approx(labor_demand(ss.k_star, p)).epsilon(1e-12));
        }
    }
}

TEST_CASE("degenerate inputs") {
    auto p = at(0.0, 0.2);
    CHECK_THROWS_AS(steady_state(p), Error);
    CHECK_THROWS_AS(labor_demand(0.0, at(0.5, 0.2)), DomainError);
}
