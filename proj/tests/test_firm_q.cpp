#include <cmath>

#include "doctest.h"
#include "oracles.hpp"

#include "dataecon/errors.hpp"
#include "dataecon/firm_q.hpp"

using namespace dataecon;
using doctest::Approx;

namespace {

ModelParams at(double theta, double eta) { return ModelParams{}.with_policy(theta, eta); }

}  // namespace

TEST_CASE("investment rate is linear in q") {
    const ModelParams p;
    CHECK(investment_rate(1.0, p) == p.delta);
    CHECK(investment_rate(1.0, p) == 0.08);
    CHECK(investment_rate(1.0 + p.a * 0.01, p) == Approx(p.delta + 0.01).epsilon(1e-14));
    CHECK(investment_rate(1.0 - p.a * p.delta, p) == Approx(0.0).epsilon(1e-15));
    CHECK(capital_growth_rate(1.0, p) == 0.0);
}

TEST_CASE("q dynamics at q = 1") {
    const auto p = at(0.5, 0.2);
    CHECK(adjustment_term(1.0, p) == 0.0);
    CHECK(adjustment_term(1.0, p, LinearTermReading::printed_alpha) == 0.0);
    const double r = p.rho;
    const double k = k_of_q(1.0, r, p);
    CHECK(marginal_product_capital(k, p) == Approx(r + p.delta).epsilon(1e-12));
    CHECK(std::abs(q_dot({1.0, k}, r, p)) < 1e-12);
    CHECK(q_dot({1.0, 2.0 * k}, r, p) > 0.0);
    CHECK(q_dot({1.0, 0.5 * k}, r, p) < 0.0);
}

TEST_CASE("k_of_q reduces to the textbook steady state") {
    const oracle::Textbook tb;
    const double k = k_of_q(1.0, 0.07, at(0.5, 0.0));
    CHECK(k == Approx(tb.k_star()).epsilon(1e-9));
    CHECK(k == Approx(51.199).epsilon(0.01 / 51.199));
    CHECK(firm_steady_state(0.07, at(0.5, 0.0)).k == Approx(51.199).epsilon(0.01 / 51.199));
}

TEST_CASE("q_dot vanishes along k_of_q for both readings") {
    for (double eta : {0.1, 0.2, 0.6}) {
        const auto p = at(0.5, eta);
        for (auto reading : {LinearTermReading::adjustment_a, LinearTermReading::printed_alpha}) {
            for (double q : {0.9, 0.95, 1.0, 1.05, 1.2}) {
                for (double r : {0.03, 0.07, 0.1}) {
                    const double k = k_of_q(q, r, p, reading);
                    const double scale = (r + p.delta) * q;
                    CHECK(std::abs(q_dot({q, k}, r, p, reading)) < 1e-12 * scale);
                }
            }
        }
        // The readings agree only where the linear term vanishes.
        CHECK(k_of_q(1.0, 0.07, p, LinearTermReading::adjustment_a) ==
              k_of_q(1.0, 0.07, p, LinearTermReading::printed_alpha));
        CHECK(k_of_q(1.1, 0.07, p, LinearTermReading::adjustment_a) !=
              Approx(k_of_q(1.1, 0.07, p, LinearTermReading::printed_alpha)));
    }
}

TEST_CASE("firm steady state agrees with the household steady state") {
    for (double theta : {0.1, 0.5, 0.9}) {
        for (double eta : {0.0, 0.2, 0.45, 0.9}) {
            const auto p = at(theta, eta);
            const auto fs = firm_steady_state(p.rho, p);
            CHECK(fs.q == 1.0);
            CHECK(fs.k == Approx(steady_state(p).k_star).epsilon(1e-8));
        }
    }
}

TEST_CASE("degenerate and invalid requests") {
    const auto p = at(0.5, 0.2);
    // (r + δ)q − (a/2)[(q−1)²/a² + (2δ/a)(q−1)] turns negative for large q.
    CHECK_THROWS_AS(k_of_q(20.0, 0.07, p), DegenerateError);
    CHECK_THROWS_AS(k_of_q(-1.0, 0.07, p), DomainError);
    CHECK_THROWS_AS(k_of_q(1.0, 0.07, at(0.5, 1.0 / 3.0)), RegimeError);
    CHECK_THROWS_AS(q_dot({1.0, -1.0}, 0.07, p), DomainError);
}
