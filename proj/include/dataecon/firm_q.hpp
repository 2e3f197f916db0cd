#pragma once

#include "dataecon/model.hpp"

namespace dataecon {

// Shadow price of installed capital together with the capital stock.
struct QState {
    double q = 1.0;
    double k = 0.0;
};

// The steady-capital bracket carries a linear adjustment term printed as
// 2δ/α; the costate equation it is derived from has 2δ/a.  The default
// reads it as the adjustment parameter a.
enum class LinearTermReading { adjustment_a, printed_alpha };

// i/k = δ + (q − 1)/a
double investment_rate(double q, const ModelParams& p);

// k̇/k = (q − 1)/a
double capital_growth_rate(double q, const ModelParams& p);

// Marginal product of capital in the reduced profit, identical to r(k).
double marginal_product_capital(double k, const ModelParams& p);

// (a/2)[(q − 1)²/a² + (2δ/x)(q − 1)], x = a or α per `reading`.
double adjustment_term(double q, const ModelParams& p,
                       LinearTermReading reading = LinearTermReading::adjustment_a);

// q̇ = (r + δ)q − MPK(k) − adjustment_term(q)
double q_dot(const QState& s, double r, const ModelParams& p,
             LinearTermReading reading = LinearTermReading::adjustment_a);

// Capital stock with q̇ = 0 at the given q and discount rate.
double k_of_q(double q, double r, const ModelParams& p,
              LinearTermReading reading = LinearTermReading::adjustment_a);

// (q = 1, k_of_q(1, r, p))
QState firm_steady_state(double r, const ModelParams& p);

}  // namespace dataecon
