#include "dataecon/firm_q.hpp"

#include <cmath>

#include "dataecon/errors.hpp"

namespace dataecon {

double investment_rate(double q, const ModelParams& p) { return p.delta + (q - 1.0) / p.a; }

double capital_growth_rate(double q, const ModelParams& p) {
    return investment_rate(q, p) - p.delta;
}

double marginal_product_capital(double k, const ModelParams& p) { return interest_rate(k, p); }

double adjustment_term(double q, const ModelParams& p, LinearTermReading reading) {
    const double gap = q - 1.0;
    const double linear_denominator = reading == LinearTermReading::adjustment_a ? p.a : p.alpha;
    return 0.5 * p.a * (gap * gap / (p.a * p.a) + 2.0 * p.delta / linear_denominator * gap);
}

double q_dot(const QState& s, double r, const ModelParams& p, LinearTermReading reading) {
    if (!(s.q > 0.0) || !(s.k > 0.0)) throw DomainError("q and k must be positive");
    return (r + p.delta) * s.q - marginal_product_capital(s.k, p) - adjustment_term(s.q, p, reading);
}

double k_of_q(double q, double r, const ModelParams& p, LinearTermReading reading) {
    require_regular(p);
    if (!(q > 0.0)) throw DomainError("q must be positive");
    const double numerator = (r + p.delta) * q - adjustment_term(q, p, reading);
    if (!(numerator > 0.0)) {
        throw DegenerateError("no steady capital at q = " + std::to_string(q) +
                              ": bracketed numerator is nonpositive");
    }
    const double h = p.reduced_denominator();
    const double s = p.composite_exponent();
    const double log_mpk_coef = std::log(p.alpha / h) + std::log(profit_coefficient(p));
    return std::exp((h / s) * (std::log(numerator) - log_mpk_coef));
}

QState firm_steady_state(double r, const ModelParams& p) { return {1.0, k_of_q(1.0, r, p)}; }

}  // namespace dataecon
