#include "dataecon/model.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "dataecon/errors.hpp"

namespace dataecon {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Exponent bundle shared by every closed form.
struct Exponents {
    double g;  // 1 − αη
    double h;  // 1 − β − αη
    double s;  // α + β + αη − 1 = α − h
};

Exponents exponents(const ModelParams& p) {
    const double g = 1.0 - p.alpha * p.eta;
    const double h = g - p.beta;
    return {g, h, p.alpha - h};
}

// αη·log θ, with the η = 0 reduction taking precedence over θ = 0.
double log_theta_power(const ModelParams& p) {
    if (p.eta == 0.0) return 0.0;
    if (p.theta == 0.0) return kNegInf;
    return p.alpha * p.eta * std::log(p.theta);
}

// log l*(k)
double log_labor_demand(double log_k, const ModelParams& p) {
    const auto e = exponents(p);
    const double inner =
        std::log(p.beta / (e.g * p.w)) + log_theta_power(p) / e.g + (p.alpha / e.g) * log_k;
    return (e.g / e.h) * inner;
}

// log y(k, l*(k))
double log_reduced_output(double log_k, const ModelParams& p) {
    const auto e = exponents(p);
    return std::log(e.g * p.w / p.beta) + log_labor_demand(log_k, p);
}

double log_profit_coefficient(const ModelParams& p) {
    const auto e = exponents(p);
    return std::log(e.h / e.g) + log_reduced_output(0.0, p);
}

void require_positive(double x, const char* what) {
    if (!(x > 0.0)) throw DomainError(std::string(what) + " must be positive");
}

}  // namespace

Regime ModelParams::regime() const noexcept {
    Regime r;
    r.composite = composite_exponent();
    r.k_exponent_sign = r.composite > 0.0 ? 1 : (r.composite < 0.0 ? -1 : 0);
    r.singular = std::abs(r.composite) < singular_band;
    return r;
}

ModelParams validate_params(const ModelParams& raw) {
    std::vector<ValidationError::Violation> bad;
    auto check = [&](bool ok, const char* field, const char* bound) {
        if (!ok) bad.push_back({field, bound});
    };
    // Comparisons are written so that NaN fails every check.
    check(raw.alpha > 0.0 && raw.alpha < 1.0, "alpha", "0 < alpha < 1");
    check(raw.beta > 0.0 && raw.beta < 1.0, "beta", "0 < beta < 1");
    check(raw.alpha + raw.beta <= 1.0, "alpha+beta", "alpha + beta <= 1");
    check(raw.eta >= 0.0 && raw.eta < 1.0, "eta", "0 <= eta < 1");
    check(raw.theta >= 0.0 && raw.theta <= 1.0, "theta", "0 <= theta <= 1");
    check(raw.w > 0.0 && std::isfinite(raw.w), "w", "w > 0");
    check(raw.delta > 0.0 && std::isfinite(raw.delta), "delta", "delta > 0");
    check(raw.rho > 0.0 && std::isfinite(raw.rho), "rho", "rho > 0");
    check(raw.sigma > 1.0 && std::isfinite(raw.sigma), "sigma", "sigma > 1");
    check(raw.a > 0.0 && std::isfinite(raw.a), "a", "a > 0");
    check(raw.singular_band >= 0.0 && std::isfinite(raw.singular_band), "singular_band",
          "singular_band >= 0");
    if (bad.empty()) {
        check(1.0 - raw.alpha * raw.eta > 0.0, "eta", "1 - alpha*eta > 0");
        check(raw.reduced_denominator() > 0.0, "eta", "1 - beta - alpha*eta > 0");
    }
    if (!bad.empty()) throw ValidationError(std::move(bad));
    return raw;
}

void require_regular(const ModelParams& p) {
    const Regime r = p.regime();
    if (r.singular) {
        throw RegimeError("singular regime: |alpha + beta + alpha*eta - 1| = " +
                          std::to_string(std::abs(r.composite)) + " < band " +
                          std::to_string(p.singular_band));
    }
}

double data_volume(double y, double theta) {
    if (!(y >= 0.0)) throw DomainError("output must be nonnegative");
    return theta * y;
}

double technology(double d, double eta) {
    if (!(d >= 0.0)) throw DomainError("data volume must be nonnegative");
    if (d == 0.0) {
        if (eta == 0.0) throw DomainError("technology(0, 0) is undefined; use the eta = 0 path");
        return 0.0;
    }
    return std::exp(eta * std::log(d));
}

double output(double k, double l, const ModelParams& p) {
    require_positive(k, "capital");
    require_positive(l, "labor");
    if (p.eta > 0.0 && !(p.theta > 0.0)) throw DomainError("theta must be positive when eta > 0");
    const double g = 1.0 - p.alpha * p.eta;
    return std::exp((log_theta_power(p) + p.alpha * std::log(k) + p.beta * std::log(l)) / g);
}

double marginal_product_labor(double k, double l, const ModelParams& p) {
    const double g = 1.0 - p.alpha * p.eta;
    return (p.beta / g) * output(k, l, p) / l;
}

double labor_demand(double k, const ModelParams& p) {
    require_positive(k, "capital");
    require_regular(p);
    return std::exp(log_labor_demand(std::log(k), p));
}

double reduced_output(double k, const ModelParams& p) {
    require_positive(k, "capital");
    require_regular(p);
    return std::exp(log_reduced_output(std::log(k), p));
}

double profit_coefficient(const ModelParams& p) {
    require_regular(p);
    return std::exp(log_profit_coefficient(p));
}

double accounting_profit(double k, const ModelParams& p) {
    require_positive(k, "capital");
    require_regular(p);
    const auto e = exponents(p);
    return std::exp(log_profit_coefficient(p) + (p.alpha / e.h) * std::log(k));
}

double interest_rate(double k, const ModelParams& p) {
    require_positive(k, "capital");
    require_regular(p);
    const auto e = exponents(p);
    return std::exp(std::log(p.alpha / e.h) + log_profit_coefficient(p) +
                    (e.s / e.h) * std::log(k));
}

double interest_rate_slope(double k, const ModelParams& p) {
    const auto e = exponents(p);
    return (e.s / e.h) * interest_rate(k, p) / k;
}

SteadyState steady_state(const ModelParams& p) {
    require_regular(p);
    const auto e = exponents(p);
    const double log_pi = log_profit_coefficient(p);
    if (!(std::isfinite(log_pi))) {
        throw DegenerateError("profit coefficient pi(w) <= 0: no steady state");
    }
    const double log_k = (e.h / e.s) * (std::log((p.rho + p.delta) * e.h / p.alpha) - log_pi);

    SteadyState ss;
    ss.k_star = std::exp(log_k);
    ss.l_star = std::exp(log_labor_demand(log_k, p));
    ss.y_star = std::exp(log_reduced_output(log_k, p));
    ss.c_star = ss.y_star - p.delta * ss.k_star;
    ss.r_star = p.rho + p.delta;
    ss.feasible = std::isfinite(ss.k_star) && std::isfinite(ss.y_star) && ss.k_star > 0.0 &&
                  ss.c_star > 0.0 && ss.l_star > 0.0;
    return ss;
}

}  // namespace dataecon
