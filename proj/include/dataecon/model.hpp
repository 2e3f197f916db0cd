#pragma once

namespace dataecon {

// Sign of the composite exponent α + β + αη − 1 together with the
// singular-band flag.  Negative sign is the decreasing-returns regime.
struct Regime {
    int k_exponent_sign = 0;
    bool singular = false;
    double composite = 0.0;
};

// Full parameter vector of the data economy.  Defaults are the baseline
// calibration (α=0.6, β=0.2, w=1, δ=0.08, ρ=0.07) with σ=2, a=2 and a
// reference point η=0.2, θ=0.5 for the two policy parameters.
struct ModelParams {
    double alpha = 0.6;   // capital output elasticity
    double beta = 0.2;    // labor output elasticity
    double eta = 0.2;     // data-technology conversion rate
    double theta = 0.5;   // dataization proportion of output
    double w = 1.0;       // wage level
    double delta = 0.08;  // depreciation
    double rho = 0.07;    // utility discount rate
    double sigma = 2.0;   // relative risk aversion
    double a = 2.0;       // investment adjustment-cost coefficient

    double singular_band = 0.02;

    // α + β + αη − 1
    double composite_exponent() const noexcept { return alpha + beta + alpha * eta - 1.0; }
    // 1 − β − αη
    double reduced_denominator() const noexcept { return 1.0 - beta - alpha * eta; }

    Regime regime() const noexcept;

    ModelParams with_policy(double theta_value, double eta_value) const noexcept {
        ModelParams p = *this;
        p.theta = theta_value;
        p.eta = eta_value;
        return p;
    }

    bool operator==(const ModelParams&) const = default;
};

struct SteadyState {
    double k_star = 0.0;
    double c_star = 0.0;
    double l_star = 0.0;
    double y_star = 0.0;
    double r_star = 0.0;
    bool feasible = false;

    bool operator==(const SteadyState&) const = default;
};

// Checks every invariant of ModelParams and throws ValidationError listing
// all violations at once.
ModelParams validate_params(const ModelParams& raw);

// Throws RegimeError if p lies in the singular band.
void require_regular(const ModelParams& p);

// d = θ·y
double data_volume(double y, double theta);

// z = d^η; 0^0 is rejected.
double technology(double d, double eta);

// Output with the data fixed point solved out:
//   y = θ^{αη/(1−αη)} k^{α/(1−αη)} l^{β/(1−αη)}
double output(double k, double l, const ModelParams& p);

// Marginal product of labor ∂y/∂l.
double marginal_product_labor(double k, double l, const ModelParams& p);

// Profit-maximizing labor input l*(k).
double labor_demand(double k, const ModelParams& p);

// y(k, l*(k)) = C·k^{α/(1−β−αη)}, the output used by the capital equation.
double reduced_output(double k, const ModelParams& p);

// π(w): accounting profit at the labor optimum equals π(w)·k^{α/(1−β−αη)}.
double profit_coefficient(const ModelParams& p);

double accounting_profit(double k, const ModelParams& p);

// Endogenous interest rate, the marginal value of capital:
//   r(k) = α/(1−β−αη) · π(w) · k^{(α+β+αη−1)/(1−β−αη)}
double interest_rate(double k, const ModelParams& p);

// dr/dk
double interest_rate_slope(double k, const ModelParams& p);

// Closed-form (k*, c*) with l*, y*, r* = ρ + δ.  c* ≤ 0 yields
// feasible = false rather than an error.
SteadyState steady_state(const ModelParams& p);

}  // namespace dataecon
