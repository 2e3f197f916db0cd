#pragma once

// Dormand–Prince 5(4) explicit Runge–Kutta with embedded error estimate
// and PI-free step-size control.  Integrates forward or backward in time
// depending on the sign of t_end − t0.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dataecon::ode {

template <std::size_t N>
using Vec = std::array<double, N>;

template <std::size_t N>
struct Sample {
    double t;
    Vec<N> y;
};

enum class Outcome { reached_end, converged, stopped, left_domain };

template <std::size_t N>
struct Result {
    std::vector<Sample<N>> samples;
    Outcome outcome = Outcome::reached_end;
    std::size_t rejected_steps = 0;
};

template <std::size_t N>
class StepUnderflow : public std::runtime_error {
public:
    StepUnderflow(const std::string& what, Result<N> partial)
        : std::runtime_error(what), partial_(std::move(partial)) {}
    const Result<N>& partial() const noexcept { return partial_; }

private:
    Result<N> partial_;
};

template <std::size_t N>
struct Options {
    double rtol = 1e-9;
    Vec<N> atol{};          // absolute tolerance per component
    double h_initial = 0.0;  // 0 selects a starting step automatically
    double h_max = std::numeric_limits<double>::infinity();
    std::size_t max_steps = 2'000'000;
};

// Verdict returned by the caller's per-step hook.
enum class Verdict { proceed, converged, stop };

namespace detail {

// Dormand–Prince tableau.
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// b − b̂ (fifth minus fourth order weights)
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

template <std::size_t N>
Vec<N> axpy(const Vec<N>& y, double h, std::initializer_list<std::pair<double, const Vec<N>*>> terms) {
    Vec<N> out = y;
    for (const auto& [coef, k] : terms) {
        for (std::size_t i = 0; i < N; ++i) out[i] += h * coef * (*k)[i];
    }
    return out;
}

template <std::size_t N>
bool finite(const Vec<N>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace detail

// f(y) -> dy/dt (autonomous).  valid(y) guards the domain; a step whose
// stages leave the domain is retried with a smaller step, and the run ends
// with Outcome::left_domain once the step cannot shrink further.  hook(t, y)
// runs after every accepted step.
template <std::size_t N, class Rhs, class Valid, class Hook>
Result<N> integrate(Rhs&& f, Vec<N> y, double t0, double t_end, const Options<N>& opt,
                    Valid&& valid, Hook&& hook) {
    using namespace detail;
    Result<N> res;
    res.samples.push_back({t0, y});
    if (t_end == t0) return res;

    const double dir = t_end > t0 ? 1.0 : -1.0;
    double t = t0;
    Vec<N> k1 = f(y);

    auto error_norm = [&](const Vec<N>& y0, const Vec<N>& y1, const Vec<N>& err) {
        double acc = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sc = opt.atol[i] + opt.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
            const double r = err[i] / sc;
            acc += r * r;
        }
        return std::sqrt(acc / static_cast<double>(N));
    };

    double h = opt.h_initial;
    if (h <= 0.0) {
        // Hairer–Wanner starting-step heuristic, first stage only.
        double d0 = 0.0, d1 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sc = opt.atol[i] + opt.rtol * std::abs(y[i]);
            d0 += (y[i] / sc) * (y[i] / sc);
            d1 += (k1[i] / sc) * (k1[i] / sc);
        }
        d0 = std::sqrt(d0 / N);
        d1 = std::sqrt(d1 / N);
        h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    }
    h = std::min({h, opt.h_max, std::abs(t_end - t0)});

    bool domain_hit = false;
    for (std::size_t step = 0; step < opt.max_steps; ++step) {
        const double h_min = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
        if (h < h_min) {
            if (domain_hit) {
                res.outcome = Outcome::left_domain;
                return res;
            }
            throw StepUnderflow<N>("step size underflow at t = " + std::to_string(t), res);
        }
        const double hs = dir * h;
        const Vec<N> y2 = axpy<N>(y, hs, {{a21, &k1}});
        bool ok = valid(y2);
        Vec<N> k2{}, k3{}, k4{}, k5{}, k6{}, k7{};
        Vec<N> y_new{};
        if (ok) {
            k2 = f(y2);
            const Vec<N> y3 = axpy<N>(y, hs, {{a31, &k1}, {a32, &k2}});
            ok = valid(y3);
            if (ok) {
                k3 = f(y3);
                const Vec<N> y4 = axpy<N>(y, hs, {{a41, &k1}, {a42, &k2}, {a43, &k3}});
                ok = valid(y4);
                if (ok) {
                    k4 = f(y4);
                    const Vec<N> y5 = axpy<N>(y, hs, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}});
                    ok = valid(y5);
                    if (ok) {
                        k5 = f(y5);
                        const Vec<N> y6 = axpy<N>(
                            y, hs, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}});
                        ok = valid(y6);
                        if (ok) {
                            k6 = f(y6);
                            y_new = axpy<N>(
                                y, hs, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
                            ok = valid(y_new);
                            if (ok) k7 = f(y_new);
                        }
                    }
                }
            }
        }
        if (!ok || !finite(k7)) {
            domain_hit = true;
            h *= 0.25;
            ++res.rejected_steps;
            continue;
        }

        Vec<N> err{};
        for (std::size_t i = 0; i < N; ++i) {
            err[i] = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                           e7 * k7[i]);
        }
        const double en = error_norm(y, y_new, err);
        if (!std::isfinite(en) || en > 1.0) {
            const double fac = std::isfinite(en) ? std::max(0.2, 0.9 * std::pow(en, -0.2)) : 0.2;
            h *= fac;
            ++res.rejected_steps;
            continue;
        }

        domain_hit = false;
        const bool last = std::abs(t_end - (t + hs)) <= h_min || h >= std::abs(t_end - t);
        t = last ? t_end : t + hs;
        y = y_new;
        k1 = k7;
        res.samples.push_back({t, y});

        const Verdict v = hook(t, y);
        if (v == Verdict::converged) {
            res.outcome = Outcome::converged;
            return res;
        }
        if (v == Verdict::stop) {
            res.outcome = Outcome::stopped;
            return res;
        }
        if (last) {
            res.outcome = Outcome::reached_end;
            return res;
        }

        const double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
        h = std::min({h * fac, opt.h_max, std::abs(t_end - t)});
    }
    throw StepUnderflow<N>("maximum step count exceeded", res);
}

}  // namespace dataecon::ode
