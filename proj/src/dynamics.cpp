#include "dataecon/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dataecon/integrator.hpp"

namespace dataecon {

namespace {

using Vec2 = ode::Vec<2>;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Vec2 to_vec(const State& s) { return {s.c, s.k}; }
State to_state(const Vec2& v) { return {v[0], v[1]}; }

bool in_domain(const Vec2& v) { return v[0] > 0.0 && v[1] > 0.0 && std::isfinite(v[0]) && std::isfinite(v[1]); }

// rhs without the domain check; returns NaN outside the positive quadrant.
Vec2 rhs_vec(const Vec2& v, const ModelParams& p) {
    if (!in_domain(v)) return {kNaN, kNaN};
    const double r = interest_rate(v[1], p);
    const double y = reduced_output(v[1], p);
    return {v[0] * (r - p.rho - p.delta) / p.sigma, y - v[0] - p.delta * v[1]};
}

double rate_norm(const Vec2& r) { return std::hypot(r[0], r[1]); }

TrajectoryStatus map_outcome(ode::Outcome o) {
    switch (o) {
        case ode::Outcome::converged: return TrajectoryStatus::converged;
        case ode::Outcome::left_domain: return TrajectoryStatus::left_domain;
        case ode::Outcome::stopped: return TrajectoryStatus::target_reached;
        case ode::Outcome::reached_end: break;
    }
    return TrajectoryStatus::max_time;
}

Trajectory to_trajectory(const ode::Result<2>& r) {
    Trajectory tr;
    tr.points.reserve(r.samples.size());
    for (const auto& s : r.samples) tr.points.push_back({s.t, to_state(s.y)});
    tr.status = map_outcome(r.outcome);
    return tr;
}

void check_state(const State& s) {
    if (!(s.c > 0.0) || !(s.k > 0.0)) throw DomainError("state must have c > 0 and k > 0");
}

void check_tol(double tol) {
    if (!(tol >= 1e-12 && tol <= 1e-3)) throw DomainError("tolerance must lie in [1e-12, 1e-3]");
}

// Shared driver for forward and backward runs.  `stop` may end the run early.
template <class Stop>
Trajectory run(const State& s0, const ModelParams& p, double t_end, double tol,
               const IntegrateOptions& opts, Stop&& stop) {
    check_state(s0);
    require_regular(p);
    const double ctol = opts.converge_tol < 0.0 ? tol : opts.converge_tol;
    const double rate_scale = p.rho + p.delta;
    auto f = [&p](const Vec2& v) { return rhs_vec(v, p); };
    auto converged = [&](const Vec2& v) {
        return rate_norm(f(v)) <= ctol * rate_scale * std::hypot(v[0], v[1]);
    };

    const Vec2 y0 = to_vec(s0);
    if (converged(y0)) {
        Trajectory tr;
        tr.points.push_back({0.0, s0});
        tr.status = TrajectoryStatus::converged;
        return tr;
    }

    ode::Options<2> o;
    o.rtol = tol;
    o.atol = {tol * 1e-3 * s0.c, tol * 1e-3 * s0.k};
    if (opts.max_step > 0.0) o.h_max = opts.max_step;

    auto hook = [&](double, const Vec2& v) {
        if (stop(v)) return ode::Verdict::stop;
        if (converged(v)) return ode::Verdict::converged;
        return ode::Verdict::proceed;
    };
    try {
        return to_trajectory(ode::integrate<2>(f, y0, 0.0, t_end, o, in_domain, hook));
    } catch (const ode::StepUnderflow<2>& e) {
        throw IntegrationError(e.what(), to_trajectory(e.partial()));
    }
}

}  // namespace

double norm(const State& s) { return std::hypot(s.c, s.k); }
double distance(const State& a, const State& b) { return std::hypot(a.c - b.c, a.k - b.k); }

std::string to_string(TrajectoryStatus s) {
    switch (s) {
        case TrajectoryStatus::converged: return "converged";
        case TrajectoryStatus::max_time: return "max-time";
        case TrajectoryStatus::left_domain: return "left-domain";
        case TrajectoryStatus::target_reached: return "target-reached";
    }
    return "unknown";
}

std::string to_string(Classification c) {
    switch (c) {
        case Classification::saddle: return "saddle";
        case Classification::sink: return "sink";
        case Classification::source: return "source";
        case Classification::spiral_sink: return "spiral-sink";
        case Classification::spiral_source: return "spiral-source";
        case Classification::center_degenerate: return "center-degenerate";
    }
    return "unknown";
}

StateRate rhs(const State& s, const ModelParams& p) {
    check_state(s);
    require_regular(p);
    const Vec2 r = rhs_vec(to_vec(s), p);
    return {r[0], r[1]};
}

Matrix2 jacobian(const State& s, const ModelParams& p) {
    check_state(s);
    require_regular(p);
    const double h = p.reduced_denominator();
    const double r = interest_rate(s.k, p);
    const double y = reduced_output(s.k, p);
    Matrix2 j{};
    j[0][0] = (r - p.rho - p.delta) / p.sigma;
    j[0][1] = s.c * interest_rate_slope(s.k, p) / p.sigma;
    j[1][0] = -1.0;
    j[1][1] = (p.alpha / h) * y / s.k - p.delta;
    return j;
}

EquilibriumAnalysis classify_equilibrium(const ModelParams& p) {
    EquilibriumAnalysis an;
    an.steady = steady_state(p);
    if (!an.steady.feasible) throw DomainError("steady state is infeasible; nothing to classify");
    const State eq{an.steady.c_star, an.steady.k_star};
    an.jacobian = jacobian(eq, p);
    const auto& j = an.jacobian;
    an.trace = j[0][0] + j[1][1];
    an.det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    const double disc = an.trace * an.trace - 4.0 * an.det;

    if (disc >= 0.0) {
        const double root = std::sqrt(disc);
        // Stable quadratic roots of λ² − Tλ + D = 0.
        const double big = 0.5 * (an.trace + std::copysign(root, an.trace == 0.0 ? 1.0 : an.trace));
        const double small = big != 0.0 ? an.det / big : 0.0;
        an.eigen_re = {std::min(big, small), std::max(big, small)};
        an.eigen_im = {0.0, 0.0};
        for (std::size_t i = 0; i < 2; ++i) {
            State v{an.eigen_re[i] - j[1][1], j[1][0]};
            const double n = norm(v);
            v.c /= n;
            v.k /= n;
            if (v.k < 0.0) {
                v.c = -v.c;
                v.k = -v.k;
            }
            an.eigenvectors[i] = v;
        }
    } else {
        const double im = 0.5 * std::sqrt(-disc);
        an.eigen_re = {0.5 * an.trace, 0.5 * an.trace};
        an.eigen_im = {-im, im};
    }

    if (std::abs(an.det) < 1e-12) {
        an.classification = Classification::center_degenerate;
    } else if (an.det < 0.0) {
        an.classification = Classification::saddle;
    } else if (disc >= 0.0) {
        an.classification = an.trace < 0.0 ? Classification::sink
                            : an.trace > 0.0 ? Classification::source
                                             : Classification::center_degenerate;
    } else {
        an.classification = an.trace < 0.0 ? Classification::spiral_sink
                            : an.trace > 0.0 ? Classification::spiral_source
                                             : Classification::center_degenerate;
    }
    return an;
}

Nullclines nullclines(const ModelParams& p, Interval k_range, std::size_t n) {
    if (!(k_range.lo > 0.0) || !(k_range.hi > k_range.lo) || !std::isfinite(k_range.hi) || n < 2) {
        throw DomainError("nullclines need 0 < k_lo < k_hi and at least two samples");
    }
    const SteadyState ss = steady_state(p);
    if (!ss.feasible) throw DomainError("steady state is infeasible");
    if (ss.k_star < k_range.lo || ss.k_star > k_range.hi) {
        throw DomainError("k range must contain k*");
    }
    Nullclines out;
    out.k_nullcline.reserve(n);
    double c_max = ss.c_star;
    for (std::size_t i = 0; i < n; ++i) {
        const double k = k_range.lo + (k_range.hi - k_range.lo) * static_cast<double>(i) /
                                          static_cast<double>(n - 1);
        const double c = reduced_output(k, p) - p.delta * k;
        out.k_nullcline.push_back({k, c});
        c_max = std::max(c_max, c);
    }
    out.c_nullcline.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.c_nullcline.push_back(
            {ss.k_star, 1.2 * c_max * static_cast<double>(i) / static_cast<double>(n - 1)});
    }
    return out;
}

Trajectory integrate(const State& s0, const ModelParams& p, double t_max, double tol,
                     const IntegrateOptions& opts) {
    check_tol(tol);
    if (!(t_max >= 0.0)) throw DomainError("t_max must be nonnegative");
    return run(s0, p, t_max, tol, opts, [](const Vec2&) { return false; });
}

Trajectory integrate_backward(const State& s0, const ModelParams& p, double t_span, double tol,
                              const IntegrateOptions& opts) {
    check_tol(tol);
    if (!(t_span >= 0.0)) throw DomainError("time span must be nonnegative");
    return run(s0, p, -t_span, tol, opts, [](const Vec2&) { return false; });
}

SaddlePath saddle_path(const ModelParams& p, Interval k_targets, const SaddlePathOptions& opts) {
    check_tol(opts.tol);
    SaddlePath out;
    out.equilibrium = classify_equilibrium(p);
    if (out.equilibrium.classification != Classification::saddle) {
        throw ClassificationError("equilibrium is " + to_string(out.equilibrium.classification) +
                                  ", not a saddle");
    }
    const auto& ss = out.equilibrium.steady;
    if (!(k_targets.lo < ss.k_star && k_targets.hi > ss.k_star)) {
        throw DomainError("k targets must bracket k*");
    }
    const double lambda_s = out.equilibrium.eigen_re[0];
    const State v = out.equilibrium.eigenvectors[0];
    out.epsilon = opts.epsilon_factor * ss.k_star;

    IntegrateOptions io;
    io.converge_tol = 0.0;  // the seed sits next to the equilibrium; never stop on ‖rhs‖
    io.max_step = opts.max_step_factor / std::abs(lambda_s);
    const double horizon = opts.max_time_factor / std::abs(lambda_s);

    auto branch = [&](double sign, auto reached) {
        const State seed{ss.c_star + sign * out.epsilon * v.c, ss.k_star + sign * out.epsilon * v.k};
        Trajectory back;
        try {
            back = run(seed, p, -horizon, opts.tol, io, reached);
        } catch (const IntegrationError& e) {
            back = e.partial();
            back.status = TrajectoryStatus::left_domain;
        }
        // Re-express in forward time: far end at t = 0, seed at t = T.
        Trajectory fwd;
        fwd.status = back.status;
        const double t_far = back.points.back().t;
        fwd.points.reserve(back.points.size());
        for (auto it = back.points.rbegin(); it != back.points.rend(); ++it) {
            fwd.points.push_back({it->t - t_far, it->state});
        }
        return fwd;
    };
    out.lower = branch(-1.0, [&](const Vec2& y) { return y[1] <= k_targets.lo; });
    out.upper = branch(+1.0, [&](const Vec2& y) { return y[1] >= k_targets.hi; });
    return out;
}

std::optional<double> branch_consumption_at(const Trajectory& branch, double k,
                                            const ModelParams& p) {
    const auto& pts = branch.points;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const State& a = pts[i].state;
        const State& b = pts[i + 1].state;
        const double lo = std::min(a.k, b.k);
        const double hi = std::max(a.k, b.k);
        if (k < lo || k > hi || a.k == b.k) continue;
        const auto ra = rhs(a, p);
        const auto rb = rhs(b, p);
        const double dk = b.k - a.k;
        const double ma = ra.c_dot / ra.k_dot;
        const double mb = rb.c_dot / rb.k_dot;
        const double s = (k - a.k) / dk;
        const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
        const double h10 = s * (1 - s) * (1 - s);
        const double h01 = s * s * (3 - 2 * s);
        const double h11 = s * s * (s - 1);
        return h00 * a.c + h10 * dk * ma + h01 * b.c + h11 * dk * mb;
    }
    return std::nullopt;
}

ForwardCheck reintegrate_forward(const Trajectory& branch, const ModelParams& p, double tol,
                                 double segment_span) {
    if (branch.points.size() < 2) throw DomainError("branch needs at least two samples");
    if (!(segment_span > 0.0)) throw DomainError("segment span must be positive");
    const SteadyState ss = steady_state(p);
    const State eq{ss.c_star, ss.k_star};
    IntegrateOptions io;
    io.converge_tol = 0.0;

    ForwardCheck out;
    const auto& pts = branch.points;
    std::size_t i = 0;
    State end = pts.front().state;
    while (i + 1 < pts.size()) {
        std::size_t j = i + 1;
        while (j + 1 < pts.size() && pts[j + 1].t - pts[i].t <= segment_span) ++j;
        const Trajectory seg = integrate(pts[i].state, p, pts[j].t - pts[i].t, tol, io);
        end = seg.back();
        out.max_segment_defect =
            std::max(out.max_segment_defect, distance(end, pts[j].state) / norm(pts[j].state));
        ++out.segments;
        i = j;
    }
    out.terminal_distance = distance(end, eq);
    return out;
}

Interval default_k_range(const ModelParams& p) {
    const SteadyState ss = steady_state(p);
    return {0.25 * ss.k_star, 1.75 * ss.k_star};
}

PhasePortrait phase_portrait(const ModelParams& p, Interval k_range, const PhaseOptions& opts) {
    PhasePortrait out;
    out.params = p;
    out.analysis = classify_equilibrium(p);
    out.equilibrium = {out.analysis.steady.c_star, out.analysis.steady.k_star};
    out.nullclines = nullclines(p, k_range, opts.nullcline_samples);
    out.k_range = k_range;
    double c_hi = out.equilibrium.c;
    for (const auto& pt : out.nullclines.k_nullcline) c_hi = std::max(c_hi, pt.y);
    out.c_range = {0.0, 1.2 * c_hi};

    if (out.analysis.classification == Classification::saddle) {
        SaddlePath sp = saddle_path(p, k_range, opts.saddle);
        out.stable_paths.push_back(std::move(sp.lower));
        out.stable_paths.push_back(std::move(sp.upper));
    }

    const std::size_t n = opts.quiver_n;
    out.vector_field.reserve(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        const double k = k_range.lo + (k_range.hi - k_range.lo) * (static_cast<double>(i) + 0.5) /
                                          static_cast<double>(n);
        for (std::size_t jj = 0; jj < n; ++jj) {
            const double c = out.c_range.hi * (static_cast<double>(jj) + 0.5) / static_cast<double>(n);
            const State s{c, k};
            out.vector_field.push_back({s, rhs(s, p)});
        }
    }
    return out;
}

ShockResult shock_experiment(const ModelParams& before, const ModelParams& after,
                             std::optional<Interval> k_range, const PhaseOptions& opts) {
    const SteadyState sb = steady_state(before);
    const SteadyState sa = steady_state(after);
    if (!sb.feasible || !sa.feasible) throw DomainError("shock endpoints must be feasible");
    const Interval range = k_range.value_or(Interval{0.25 * std::min(sb.k_star, sa.k_star),
                                                     1.75 * std::max(sb.k_star, sa.k_star)});
    ShockResult out;
    out.before = phase_portrait(before, range, opts);
    out.after = phase_portrait(after, range, opts);
    out.dk_star = sa.k_star - sb.k_star;
    out.dc_star = sa.c_star - sb.c_star;
    return out;
}

}  // namespace dataecon
