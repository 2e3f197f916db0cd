#include "dataecon/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <thread>
#include <tuple>

#include "dataecon/errors.hpp"

namespace dataecon {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_axis(const std::vector<double>& axis, const char* name) {
    if (axis.empty()) throw DomainError(std::string(name) + " axis is empty");
    for (std::size_t i = 0; i < axis.size(); ++i) {
        if (!(axis[i] >= 0.0 && axis[i] < 1.0)) {
            throw DomainError(std::string(name) + " axis values must lie in [0, 1)");
        }
        if (i > 0 && !(axis[i] > axis[i - 1])) {
            throw DomainError(std::string(name) + " axis must be strictly increasing");
        }
    }
}

// Steady state of one cell with its mask; never throws for model reasons.
std::pair<std::optional<SteadyState>, CellMask> evaluate_cell(const ModelParams& p) {
    if (p.regime().singular) return {std::nullopt, CellMask::singular};
    try {
        const SteadyState ss = steady_state(validate_params(p));
        if (!ss.feasible) return {std::nullopt, CellMask::infeasible};
        return {ss, CellMask::ok};
    } catch (const DegenerateError&) {
        return {std::nullopt, CellMask::degenerate};
    } catch (const ValidationError&) {
        return {std::nullopt, CellMask::degenerate};
    }
}

double value_of(const SteadyState& ss, EquilibriumVariable v) {
    return v == EquilibriumVariable::k_star ? ss.k_star : ss.c_star;
}

}  // namespace

std::string to_string(CellMask m) {
    switch (m) {
        case CellMask::ok: return "ok";
        case CellMask::singular: return "singular";
        case CellMask::infeasible: return "infeasible";
        case CellMask::degenerate: return "degenerate";
    }
    return "unknown";
}

std::string to_string(ThresholdShape s) {
    return s == ThresholdShape::interior_peak ? "interior-peak" : "monotone-on-range";
}

std::string to_string(EquilibriumVariable v) {
    return v == EquilibriumVariable::k_star ? "k_star" : "c_star";
}

std::size_t SweepGrid::count(CellMask m) const {
    return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), m));
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = lo;
        return out;
    }
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return out;
}

SweepGrid grid_sweep(const ModelParams& base, std::vector<double> theta_axis,
                     std::vector<double> eta_axis, unsigned threads) {
    check_axis(theta_axis, "theta");
    check_axis(eta_axis, "eta");
    SweepGrid g;
    g.base = base;
    g.theta_axis = std::move(theta_axis);
    g.eta_axis = std::move(eta_axis);
    const std::size_t rows = g.theta_axis.size();
    const std::size_t cols = g.eta_axis.size();
    g.cells.assign(rows * cols, std::nullopt);
    g.mask.assign(rows * cols, CellMask::ok);

    auto do_rows = [&](std::size_t first, std::size_t stride) {
        for (std::size_t i = first; i < rows; i += stride) {
            for (std::size_t j = 0; j < cols; ++j) {
                auto [cell, m] = evaluate_cell(base.with_policy(g.theta_axis[i], g.eta_axis[j]));
                g.cells[g.index(i, j)] = cell;
                g.mask[g.index(i, j)] = m;
            }
        }
    };
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, rows));
    if (workers == 1) {
        do_rows(0, 1);
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(do_rows, w, workers);
    }
    return g;
}

std::vector<Interval> split_around_singular_band(const ModelParams& base, Interval eta_range) {
    if (!(eta_range.lo >= 0.0 && eta_range.hi < 1.0 && eta_range.lo < eta_range.hi)) {
        throw DomainError("eta range must satisfy 0 <= lo < hi < 1");
    }
    // |α(η − η_s)| < band  ⇔  η ∈ (η_s − band/α, η_s + band/α)
    const double eta_s = (1.0 - base.alpha - base.beta) / base.alpha;
    const double half = base.singular_band / base.alpha;
    const double nudge = 1e-9;
    std::vector<Interval> out;
    const Interval below{eta_range.lo, std::min(eta_range.hi, eta_s - half - nudge)};
    const Interval above{std::max(eta_range.lo, eta_s + half + nudge), eta_range.hi};
    if (below.hi > below.lo) out.push_back(below);
    if (above.hi > above.lo) out.push_back(above);
    return out;
}

double golden_section_maximize(const std::function<double(double)>& f, double lo, double hi,
                               double tol) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    if (!std::isfinite(f1)) f1 = kNegInf;
    if (!std::isfinite(f2)) f2 = kNegInf;
    while (b - a > tol) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
            if (!std::isfinite(f2)) f2 = kNegInf;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
            if (!std::isfinite(f1)) f1 = kNegInf;
        }
    }
    return 0.5 * (a + b);
}

MaximumResult locate_maximum(const std::function<double(double)>& f, Interval range,
                             std::size_t coarse, double tol) {
    if (coarse < 3) throw DomainError("coarse scan needs at least three samples");
    const auto xs = linspace(range.lo, range.hi, coarse);
    std::size_t best = 0;
    double best_value = kNegInf;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double v = f(xs[i]);
        if (!std::isfinite(v)) v = kNegInf;
        if (v > best_value) {
            best_value = v;
            best = i;
        }
    }
    if (best_value == kNegInf) throw SearchError("no finite value on the search range");

    const double lo = xs[best == 0 ? 0 : best - 1];
    const double hi = xs[std::min(best + 1, xs.size() - 1)];
    double x = golden_section_maximize(f, lo, hi, tol);
    double fx = f(x);
    if (!std::isfinite(fx)) fx = kNegInf;
    // Golden section cannot land exactly on an endpoint; keep the sample if it wins.
    if (fx < best_value) {
        x = xs[best];
        fx = best_value;
    }
    MaximumResult out;
    out.x = x;
    out.value = fx;
    out.at_boundary = (best == 0 || best + 1 == xs.size()) &&
                      (std::abs(x - range.lo) <= tol || std::abs(x - range.hi) <= tol);
    return out;
}

std::function<double(double)> consumption_in_eta(const ModelParams& base, double theta) {
    return [base, theta](double eta) {
        auto [cell, m] = evaluate_cell(base.with_policy(theta, eta));
        return m == CellMask::ok ? cell->c_star : kNegInf;
    };
}

std::vector<ThresholdResult> consumption_threshold(const ModelParams& base, double theta,
                                                   Interval eta_range, double tol,
                                                   std::size_t coarse) {
    if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
    const auto f = consumption_in_eta(base, theta);
    std::vector<ThresholdResult> out;
    for (const Interval& seg : split_around_singular_band(base, eta_range)) {
        const MaximumResult m = locate_maximum(f, seg, coarse, tol);
        ThresholdResult r;
        r.theta = theta;
        r.eta_range = seg;
        r.eta_star = m.x;
        r.c_star_max = m.value;
        r.shape = m.at_boundary ? ThresholdShape::monotone_on_range : ThresholdShape::interior_peak;
        out.push_back(r);
    }
    return out;
}

ThresholdCurve threshold_curve(const ModelParams& base, const std::vector<double>& thetas,
                               Interval eta_range, double tol, std::size_t coarse) {
    ThresholdCurve curve;
    curve.theta = thetas;
    curve.segments = split_around_singular_band(base, eta_range);
    curve.by_segment.assign(curve.segments.size(), {});
    for (double th : thetas) {
        auto rs = consumption_threshold(base, th, eta_range, tol, coarse);
        for (std::size_t s = 0; s < rs.size(); ++s) curve.by_segment[s].push_back(rs[s]);
    }
    return curve;
}

std::size_t IsoContour::point_count() const {
    std::size_t n = 0;
    for (const auto& pl : polylines) n += pl.size();
    return n;
}

std::vector<std::vector<Point2>> marching_squares(const std::vector<double>& x_axis,
                                                  const std::vector<double>& y_axis,
                                                  const std::vector<double>& values,
                                                  const std::vector<bool>& valid, double level) {
    const std::size_t nx = x_axis.size();
    const std::size_t ny = y_axis.size();
    if (values.size() != nx * ny || valid.size() != nx * ny) {
        throw DomainError("field size does not match the axes");
    }
    auto at = [&](std::size_t i, std::size_t j) { return values[i * ny + j]; };
    auto ok = [&](std::size_t i, std::size_t j) { return valid[i * ny + j]; };

    // Edge key: (orientation, i, j).  Orientation 0 joins (i,j)-(i+1,j),
    // orientation 1 joins (i,j)-(i,j+1).
    using EdgeKey = std::tuple<int, std::size_t, std::size_t>;
    std::map<EdgeKey, Point2> crossing;
    std::vector<std::pair<EdgeKey, EdgeKey>> segments;

    auto edge_point = [&](const EdgeKey& e) {
        auto it = crossing.find(e);
        if (it != crossing.end()) return;
        const auto [o, i, j] = e;
        const std::size_t i1 = o == 0 ? i + 1 : i;
        const std::size_t j1 = o == 0 ? j : j + 1;
        const double v0 = at(i, j), v1 = at(i1, j1);
        const double t = (level - v0) / (v1 - v0);
        crossing[e] = {x_axis[i] + t * (x_axis[i1] - x_axis[i]),
                       y_axis[j] + t * (y_axis[j1] - y_axis[j])};
    };

    for (std::size_t i = 0; i + 1 < nx; ++i) {
        for (std::size_t j = 0; j + 1 < ny; ++j) {
            if (!ok(i, j) || !ok(i + 1, j) || !ok(i + 1, j + 1) || !ok(i, j + 1)) continue;
            // Corners counter-clockwise: 0=(i,j) 1=(i+1,j) 2=(i+1,j+1) 3=(i,j+1)
            const double v[4] = {at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)};
            int code = 0;
            for (int c = 0; c < 4; ++c) code |= (v[c] > level ? 1 : 0) << c;
            if (code == 0 || code == 15) continue;
            // Sides: 0 bottom (0-1), 1 right (1-2), 2 top (3-2), 3 left (0-3)
            const EdgeKey side[4] = {{0, i, j}, {1, i + 1, j}, {0, i, j + 1}, {1, i, j}};
            auto add = [&](int a, int b) {
                edge_point(side[a]);
                edge_point(side[b]);
                segments.emplace_back(side[a], side[b]);
            };
            const bool center_above = (v[0] + v[1] + v[2] + v[3]) / 4.0 > level;
            switch (code) {
                case 1: case 14: add(3, 0); break;
                case 2: case 13: add(0, 1); break;
                case 3: case 12: add(3, 1); break;
                case 4: case 11: add(1, 2); break;
                case 6: case 9: add(0, 2); break;
                case 7: case 8: add(3, 2); break;
                case 5:
                    if (center_above) { add(3, 2); add(0, 1); } else { add(3, 0); add(1, 2); }
                    break;
                case 10:
                    if (center_above) { add(3, 0); add(1, 2); } else { add(3, 2); add(0, 1); }
                    break;
                default: break;
            }
        }
    }

    // Chain segments through shared edges.
    std::map<EdgeKey, std::vector<std::size_t>> incident;
    for (std::size_t s = 0; s < segments.size(); ++s) {
        incident[segments[s].first].push_back(s);
        incident[segments[s].second].push_back(s);
    }
    std::vector<bool> used(segments.size(), false);
    auto walk = [&](EdgeKey from, std::size_t seg, std::vector<EdgeKey>& chain) {
        while (true) {
            used[seg] = true;
            const EdgeKey next = segments[seg].first == from ? segments[seg].second : segments[seg].first;
            chain.push_back(next);
            std::size_t cont = segments.size();
            for (std::size_t cand : incident[next]) {
                if (!used[cand]) {
                    cont = cand;
                    break;
                }
            }
            if (cont == segments.size()) return;
            from = next;
            seg = cont;
        }
    };

    std::vector<std::vector<Point2>> out;
    // Open chains start at edges with a single incident segment.
    auto start_order = [&](bool open_only) {
        for (std::size_t s = 0; s < segments.size(); ++s) {
            if (used[s]) continue;
            EdgeKey start = segments[s].first;
            if (open_only) {
                if (incident[segments[s].first].size() == 1) {
                    start = segments[s].first;
                } else if (incident[segments[s].second].size() == 1) {
                    start = segments[s].second;
                } else {
                    continue;
                }
            }
            std::vector<EdgeKey> chain{start};
            walk(start, s, chain);
            std::vector<Point2> pl;
            pl.reserve(chain.size());
            for (const auto& e : chain) pl.push_back(crossing.at(e));
            out.push_back(std::move(pl));
        }
    };
    start_order(true);
    start_order(false);
    return out;
}

IsoContour iso_equilibrium_contour(const SweepGrid& grid, EquilibriumVariable variable, double level) {
    std::vector<double> values(grid.cells.size(), 0.0);
    std::vector<bool> valid(grid.cells.size(), false);
    for (std::size_t n = 0; n < grid.cells.size(); ++n) {
        if (grid.mask[n] == CellMask::ok && grid.cells[n]) {
            values[n] = value_of(*grid.cells[n], variable);
            valid[n] = true;
        }
    }
    IsoContour c;
    c.level = level;
    c.variable = variable;
    c.polylines = marching_squares(grid.theta_axis, grid.eta_axis, values, valid, level);
    return c;
}

double median_level(const SweepGrid& grid, EquilibriumVariable variable, Interval eta_window) {
    std::vector<double> vals;
    for (std::size_t i = 0; i < grid.theta_axis.size(); ++i) {
        for (std::size_t j = 0; j < grid.eta_axis.size(); ++j) {
            const double eta = grid.eta_axis[j];
            if (eta <= eta_window.lo || eta >= eta_window.hi) continue;
            if (grid.mask_at(i, j) != CellMask::ok) continue;
            vals.push_back(value_of(*grid.cell(i, j), variable));
        }
    }
    if (vals.empty()) throw SearchError("no unmasked cells inside the eta window");
    const std::size_t mid = vals.size() / 2;
    std::nth_element(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(mid), vals.end());
    return vals[mid];
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& x) {
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(x.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t m = i; m <= j; ++m) ranks[order[m]] = r;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw DomainError("spearman needs two equal-length samples");
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

double contour_comovement(const IsoContour& contour, Interval eta_window) {
    std::vector<double> th, et;
    for (const auto& pl : contour.polylines) {
        for (const auto& pt : pl) {
            if (pt.y > eta_window.lo && pt.y < eta_window.hi) {
                th.push_back(pt.x);
                et.push_back(pt.y);
            }
        }
    }
    if (th.size() < 2) throw SearchError("fewer than two contour points inside the eta window");
    return spearman(th, et);
}

namespace {

struct Pair {
    double k;
    double c;
};

std::optional<Pair> equilibrium_at(const ModelParams& p) {
    auto [cell, m] = evaluate_cell(p);
    if (m != CellMask::ok) return std::nullopt;
    return Pair{cell->k_star, cell->c_star};
}

// Derivatives of (k*, c*) in one policy coordinate; `set` builds the
// perturbed parameters and `upper` is the coordinate's admissible maximum.
std::pair<SignedDerivative, SignedDerivative> derivative(
    const ModelParams& p, double x, double upper, double h,
    const std::function<ModelParams(double)>& set) {
    const auto centre = equilibrium_at(p);
    if (!centre) throw DomainError("base point is masked; no sensitivity available");
    double step = h * std::max(std::abs(x), 1e-2);
    for (int attempt = 0; attempt < 6; ++attempt, step *= 0.5) {
        std::optional<Pair> lo, hi, hi2;
        double dk = 0.0, dc = 0.0;
        if (x - step >= 0.0 && x + step <= upper) {
            lo = equilibrium_at(set(x - step));
            hi = equilibrium_at(set(x + step));
            if (!lo || !hi) continue;
            dk = (hi->k - lo->k) / (2.0 * step);
            dc = (hi->c - lo->c) / (2.0 * step);
        } else if (x - step < 0.0) {
            // One-sided second-order difference at the lower edge.
            hi = equilibrium_at(set(x + step));
            hi2 = equilibrium_at(set(x + 2.0 * step));
            if (!hi || !hi2) continue;
            dk = (-3.0 * centre->k + 4.0 * hi->k - hi2->k) / (2.0 * step);
            dc = (-3.0 * centre->c + 4.0 * hi->c - hi2->c) / (2.0 * step);
        } else {
            lo = equilibrium_at(set(x - step));
            hi2 = equilibrium_at(set(x - 2.0 * step));
            if (!lo || !hi2) continue;
            dk = (3.0 * centre->k - 4.0 * lo->k + hi2->k) / (2.0 * step);
            dc = (3.0 * centre->c - 4.0 * lo->c + hi2->c) / (2.0 * step);
        }
        auto sign_of = [](double d, double scale) {
            if (std::abs(d) <= 1e-10 * std::abs(scale)) return 0;
            return d > 0.0 ? 1 : -1;
        };
        return {{dk, sign_of(dk, centre->k)}, {dc, sign_of(dc, centre->c)}};
    }
    throw DomainError("finite-difference neighbours are masked even after step shrinking");
}

}  // namespace

Sensitivity sensitivity_signs(const ModelParams& p, double h) {
    if (!(h > 0.0)) throw DomainError("step must be positive");
    Sensitivity s;
    const auto [dk_e, dc_e] = derivative(p, p.eta, std::nextafter(1.0, 0.0), h,
                                         [&](double e) { return p.with_policy(p.theta, e); });
    const auto [dk_t, dc_t] = derivative(p, p.theta, 1.0, h,
                                         [&](double t) { return p.with_policy(t, p.eta); });
    s.dk_deta = dk_e;
    s.dc_deta = dc_e;
    s.dk_dtheta = dk_t;
    s.dc_dtheta = dc_t;
    return s;
}

}  // namespace dataecon
