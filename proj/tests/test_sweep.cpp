#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"

#include "dataecon/errors.hpp"
#include "dataecon/sweep.hpp"

using namespace dataecon;
using doctest::Approx;

namespace {

ModelParams at(double theta, double eta) { return ModelParams{}.with_policy(theta, eta); }

// Brute-force argmax of c*(η) on n evenly spaced points.
std::pair<double, double> brute_force_argmax(double theta, Interval r, int n) {
    double best_x = r.lo, best = -INFINITY;
    for (int i = 0; i < n; ++i) {
        const double eta = r.lo + (r.hi - r.lo) * i / (n - 1);
        const auto p = at(theta, eta);
        if (p.regime().singular) continue;
        const double c = steady_state(p).c_star;
        if (c > best) {
            best = c;
            best_x = eta;
        }
    }
    return {best_x, best};
}

}  // namespace

TEST_CASE("linspace") {
    const auto v = linspace(0.05, 0.95, 50);
    REQUIRE(v.size() == 50);
    CHECK(v.front() == 0.05);
    CHECK(v.back() == 0.95);
    CHECK(linspace(0.2, 0.2, 1) == std::vector<double>{0.2});
}

TEST_CASE("single-cell grid equals the steady state") {
    const auto g = grid_sweep(ModelParams{}, {0.5}, {0.2});
    REQUIRE(g.cells.size() == 1);
    CHECK(g.mask[0] == CellMask::ok);
    CHECK(*g.cells[0] == steady_state(at(0.5, 0.2)));
}

TEST_CASE("eta = 0 row is constant across theta") {
    const auto g = grid_sweep(ModelParams{}, linspace(0.1, 0.9, 9), {0.0, 0.2});
    for (std::size_t i = 1; i < g.theta_axis.size(); ++i) {
        CHECK(g.cell(i, 0)->k_star == Approx(g.cell(0, 0)->k_star).epsilon(1e-14));
        CHECK(g.cell(i, 0)->c_star == Approx(g.cell(0, 0)->c_star).epsilon(1e-14));
        CHECK(g.cell(i, 1)->k_star != g.cell(0, 1)->k_star);
    }
}

TEST_CASE("singular band masking on the 50 x 50 grid") {
    const auto theta = linspace(0.05, 0.95, 50);
    const auto eta = linspace(0.05, 0.95, 50);
    const auto g = grid_sweep(ModelParams{}, theta, eta);
    // Direct predicate: |0.6η − 0.2| < 0.02.
    std::size_t band_columns = 0;
    for (double e : eta) band_columns += std::abs(0.6 * e - 0.2) < 0.02;
    CHECK(band_columns == 4);
    CHECK(g.count(CellMask::singular) == band_columns * theta.size());
    CHECK(g.count(CellMask::ok) + g.count(CellMask::singular) == 2500);
    for (std::size_t i = 0; i < theta.size(); ++i) {
        for (std::size_t j = 0; j < eta.size(); ++j) {
            const bool singular = std::abs(0.6 * eta[j] - 0.2) < 0.02;
            CHECK((g.mask_at(i, j) == CellMask::singular) == singular);
            CHECK(g.cell(i, j).has_value() == !singular);
        }
    }
}

TEST_CASE("threaded sweep is identical to the serial sweep") {
    const auto theta = linspace(0.05, 0.95, 23);
    const auto eta = linspace(0.0, 0.95, 31);
    const auto a = grid_sweep(ModelParams{}, theta, eta, 1);
    const auto b = grid_sweep(ModelParams{}, theta, eta, 4);
    CHECK(a.cells == b.cells);
    CHECK(a.mask == b.mask);
}

TEST_CASE("split around the singular band") {
    const auto parts = split_around_singular_band(ModelParams{}, {0.01, 0.99});
    REQUIRE(parts.size() == 2);
    CHECK(parts[0].lo == 0.01);
    CHECK(parts[0].hi == Approx(0.3).epsilon(1e-6));
    CHECK(parts[1].lo == Approx(0.22 / 0.6).epsilon(1e-6));
    CHECK(parts[1].hi == 0.99);
    CHECK_FALSE(at(0.5, parts[0].hi).regime().singular);
    CHECK_FALSE(at(0.5, parts[1].lo).regime().singular);
    CHECK(split_around_singular_band(ModelParams{}, {0.5, 0.9}).size() == 1);
    CHECK(split_around_singular_band(ModelParams{}, {0.31, 0.36}).empty());
}

TEST_CASE("golden section on a known parabola") {
    auto f = [](double x) { return -(x - 0.3721) * (x - 0.3721); };
    CHECK(golden_section_maximize(f, 0.0, 1.0, 1e-8) == Approx(0.3721).epsilon(1e-7));
    const auto m = locate_maximum(f, {0.0, 1.0}, 50, 1e-8);
    CHECK(m.x == Approx(0.3721).epsilon(1e-7));
    CHECK_FALSE(m.at_boundary);
    const auto edge = locate_maximum([](double x) { return x; }, {0.0, 1.0}, 50, 1e-8);
    CHECK(edge.at_boundary);
    CHECK(edge.x == 1.0);
}

TEST_CASE("consumption threshold matches a brute-force scan") {
    const double tol = 1e-4;
    for (double theta : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        const auto res = consumption_threshold(ModelParams{}, theta, {0.01, 0.99}, tol);
        REQUIRE(res.size() == 2);
        for (const auto& r : res) {
            const auto [x, best] = brute_force_argmax(theta, r.eta_range, 10000);
            CHECK(std::abs(r.eta_star - x) <= 2 * tol);
            // Golden-section stops within tol in η, so the value may trail by O(tol²).
            CHECK(r.c_star_max >= best * (1 - 1e-6));
        }
        // Lower piece: c* rises all the way to the band; upper piece: interior peak.
        CHECK(res[0].shape == ThresholdShape::monotone_on_range);
        CHECK(res[1].shape == ThresholdShape::interior_peak);
    }
}

TEST_CASE("interior threshold moves toward higher eta as theta rises") {
    const double tol = 1e-4;
    const auto curve = threshold_curve(ModelParams{}, {0.1, 0.3, 0.5, 0.7, 0.9}, {0.01, 0.99}, tol);
    REQUIRE(curve.by_segment.size() == 2);
    const auto& upper = curve.by_segment[1];
    for (std::size_t i = 1; i < upper.size(); ++i) CHECK(upper[i].eta_star >= upper[i - 1].eta_star - tol);
    const auto a = consumption_threshold(ModelParams{}, 0.3, {0.01, 0.99}, tol);
    const auto b = consumption_threshold(ModelParams{}, 0.7, {0.01, 0.99}, tol);
    CHECK(a[1].eta_star <= b[1].eta_star + tol);
}

TEST_CASE("sensitivity signs change across the interior threshold") {
    const auto res = consumption_threshold(ModelParams{}, 0.5, {0.01, 0.99}, 1e-6);
    const double es = res[1].eta_star;
    CHECK(sensitivity_signs(at(0.5, es - 0.01)).dc_deta.sign == 1);
    CHECK(sensitivity_signs(at(0.5, es + 0.01)).dc_deta.sign == -1);
}

TEST_CASE("sensitivity signs agree with central differences of the bisection oracle") {
    auto k_oracle = [](const ModelParams& p) {
        return std::exp(oracle::bisect(
            [&](double lk) { return std::log(interest_rate(std::exp(lk), p)) - std::log(0.15); }, -200.0, 200.0));
    };
    for (double eta : {0.1, 0.2, 0.25, 0.5, 0.8}) {
        for (double theta : {0.2, 0.5, 0.8}) {
            const auto p = at(theta, eta);
            const auto s = sensitivity_signs(p);
            const double h = 1e-6;
            const double dk_e = (k_oracle(at(theta, eta + h)) - k_oracle(at(theta, eta - h))) / (2 * h);
            const double dk_t = (k_oracle(at(theta + h, eta)) - k_oracle(at(theta - h, eta))) / (2 * h);
            CHECK(s.dk_deta.sign == (dk_e > 0 ? 1 : -1));
            CHECK(s.dk_dtheta.sign == (dk_t > 0 ? 1 : -1));
            CHECK(s.dk_deta.value == Approx(dk_e).epsilon(1e-4));
            CHECK(s.dk_dtheta.value == Approx(dk_t).epsilon(1e-4));
        }
    }
    // θ drops out entirely at η = 0.
    CHECK(sensitivity_signs(at(0.5, 0.0)).dk_dtheta.sign == 0);
    CHECK(sensitivity_signs(at(0.5, 0.0)).dc_dtheta.sign == 0);
    // Edges fall back to one-sided differences.
    CHECK(sensitivity_signs(at(1.0, 0.2)).dk_dtheta.sign != 0);
}

TEST_CASE("marching squares on synthetic fields") {
    const auto x = linspace(0.0, 1.0, 11);
    const auto y = linspace(0.0, 1.0, 11);
    std::vector<double> flat(x.size() * y.size(), 2.0);
    std::vector<bool> valid(flat.size(), true);
    CHECK(marching_squares(x, y, flat, valid, 1.0).empty());
    CHECK(marching_squares(x, y, flat, valid, 3.0).empty());

    std::vector<double> sum(flat.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < y.size(); ++j) sum[i * y.size() + j] = x[i] + y[j];
    const auto lines = marching_squares(x, y, sum, valid, 1.05);
    REQUIRE(lines.size() == 1);
    CHECK(lines[0].size() >= 10);
    for (const auto& pt : lines[0]) CHECK(pt.x + pt.y == Approx(1.05).epsilon(1e-12));
    for (std::size_t k = 1; k < lines[0].size(); ++k) {
        // Ordered along the curve: consecutive points are neighbours.
        CHECK(std::hypot(lines[0][k].x - lines[0][k - 1].x, lines[0][k].y - lines[0][k - 1].y) < 0.15);
    }

    // A closed ring around a peak.
    std::vector<double> bump(flat.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < y.size(); ++j)
            bump[i * y.size() + j] = -std::hypot(x[i] - 0.5, y[j] - 0.5);
    const auto ring = marching_squares(x, y, bump, valid, -0.3);
    REQUIRE(ring.size() == 1);
    CHECK(ring[0].front().x == Approx(ring[0].back().x));
    CHECK(ring[0].front().y == Approx(ring[0].back().y));

    // Invalid cells break the curve.
    auto holes = valid;
    for (std::size_t j = 0; j < y.size(); ++j) holes[5 * y.size() + j] = false;
    CHECK(marching_squares(x, y, sum, holes, 1.05).size() == 2);
}

TEST_CASE("spearman") {
    CHECK(spearman({1, 2, 3, 4}, {10, 20, 30, 40}) == Approx(1.0));
    CHECK(spearman({1, 2, 3, 4}, {4, 3, 2, 1}) == Approx(-1.0));
    CHECK(spearman({1, 2, 3, 4}, {1, 3, 2, 4}) == Approx(0.8));
    CHECK(spearman({1, 1, 2, 3}, {1, 2, 3, 4}) == Approx(0.9486832981).epsilon(1e-9));
}

TEST_CASE("consumption iso-contours co-move in the upper eta region") {
    const auto g = grid_sweep(ModelParams{}, linspace(0.05, 0.95, 50), linspace(0.05, 0.95, 50));
    const Interval window{0.6, 0.95};
    const double median = median_level(g, EquilibriumVariable::c_star, window);
    for (double level : {0.5 * median, median, 2.0 * median}) {
        const auto c = iso_equilibrium_contour(g, EquilibriumVariable::c_star, level);
        REQUIRE_FALSE(c.empty());
        CHECK(contour_comovement(c, window) > 0.0);
        for (const auto& line : c.polylines)
            for (const auto& pt : line) {
                // Interpolated points lie on the level set of the closed form.
                const double exact = steady_state(at(pt.x, pt.y)).c_star;
                CHECK(exact == Approx(level).epsilon(0.05));
            }
    }
}
