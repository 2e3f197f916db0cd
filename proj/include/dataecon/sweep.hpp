#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dataecon/dynamics.hpp"
#include "dataecon/model.hpp"

namespace dataecon {

enum class CellMask { ok, singular, infeasible, degenerate };

std::string to_string(CellMask m);

// Steady states over a rectangular (θ, η) grid.  Cells are stored
// row-major with θ as the row index.
struct SweepGrid {
    ModelParams base;
    std::vector<double> theta_axis;
    std::vector<double> eta_axis;
    std::vector<std::optional<SteadyState>> cells;
    std::vector<CellMask> mask;

    std::size_t index(std::size_t i_theta, std::size_t j_eta) const { return i_theta * eta_axis.size() + j_eta; }
    const std::optional<SteadyState>& cell(std::size_t i, std::size_t j) const { return cells[index(i, j)]; }
    CellMask mask_at(std::size_t i, std::size_t j) const { return mask[index(i, j)]; }
    std::size_t count(CellMask m) const;
};

// n evenly spaced samples on [lo, hi].
std::vector<double> linspace(double lo, double hi, std::size_t n);

// Evaluates the steady state cell by cell; `threads` > 1 splits rows across
// worker threads without changing the result.
SweepGrid grid_sweep(const ModelParams& base, std::vector<double> theta_axis,
                     std::vector<double> eta_axis, unsigned threads = 1);

// Parts of eta_range on either side of the singular band.
std::vector<Interval> split_around_singular_band(const ModelParams& base, Interval eta_range);

// Golden-section maximization of a unimodal f on [lo, hi] until the
// bracket is narrower than tol.
double golden_section_maximize(const std::function<double(double)>& f, double lo, double hi,
                               double tol);

struct MaximumResult {
    double x = 0.0;
    double value = 0.0;
    bool at_boundary = false;
};

// Coarse scan with `coarse` samples followed by golden-section refinement
// around the best sample.  Non-finite values count as −∞.
MaximumResult locate_maximum(const std::function<double(double)>& f, Interval range,
                             std::size_t coarse, double tol);

enum class ThresholdShape { interior_peak, monotone_on_range };

std::string to_string(ThresholdShape s);

struct ThresholdResult {
    double theta = 0.0;
    Interval eta_range;
    double eta_star = 0.0;
    double c_star_max = 0.0;
    ThresholdShape shape = ThresholdShape::interior_peak;
};

// c*(η; θ) as a function of η, −∞ where masked.
std::function<double(double)> consumption_in_eta(const ModelParams& base, double theta);

// Argmax of c*(η; θ), one result per sub-interval on each side of the
// singular band.  Throws SearchError if a sub-interval is entirely masked.
std::vector<ThresholdResult> consumption_threshold(const ModelParams& base, double theta,
                                                   Interval eta_range, double tol,
                                                   std::size_t coarse = 400);

struct ThresholdCurve {
    std::vector<double> theta;
    std::vector<Interval> segments;
    // by_segment[s][i] is the result for segment s at theta[i].
    std::vector<std::vector<ThresholdResult>> by_segment;
};

ThresholdCurve threshold_curve(const ModelParams& base, const std::vector<double>& thetas,
                               Interval eta_range, double tol, std::size_t coarse = 400);

enum class EquilibriumVariable { k_star, c_star };

std::string to_string(EquilibriumVariable v);

struct IsoContour {
    double level = 0.0;
    EquilibriumVariable variable = EquilibriumVariable::c_star;
    // Each polyline is ordered along the curve; points are (θ, η).
    std::vector<std::vector<Point2>> polylines;

    std::size_t point_count() const;
    bool empty() const { return polylines.empty(); }
};

// Marching squares on a scalar field sampled at (x_axis[i], y_axis[j]),
// values row-major in i.  Squares touching an invalid corner are skipped.
std::vector<std::vector<Point2>> marching_squares(const std::vector<double>& x_axis,
                                                  const std::vector<double>& y_axis,
                                                  const std::vector<double>& values,
                                                  const std::vector<bool>& valid, double level);

IsoContour iso_equilibrium_contour(const SweepGrid& grid, EquilibriumVariable variable, double level);

// Median of the unmasked values with η inside eta_window.
double median_level(const SweepGrid& grid, EquilibriumVariable variable, Interval eta_window);

// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

// Spearman correlation of (θ, η) over contour points with η in eta_window.
double contour_comovement(const IsoContour& contour, Interval eta_window);

struct SignedDerivative {
    double value = 0.0;
    int sign = 0;
};

struct Sensitivity {
    SignedDerivative dk_deta;
    SignedDerivative dk_dtheta;
    SignedDerivative dc_deta;
    SignedDerivative dc_dtheta;
};

// Finite-difference derivatives of (k*, c*) in η and θ with relative step h.
Sensitivity sensitivity_signs(const ModelParams& p, double h = 1e-4);

}  // namespace dataecon
