#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "dataecon/errors.hpp"
#include "dataecon/model.hpp"

namespace dataecon {

struct State {
    double c = 0.0;  // consumption flow
    double k = 0.0;  // capital stock

    bool operator==(const State&) const = default;
};

double norm(const State& s);
double distance(const State& a, const State& b);

struct StateRate {
    double c_dot = 0.0;
    double k_dot = 0.0;
};

enum class TrajectoryStatus { converged, max_time, left_domain, target_reached };

std::string to_string(TrajectoryStatus s);

struct TrajectoryPoint {
    double t;
    State state;
};

struct Trajectory {
    std::vector<TrajectoryPoint> points;  // strictly increasing t
    TrajectoryStatus status = TrajectoryStatus::max_time;

    const State& back() const { return points.back().state; }
    const State& front() const { return points.front().state; }
};

class IntegrationError : public Error {
public:
    IntegrationError(const std::string& what, Trajectory partial)
        : Error(what), partial_(std::move(partial)) {}
    const Trajectory& partial() const noexcept { return partial_; }

private:
    Trajectory partial_;
};

// Row/column order is (c, k).
using Matrix2 = std::array<std::array<double, 2>, 2>;

enum class Classification { saddle, sink, source, spiral_sink, spiral_source, center_degenerate };

std::string to_string(Classification c);

struct EquilibriumAnalysis {
    Classification classification = Classification::center_degenerate;
    SteadyState steady;
    Matrix2 jacobian{};
    double trace = 0.0;
    double det = 0.0;
    // Real parts and imaginary parts, ordered so that eigen_re[0] <= eigen_re[1].
    std::array<double, 2> eigen_re{};
    std::array<double, 2> eigen_im{};
    // Unit eigenvectors in (c, k) order; meaningful when eigenvalues are real.
    std::array<State, 2> eigenvectors{};
};

// ċ = c (r(k) − ρ − δ)/σ,  k̇ = y(k, l*(k)) − c − δk
StateRate rhs(const State& s, const ModelParams& p);

Matrix2 jacobian(const State& s, const ModelParams& p);

EquilibriumAnalysis classify_equilibrium(const ModelParams& p);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

struct Nullclines {
    std::vector<Point2> c_nullcline;  // (k, c) pairs; vertical at k = k*
    std::vector<Point2> k_nullcline;  // (k, c) pairs
};

// k-nullcline c = y(k, l*(k)) − δk sampled on k_range; the c-nullcline is
// the vertical line k = k* spanning the k-nullcline's c range.
Nullclines nullclines(const ModelParams& p, Interval k_range, std::size_t n);

struct IntegrateOptions {
    double converge_tol = -1.0;  // negative: use tol
    double max_step = 0.0;       // 0: unlimited
};

// Adaptive Dormand–Prince integration of rhs from s0 over [0, t_max].
// Stops early when ‖rhs‖ ≤ converge_tol·(ρ + δ)·‖s‖ or when the state
// leaves the positive quadrant.  Throws IntegrationError on step underflow.
Trajectory integrate(const State& s0, const ModelParams& p, double t_max, double tol,
                     const IntegrateOptions& opts = {});

// Same as integrate but runs backward in time; returned times are ≤ 0 and
// the points are stored in decreasing-time order of integration.
Trajectory integrate_backward(const State& s0, const ModelParams& p, double t_span, double tol,
                              const IntegrateOptions& opts = {});

struct SaddlePathOptions {
    double tol = 1e-9;
    double epsilon_factor = 1e-6;  // seed offset ε = epsilon_factor·k*
    double max_time_factor = 400.0;  // backward horizon in units of 1/|λ_s|
    double max_step_factor = 0.25;   // step cap in units of 1/|λ_s|
};

// Each branch is stored in forward time: t = 0 at the far end, increasing
// toward the seed near (c*, k*).
struct SaddlePath {
    Trajectory lower;  // approaches k* from below
    Trajectory upper;  // approaches k* from above
    EquilibriumAnalysis equilibrium;
    double epsilon = 0.0;
};

SaddlePath saddle_path(const ModelParams& p, Interval k_targets, const SaddlePathOptions& opts = {});

// c on a branch at capital k, cubic Hermite in k with slopes dc/dk = ċ/k̇.
std::optional<double> branch_consumption_at(const Trajectory& branch, double k,
                                            const ModelParams& p);

struct ForwardCheck {
    double terminal_distance = 0.0;  // ‖end − (c*, k*)‖
    double max_segment_defect = 0.0;  // max relative mismatch between segments and stored samples
    std::size_t segments = 0;
};

// Re-integrates a branch forward in time, restarting at stored samples so
// that each segment spans at most `segment_span` time units, and measures
// where the chain ends relative to the equilibrium.
ForwardCheck reintegrate_forward(const Trajectory& branch, const ModelParams& p, double tol,
                                 double segment_span);

struct VectorSample {
    State state;
    StateRate rate;
};

struct PhasePortrait {
    ModelParams params;
    Nullclines nullclines;
    State equilibrium;
    EquilibriumAnalysis analysis;
    std::vector<Trajectory> stable_paths;  // empty unless saddle
    std::vector<VectorSample> vector_field;
    Interval k_range;
    Interval c_range;
};

struct PhaseOptions {
    std::size_t nullcline_samples = 200;
    std::size_t quiver_n = 15;
    SaddlePathOptions saddle;
};

PhasePortrait phase_portrait(const ModelParams& p, Interval k_range, const PhaseOptions& opts = {});

// Default plotting window: [0.25 k*, 1.75 k*].
Interval default_k_range(const ModelParams& p);

struct ShockResult {
    PhasePortrait before;
    PhasePortrait after;
    double dk_star = 0.0;
    double dc_star = 0.0;
};

ShockResult shock_experiment(const ModelParams& before, const ModelParams& after,
                             std::optional<Interval> k_range = std::nullopt,
                             const PhaseOptions& opts = {});

}  // namespace dataecon
