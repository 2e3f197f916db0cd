#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dataecon/empirics.hpp"
#include "dataecon/firm_q.hpp"
#include "dataecon/model.hpp"
#include "dataecon/sweep.hpp"

namespace dataecon {

struct GridConfig {
    double theta_min = 0.05;
    double theta_max = 0.95;
    std::size_t n_theta = 50;
    double eta_min = 0.05;
    double eta_max = 0.95;
    std::size_t n_eta = 50;
    unsigned threads = 1;
};

struct IntegratorConfig {
    double tol = 1e-9;
    double t_max = 200.0;
};

struct ThresholdConfig {
    std::vector<double> thetas{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    double eta_min = 0.01;
    double eta_max = 0.99;
    double tol = 1e-4;
    std::size_t coarse = 400;
};

struct ContourConfig {
    EquilibriumVariable variable = EquilibriumVariable::c_star;
    std::optional<double> level;  // median of the window when unset
    double window_eta_min = 0.6;
    double window_eta_max = 0.95;
};

struct PhaseConfig {
    double k_min_factor = 0.25;  // plotting window in units of k*
    double k_max_factor = 1.75;
    std::size_t nullcline_samples = 200;
    std::size_t quiver_n = 15;
    double epsilon_factor = 1e-6;
};

struct ShockConfig {
    std::optional<double> eta_before;
    std::optional<double> eta_after;
    std::optional<double> theta_before;
    std::optional<double> theta_after;
};

struct QConfig {
    double q = 1.0;
    std::optional<double> r;  // ρ when unset
    LinearTermReading reading = LinearTermReading::adjustment_a;
};

struct DidConfig {
    DgpConfig dgp;
    int replications = 1;
    int min_lead = -4;
    int max_lag = 5;
    bool exclude_period_zero = true;
};

struct RenderConfig {
    int width = 640;
    int height = 480;
    std::string colormap = "viridis";
};

struct RunConfig {
    ModelParams params;
    GridConfig grid;
    IntegratorConfig integrator;
    ThresholdConfig threshold;
    ContourConfig contour;
    PhaseConfig phase;
    ShockConfig shock;
    QConfig q;
    DidConfig did;
    RenderConfig render;
    std::string out_dir = "out";
    std::vector<std::string> formats{"csv", "json", "svg"};
    std::uint64_t seed = 20240101;

    bool wants(const std::string& format) const;
};

nlohmann::ordered_json to_json(const RunConfig& cfg);

// Strict conversion: unknown keys, type mismatches and invalid values all
// raise UsageError or ValidationError naming the field.
RunConfig from_json(const nlohmann::ordered_json& j);

// Overlays `patch` onto `base`, rejecting keys that `base` does not have.
void merge_strict(nlohmann::ordered_json& base, const nlohmann::ordered_json& patch,
                  const std::string& path = "");

// Precedence: flags (as a JSON patch) over file over built-in defaults.
RunConfig parse_config(const std::optional<std::string>& path, const nlohmann::ordered_json& flags);

}  // namespace dataecon
