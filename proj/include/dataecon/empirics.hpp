#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dataecon {

struct PanelRow {
    int unit = 0;
    int year = 0;
    double outcome = 0.0;
    std::optional<int> adoption_year;  // empty for never-treated units
    std::vector<double> controls;

    bool operator==(const PanelRow&) const = default;
};

// City-year panel with staggered adoption.
struct Panel {
    std::vector<PanelRow> rows;
    std::vector<std::string> control_names;
    int n_units = 0;
    int first_year = 0;
    int last_year = 0;
    bool balanced = true;

    bool operator==(const Panel&) const = default;
};

// Throws DesignError on duplicate (unit, year) pairs, inconsistent control
// widths, or adoption years before the span start.  Recomputes metadata.
void validate_panel(Panel& panel);

// Treatment effect by period relative to adoption.  Periods before
// first_period contribute nothing; periods after the last entry keep the
// last effect.
struct DynamicProfile {
    int first_period = 0;
    std::vector<double> effects;

    double effect_at(int relative_period) const;
};

struct DgpConfig {
    int n_units = 216;
    int first_year = 2000;
    int n_years = 23;
    double share_treated = 0.5;
    int adopt_first = 2012;  // adoption years are uniform on [adopt_first, adopt_last]
    int adopt_last = 2021;
    double unit_effect_scale = 1.0;
    double year_effect_scale = 0.5;
    double noise_scale = 0.1;
    double tau = 0.05;
    std::optional<DynamicProfile> profile;  // replaces tau when set
    std::vector<double> control_coefs;      // one standard-normal control per entry
    std::uint64_t seed = 20240101;
};

void validate_dgp(const DgpConfig& cfg);

Panel generate_panel(const DgpConfig& cfg);

enum class FixedEffectsMethod { within, dummies };

struct EstimatorOptions {
    // Drop observations in the adoption year itself.
    bool exclude_period_zero = true;
    FixedEffectsMethod method = FixedEffectsMethod::within;
    // Names of controls to include; empty means all of them.
    std::optional<std::vector<std::string>> controls;
};

struct DidResult {
    double att = 0.0;
    double se = 0.0;  // clustered by unit
    std::size_t n_obs = 0;
    std::size_t n_clusters = 0;
    std::size_t unit_effects = 0;
    std::size_t year_effects = 0;
    std::vector<std::string> control_names;
    std::vector<double> control_coefs;
};

DidResult twfe_did(const Panel& panel, const EstimatorOptions& opts = {});

struct EventCoefficient {
    int period = 0;
    double coef = 0.0;
    double se = 0.0;
    bool estimated = false;  // false for the reference period and excluded period 0
};

struct EventStudyResult {
    int min_lead = -1;
    int max_lag = 0;
    std::vector<EventCoefficient> coefficients;  // contiguous min_lead..max_lag
    std::size_t n_obs = 0;
    std::size_t n_clusters = 0;

    const EventCoefficient& at(int period) const;
};

// Relative-time indicators replace the DID dummy; periods beyond the window
// are binned into its endpoints and period −1 is the omitted reference.
EventStudyResult event_study(const Panel& panel, int min_lead, int max_lag,
                             const EstimatorOptions& opts = {});

// CSV schema: unit,year,outcome,adoption_year,control_1..control_m
void write_panel_csv(std::ostream& os, const Panel& panel);
Panel read_panel_csv(std::istream& is);

}  // namespace dataecon
