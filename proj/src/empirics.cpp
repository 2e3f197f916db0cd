#include "dataecon/empirics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <utility>

#include "dataecon/csv.hpp"
#include "dataecon/errors.hpp"

namespace dataecon {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void validate_panel(Panel& panel) {
    std::set<std::pair<int, int>> seen;
    std::set<int> units;
    std::set<int> years;
    const std::size_t width = panel.control_names.size();
    for (const auto& r : panel.rows) {
        if (!seen.insert({r.unit, r.year}).second) {
            throw DesignError("duplicate observation for unit " + std::to_string(r.unit) + " year " +
                              std::to_string(r.year));
        }
        if (r.controls.size() != width) throw DesignError("control vector width mismatch");
        units.insert(r.unit);
        years.insert(r.year);
    }
    if (panel.rows.empty()) throw DesignError("panel has no rows");
    panel.n_units = static_cast<int>(units.size());
    panel.first_year = *years.begin();
    panel.last_year = *years.rbegin();
    for (const auto& r : panel.rows) {
        if (r.adoption_year && *r.adoption_year < panel.first_year) {
            throw DesignError("adoption year precedes the panel span for unit " + std::to_string(r.unit));
        }
    }
    panel.balanced = panel.rows.size() == units.size() * years.size();
}

double DynamicProfile::effect_at(int relative_period) const {
    if (effects.empty() || relative_period < first_period) return 0.0;
    const auto idx = static_cast<std::size_t>(relative_period - first_period);
    return idx < effects.size() ? effects[idx] : effects.back();
}

void validate_dgp(const DgpConfig& cfg) {
    std::vector<ValidationError::Violation> bad;
    auto check = [&](bool ok, const char* field, const char* bound) {
        if (!ok) bad.push_back({field, bound});
    };
    check(cfg.n_units >= 2, "n_units", "n_units >= 2");
    check(cfg.n_years >= 2, "n_years", "n_years >= 2");
    check(cfg.share_treated >= 0.0 && cfg.share_treated <= 1.0, "share_treated", "0 <= share <= 1");
    check(cfg.adopt_first >= cfg.first_year, "adopt_first", "adopt_first >= first_year");
    check(cfg.adopt_last >= cfg.adopt_first, "adopt_last", "adopt_last >= adopt_first");
    check(cfg.unit_effect_scale >= 0.0, "unit_effect_scale", ">= 0");
    check(cfg.year_effect_scale >= 0.0, "year_effect_scale", ">= 0");
    check(cfg.noise_scale >= 0.0, "noise_scale", ">= 0");
    check(std::isfinite(cfg.tau), "tau", "finite");
    if (cfg.profile) {
        check(cfg.profile->effect_at(-1) == 0.0, "profile", "effect at relative period -1 must be 0");
    }
    if (!bad.empty()) throw ValidationError(std::move(bad));
}

Panel generate_panel(const DgpConfig& cfg) {
    validate_dgp(cfg);
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto draw = [&](double scale) { return scale > 0.0 ? scale * normal(rng) : 0.0; };

    std::vector<double> unit_effect(static_cast<std::size_t>(cfg.n_units));
    for (auto& u : unit_effect) u = draw(cfg.unit_effect_scale);
    std::vector<double> year_effect(static_cast<std::size_t>(cfg.n_years));
    for (auto& y : year_effect) y = draw(cfg.year_effect_scale);

    std::vector<std::size_t> order(static_cast<std::size_t>(cfg.n_units));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const auto n_treated = static_cast<std::size_t>(std::lround(cfg.share_treated * cfg.n_units));
    std::uniform_int_distribution<int> adopt(cfg.adopt_first, cfg.adopt_last);
    std::vector<std::optional<int>> adoption(static_cast<std::size_t>(cfg.n_units));
    for (std::size_t i = 0; i < n_treated; ++i) adoption[order[i]] = adopt(rng);

    Panel panel;
    for (std::size_t m = 0; m < cfg.control_coefs.size(); ++m) {
        panel.control_names.push_back("control_" + std::to_string(m + 1));
    }
    panel.rows.reserve(static_cast<std::size_t>(cfg.n_units * cfg.n_years));
    for (int u = 0; u < cfg.n_units; ++u) {
        const auto ui = static_cast<std::size_t>(u);
        for (int t = 0; t < cfg.n_years; ++t) {
            PanelRow row;
            row.unit = u + 1;
            row.year = cfg.first_year + t;
            row.adoption_year = adoption[ui];
            double y = unit_effect[ui] + year_effect[static_cast<std::size_t>(t)];
            for (double coef : cfg.control_coefs) {
                const double x = normal(rng);
                row.controls.push_back(x);
                y += coef * x;
            }
            if (row.adoption_year) {
                const int rel = row.year - *row.adoption_year;
                if (cfg.profile) {
                    y += cfg.profile->effect_at(rel);
                } else if (rel >= 0) {
                    y += cfg.tau;
                }
            }
            y += draw(cfg.noise_scale);
            row.outcome = y;
            panel.rows.push_back(std::move(row));
        }
    }
    panel.n_units = cfg.n_units;
    panel.first_year = cfg.first_year;
    panel.last_year = cfg.first_year + cfg.n_years - 1;
    panel.balanced = true;
    return panel;
}

namespace {

// Regression problem before fixed effects are absorbed.
struct Design {
    MatrixXd x;
    VectorXd y;
    std::vector<std::string> names;
    std::vector<int> unit;  // dense index
    std::vector<int> year;  // dense index
    int n_units = 0;
    int n_years = 0;
};

struct Fit {
    VectorXd beta;
    MatrixXd vcov;
    std::size_t n_obs = 0;
    std::size_t n_clusters = 0;
};

std::vector<std::size_t> select_controls(const Panel& panel, const EstimatorOptions& opts) {
    std::vector<std::size_t> idx;
    if (!opts.controls) {
        idx.resize(panel.control_names.size());
        std::iota(idx.begin(), idx.end(), 0);
        return idx;
    }
    for (const auto& name : *opts.controls) {
        const auto it = std::find(panel.control_names.begin(), panel.control_names.end(), name);
        if (it == panel.control_names.end()) throw DesignError("unknown control '" + name + "'");
        idx.push_back(static_cast<std::size_t>(it - panel.control_names.begin()));
    }
    return idx;
}

// `treatment` maps a kept row to its treatment regressor values.
template <class Treatment>
Design build_design(const Panel& panel, const EstimatorOptions& opts,
                    const std::vector<std::string>& treatment_names, Treatment&& treatment) {
    const auto controls = select_controls(panel, opts);
    std::vector<const PanelRow*> kept;
    for (const auto& r : panel.rows) {
        if (opts.exclude_period_zero && r.adoption_year && r.year == *r.adoption_year) continue;
        kept.push_back(&r);
    }
    if (kept.empty()) throw DesignError("no observations left after exclusions");

    std::map<int, int> unit_index, year_index;
    for (const auto* r : kept) {
        unit_index.emplace(r->unit, 0);
        year_index.emplace(r->year, 0);
    }
    int n = 0;
    for (auto& [k, v] : unit_index) v = n++;
    n = 0;
    for (auto& [k, v] : year_index) v = n++;

    Design d;
    const auto rows = static_cast<Eigen::Index>(kept.size());
    const auto p = static_cast<Eigen::Index>(treatment_names.size() + controls.size());
    d.x.resize(rows, p);
    d.y.resize(rows);
    d.names = treatment_names;
    for (auto c : controls) d.names.push_back(panel.control_names[c]);
    d.n_units = static_cast<int>(unit_index.size());
    d.n_years = static_cast<int>(year_index.size());
    for (Eigen::Index i = 0; i < rows; ++i) {
        const PanelRow& r = *kept[static_cast<std::size_t>(i)];
        const std::vector<double> tv = treatment(r);
        Eigen::Index col = 0;
        for (double v : tv) d.x(i, col++) = v;
        for (auto c : controls) d.x(i, col++) = r.controls[c];
        d.y(i) = r.outcome;
        d.unit.push_back(unit_index.at(r.unit));
        d.year.push_back(year_index.at(r.year));
    }
    return d;
}

// Alternating projections onto the unit and year fixed-effect spaces.
void demean_two_way(Eigen::Ref<MatrixXd> m, const Design& d) {
    const auto rows = m.rows();
    std::vector<double> unit_count(static_cast<std::size_t>(d.n_units), 0.0);
    std::vector<double> year_count(static_cast<std::size_t>(d.n_years), 0.0);
    for (Eigen::Index i = 0; i < rows; ++i) {
        unit_count[static_cast<std::size_t>(d.unit[static_cast<std::size_t>(i)])] += 1.0;
        year_count[static_cast<std::size_t>(d.year[static_cast<std::size_t>(i)])] += 1.0;
    }
    for (Eigen::Index col = 0; col < m.cols(); ++col) {
        auto v = m.col(col);
        const double scale = std::max(1.0, v.cwiseAbs().maxCoeff());
        for (int iter = 0; iter < 100000; ++iter) {
            double change = 0.0;
            std::vector<double> sum(unit_count.size(), 0.0);
            for (Eigen::Index i = 0; i < rows; ++i) sum[static_cast<std::size_t>(d.unit[static_cast<std::size_t>(i)])] += v(i);
            for (std::size_t g = 0; g < sum.size(); ++g) {
                sum[g] /= unit_count[g];
                change = std::max(change, std::abs(sum[g]));
            }
            for (Eigen::Index i = 0; i < rows; ++i) v(i) -= sum[static_cast<std::size_t>(d.unit[static_cast<std::size_t>(i)])];
            std::vector<double> ysum(year_count.size(), 0.0);
            for (Eigen::Index i = 0; i < rows; ++i) ysum[static_cast<std::size_t>(d.year[static_cast<std::size_t>(i)])] += v(i);
            for (std::size_t t = 0; t < ysum.size(); ++t) {
                ysum[t] /= year_count[t];
                change = std::max(change, std::abs(ysum[t]));
            }
            for (Eigen::Index i = 0; i < rows; ++i) v(i) -= ysum[static_cast<std::size_t>(d.year[static_cast<std::size_t>(i)])];
            if (change <= 1e-15 * scale) break;
        }
    }
}

// Least squares by column-pivoted Householder QR with unit-clustered
// sandwich covariance for the first `k_report` columns.
Fit solve_clustered(const MatrixXd& x, const VectorXd& y, const std::vector<int>& cluster,
                    int n_clusters, const std::vector<std::string>& names, Eigen::Index k_report,
                    Eigen::Index k_correction) {
    Eigen::ColPivHouseholderQR<MatrixXd> qr(x);
    qr.setThreshold(1e-10);
    const auto p = x.cols();
    if (qr.rank() < p) {
        std::vector<std::string> bad;
        const auto& perm = qr.colsPermutation().indices();
        for (Eigen::Index i = qr.rank(); i < p; ++i) {
            const auto col = static_cast<std::size_t>(perm(i));
            bad.push_back(col < names.size() ? names[col] : "fixed_effect_" + std::to_string(col));
        }
        throw RankDeficiencyError(std::move(bad));
    }
    Fit fit;
    const VectorXd beta = qr.solve(y);
    const VectorXd resid = y - x * beta;

    // (X'X)^{-1} = P R^{-1} R^{-T} P'
    const MatrixXd r = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
    const MatrixXd r_inv = r.triangularView<Eigen::Upper>().solve(MatrixXd::Identity(p, p));
    MatrixXd xtx_inv_perm = r_inv * r_inv.transpose();
    const auto& perm = qr.colsPermutation();
    const MatrixXd xtx_inv = perm * xtx_inv_perm * perm.transpose();

    // Rows of the bread for the reported coefficients, applied per observation.
    const MatrixXd a = xtx_inv.topRows(k_report);  // k_report × p
    MatrixXd scores = MatrixXd::Zero(k_report, n_clusters);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        scores.col(cluster[static_cast<std::size_t>(i)]) += (a * x.row(i).transpose()) * resid(i);
    }
    MatrixXd meat = scores * scores.transpose();
    const double g = n_clusters;
    const double n = static_cast<double>(x.rows());
    const double k = static_cast<double>(k_correction);
    const double correction = (g / (g - 1.0)) * ((n - 1.0) / (n - k));
    fit.beta = beta.head(k_report);
    fit.vcov = correction * meat;
    fit.n_obs = static_cast<std::size_t>(x.rows());
    fit.n_clusters = static_cast<std::size_t>(n_clusters);
    return fit;
}

Fit estimate(Design d, FixedEffectsMethod method) {
    const auto p = d.x.cols();
    if (d.n_units < 2) throw DesignError("need at least two units for clustered errors");
    if (method == FixedEffectsMethod::within) {
        MatrixXd both(d.x.rows(), p + 1);
        both << d.x, d.y;
        demean_two_way(both, d);
        // Columns that vanish after demeaning are collinear with the fixed effects.
        std::vector<std::string> absorbed;
        for (Eigen::Index c = 0; c < p; ++c) {
            const double before = d.x.col(c).cwiseAbs().maxCoeff();
            if (both.col(c).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, before)) {
                absorbed.push_back(d.names[static_cast<std::size_t>(c)]);
            }
        }
        if (!absorbed.empty()) throw RankDeficiencyError(std::move(absorbed));
        return solve_clustered(both.leftCols(p), both.col(p), d.unit, d.n_units, d.names, p, p);
    }
    // Explicit dummies: all units, years except the first.
    const auto extra = d.n_units + d.n_years - 1;
    MatrixXd z = MatrixXd::Zero(d.x.rows(), p + extra);
    z.leftCols(p) = d.x;
    for (Eigen::Index i = 0; i < d.x.rows(); ++i) {
        z(i, p + d.unit[static_cast<std::size_t>(i)]) = 1.0;
        const int t = d.year[static_cast<std::size_t>(i)];
        if (t > 0) z(i, p + d.n_units + t - 1) = 1.0;
    }
    return solve_clustered(z, d.y, d.unit, d.n_units, d.names, p, p);
}

}  // namespace

DidResult twfe_did(const Panel& panel, const EstimatorOptions& opts) {
    bool any_treated = false;
    for (const auto& r : panel.rows) {
        if (r.adoption_year && r.year >= *r.adoption_year &&
            !(opts.exclude_period_zero && r.year == *r.adoption_year)) {
            any_treated = true;
            break;
        }
    }
    if (!any_treated) throw DesignError("no treated observations in the panel");

    Design d = build_design(panel, opts, {"treated_post"}, [](const PanelRow& r) {
        const bool on = r.adoption_year && r.year >= *r.adoption_year;
        return std::vector<double>{on ? 1.0 : 0.0};
    });
    const auto names = d.names;
    const int n_units = d.n_units;
    const int n_years = d.n_years;
    const Fit fit = estimate(std::move(d), opts.method);

    DidResult res;
    res.att = fit.beta(0);
    res.se = std::sqrt(fit.vcov(0, 0));
    res.n_obs = fit.n_obs;
    res.n_clusters = fit.n_clusters;
    res.unit_effects = static_cast<std::size_t>(n_units);
    res.year_effects = static_cast<std::size_t>(n_years);
    for (std::size_t i = 1; i < names.size(); ++i) {
        res.control_names.push_back(names[i]);
        res.control_coefs.push_back(fit.beta(static_cast<Eigen::Index>(i)));
    }
    return res;
}

const EventCoefficient& EventStudyResult::at(int period) const {
    if (period < min_lead || period > max_lag) throw DomainError("period outside the event window");
    return coefficients[static_cast<std::size_t>(period - min_lead)];
}

EventStudyResult event_study(const Panel& panel, int min_lead, int max_lag,
                             const EstimatorOptions& opts) {
    if (min_lead > -2 || max_lag < 2) throw DomainError("event window must cover periods -2..+2");
    std::vector<int> periods;
    for (int e = min_lead; e <= max_lag; ++e) {
        if (e == -1) continue;
        if (e == 0 && opts.exclude_period_zero) continue;
        periods.push_back(e);
    }
    std::vector<std::string> names;
    for (int e : periods) names.push_back("rel_" + std::to_string(e));

    bool any_treated = std::any_of(panel.rows.begin(), panel.rows.end(),
                                   [](const PanelRow& r) { return r.adoption_year.has_value(); });
    if (!any_treated) throw DesignError("no treated units in the panel");

    Design d = build_design(panel, opts, names, [&](const PanelRow& r) {
        std::vector<double> v(periods.size(), 0.0);
        if (!r.adoption_year) return v;
        const int rel = std::clamp(r.year - *r.adoption_year, min_lead, max_lag);
        const auto it = std::find(periods.begin(), periods.end(), rel);
        if (it != periods.end()) v[static_cast<std::size_t>(it - periods.begin())] = 1.0;
        return v;
    });
    const Fit fit = estimate(std::move(d), opts.method);

    EventStudyResult res;
    res.min_lead = min_lead;
    res.max_lag = max_lag;
    res.n_obs = fit.n_obs;
    res.n_clusters = fit.n_clusters;
    for (int e = min_lead; e <= max_lag; ++e) {
        EventCoefficient c;
        c.period = e;
        const auto it = std::find(periods.begin(), periods.end(), e);
        if (it != periods.end()) {
            const auto idx = static_cast<Eigen::Index>(it - periods.begin());
            c.coef = fit.beta(idx);
            c.se = std::sqrt(fit.vcov(idx, idx));
            c.estimated = true;
        } else if (e != -1) {
            c.coef = std::nan("");
            c.se = std::nan("");
        }
        res.coefficients.push_back(c);
    }
    return res;
}

void write_panel_csv(std::ostream& os, const Panel& panel) {
    std::vector<std::string> header{"unit", "year", "outcome", "adoption_year"};
    header.insert(header.end(), panel.control_names.begin(), panel.control_names.end());
    csv::write_row(os, header);
    for (const auto& r : panel.rows) {
        std::vector<std::string> f{std::to_string(r.unit), std::to_string(r.year),
                                   csv::format_number(r.outcome),
                                   r.adoption_year ? std::to_string(*r.adoption_year) : ""};
        for (double x : r.controls) f.push_back(csv::format_number(x));
        csv::write_row(os, f);
    }
}

Panel read_panel_csv(std::istream& is) {
    const auto header = csv::read_row(is);
    if (!header || header->size() < 4 || (*header)[0] != "unit" || (*header)[1] != "year" ||
        (*header)[2] != "outcome" || (*header)[3] != "adoption_year") {
        throw UsageError("panel CSV header must start with unit,year,outcome,adoption_year");
    }
    Panel panel;
    panel.control_names.assign(header->begin() + 4, header->end());
    auto to_int = [](const std::string& s) {
        std::size_t pos = 0;
        const int v = std::stoi(s, &pos);
        if (pos != s.size()) throw UsageError("malformed integer in panel CSV: '" + s + "'");
        return v;
    };
    while (auto row = csv::read_row(is)) {
        if (row->size() == 1 && (*row)[0].empty()) continue;
        if (row->size() != header->size()) throw UsageError("panel CSV row has the wrong field count");
        PanelRow r;
        try {
            r.unit = to_int((*row)[0]);
            r.year = to_int((*row)[1]);
            if (!(*row)[3].empty()) r.adoption_year = to_int((*row)[3]);
        } catch (const std::logic_error&) {
            throw UsageError("malformed integer in panel CSV");
        }
        r.outcome = csv::parse_number((*row)[2]);
        for (std::size_t m = 4; m < row->size(); ++m) r.controls.push_back(csv::parse_number((*row)[m]));
        panel.rows.push_back(std::move(r));
    }
    validate_panel(panel);
    return panel;
}

}  // namespace dataecon
