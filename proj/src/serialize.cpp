#include "dataecon/serialize.hpp"

#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include "dataecon/csv.hpp"
#include "dataecon/errors.hpp"

namespace dataecon {

namespace {

std::string num(double x) { return std::isfinite(x) ? csv::format_number(x) : ""; }

std::optional<double> maybe(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return csv::parse_number(s);
}

CellMask parse_mask(const std::string& s) {
    if (s == "ok") return CellMask::ok;
    if (s == "singular") return CellMask::singular;
    if (s == "infeasible") return CellMask::infeasible;
    if (s == "degenerate") return CellMask::degenerate;
    throw UsageError("unknown mask value '" + s + "'");
}

void expect_header(const std::optional<std::vector<std::string>>& got,
                   const std::vector<std::string>& want, const char* what) {
    if (!got || *got != want) throw UsageError(std::string("unexpected ") + what + " CSV header");
}

}  // namespace

ojson number(double x) {
    if (!std::isfinite(x)) return nullptr;
    // Round-trip through the 17-digit text form so dumps match the CSVs.
    return ojson::parse(csv::format_number(x));
}

std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

ojson to_json(const ModelParams& p) {
    return {{"alpha", number(p.alpha)}, {"beta", number(p.beta)},   {"eta", number(p.eta)},
            {"theta", number(p.theta)}, {"w", number(p.w)},         {"delta", number(p.delta)},
            {"rho", number(p.rho)},     {"sigma", number(p.sigma)}, {"a", number(p.a)},
            {"singular_band", number(p.singular_band)}};
}

ojson to_json(const SteadyState& ss) {
    return {{"k_star", number(ss.k_star)}, {"c_star", number(ss.c_star)}, {"l_star", number(ss.l_star)},
            {"y_star", number(ss.y_star)}, {"r_star", number(ss.r_star)}, {"feasible", ss.feasible}};
}

ojson to_json(const Regime& r) {
    return {{"composite_exponent", number(r.composite)},
            {"k_exponent_sign", r.k_exponent_sign},
            {"singular", r.singular}};
}

ojson to_json(const EquilibriumAnalysis& a) {
    ojson j;
    j["classification"] = to_string(a.classification);
    j["trace"] = number(a.trace);
    j["det"] = number(a.det);
    j["jacobian"] = {{number(a.jacobian[0][0]), number(a.jacobian[0][1])},
                     {number(a.jacobian[1][0]), number(a.jacobian[1][1])}};
    j["eigenvalues"] = {{{"re", number(a.eigen_re[0])}, {"im", number(a.eigen_im[0])}},
                        {{"re", number(a.eigen_re[1])}, {"im", number(a.eigen_im[1])}}};
    if (a.eigen_im[0] == 0.0) {
        j["eigenvectors"] = {{{"c", number(a.eigenvectors[0].c)}, {"k", number(a.eigenvectors[0].k)}},
                             {{"c", number(a.eigenvectors[1].c)}, {"k", number(a.eigenvectors[1].k)}}};
    }
    return j;
}

ojson to_json(const ThresholdResult& r) {
    return {{"theta", number(r.theta)},
            {"segment", {number(r.eta_range.lo), number(r.eta_range.hi)}},
            {"eta_star", number(r.eta_star)},
            {"c_star_max", number(r.c_star_max)},
            {"shape", to_string(r.shape)}};
}

ojson to_json(const DidResult& r) {
    ojson controls = ojson::object();
    for (std::size_t i = 0; i < r.control_names.size(); ++i) controls[r.control_names[i]] = number(r.control_coefs[i]);
    return {{"att", number(r.att)},
            {"se", number(r.se)},
            {"n_obs", r.n_obs},
            {"n_clusters", r.n_clusters},
            {"unit_effects", r.unit_effects},
            {"year_effects", r.year_effects},
            {"controls", controls}};
}

ojson to_json(const EventStudyResult& r) {
    ojson coefs = ojson::array();
    for (const auto& c : r.coefficients) {
        coefs.push_back({{"period", c.period}, {"coef", number(c.coef)}, {"se", number(c.se)},
                         {"estimated", c.estimated}});
    }
    return {{"min_lead", r.min_lead}, {"max_lag", r.max_lag}, {"n_obs", r.n_obs},
            {"n_clusters", r.n_clusters}, {"coefficients", coefs}};
}

void write_sweep_csv(std::ostream& os, const SweepGrid& grid) {
    csv::write_row(os, {"theta", "eta", "mask", "k_star", "c_star", "l_star", "y_star", "r_star"});
    for (std::size_t i = 0; i < grid.theta_axis.size(); ++i) {
        for (std::size_t j = 0; j < grid.eta_axis.size(); ++j) {
            std::vector<std::string> f{csv::format_number(grid.theta_axis[i]),
                                       csv::format_number(grid.eta_axis[j]), to_string(grid.mask_at(i, j))};
            if (const auto& c = grid.cell(i, j)) {
                for (double v : {c->k_star, c->c_star, c->l_star, c->y_star, c->r_star}) f.push_back(num(v));
            } else {
                f.insert(f.end(), 5, "");
            }
            csv::write_row(os, f);
        }
    }
}

SweepGrid read_sweep_csv(std::istream& is, const ModelParams& base) {
    expect_header(csv::read_row(is), {"theta", "eta", "mask", "k_star", "c_star", "l_star", "y_star", "r_star"},
                  "sweep");
    struct Row {
        double theta, eta;
        CellMask mask;
        std::optional<SteadyState> cell;
    };
    std::vector<Row> rows;
    std::set<double> thetas, etas;
    while (auto f = csv::read_row(is)) {
        if (f->size() == 1 && (*f)[0].empty()) continue;
        if (f->size() != 8) throw UsageError("sweep CSV row has the wrong field count");
        Row r{csv::parse_number((*f)[0]), csv::parse_number((*f)[1]), parse_mask((*f)[2]), std::nullopt};
        if (r.mask == CellMask::ok) {
            SteadyState ss;
            ss.k_star = maybe((*f)[3]).value_or(NAN);
            ss.c_star = maybe((*f)[4]).value_or(NAN);
            ss.l_star = maybe((*f)[5]).value_or(NAN);
            ss.y_star = maybe((*f)[6]).value_or(NAN);
            ss.r_star = maybe((*f)[7]).value_or(NAN);
            ss.feasible = true;
            r.cell = ss;
        }
        thetas.insert(r.theta);
        etas.insert(r.eta);
        rows.push_back(r);
    }
    SweepGrid g;
    g.base = base;
    g.theta_axis.assign(thetas.begin(), thetas.end());
    g.eta_axis.assign(etas.begin(), etas.end());
    if (rows.size() != g.theta_axis.size() * g.eta_axis.size()) throw UsageError("sweep CSV is not a full grid");
    g.cells.assign(rows.size(), std::nullopt);
    g.mask.assign(rows.size(), CellMask::ok);
    std::map<double, std::size_t> ti, ei;
    for (std::size_t i = 0; i < g.theta_axis.size(); ++i) ti[g.theta_axis[i]] = i;
    for (std::size_t j = 0; j < g.eta_axis.size(); ++j) ei[g.eta_axis[j]] = j;
    for (const auto& r : rows) {
        const std::size_t idx = g.index(ti.at(r.theta), ei.at(r.eta));
        g.cells[idx] = r.cell;
        g.mask[idx] = r.mask;
    }
    return g;
}

void write_threshold_csv(std::ostream& os, const ThresholdCurve& curve) {
    csv::write_row(os, {"theta", "segment_lo", "segment_hi", "eta_star", "c_star_max", "shape"});
    for (const auto& seg : curve.by_segment) {
        for (const auto& r : seg) {
            csv::write_row(os, {csv::format_number(r.theta), csv::format_number(r.eta_range.lo),
                                csv::format_number(r.eta_range.hi), csv::format_number(r.eta_star),
                                num(r.c_star_max), to_string(r.shape)});
        }
    }
}

void write_contour_csv(std::ostream& os, const IsoContour& contour) {
    csv::write_row(os, {"polyline", "index", "theta", "eta"});
    for (std::size_t p = 0; p < contour.polylines.size(); ++p) {
        for (std::size_t i = 0; i < contour.polylines[p].size(); ++i) {
            const auto& pt = contour.polylines[p][i];
            csv::write_row(os, {std::to_string(p), std::to_string(i), csv::format_number(pt.x),
                                csv::format_number(pt.y)});
        }
    }
}

void write_trajectories_csv(std::ostream& os, const std::vector<Trajectory>& paths,
                            const std::vector<std::string>& labels) {
    csv::write_row(os, {"path", "t", "c", "k", "status"});
    for (std::size_t p = 0; p < paths.size(); ++p) {
        const std::string label = p < labels.size() ? labels[p] : std::to_string(p);
        for (const auto& pt : paths[p].points) {
            csv::write_row(os, {label, csv::format_number(pt.t), csv::format_number(pt.state.c),
                                csv::format_number(pt.state.k), to_string(paths[p].status)});
        }
    }
}

void write_nullclines_csv(std::ostream& os, const Nullclines& n) {
    csv::write_row(os, {"curve", "k", "c"});
    for (const auto& pt : n.k_nullcline) csv::write_row(os, {"k_dot_zero", num(pt.x), num(pt.y)});
    for (const auto& pt : n.c_nullcline) csv::write_row(os, {"c_dot_zero", num(pt.x), num(pt.y)});
}

void write_vector_field_csv(std::ostream& os, const std::vector<VectorSample>& field) {
    csv::write_row(os, {"c", "k", "c_dot", "k_dot"});
    for (const auto& v : field) {
        csv::write_row(os, {num(v.state.c), num(v.state.k), num(v.rate.c_dot), num(v.rate.k_dot)});
    }
}

void write_event_study_csv(std::ostream& os, const EventStudyResult& r) {
    csv::write_row(os, {"period", "coef", "se", "estimated"});
    for (const auto& c : r.coefficients) {
        csv::write_row(os, {std::to_string(c.period), num(c.coef), num(c.se), c.estimated ? "1" : "0"});
    }
}

EventStudyResult read_event_study_csv(std::istream& is) {
    expect_header(csv::read_row(is), {"period", "coef", "se", "estimated"}, "event-study");
    EventStudyResult r;
    while (auto f = csv::read_row(is)) {
        if (f->size() == 1 && (*f)[0].empty()) continue;
        if (f->size() != 4) throw UsageError("event-study CSV row has the wrong field count");
        EventCoefficient c;
        c.period = std::stoi((*f)[0]);
        c.coef = maybe((*f)[1]).value_or(NAN);
        c.se = maybe((*f)[2]).value_or(NAN);
        c.estimated = (*f)[3] == "1";
        r.coefficients.push_back(c);
    }
    if (r.coefficients.empty()) throw UsageError("event-study CSV has no rows");
    r.min_lead = r.coefficients.front().period;
    r.max_lag = r.coefficients.back().period;
    return r;
}

}  // namespace dataecon
