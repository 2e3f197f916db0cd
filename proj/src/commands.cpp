#include "dataecon/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "dataecon/errors.hpp"
#include "dataecon/serialize.hpp"
#include "dataecon/svg.hpp"

namespace dataecon {

namespace fs = std::filesystem;

namespace {

class Output {
public:
    Output(const RunConfig& cfg, std::string command, std::ostream& log)
        : cfg_(cfg), command_(std::move(command)), log_(log), dir_(cfg.out_dir) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw UsageError("cannot create output directory '" + cfg.out_dir + "': " + ec.message());
        write_file("config.json", dump(to_json(cfg)));
    }

    ojson meta() const {
        return {{"tool", kToolName}, {"version", kToolVersion}, {"command", command_}, {"config", to_json(cfg_)}};
    }

    // JSON records embed the metadata under "meta".
    void json(const std::string& name, ojson body) {
        if (!cfg_.wants("json")) return;
        ojson doc{{"meta", meta()}};
        for (auto& [k, v] : body.items()) doc[k] = std::move(v);
        write_file(name, dump(doc));
    }

    // CSV and SVG files get a sidecar <name>.meta.json.
    void csv(const std::string& name, const std::function<void(std::ostream&)>& body) {
        if (!cfg_.wants("csv")) return;
        std::ostringstream os;
        body(os);
        write_file(name, os.str());
        sidecar(name);
    }

    void svg(const std::string& name, const Artifact& a, FigureKind kind) {
        if (!cfg_.wants("svg")) return;
        RenderSpec spec;
        spec.kind = kind;
        spec.width = cfg_.render.width;
        spec.height = cfg_.render.height;
        spec.colormap = cfg_.render.colormap;
        write_file(name, render_svg(a, spec));
        sidecar(name);
    }

private:
    void sidecar(const std::string& name) {
        ojson m = meta();
        m["file"] = name;
        write_file(name + ".meta.json", dump(m));
    }

    void write_file(const std::string& name, const std::string& content) {
        const fs::path path = dir_ / name;
        std::ofstream f(path, std::ios::binary);
        f << content;
        if (!f) throw Error("failed to write " + path.string());
        log_ << "wrote " << path.string() << '\n';
    }

    const RunConfig& cfg_;
    std::string command_;
    std::ostream& log_;
    fs::path dir_;
};

SweepGrid sweep_from(const RunConfig& cfg) {
    const auto& g = cfg.grid;
    return grid_sweep(cfg.params, linspace(g.theta_min, g.theta_max, g.n_theta),
                      linspace(g.eta_min, g.eta_max, g.n_eta), g.threads);
}

PhaseOptions phase_options(const RunConfig& cfg) {
    PhaseOptions o;
    o.nullcline_samples = cfg.phase.nullcline_samples;
    o.quiver_n = cfg.phase.quiver_n;
    o.saddle.tol = cfg.integrator.tol;
    o.saddle.epsilon_factor = cfg.phase.epsilon_factor;
    return o;
}

Interval k_window(const RunConfig& cfg, const ModelParams& p) {
    const double k = steady_state(p).k_star;
    return {cfg.phase.k_min_factor * k, cfg.phase.k_max_factor * k};
}

ojson steady_record(const ModelParams& p) {
    const auto ss = steady_state(p);
    return {{"params", to_json(p)}, {"regime", to_json(p.regime())}, {"steady_state", to_json(ss)}};
}

std::vector<std::string> branch_labels(const PhasePortrait& pp, const std::string& prefix) {
    std::vector<std::string> labels;
    const char* names[] = {"lower", "upper"};
    for (std::size_t i = 0; i < pp.stable_paths.size(); ++i) labels.push_back(prefix + names[i % 2]);
    return labels;
}

int cmd_steady(const RunConfig& cfg, Output& out) {
    const auto& p = cfg.params;
    require_regular(p);
    ojson body = steady_record(p);
    body["equilibrium"] = to_json(classify_equilibrium(p));
    out.json("steady.json", body);
    return exit_ok;
}

int cmd_sweep(const RunConfig& cfg, Output& out) {
    const auto grid = sweep_from(cfg);
    out.csv("sweep.csv", [&](std::ostream& os) { write_sweep_csv(os, grid); });
    ojson counts = ojson::object();
    for (auto m : {CellMask::ok, CellMask::singular, CellMask::infeasible, CellMask::degenerate}) {
        counts[to_string(m)] = grid.count(m);
    }
    out.json("sweep.json", {{"n_theta", grid.theta_axis.size()}, {"n_eta", grid.eta_axis.size()}, {"mask_counts", counts}});
    for (auto var : {EquilibriumVariable::k_star, EquilibriumVariable::c_star}) {
        SurfaceFigure fig{grid, var, true, {}};
        out.svg("sweep_" + to_string(var) + ".svg", fig, FigureKind::surface_heatmap);
    }
    return exit_ok;
}

int cmd_threshold(const RunConfig& cfg, Output& out) {
    const auto& t = cfg.threshold;
    const auto curve = threshold_curve(cfg.params, t.thetas, {t.eta_min, t.eta_max}, t.tol, t.coarse);
    out.csv("threshold.csv", [&](std::ostream& os) { write_threshold_csv(os, curve); });
    ojson segments = ojson::array();
    for (std::size_t s = 0; s < curve.segments.size(); ++s) {
        ojson rows = ojson::array();
        bool nondecreasing = true;
        for (std::size_t i = 0; i < curve.by_segment[s].size(); ++i) {
            rows.push_back(to_json(curve.by_segment[s][i]));
            if (i > 0 && curve.by_segment[s][i].eta_star < curve.by_segment[s][i - 1].eta_star - t.tol) {
                nondecreasing = false;
            }
        }
        segments.push_back({{"eta_range", {number(curve.segments[s].lo), number(curve.segments[s].hi)}},
                            {"eta_star_nondecreasing", nondecreasing},
                            {"thresholds", rows}});
    }
    out.json("threshold.json", {{"segments", segments}});
    return exit_ok;
}

int cmd_contour(const RunConfig& cfg, Output& out) {
    const auto grid = sweep_from(cfg);
    const Interval window{cfg.contour.window_eta_min, cfg.contour.window_eta_max};
    const double level = cfg.contour.level ? *cfg.contour.level : median_level(grid, cfg.contour.variable, window);
    const auto contour = iso_equilibrium_contour(grid, cfg.contour.variable, level);
    out.csv("contour.csv", [&](std::ostream& os) { write_contour_csv(os, contour); });
    ojson body{{"variable", to_string(contour.variable)},
               {"level", number(level)},
               {"polylines", contour.polylines.size()},
               {"points", contour.point_count()},
               {"window", {number(window.lo), number(window.hi)}}};
    try {
        body["spearman_theta_eta"] = number(contour_comovement(contour, window));
    } catch (const SearchError& e) {
        body["spearman_theta_eta"] = nullptr;
        body["note"] = e.what();
    }
    out.json("contour.json", body);
    ContourFigure fig{{contour}, {grid.theta_axis.front(), grid.theta_axis.back()},
                      {grid.eta_axis.front(), grid.eta_axis.back()}};
    out.svg("contour.svg", fig, FigureKind::contour);
    return exit_ok;
}

int cmd_phase(const RunConfig& cfg, Output& out) {
    const auto& p = cfg.params;
    require_regular(p);
    const auto pp = phase_portrait(p, k_window(cfg, p), phase_options(cfg));
    ojson body = steady_record(p);
    body["equilibrium"] = to_json(pp.analysis);
    body["k_range"] = {number(pp.k_range.lo), number(pp.k_range.hi)};
    body["c_range"] = {number(pp.c_range.lo), number(pp.c_range.hi)};
    ojson branches = ojson::array();
    const auto labels = branch_labels(pp, "");
    for (std::size_t i = 0; i < pp.stable_paths.size(); ++i) {
        const auto& b = pp.stable_paths[i];
        branches.push_back({{"branch", labels[i]},
                            {"points", b.points.size()},
                            {"status", to_string(b.status)},
                            {"start", {{"c", number(b.front().c)}, {"k", number(b.front().k)}}}});
    }
    body["stable_branches"] = branches;
    out.json("phase.json", body);
    out.csv("phase_trajectories.csv", [&](std::ostream& os) { write_trajectories_csv(os, pp.stable_paths, labels); });
    out.csv("phase_nullclines.csv", [&](std::ostream& os) { write_nullclines_csv(os, pp.nullclines); });
    out.csv("phase_vector_field.csv", [&](std::ostream& os) { write_vector_field_csv(os, pp.vector_field); });
    out.svg("phase.svg", PhaseFigure{{pp}}, FigureKind::phase);
    return exit_ok;
}

int cmd_shock(const RunConfig& cfg, Output& out) {
    const auto& s = cfg.shock;
    const auto& p = cfg.params;
    const auto before = p.with_policy(s.theta_before.value_or(p.theta), s.eta_before.value_or(p.eta));
    const auto after = p.with_policy(s.theta_after.value_or(p.theta), s.eta_after.value_or(p.eta));
    require_regular(before);
    require_regular(after);
    const auto sb = steady_state(before).k_star, sa = steady_state(after).k_star;
    const Interval range{cfg.phase.k_min_factor * std::min(sb, sa), cfg.phase.k_max_factor * std::max(sb, sa)};
    const auto res = shock_experiment(before, after, range, phase_options(cfg));
    out.json("shock.json", {{"before", steady_record(before)},
                            {"after", steady_record(after)},
                            {"dk_star", number(res.dk_star)},
                            {"dc_star", number(res.dc_star)},
                            {"before_classification", to_string(res.before.analysis.classification)},
                            {"after_classification", to_string(res.after.analysis.classification)}});
    out.csv("shock_trajectories.csv", [&](std::ostream& os) {
        std::vector<Trajectory> paths = res.before.stable_paths;
        paths.insert(paths.end(), res.after.stable_paths.begin(), res.after.stable_paths.end());
        auto labels = branch_labels(res.before, "before-");
        const auto la = branch_labels(res.after, "after-");
        labels.insert(labels.end(), la.begin(), la.end());
        write_trajectories_csv(os, paths, labels);
    });
    out.svg("shock.svg", PhaseFigure{{res.before, res.after}}, FigureKind::phase);
    return exit_ok;
}

int cmd_qsteady(const RunConfig& cfg, Output& out) {
    const auto& p = cfg.params;
    const double r = cfg.q.r.value_or(p.rho);
    const double k = k_of_q(cfg.q.q, r, p, cfg.q.reading);
    ojson body{{"params", to_json(p)},
               {"q", number(cfg.q.q)},
               {"r", number(r)},
               {"linear_term", cfg.q.reading == LinearTermReading::adjustment_a ? "a" : "alpha"},
               {"k", number(k)},
               {"investment_rate", number(investment_rate(cfg.q.q, p))},
               {"capital_growth_rate", number(capital_growth_rate(cfg.q.q, p))}};
    if (!p.regime().singular) body["household_k_star"] = number(steady_state(p).k_star);
    out.json("qsteady.json", body);
    return exit_ok;
}

int cmd_did_sim(const RunConfig& cfg, Output& out) {
    const auto& d = cfg.did;
    EstimatorOptions opts;
    opts.exclude_period_zero = d.exclude_period_zero;
    const Panel panel = generate_panel(d.dgp);
    const auto did = twfe_did(panel, opts);
    const auto es = event_study(panel, d.min_lead, d.max_lag, opts);
    out.csv("panel.csv", [&](std::ostream& os) { write_panel_csv(os, panel); });
    out.csv("event_study.csv", [&](std::ostream& os) { write_event_study_csv(os, es); });
    ojson body{{"did", to_json(did)}, {"event_study", to_json(es)}};
    if (d.replications > 1) {
        std::vector<double> att, se;
        for (int rep = 0; rep < d.replications; ++rep) {
            DgpConfig dgp = d.dgp;
            dgp.seed = d.dgp.seed + static_cast<std::uint64_t>(rep);
            const auto r = twfe_did(generate_panel(dgp), opts);
            att.push_back(r.att);
            se.push_back(r.se);
        }
        const double n = static_cast<double>(att.size());
        const double mean = std::accumulate(att.begin(), att.end(), 0.0) / n;
        double ss = 0.0;
        for (double a : att) ss += (a - mean) * (a - mean);
        body["monte_carlo"] = {{"replications", d.replications},
                               {"mean_att", number(mean)},
                               {"sd_att", number(std::sqrt(ss / (n - 1)))},
                               {"mean_se", number(std::accumulate(se.begin(), se.end(), 0.0) / n)},
                               {"se_of_mean", number(std::sqrt(ss / (n - 1) / n))}};
    }
    out.json("did.json", body);
    out.svg("event_study.svg", EventStudyFigure{es}, FigureKind::event_study);
    return exit_ok;
}

using Handler = int (*)(const RunConfig&, Output&);

const std::map<std::string, Handler>& handlers() {
    static const std::map<std::string, Handler> h{
        {"steady", cmd_steady}, {"sweep", cmd_sweep},   {"threshold", cmd_threshold}, {"contour", cmd_contour},
        {"phase", cmd_phase},   {"shock", cmd_shock},   {"qsteady", cmd_qsteady},     {"did-sim", cmd_did_sim}};
    return h;
}

}  // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"steady", "sweep",  "threshold", "contour",
                                                "phase",  "shock",  "qsteady",   "did-sim"};
    return names;
}

int report_current_exception(std::ostream& err) {
    try {
        throw;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const RegimeError& e) {
        err << "regime error: " << e.what() << '\n';
        return exit_numerical;
    } catch (const std::exception& e) {
        err << "numerical error: " << e.what() << '\n';
        return exit_numerical;
    }
}

int run_command(const RunConfig& cfg, const std::string& command, std::ostream& log, std::ostream& err) {
    try {
        const auto it = handlers().find(command);
        if (it == handlers().end()) throw UsageError("unknown command '" + command + "'");
        Output out(cfg, command, log);
        return it->second(cfg, out);
    } catch (...) {
        return report_current_exception(err);
    }
}

}  // namespace dataecon
