#include "dataecon/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "dataecon/errors.hpp"

namespace dataecon {

namespace {

constexpr double kMarginLeft = 64.0;
constexpr double kMarginRight = 24.0;
constexpr double kMarginTop = 28.0;
constexpr double kMarginBottom = 48.0;

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    std::string s(buf);
    if (s == "-0.00") s = "0.00";
    return s;
}

std::string tick_label(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", std::abs(x) < 1e-12 ? 0.0 : x);
    return buf;
}

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += ch;
        }
    }
    return out;
}

// Tick positions at 1, 2 or 5 times a power of ten, about five per axis.
std::vector<double> nice_ticks(Interval r) {
    const double raw = (r.hi - r.lo) / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = 10.0 * mag;
    for (double m : {1.0, 2.0, 5.0}) {
        if (m * mag >= raw) {
            step = m * mag;
            break;
        }
    }
    std::vector<double> ticks;
    for (double t = std::ceil(r.lo / step - 1e-9) * step; t <= r.hi + 1e-9 * step; t += step) {
        ticks.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
    }
    return ticks;
}

struct Rgb {
    double r, g, b;
};

std::string color(const std::string& map, double t) {
    t = std::clamp(t, 0.0, 1.0);
    static constexpr std::array<Rgb, 5> viridis{{{68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98},
                                                 {253, 231, 37}}};
    Rgb c{};
    if (map == "gray") {
        c = {255 * t, 255 * t, 255 * t};
    } else {
        const double pos = t * (viridis.size() - 1);
        const auto i = std::min<std::size_t>(static_cast<std::size_t>(pos), viridis.size() - 2);
        const double f = pos - static_cast<double>(i);
        c = {viridis[i].r + f * (viridis[i + 1].r - viridis[i].r),
             viridis[i].g + f * (viridis[i + 1].g - viridis[i].g),
             viridis[i].b + f * (viridis[i + 1].b - viridis[i].b)};
    }
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(std::lround(c.r)),
                  static_cast<int>(std::lround(c.g)), static_cast<int>(std::lround(c.b)));
    return buf;
}

const char* const kSeriesColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

const char* series_color(std::size_t i) { return kSeriesColors[i % std::size(kSeriesColors)]; }

Interval padded(double lo, double hi, double frac = 0.05) {
    if (!(hi > lo)) {
        const double d = std::max(std::abs(lo), 1.0) * 0.5;
        return {lo - d, hi + d};
    }
    const double pad = (hi - lo) * frac;
    return {lo - pad, hi + pad};
}

Interval data_x_range(const Artifact& a) {
    return std::visit(
        [](const auto& fig) -> Interval {
            using T = std::decay_t<decltype(fig)>;
            if constexpr (std::is_same_v<T, SurfaceFigure>) {
                if (fig.grid.theta_axis.empty()) return {0.0, 1.0};
                return {fig.grid.theta_axis.front(), fig.grid.theta_axis.back()};
            } else if constexpr (std::is_same_v<T, ContourFigure>) {
                return fig.theta_range;
            } else if constexpr (std::is_same_v<T, PhaseFigure>) {
                if (fig.portraits.empty()) return {0.0, 1.0};
                Interval r = fig.portraits.front().k_range;
                for (const auto& p : fig.portraits) r = {std::min(r.lo, p.k_range.lo), std::max(r.hi, p.k_range.hi)};
                return r;
            } else {
                return {fig.result.min_lead - 0.5, fig.result.max_lag + 0.5};
            }
        },
        a);
}

Interval data_y_range(const Artifact& a) {
    return std::visit(
        [](const auto& fig) -> Interval {
            using T = std::decay_t<decltype(fig)>;
            if constexpr (std::is_same_v<T, SurfaceFigure>) {
                if (fig.grid.eta_axis.empty()) return {0.0, 1.0};
                return {fig.grid.eta_axis.front(), fig.grid.eta_axis.back()};
            } else if constexpr (std::is_same_v<T, ContourFigure>) {
                return fig.eta_range;
            } else if constexpr (std::is_same_v<T, PhaseFigure>) {
                if (fig.portraits.empty()) return {0.0, 1.0};
                Interval r = fig.portraits.front().c_range;
                for (const auto& p : fig.portraits) r = {std::min(r.lo, p.c_range.lo), std::max(r.hi, p.c_range.hi)};
                return r;
            } else {
                double lo = 0.0, hi = 0.0;
                for (const auto& c : fig.result.coefficients) {
                    if (!std::isfinite(c.coef)) continue;
                    const double w = std::isfinite(c.se) ? 1.96 * c.se : 0.0;
                    lo = std::min(lo, c.coef - w);
                    hi = std::max(hi, c.coef + w);
                }
                return padded(lo, hi, 0.1);
            }
        },
        a);
}

class Canvas {
public:
    Canvas(const Viewport& vp, const RenderSpec& spec) : vp_(vp), spec_(spec) {
        os_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\""
            << spec.height << "\" viewBox=\"0 0 " << spec.width << ' ' << spec.height << "\">\n";
        os_ << "<rect x=\"0\" y=\"0\" width=\"" << spec.width << "\" height=\"" << spec.height
            << "\" fill=\"#ffffff\"/>\n";
        os_ << "<defs><clipPath id=\"plot-area\"><rect x=\"" << fmt(vp.left) << "\" y=\"" << fmt(vp.top)
            << "\" width=\"" << fmt(vp.right - vp.left) << "\" height=\"" << fmt(vp.bottom - vp.top)
            << "\"/></clipPath></defs>\n";
    }

    std::ostringstream& out() { return os_; }
    const Viewport& vp() const { return vp_; }

    void begin_clip() { os_ << "<g clip-path=\"url(#plot-area)\">\n"; }
    void end_group() { os_ << "</g>\n"; }

    void line(double x0, double y0, double x1, double y1, const std::string& stroke, double width,
              const std::string& extra = "") {
        os_ << "<line x1=\"" << fmt(vp_.px(x0)) << "\" y1=\"" << fmt(vp_.py(y0)) << "\" x2=\"" << fmt(vp_.px(x1))
            << "\" y2=\"" << fmt(vp_.py(y1)) << "\" stroke=\"" << stroke << "\" stroke-width=\"" << fmt(width)
            << '"' << extra << "/>\n";
    }

    // Data-space polyline as a path; non-finite points split the curve.
    void path(const std::vector<Point2>& pts, const std::string& stroke, double width,
              const std::string& extra = "") {
        std::string d;
        bool pen_down = false;
        for (const auto& p : pts) {
            if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
                pen_down = false;
                continue;
            }
            d += pen_down ? " L" : (d.empty() ? "M" : " M");
            d += fmt(vp_.px(p.x)) + ' ' + fmt(vp_.py(p.y));
            pen_down = true;
        }
        if (d.empty()) return;
        os_ << "<path d=\"" << d << "\" fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << fmt(width)
            << '"' << extra << "/>\n";
    }

    void text(double px, double py, const std::string& s, const std::string& anchor, int size = 11,
              const std::string& extra = "") {
        os_ << "<text x=\"" << fmt(px) << "\" y=\"" << fmt(py) << "\" font-family=\"sans-serif\" font-size=\""
            << size << "\" text-anchor=\"" << anchor << '"' << extra << '>' << escape_xml(s) << "</text>\n";
    }

    void axes(const std::string& x_label, const std::string& y_label, const std::string& title) {
        os_ << "<rect x=\"" << fmt(vp_.left) << "\" y=\"" << fmt(vp_.top) << "\" width=\""
            << fmt(vp_.right - vp_.left) << "\" height=\"" << fmt(vp_.bottom - vp_.top)
            << "\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
        for (double xv : nice_ticks(vp_.x_range)) {
            const double px = vp_.px(xv);
            os_ << "<line x1=\"" << fmt(px) << "\" y1=\"" << fmt(vp_.bottom) << "\" x2=\"" << fmt(px)
                << "\" y2=\"" << fmt(vp_.bottom + 5) << "\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
            text(px, vp_.bottom + 18, tick_label(xv), "middle", 10);
        }
        for (double yv : nice_ticks(vp_.y_range)) {
            const double py = vp_.py(yv);
            os_ << "<line x1=\"" << fmt(vp_.left - 5) << "\" y1=\"" << fmt(py) << "\" x2=\"" << fmt(vp_.left)
                << "\" y2=\"" << fmt(py) << "\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
            text(vp_.left - 8, py + 3.5, tick_label(yv), "end", 10);
        }
        text((vp_.left + vp_.right) / 2, spec_.height - 8.0, x_label, "middle", 12);
        const double cy = (vp_.top + vp_.bottom) / 2;
        text(14, cy, y_label, "middle", 12, " transform=\"rotate(-90 14 " + fmt(cy) + ")\"");
        if (!title.empty()) text((vp_.left + vp_.right) / 2, 18, title, "middle", 13);
    }

    std::string finish() {
        os_ << "</svg>\n";
        return os_.str();
    }

private:
    Viewport vp_;
    const RenderSpec& spec_;
    std::ostringstream os_;
};

void draw_surface(Canvas& cv, const SurfaceFigure& fig, const RenderSpec& spec) {
    const auto& g = fig.grid;
    auto value = [&](const SteadyState& s) {
        const double v = fig.variable == EquilibriumVariable::k_star ? s.k_star : s.c_star;
        return fig.log_scale ? (v > 0 ? std::log10(v) : NAN) : v;
    };
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t n = 0; n < g.cells.size(); ++n) {
        if (g.mask[n] != CellMask::ok || !g.cells[n]) continue;
        const double v = value(*g.cells[n]);
        if (!std::isfinite(v)) continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    // Cell edges sit halfway between neighbouring axis samples.
    auto edges = [](const std::vector<double>& axis) {
        std::vector<double> e(axis.size() + 1);
        if (axis.size() == 1) return std::vector<double>{axis[0] - 0.5, axis[0] + 0.5};
        for (std::size_t i = 1; i < axis.size(); ++i) e[i] = 0.5 * (axis[i - 1] + axis[i]);
        e.front() = axis.front() - (e[1] - axis.front());
        e.back() = axis.back() + (axis.back() - e[axis.size() - 1]);
        return e;
    };
    if (g.theta_axis.empty() || g.eta_axis.empty()) return;
    const auto te = edges(g.theta_axis);
    const auto ee = edges(g.eta_axis);
    const auto& vp = cv.vp();
    cv.begin_clip();
    for (std::size_t i = 0; i < g.theta_axis.size(); ++i) {
        for (std::size_t j = 0; j < g.eta_axis.size(); ++j) {
            const auto m = g.mask_at(i, j);
            std::string fill = "#d9d9d9";
            if (m == CellMask::ok && g.cell(i, j)) {
                const double v = value(*g.cell(i, j));
                if (std::isfinite(v)) fill = color(spec.colormap, hi > lo ? (v - lo) / (hi - lo) : 0.5);
            }
            const double x0 = vp.px(te[i]), x1 = vp.px(te[i + 1]);
            const double y0 = vp.py(ee[j + 1]), y1 = vp.py(ee[j]);
            cv.out() << "<rect x=\"" << fmt(x0) << "\" y=\"" << fmt(y0) << "\" width=\"" << fmt(x1 - x0)
                     << "\" height=\"" << fmt(y1 - y0) << "\" fill=\"" << fill << "\" shape-rendering=\"crispEdges\" class=\"" << to_string(m)
                     << "\"/>\n";
        }
    }
    for (double level : fig.overlay_levels) {
        const auto contour = iso_equilibrium_contour(g, fig.variable, level);
        for (const auto& pl : contour.polylines) cv.path(pl, "#ffffff", 1.0, " class=\"iso\"");
    }
    cv.end_group();
    const std::string var = to_string(fig.variable);
    cv.axes("theta", "eta", (fig.log_scale ? "log10 " : "") + var);
}

void draw_contour(Canvas& cv, const ContourFigure& fig) {
    cv.begin_clip();
    for (std::size_t c = 0; c < fig.contours.size(); ++c) {
        for (const auto& pl : fig.contours[c].polylines) cv.path(pl, series_color(c), 1.5);
    }
    cv.end_group();
    std::string title;
    if (!fig.contours.empty()) title = "iso-" + to_string(fig.contours.front().variable);
    cv.axes("theta", "eta", title);
}

void draw_arrow(Canvas& cv, double x0, double y0, double x1, double y1, const std::string& stroke) {
    const auto& vp = cv.vp();
    const double ax = vp.px(x0), ay = vp.py(y0), bx = vp.px(x1), by = vp.py(y1);
    const double len = std::hypot(bx - ax, by - ay);
    cv.out() << "<line x1=\"" << fmt(ax) << "\" y1=\"" << fmt(ay) << "\" x2=\"" << fmt(bx) << "\" y2=\"" << fmt(by)
             << "\" stroke=\"" << stroke << "\" stroke-width=\"0.8\"/>\n";
    if (len < 1e-9) return;
    const double ux = (bx - ax) / len, uy = (by - ay) / len;
    const double hl = std::min(4.0, 0.4 * len);
    const double lx = bx - hl * ux + 0.5 * hl * uy, ly = by - hl * uy - 0.5 * hl * ux;
    const double rx = bx - hl * ux - 0.5 * hl * uy, ry = by - hl * uy + 0.5 * hl * ux;
    cv.out() << "<polygon points=\"" << fmt(bx) << ',' << fmt(by) << ' ' << fmt(lx) << ',' << fmt(ly) << ' '
             << fmt(rx) << ',' << fmt(ry) << "\" fill=\"" << stroke << "\"/>\n";
}

void draw_phase(Canvas& cv, const PhaseFigure& fig) {
    const auto& vp = cv.vp();
    cv.begin_clip();
    for (std::size_t n = 0; n < fig.portraits.size(); ++n) {
        const auto& pp = fig.portraits[n];
        const std::string shade = n == 0 ? "#9a9a9a" : "#c07070";
        // Quiver: arrows scaled to a fixed pixel length, direction from the rates.
        for (const auto& v : pp.vector_field) {
            const double dx = v.rate.k_dot * (vp.right - vp.left) / (vp.x_range.hi - vp.x_range.lo);
            const double dy = v.rate.c_dot * (vp.bottom - vp.top) / (vp.y_range.hi - vp.y_range.lo);
            const double len = std::hypot(dx, dy);
            if (!std::isfinite(len) || len == 0.0) continue;
            constexpr double kArrowPx = 12.0;
            const double sx = kArrowPx / len;
            const double k1 = v.state.k + v.rate.k_dot * sx;
            const double c1 = v.state.c + v.rate.c_dot * sx;
            draw_arrow(cv, v.state.k, v.state.c, k1, c1, shade);
        }
        const std::string id = " id=\"";
        cv.path(pp.nullclines.k_nullcline, series_color(2 * n), 1.5,
                id + "k-nullcline-" + std::to_string(n) + "\"");
        cv.path(pp.nullclines.c_nullcline, series_color(2 * n + 1), 1.5,
                id + "c-nullcline-" + std::to_string(n) + "\"");
        for (std::size_t b = 0; b < pp.stable_paths.size(); ++b) {
            std::vector<Point2> pts;
            pts.reserve(pp.stable_paths[b].points.size());
            for (const auto& tp : pp.stable_paths[b].points) pts.push_back({tp.state.k, tp.state.c});
            cv.path(pts, "#000000", 2.0,
                    id + "stable-branch-" + std::to_string(n) + '-' + std::to_string(b) + "\"");
        }
    }
    cv.end_group();
    for (std::size_t n = 0; n < fig.portraits.size(); ++n) {
        const auto& eq = fig.portraits[n].equilibrium;
        cv.out() << "<circle id=\"equilibrium-" << n << "\" cx=\"" << fmt(vp.px(eq.k)) << "\" cy=\""
                 << fmt(vp.py(eq.c)) << "\" r=\"4\" fill=\"" << series_color(2 * n) << "\" stroke=\"#000000\"/>\n";
    }
    std::string title;
    for (std::size_t n = 0; n < fig.portraits.size(); ++n) {
        const auto& p = fig.portraits[n].params;
        char buf[96];
        std::snprintf(buf, sizeof buf, "%seta=%.3g theta=%.3g", n ? "  vs  " : "", p.eta, p.theta);
        title += buf;
    }
    cv.axes("k", "c", title);
}

void draw_event_study(Canvas& cv, const EventStudyFigure& fig) {
    const auto& vp = cv.vp();
    cv.line(vp.x_range.lo, 0.0, vp.x_range.hi, 0.0, "#808080", 1.0, " stroke-dasharray=\"4 3\" id=\"zero-line\"");
    cv.line(-0.5, vp.y_range.lo, -0.5, vp.y_range.hi, "#c0c0c0", 1.0, " stroke-dasharray=\"2 3\"");
    for (const auto& c : fig.result.coefficients) {
        if (!std::isfinite(c.coef)) continue;
        const double x = c.period;
        if (std::isfinite(c.se) && c.se > 0) {
            const double lo = c.coef - 1.96 * c.se, hi = c.coef + 1.96 * c.se;
            cv.line(x, lo, x, hi, "#1f77b4", 1.5, " class=\"whisker\"");
            const double cap = 0.15;
            cv.line(x - cap, lo, x + cap, lo, "#1f77b4", 1.0);
            cv.line(x - cap, hi, x + cap, hi, "#1f77b4", 1.0);
        }
        cv.out() << "<circle cx=\"" << fmt(vp.px(x)) << "\" cy=\"" << fmt(vp.py(c.coef)) << "\" r=\"3.5\" fill=\""
                 << (c.estimated ? "#1f77b4" : "#ffffff") << "\" stroke=\"#1f77b4\" class=\"estimate\"/>\n";
    }
    cv.axes("periods relative to adoption", "coefficient", "event study");
}

}  // namespace

std::string to_string(FigureKind k) {
    switch (k) {
        case FigureKind::surface_heatmap: return "surface-heatmap";
        case FigureKind::contour: return "contour";
        case FigureKind::phase: return "phase";
        case FigureKind::event_study: return "event-study";
    }
    return "unknown";
}

FigureKind kind_of(const Artifact& a) {
    static constexpr FigureKind kinds[] = {FigureKind::surface_heatmap, FigureKind::contour, FigureKind::phase,
                                           FigureKind::event_study};
    return kinds[a.index()];
}

double Viewport::px(double x) const { return left + (x - x_range.lo) / (x_range.hi - x_range.lo) * (right - left); }

double Viewport::py(double y) const {
    return bottom - (y - y_range.lo) / (y_range.hi - y_range.lo) * (bottom - top);
}

Viewport viewport_for(const Artifact& a, const RenderSpec& spec) {
    if (spec.width <= 0 || spec.height <= 0) throw UsageError("render dimensions must be positive");
    if (spec.width <= kMarginLeft + kMarginRight || spec.height <= kMarginTop + kMarginBottom) {
        throw UsageError("render dimensions leave no plot area");
    }
    Viewport vp;
    vp.x_range = spec.x_range.value_or(data_x_range(a));
    vp.y_range = spec.y_range.value_or(data_y_range(a));
    if (!(vp.x_range.hi > vp.x_range.lo) || !(vp.y_range.hi > vp.y_range.lo)) {
        throw UsageError("render ranges must be nonempty");
    }
    vp.left = kMarginLeft;
    vp.top = kMarginTop;
    vp.right = spec.width - kMarginRight;
    vp.bottom = spec.height - kMarginBottom;
    return vp;
}

std::string render_svg(const Artifact& a, const RenderSpec& spec) {
    if (kind_of(a) != spec.kind) {
        throw UsageError("figure kind '" + to_string(spec.kind) + "' does not match a " + to_string(kind_of(a)) +
                         " artifact");
    }
    if (spec.colormap != "viridis" && spec.colormap != "gray") {
        throw UsageError("unknown colormap '" + spec.colormap + "'");
    }
    Canvas cv(viewport_for(a, spec), spec);
    std::visit(
        [&](const auto& fig) {
            using T = std::decay_t<decltype(fig)>;
            if constexpr (std::is_same_v<T, SurfaceFigure>) draw_surface(cv, fig, spec);
            else if constexpr (std::is_same_v<T, ContourFigure>) draw_contour(cv, fig);
            else if constexpr (std::is_same_v<T, PhaseFigure>) draw_phase(cv, fig);
            else draw_event_study(cv, fig);
        },
        a);
    return cv.finish();
}

}  // namespace dataecon
