#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dataecon/dynamics.hpp"
#include "dataecon/empirics.hpp"
#include "dataecon/sweep.hpp"

namespace dataecon {

enum class FigureKind { surface_heatmap, contour, phase, event_study };

std::string to_string(FigureKind k);

struct RenderSpec {
    FigureKind kind = FigureKind::phase;
    std::optional<Interval> x_range;  // derived from the artifact when unset
    std::optional<Interval> y_range;
    int width = 640;
    int height = 480;
    std::string colormap = "viridis";  // viridis | gray
};

// Heatmap over (θ, η) with optional iso-level overlays.
struct SurfaceFigure {
    SweepGrid grid;
    EquilibriumVariable variable = EquilibriumVariable::k_star;
    bool log_scale = true;
    std::vector<double> overlay_levels;
};

// Iso-contours in the (θ, η) plane.
struct ContourFigure {
    std::vector<IsoContour> contours;
    Interval theta_range{0.0, 1.0};
    Interval eta_range{0.0, 1.0};
};

// One or more phase portraits drawn on shared (k, c) axes.
struct PhaseFigure {
    std::vector<PhasePortrait> portraits;
};

struct EventStudyFigure {
    EventStudyResult result;
};

using Artifact = std::variant<SurfaceFigure, ContourFigure, PhaseFigure, EventStudyFigure>;

FigureKind kind_of(const Artifact& a);

// Data-to-pixel mapping used by the renderer; y grows upward in data space.
struct Viewport {
    Interval x_range;
    Interval y_range;
    double left = 0.0, top = 0.0, right = 0.0, bottom = 0.0;  // plot area in pixels

    double px(double x) const;
    double py(double y) const;
};

Viewport viewport_for(const Artifact& a, const RenderSpec& spec);

// Self-contained SVG; output depends only on the inputs.  Throws UsageError
// when spec.kind does not match the artifact or the spec is malformed.
std::string render_svg(const Artifact& a, const RenderSpec& spec);

}  // namespace dataecon
