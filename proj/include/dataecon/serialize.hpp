#pragma once

#include <iosfwd>
#include <string>

#include "json.hpp"

#include "dataecon/dynamics.hpp"
#include "dataecon/empirics.hpp"
#include "dataecon/firm_q.hpp"
#include "dataecon/model.hpp"
#include "dataecon/sweep.hpp"

namespace dataecon {

inline constexpr const char* kToolName = "dataecon";
inline constexpr const char* kToolVersion = "0.1.0";

using ojson = nlohmann::ordered_json;

// Doubles are written with 17 significant digits; NaN and infinities as null.
ojson number(double x);

ojson to_json(const ModelParams& p);
ojson to_json(const SteadyState& ss);
ojson to_json(const Regime& r);
ojson to_json(const EquilibriumAnalysis& a);
ojson to_json(const ThresholdResult& r);
ojson to_json(const DidResult& r);
ojson to_json(const EventStudyResult& r);

// Dumps JSON with a trailing newline; deterministic key order.
std::string dump(const ojson& j);

// theta,eta,mask,k_star,c_star,l_star,y_star,r_star (numeric fields empty when masked)
void write_sweep_csv(std::ostream& os, const SweepGrid& grid);
SweepGrid read_sweep_csv(std::istream& is, const ModelParams& base = {});

// theta,segment_lo,segment_hi,eta_star,c_star_max,shape
void write_threshold_csv(std::ostream& os, const ThresholdCurve& curve);

// polyline,index,theta,eta
void write_contour_csv(std::ostream& os, const IsoContour& contour);

// path,t,c,k,status
void write_trajectories_csv(std::ostream& os, const std::vector<Trajectory>& paths,
                            const std::vector<std::string>& labels);

// curve,k,c
void write_nullclines_csv(std::ostream& os, const Nullclines& n);

// c,k,c_dot,k_dot
void write_vector_field_csv(std::ostream& os, const std::vector<VectorSample>& field);

// period,coef,se,estimated
void write_event_study_csv(std::ostream& os, const EventStudyResult& r);
EventStudyResult read_event_study_csv(std::istream& is);

}  // namespace dataecon
