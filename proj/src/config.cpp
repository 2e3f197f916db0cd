#include "dataecon/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "dataecon/errors.hpp"

namespace dataecon {

using json = nlohmann::ordered_json;

namespace {

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

void reject_unknown(const json& obj, std::initializer_list<const char*> keys, const std::string& path) {
    if (!obj.is_object()) throw UsageError("'" + (path.empty() ? "config" : path) + "' must be an object");
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, v] : obj.items()) {
        if (!allowed.count(k)) throw UsageError("unknown config key '" + join(path, k) + "'");
    }
}

template <class T>
T get(const json& obj, const char* key, const std::string& path) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw UsageError("missing config key '" + join(path, key) + "'");
    try {
        if constexpr (std::is_floating_point_v<T>) {
            if (!it->is_number()) throw UsageError("");
        } else if constexpr (std::is_same_v<T, bool>) {
            if (!it->is_boolean()) throw UsageError("");
        } else if constexpr (std::is_integral_v<T>) {
            if (!it->is_number_integer()) throw UsageError("");
            if constexpr (std::is_unsigned_v<T>) {
                if (it->get<long long>() < 0) throw UsageError("");
            }
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!it->is_string()) throw UsageError("");
        }
        return it->get<T>();
    } catch (const std::exception&) {
        throw UsageError("type mismatch for config key '" + join(path, key) + "'");
    }
}

std::optional<double> get_optional(const json& obj, const char* key, const std::string& path) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    return get<double>(obj, key, path);
}

json optional_to_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::vector<double> get_numbers(const json& obj, const char* key, const std::string& path) {
    const auto it = obj.find(key);
    if (it == obj.end() || !it->is_array()) {
        throw UsageError("config key '" + join(path, key) + "' must be an array of numbers");
    }
    std::vector<double> out;
    for (const auto& v : *it) {
        if (!v.is_number()) throw UsageError("config key '" + join(path, key) + "' must hold numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

}  // namespace

bool RunConfig::wants(const std::string& format) const {
    return std::find(formats.begin(), formats.end(), format) != formats.end();
}

json to_json(const RunConfig& c) {
    json j;
    const auto& p = c.params;
    j["alpha"] = p.alpha;
    j["beta"] = p.beta;
    j["eta"] = p.eta;
    j["theta"] = p.theta;
    j["w"] = p.w;
    j["delta"] = p.delta;
    j["rho"] = p.rho;
    j["sigma"] = p.sigma;
    j["a"] = p.a;
    j["singular_band"] = p.singular_band;
    j["seed"] = c.seed;
    j["out"] = c.out_dir;
    j["formats"] = c.formats;
    j["grid"] = {{"theta_min", c.grid.theta_min}, {"theta_max", c.grid.theta_max},
                 {"n_theta", c.grid.n_theta},     {"eta_min", c.grid.eta_min},
                 {"eta_max", c.grid.eta_max},     {"n_eta", c.grid.n_eta},
                 {"threads", c.grid.threads}};
    j["integrator"] = {{"tol", c.integrator.tol}, {"t_max", c.integrator.t_max}};
    j["threshold"] = {{"thetas", c.threshold.thetas},
                      {"eta_min", c.threshold.eta_min},
                      {"eta_max", c.threshold.eta_max},
                      {"tol", c.threshold.tol},
                      {"coarse", c.threshold.coarse}};
    j["contour"] = {{"variable", to_string(c.contour.variable)},
                    {"level", optional_to_json(c.contour.level)},
                    {"window_eta_min", c.contour.window_eta_min},
                    {"window_eta_max", c.contour.window_eta_max}};
    j["phase"] = {{"k_min_factor", c.phase.k_min_factor},
                  {"k_max_factor", c.phase.k_max_factor},
                  {"nullcline_samples", c.phase.nullcline_samples},
                  {"quiver_n", c.phase.quiver_n},
                  {"epsilon_factor", c.phase.epsilon_factor}};
    j["shock"] = {{"eta_before", optional_to_json(c.shock.eta_before)},
                  {"eta_after", optional_to_json(c.shock.eta_after)},
                  {"theta_before", optional_to_json(c.shock.theta_before)},
                  {"theta_after", optional_to_json(c.shock.theta_after)}};
    j["q"] = {{"q", c.q.q},
              {"r", optional_to_json(c.q.r)},
              {"linear_term", c.q.reading == LinearTermReading::adjustment_a ? "a" : "alpha"}};
    const auto& d = c.did.dgp;
    json profile = nullptr;
    if (d.profile) profile = {{"first_period", d.profile->first_period}, {"effects", d.profile->effects}};
    j["did"] = {{"n_units", d.n_units},
                {"first_year", d.first_year},
                {"n_years", d.n_years},
                {"share_treated", d.share_treated},
                {"adopt_first", d.adopt_first},
                {"adopt_last", d.adopt_last},
                {"unit_effect_scale", d.unit_effect_scale},
                {"year_effect_scale", d.year_effect_scale},
                {"noise_scale", d.noise_scale},
                {"tau", d.tau},
                {"profile", profile},
                {"control_coefs", d.control_coefs},
                {"replications", c.did.replications},
                {"min_lead", c.did.min_lead},
                {"max_lag", c.did.max_lag},
                {"exclude_period_zero", c.did.exclude_period_zero}};
    j["render"] = {{"width", c.render.width},
                   {"height", c.render.height},
                   {"colormap", c.render.colormap}};
    return j;
}

RunConfig from_json(const json& j) {
    reject_unknown(j, {"alpha", "beta", "eta", "theta", "w", "delta", "rho", "sigma", "a", "singular_band",
                       "seed", "out", "formats", "grid", "integrator", "threshold", "contour", "phase",
                       "shock", "q", "did", "render"},
                   "");
    RunConfig c;
    auto& p = c.params;
    p.alpha = get<double>(j, "alpha", "");
    p.beta = get<double>(j, "beta", "");
    p.eta = get<double>(j, "eta", "");
    p.theta = get<double>(j, "theta", "");
    p.w = get<double>(j, "w", "");
    p.delta = get<double>(j, "delta", "");
    p.rho = get<double>(j, "rho", "");
    p.sigma = get<double>(j, "sigma", "");
    p.a = get<double>(j, "a", "");
    p.singular_band = get<double>(j, "singular_band", "");
    c.params = validate_params(p);
    c.seed = get<std::uint64_t>(j, "seed", "");
    c.out_dir = get<std::string>(j, "out", "");
    if (!j.at("formats").is_array()) throw UsageError("config key 'formats' must be an array");
    c.formats.clear();
    for (const auto& f : j.at("formats")) {
        if (!f.is_string()) throw UsageError("config key 'formats' must hold strings");
        const auto s = f.get<std::string>();
        if (s != "csv" && s != "json" && s != "svg") throw UsageError("unknown output format '" + s + "'");
        c.formats.push_back(s);
    }

    const json& g = j.at("grid");
    reject_unknown(g, {"theta_min", "theta_max", "n_theta", "eta_min", "eta_max", "n_eta", "threads"}, "grid");
    c.grid.theta_min = get<double>(g, "theta_min", "grid");
    c.grid.theta_max = get<double>(g, "theta_max", "grid");
    c.grid.n_theta = get<std::size_t>(g, "n_theta", "grid");
    c.grid.eta_min = get<double>(g, "eta_min", "grid");
    c.grid.eta_max = get<double>(g, "eta_max", "grid");
    c.grid.n_eta = get<std::size_t>(g, "n_eta", "grid");
    c.grid.threads = get<unsigned>(g, "threads", "grid");

    const json& in = j.at("integrator");
    reject_unknown(in, {"tol", "t_max"}, "integrator");
    c.integrator.tol = get<double>(in, "tol", "integrator");
    c.integrator.t_max = get<double>(in, "t_max", "integrator");

    const json& th = j.at("threshold");
    reject_unknown(th, {"thetas", "eta_min", "eta_max", "tol", "coarse"}, "threshold");
    c.threshold.thetas = get_numbers(th, "thetas", "threshold");
    c.threshold.eta_min = get<double>(th, "eta_min", "threshold");
    c.threshold.eta_max = get<double>(th, "eta_max", "threshold");
    c.threshold.tol = get<double>(th, "tol", "threshold");
    c.threshold.coarse = get<std::size_t>(th, "coarse", "threshold");

    const json& co = j.at("contour");
    reject_unknown(co, {"variable", "level", "window_eta_min", "window_eta_max"}, "contour");
    const auto var = get<std::string>(co, "variable", "contour");
    if (var == "c_star") {
        c.contour.variable = EquilibriumVariable::c_star;
    } else if (var == "k_star") {
        c.contour.variable = EquilibriumVariable::k_star;
    } else {
        throw UsageError("contour.variable must be 'k_star' or 'c_star'");
    }
    c.contour.level = get_optional(co, "level", "contour");
    c.contour.window_eta_min = get<double>(co, "window_eta_min", "contour");
    c.contour.window_eta_max = get<double>(co, "window_eta_max", "contour");

    const json& ph = j.at("phase");
    reject_unknown(ph, {"k_min_factor", "k_max_factor", "nullcline_samples", "quiver_n", "epsilon_factor"}, "phase");
    c.phase.k_min_factor = get<double>(ph, "k_min_factor", "phase");
    c.phase.k_max_factor = get<double>(ph, "k_max_factor", "phase");
    c.phase.nullcline_samples = get<std::size_t>(ph, "nullcline_samples", "phase");
    c.phase.quiver_n = get<std::size_t>(ph, "quiver_n", "phase");
    c.phase.epsilon_factor = get<double>(ph, "epsilon_factor", "phase");

    const json& sh = j.at("shock");
    reject_unknown(sh, {"eta_before", "eta_after", "theta_before", "theta_after"}, "shock");
    c.shock.eta_before = get_optional(sh, "eta_before", "shock");
    c.shock.eta_after = get_optional(sh, "eta_after", "shock");
    c.shock.theta_before = get_optional(sh, "theta_before", "shock");
    c.shock.theta_after = get_optional(sh, "theta_after", "shock");

    const json& q = j.at("q");
    reject_unknown(q, {"q", "r", "linear_term"}, "q");
    c.q.q = get<double>(q, "q", "q");
    c.q.r = get_optional(q, "r", "q");
    const auto lt = get<std::string>(q, "linear_term", "q");
    if (lt == "a") {
        c.q.reading = LinearTermReading::adjustment_a;
    } else if (lt == "alpha") {
        c.q.reading = LinearTermReading::printed_alpha;
    } else {
        throw UsageError("q.linear_term must be 'a' or 'alpha'");
    }

    const json& d = j.at("did");
    reject_unknown(d, {"n_units", "first_year", "n_years", "share_treated", "adopt_first", "adopt_last",
                       "unit_effect_scale", "year_effect_scale", "noise_scale", "tau", "profile",
                       "control_coefs", "replications", "min_lead", "max_lag", "exclude_period_zero"},
                   "did");
    auto& dg = c.did.dgp;
    dg.n_units = get<int>(d, "n_units", "did");
    dg.first_year = get<int>(d, "first_year", "did");
    dg.n_years = get<int>(d, "n_years", "did");
    dg.share_treated = get<double>(d, "share_treated", "did");
    dg.adopt_first = get<int>(d, "adopt_first", "did");
    dg.adopt_last = get<int>(d, "adopt_last", "did");
    dg.unit_effect_scale = get<double>(d, "unit_effect_scale", "did");
    dg.year_effect_scale = get<double>(d, "year_effect_scale", "did");
    dg.noise_scale = get<double>(d, "noise_scale", "did");
    dg.tau = get<double>(d, "tau", "did");
    if (d.contains("profile") && !d.at("profile").is_null()) {
        const json& pr = d.at("profile");
        reject_unknown(pr, {"first_period", "effects"}, "did.profile");
        DynamicProfile prof;
        prof.first_period = get<int>(pr, "first_period", "did.profile");
        prof.effects = get_numbers(pr, "effects", "did.profile");
        dg.profile = prof;
    }
    dg.control_coefs = get_numbers(d, "control_coefs", "did");
    dg.seed = c.seed;
    c.did.replications = get<int>(d, "replications", "did");
    c.did.min_lead = get<int>(d, "min_lead", "did");
    c.did.max_lag = get<int>(d, "max_lag", "did");
    c.did.exclude_period_zero = get<bool>(d, "exclude_period_zero", "did");
    validate_dgp(dg);
    if (c.did.replications < 1) throw ValidationError(std::vector<ValidationError::Violation>{{"did.replications", "replications >= 1"}});

    const json& r = j.at("render");
    reject_unknown(r, {"width", "height", "colormap"}, "render");
    c.render.width = get<int>(r, "width", "render");
    c.render.height = get<int>(r, "height", "render");
    c.render.colormap = get<std::string>(r, "colormap", "render");
    if (c.render.width <= 0 || c.render.height <= 0) {
        throw ValidationError(std::vector<ValidationError::Violation>{{"render", "width and height must be positive"}});
    }
    if (c.render.colormap != "viridis" && c.render.colormap != "gray") {
        throw UsageError("render.colormap must be 'viridis' or 'gray'");
    }
    return c;
}

void merge_strict(json& base, const json& patch, const std::string& path) {
    if (!patch.is_object()) throw UsageError("'" + (path.empty() ? "config" : path) + "' must be an object");
    for (const auto& [k, v] : patch.items()) {
        const std::string here = join(path, k);
        const auto it = base.find(k);
        if (it == base.end()) throw UsageError("unknown config key '" + here + "'");
        if (it->is_object() && v.is_object()) {
            merge_strict(*it, v, here);
        } else {
            *it = v;
        }
    }
}

RunConfig parse_config(const std::optional<std::string>& path, const json& flags) {
    json effective = to_json(RunConfig{});
    if (path) {
        std::ifstream in(*path);
        if (!in) throw UsageError("cannot open config file '" + *path + "'");
        json file;
        try {
            file = json::parse(in);
        } catch (const json::parse_error& e) {
            throw UsageError("config file is not valid JSON: " + std::string(e.what()));
        }
        merge_strict(effective, file);
    }
    merge_strict(effective, flags);
    return from_json(effective);
}

}  // namespace dataecon
