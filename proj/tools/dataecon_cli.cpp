// Command-line front end: dataecon <command> [options]

#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "dataecon/commands.hpp"
#include "dataecon/config.hpp"

int main(int argc, char** argv) {
    using nlohmann::ordered_json;
    namespace de = dataecon;

    CLI::App app{"Equilibrium, phase-plane and diff-in-diff tools for the data-factor growth model", "dataecon"};
    app.fallthrough();
    app.require_subcommand(1);

    std::optional<std::string> config_path, out_dir, formats;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    app.add_option("--config", config_path, "JSON config file (strict keys)");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--format", formats, "comma-separated subset of csv,json,svg");
    app.add_option("--seed", seed, "random seed for simulations");
    app.add_option("--threads", threads, "worker threads for grid sweeps");

    struct Param {
        const char* name;
        std::optional<double> value;
    };
    Param params[] = {{"alpha", {}}, {"beta", {}}, {"eta", {}},   {"theta", {}}, {"w", {}},
                      {"delta", {}}, {"rho", {}},  {"sigma", {}}, {"a", {}}};
    for (auto& p : params) app.add_option(std::string("--") + p.name, p.value, std::string("override ") + p.name);

    for (const auto& name : de::command_names()) {
        if (name != "shock") app.add_subcommand(name);
    }
    auto* shock = app.add_subcommand("shock", "policy shock: two portraits and the steady-state displacement");
    Param shock_flags[] = {{"eta_before", {}}, {"eta_after", {}}, {"theta_before", {}}, {"theta_after", {}}};
    for (auto& p : shock_flags) {
        std::string flag = std::string("--") + p.name;
        std::replace(flag.begin(), flag.end(), '_', '-');
        shock->add_option(flag, p.value);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : de::exit_usage;
    }

    try {
        ordered_json flags = ordered_json::object();
        for (const auto& p : params) {
            if (p.value) flags[p.name] = *p.value;
        }
        for (const auto& p : shock_flags) {
            if (p.value) flags["shock"][p.name] = *p.value;
        }
        if (out_dir) flags["out"] = *out_dir;
        if (seed) flags["seed"] = *seed;
        if (threads) flags["grid"]["threads"] = *threads;
        if (formats) {
            ordered_json list = ordered_json::array();
            std::stringstream ss(*formats);
            for (std::string item; std::getline(ss, item, ',');) {
                if (!item.empty()) list.push_back(item);
            }
            flags["formats"] = list;
        }
        const auto cfg = de::parse_config(config_path, flags);
        const std::string command = app.get_subcommands().front()->get_name();
        return de::run_command(cfg, command, std::cout, std::cerr);
    } catch (...) {
        return de::report_current_exception(std::cerr);
    }
}
