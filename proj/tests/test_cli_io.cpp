#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <sys/wait.h>

#include "doctest.h"
#include "json.hpp"

#include "dataecon/commands.hpp"
#include "dataecon/config.hpp"
#include "dataecon/csv.hpp"
#include "dataecon/errors.hpp"
#include "dataecon/serialize.hpp"
#include "dataecon/svg.hpp"

using namespace dataecon;
using doctest::Approx;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("dataecon_test_" + std::to_string(::getpid())) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int cli(const std::string& args) {
    const std::string cmd = std::string(DATAECON_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string cli_stderr(const std::string& args, const fs::path& dir) {
    const fs::path err = dir / "stderr.txt";
    const std::string cmd = std::string(DATAECON_CLI) + " " + args + " >/dev/null 2>" + err.string();
    [[maybe_unused]] const int rc = std::system(cmd.c_str());
    return slurp(err);
}

}  // namespace

TEST_CASE("csv numbers and quoting round trip") {
    for (double x : {0.1, 1.0 / 3.0, 51.199999999999, -2.5e-300, 6.02214076e23, 0.0}) {
        CHECK(csv::parse_number(csv::format_number(x)) == x);
    }
    CHECK(csv::format_number(NAN) == "nan");
    CHECK(std::isinf(csv::parse_number("-inf")));
    CHECK_THROWS_AS(csv::parse_number("1.5x"), UsageError);

    std::stringstream ss;
    const std::vector<std::string> row{"plain", "with,comma", "with \"quote\"", "two\nlines", ""};
    csv::write_row(ss, row);
    csv::write_row(ss, {"a", "b"});
    CHECK(ss.str().find('\r') == std::string::npos);
    CHECK(csv::read_row(ss) == row);
    CHECK(csv::read_row(ss) == std::vector<std::string>{"a", "b"});
    CHECK_FALSE(csv::read_row(ss).has_value());
}

TEST_CASE("config defaults, precedence and strictness") {
    const auto def = parse_config(std::nullopt, ordered_json::object());
    CHECK(def.params == ModelParams{});
    CHECK(def.params.alpha == 0.6);
    CHECK(def.params.sigma == 2.0);
    CHECK(def.params.a == 2.0);

    const auto dir = scratch("config");
    const auto file = dir / "cfg.json";
    std::ofstream(file) << R"({"eta": 0.4, "grid": {"n_theta": 7}})";
    const auto from_file = parse_config(file.string(), ordered_json::object());
    CHECK(from_file.params.eta == 0.4);
    CHECK(from_file.grid.n_theta == 7);
    CHECK(from_file.grid.n_eta == 50);
    const auto flagged = parse_config(file.string(), ordered_json{{"eta", 0.2}});
    CHECK(flagged.params.eta == 0.2);
    CHECK(flagged.grid.n_theta == 7);

    // Everything the program uses appears in the echoed config, and the echo re-parses.
    const auto echoed = to_json(flagged);
    CHECK(from_json(echoed).params == flagged.params);
    CHECK(to_json(from_json(echoed)) == echoed);

    CHECK_THROWS_AS(parse_config(std::nullopt, ordered_json{{"gamma", 1.0}}), UsageError);
    CHECK_THROWS_AS(parse_config(std::nullopt, ordered_json{{"grid", {{"bogus", 1}}}}), UsageError);
    CHECK_THROWS_AS(parse_config(std::nullopt, ordered_json{{"alpha", "high"}}), UsageError);
    CHECK_THROWS_AS(parse_config(std::nullopt, ordered_json{{"alpha", 1.5}}), ValidationError);
    CHECK_THROWS_AS(parse_config((dir / "missing.json").string(), ordered_json::object()), UsageError);
    std::ofstream(dir / "broken.json") << "{ not json";
    CHECK_THROWS_AS(parse_config((dir / "broken.json").string(), ordered_json::object()), UsageError);
}

TEST_CASE("sweep CSV re-parses into the same grid") {
    const auto grid = grid_sweep(ModelParams{}, linspace(0.05, 0.95, 12), linspace(0.05, 0.95, 15));
    std::stringstream ss;
    write_sweep_csv(ss, grid);
    const auto back = read_sweep_csv(ss);
    CHECK(back.theta_axis == grid.theta_axis);
    CHECK(back.eta_axis == grid.eta_axis);
    CHECK(back.mask == grid.mask);
    CHECK(back.cells == grid.cells);
}

TEST_CASE("event-study CSV re-parses") {
    DgpConfig cfg;
    cfg.n_units = 40;
    const auto es = event_study(generate_panel(cfg), -3, 4);
    std::stringstream ss;
    write_event_study_csv(ss, es);
    const auto back = read_event_study_csv(ss);
    REQUIRE(back.coefficients.size() == es.coefficients.size());
    for (std::size_t i = 0; i < es.coefficients.size(); ++i) {
        const auto& a = es.coefficients[i];
        const auto& b = back.coefficients[i];
        CHECK(a.period == b.period);
        CHECK(a.estimated == b.estimated);
        CHECK((a.coef == b.coef || (std::isnan(a.coef) && std::isnan(b.coef))));
        CHECK((a.se == b.se || (std::isnan(a.se) && std::isnan(b.se))));
    }
}

TEST_CASE("svg rendering") {
    const ModelParams p;
    const auto pp = phase_portrait(p, default_k_range(p));
    RenderSpec spec;
    spec.kind = FigureKind::phase;
    const Artifact art = PhaseFigure{{pp}};
    const auto a = render_svg(art, spec);
    CHECK(a == render_svg(art, spec));
    CHECK(a.rfind("<svg", 0) == 0);
    CHECK(a.find("href") == std::string::npos);
    CHECK(a.find("k-nullcline-0") != std::string::npos);
    CHECK(a.find("c-nullcline-0") != std::string::npos);
    CHECK(a.find("stable-branch-0-0") != std::string::npos);
    CHECK(a.find("stable-branch-0-1") != std::string::npos);
    CHECK(a.find("<polygon") != std::string::npos);

    // Equilibrium marker within a pixel of the mapped steady state.
    const auto vp = viewport_for(art, spec);
    const auto ss = steady_state(p);
    std::smatch m;
    REQUIRE(std::regex_search(a, m, std::regex("id=\"equilibrium-0\" cx=\"([0-9.]+)\" cy=\"([0-9.]+)\"")));
    CHECK(std::abs(std::stod(m[1]) - vp.px(ss.k_star)) < 1.0);
    CHECK(std::abs(std::stod(m[2]) - vp.py(ss.c_star)) < 1.0);
    // The mapping itself: plot corners.
    CHECK(vp.px(vp.x_range.lo) == vp.left);
    CHECK(vp.py(vp.y_range.hi) == vp.top);

    spec.kind = FigureKind::contour;
    CHECK_THROWS_AS(render_svg(art, spec), UsageError);
    spec.kind = FigureKind::phase;
    spec.width = 0;
    CHECK_THROWS_AS(render_svg(art, spec), UsageError);
    spec.width = 640;
    spec.x_range = Interval{1.0, 1.0};
    CHECK_THROWS_AS(render_svg(art, spec), UsageError);

    RenderSpec cs;
    cs.kind = FigureKind::contour;
    const auto empty = render_svg(ContourFigure{{IsoContour{}}, {0, 1}, {0, 1}}, cs);
    CHECK(empty.find("<path") == std::string::npos);
    CHECK(empty.find("<rect") != std::string::npos);
    CHECK(empty.find("</svg>") != std::string::npos);

    DgpConfig cfg;
    cfg.n_units = 40;
    RenderSpec es;
    es.kind = FigureKind::event_study;
    const auto ev = render_svg(EventStudyFigure{event_study(generate_panel(cfg), -3, 4)}, es);
    CHECK(ev.find("zero-line") != std::string::npos);
    CHECK(ev.find("whisker") != std::string::npos);
}

TEST_CASE("run_command maps failures to exit codes") {
    RunConfig cfg;
    cfg.out_dir = scratch("codes").string();
    std::ostringstream log, err;
    cfg.params.eta = 1.0 / 3.0;
    CHECK(run_command(cfg, "steady", log, err) == exit_numerical);
    CHECK(err.str().find("singular") != std::string::npos);
    cfg.params.eta = 0.2;
    CHECK(run_command(cfg, "nonsense", log, err) == exit_usage);
    CHECK(run_command(cfg, "qsteady", log, err) == exit_ok);
}

TEST_CASE("command line: steady, sweep and shock") {
    const auto dir = scratch("cli");
    REQUIRE(cli("steady --eta 0 --out " + (dir / "steady").string()) == 0);
    const auto steady = ordered_json::parse(slurp(dir / "steady" / "steady.json"));
    CHECK(steady["steady_state"]["k_star"].get<double>() == Approx(51.199).epsilon(0.01 / 51.199));
    CHECK(steady["steady_state"]["c_star"].get<double>() == Approx(8.706).epsilon(0.01 / 8.706));
    CHECK(steady["meta"]["tool"] == "dataecon");
    CHECK(steady["meta"]["config"]["eta"] == 0.0);
    const auto echoed = ordered_json::parse(slurp(dir / "steady" / "config.json"));
    CHECK(echoed["eta"] == 0.0);

    REQUIRE(cli("sweep --format csv --out " + (dir / "sweep").string()) == 0);
    std::ifstream sweep(dir / "sweep" / "sweep.csv");
    std::size_t rows = 0, singular = 0;
    std::string line;
    std::getline(sweep, line);
    while (std::getline(sweep, line)) {
        ++rows;
        singular += line.find(",singular,") != std::string::npos;
    }
    CHECK(rows == 2500);
    CHECK(singular == 200);
    CHECK(fs::exists(dir / "sweep" / "sweep.csv.meta.json"));
    CHECK_FALSE(fs::exists(dir / "sweep" / "sweep.json"));
    CHECK_FALSE(fs::exists(dir / "sweep" / "sweep_k_star.svg"));

    REQUIRE(cli("shock --eta-before 0.1 --eta-after 0.2 --out " + (dir / "shock").string()) == 0);
    const auto shock = ordered_json::parse(slurp(dir / "shock" / "shock.json"));
    CHECK(shock["dk_star"].get<double>() > 0.0);
    const auto svg = slurp(dir / "shock" / "shock.svg");
    CHECK(svg.find("equilibrium-0") != std::string::npos);
    CHECK(svg.find("equilibrium-1") != std::string::npos);
}

TEST_CASE("command line: errors") {
    const auto dir = scratch("errors");
    std::ofstream(dir / "bad.json") << R"({"alpha": 1.5})";
    CHECK(cli("steady --config " + (dir / "bad.json").string() + " --out " + dir.string()) == 2);
    CHECK(cli_stderr("steady --config " + (dir / "bad.json").string(), dir).find("alpha") != std::string::npos);
    CHECK(cli("steady --eta 0.3333333333 --out " + dir.string()) == 1);
    CHECK(cli("steady --bogus 1") == 2);
    CHECK(cli("") == 2);
    CHECK(cli("steady --format xml --out " + dir.string()) == 2);
}

TEST_CASE("command line: identical inputs give byte-identical artifacts") {
    const auto dir = scratch("determinism");
    for (const std::string cmd : {"phase", "did-sim", "contour"}) {
        REQUIRE(cli(cmd + " --seed 7 --out " + (dir / "a").string()) == 0);
        REQUIRE(cli(cmd + " --seed 7 --out " + (dir / "b").string()) == 0);
    }
    std::size_t compared = 0;
    const std::string a_dir = (dir / "a").string(), b_dir = (dir / "b").string();
    for (const auto& e : fs::directory_iterator(dir / "a")) {
        const auto name = e.path().filename();
        // The echoed output directory is the only permitted difference.
        std::string text = slurp(e.path());
        for (auto pos = text.find(a_dir); pos != std::string::npos; pos = text.find(a_dir, pos + b_dir.size())) {
            text.replace(pos, a_dir.size(), b_dir);
        }
        CHECK_MESSAGE(text == slurp(dir / "b" / name), name.string());
        ++compared;
    }
    CHECK(compared >= 20);
}
