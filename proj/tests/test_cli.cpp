#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "halfcavity/cli.hpp"
#include "halfcavity/decay.hpp"
#include "halfcavity/spectrum.hpp"
#include "json.hpp"

using namespace halfcavity;
using namespace halfcavity::cli;

namespace {

ScenarioConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in, "test.cfg");
}

ScenarioConfig parse_valid(const std::string& text) {
    auto c = parse(text);
    validate(c);
    return c;
}

template <class F>
ConfigError config_error(F f) {
    try {
        f();
    } catch (const ConfigError& e) {
        return e;
    }
    FAIL("expected ConfigError");
    return ConfigError("", 0, "", "");
}

ConfigError validation_error(const std::string& text) {
    return config_error([&] { parse_valid(text); });
}

std::string csv(const ScenarioConfig& c, const Table& t) {
    std::ostringstream o;
    write_csv(c, t, o);
    return o.str();
}

const char* kDecay = R"(mode = decay-population
[params]
epsilon = 0.4
tau = 0.4
theta0 = pi   # antinode
[time]
values = 0, 0.3, 0.9, 2.5
)";

}  // namespace

TEST_CASE("config parsing") {
    const auto c = parse_valid(kDecay);
    CHECK(*c.mode == Mode::DecayPopulation);
    CHECK(c.params.theta0 == doctest::Approx(kPi));
    CHECK(c.time.values == std::vector<double>{0, 0.3, 0.9, 2.5});
    CHECK(c.method == "series");
    CHECK(c.line_of("params.theta0") == 5);

    const auto g = parse_valid("mode = weak-g2\n[params]\nthetaL = 3*pi/2\nOmega0 = 0.05\n"
                               "[delay]\nstart = 0\nstop = 1\npoints = 5\n");
    CHECK(g.params.thetaL == doctest::Approx(1.5 * kPi));
    CHECK(g.delay.values == std::vector<double>{0, 0.25, 0.5, 0.75, 1.0});
    CHECK(parse("mode = weak-g2\n[params]\nthetaL = 0.5pi\n").input.thetaL == doctest::Approx(kPi / 2));
    CHECK(parse("mode = weak-g2\n[params]\nthetaL = -pi/4\n").input.thetaL == doctest::Approx(-kPi / 4));
}

TEST_CASE("config errors name the field and line") {
    auto e = validation_error("mode = flux-check\n[params]\nOmega0 = 1\nepsilon = 1.2\n");
    CHECK(e.field() == "epsilon");
    CHECK(e.line() == 4);

    e = validation_error("mode = bloch-transient\n[params]\ntau = 1\nDelta = 0.5\ntheta0 = 1\nthetaL = 1\n"
                         "[time]\nvalues = 0, 1\n");
    CHECK(e.field() == "thetaL");
    CHECK(std::string(e.what()).find("inconsistent") != std::string::npos);
    // consistent pair is accepted
    parse_valid("mode = bloch-transient\n[params]\ntau = 1\nDelta = 0.5\ntheta0 = 1\nthetaL = 0.5\n"
                "[time]\nvalues = 0, 1\n");

    e = config_error([] { parse("mode = decay-population\n[params]\nepsilonn = 0.1\n"); });
    CHECK(e.field() == "params.epsilonn");
    CHECK(e.line() == 3);
    e = config_error([] { parse("[nonsense]\n"); });
    CHECK(e.line() == 1);
    e = config_error([] { parse("mode = decay-population\nmode = decay-field\n"); });
    CHECK(e.line() == 2);
    e = config_error([] { parse("mode = warp-drive\n"); });
    CHECK(e.field() == "mode");
    e = config_error([] { parse("[time]\nvalues = 0, 2, 1\n"); });
    CHECK(e.field() == "time");
    e = config_error([] { parse("[time]\nstart = 0\nstop = 1\n"); });
    CHECK(e.field() == "time.points");
    e = config_error([] { parse("[params]\ntau = abc\n"); });
    CHECK(e.field() == "params.tau");

    CHECK(validation_error("[params]\ntau = 1\n").field() == "mode");
    CHECK(validation_error("mode = decay-population\n[params]\nOmega0 = 1\n[time]\nvalues = 0, 1\n").field() ==
          "params.Omega0");
    CHECK(validation_error("mode = decay-population\n[params]\n").field() == "time");
    CHECK(validation_error("mode = emission-spectrum\n[params]\nepsilon = 0.1\n").field() == "params.Omega0");
    CHECK(validation_error("mode = weak-g2\n[options]\nchannel = 3\n[delay]\nvalues = 0, 1\n").field() ==
          "options.channel");
    CHECK(validation_error("mode = bloch-steady-sweep\n[sweep]\nparameter = gamma\nvalues = 1, 2\n").field() ==
          "sweep.parameter");
    CHECK(validation_error("mode = bloch-steady-sweep\n[params]\nOmega0 = 1\n[sweep]\nparameter = epsilon\n"
                           "values = 0.5, 1.5\n")
              .field() == "epsilon");
    CHECK(validation_error("mode = flux-check\n[params]\nOmega0 = 1\nepsilon = 0.3\n").field() == "params.epsilon");
    CHECK(validation_error(std::string(kDecay) + "[options]\ntol = 1\n").field() == "options.tol");
    CHECK(validation_error("mode = weak-g2\n[params]\nOmega0 = 0.05\n[options]\nchannel = 1\n"
                           "normalization = steady\n[delay]\nvalues = 0, 1\n")
              .field() == "options.normalization");
}

TEST_CASE("decay population table") {
    const auto c = parse_valid(kDecay);
    const auto t = run(c);
    REQUIRE(t.rows.size() == 4);
    for (const auto& r : t.rows) CHECK(r[1] == std::norm(decay::series_amplitude(c.params, r[0])));
    auto d = parse_valid(std::string(kDecay) + "[options]\nmethod = dde\n");
    const auto td = run(d);
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(td.rows[i][1] - t.rows[i][1]) < 1e-8);
    // determinism
    CHECK(csv(c, run(c)) == csv(c, t));
    CHECK(csv(c, t).find("t [1/gamma],population\n0,1\n") != std::string::npos);
}

TEST_CASE("every mode produces a table") {
    const std::vector<std::string> configs = {
        std::string(kDecay),
        "mode = decay-field\n[params]\nepsilon = 0.4\ntau = 0.4\n[position]\nvalues = 0.5, 1, 2\n[time]\nvalues = 0.1, 1\n",
        "mode = decay-spectrum\n[params]\nepsilon = 0.4\ntau = 10\ntheta0 = pi\n[frequency]\nstart = -2\nstop = 2\npoints = 11\n",
        "mode = decay-spectrum\n[params]\nepsilon = 0.4\ntau = 1\n[options]\nat_time = 3\nchannel = 1\n[frequency]\nvalues = -1, 0, 1\n",
        "mode = weak-population\n[params]\nepsilon = 0.4\ntau = 5\nOmega0 = 0.05\n[time]\nvalues = 0, 6, 30\n",
        "mode = weak-g2\n[params]\nepsilon = 0.4\ntau = 20\nthetaL = pi\nOmega0 = 0.05\n[options]\nchannel = 1\nnormalization = steady\n[delay]\nvalues = 0, 20, 40\n",
        "mode = bloch-steady-sweep\n[params]\nepsilon = 0.1\nOmega0 = 2\nDelta = 0.5\nthetaL = 0\n[sweep]\nparameter = tau\nvalues = 0.1, 0.2\n",
        "mode = bloch-transient\n[params]\nepsilon = 0.2\ntau = 1\nOmega0 = 2\n[options]\nmethod = markov\n[time]\nvalues = 0, 1, 2\n",
        "mode = bloch-transient\n[params]\nepsilon = 0.2\ntau = 1\nOmega0 = 2\n[time]\nvalues = 0, 1, 2\n",
        "mode = emission-spectrum\n[params]\nepsilon = 0.2\ntau = 0.5\nOmega0 = 3\n",
        "mode = flux-check\n[params]\nepsilon = 0.1\ntau = 0.5\nOmega0 = 2\n",
    };
    for (const auto& text : configs) {
        const auto c = parse_valid(text);
        const auto t = run(c);
        CAPTURE(text);
        REQUIRE_FALSE(t.rows.empty());
        for (const auto& r : t.rows) {
            CHECK(r.size() == t.columns.size());
            for (double v : r) CHECK(std::isfinite(v));
        }
        const auto j = nlohmann::json::parse(sidecar_json(c, t));
        CHECK(j["mode"] == to_string(*c.mode));
        CHECK(j["params"]["epsilon"] == c.params.epsilon);
        CHECK(j["rows"] == t.rows.size());
    }
}

TEST_CASE("mode outputs follow the library") {
    const auto c = parse_valid("mode = emission-spectrum\n[params]\nOmega0 = 3\n[frequency]\nvalues = -3, 0, 2.5\n");
    const auto t = run(c);
    const auto m = spectrum::mollow_spectrum(1.0, 0.0, 3.0, {-3, 0, 2.5});
    for (std::size_t i = 0; i < 3; ++i) CHECK(t.rows[i][1] == doctest::Approx(m.incoherent[i]).epsilon(1e-9));

    const auto f = run(parse_valid("mode = flux-check\n[params]\nepsilon = 0.1\ntau = 0.5\nOmega0 = 2\n"));
    CHECK(f.rows[0][2] < 0.02);

    const auto s = parse_valid("mode = bloch-steady-sweep\n[params]\nepsilon = 0.1\nOmega0 = 20\nomega0 = 400\n"
                               "[sweep]\nparameter = tau\nvalues = 0.1, 0.2\n");
    const auto st = run(s);
    CHECK(st.rows[1][1] == doctest::Approx(wrap_phase(80.0)));
    CHECK(st.columns.back() == "envelope_antinode");
}

namespace {

int run_tool(const std::string& args) {
    const std::string cmd = std::string(HALFCAVITY_TOOL) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string write_temp(const std::string& name, const std::string& text) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream(path) << text;
    return path.string();
}

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("command-line exit codes and outputs") {
    const auto good = write_temp("hc_good.cfg", kDecay);
    const auto bad = write_temp("hc_bad.cfg", "mode = flux-check\n[params]\nOmega0 = 1\nepsilon = 1.2\n");
    CHECK(run_tool("--config " + good + " --validate-only") == 0);
    CHECK(run_tool("--config " + bad + " --validate-only") == 2);
    CHECK(run_tool("--config " + bad) == 2);
    CHECK(run_tool("--config " + good + " --mode no-such-mode") == 2);
    CHECK(run_tool("--config " + good + " --tol 1") == 2);

    const auto out1 = (std::filesystem::temp_directory_path() / "hc_out1.csv").string();
    const auto out2 = (std::filesystem::temp_directory_path() / "hc_out2.csv").string();
    REQUIRE(run_tool("--config " + good + " --out " + out1) == 0);
    REQUIRE(run_tool("--config " + good + " --out " + out2 + " --threads 3") == 0);
    CHECK(slurp(out1) == slurp(out2));
    CHECK(nlohmann::json::parse(slurp(out1 + ".json"))["mode"] == "decay-population");

    // numerical failure: perfect feedback without drive has no unique steady state
    const auto diverge = write_temp("hc_num.cfg",
                                    "mode = bloch-steady-sweep\n[params]\nepsilon = 1\nthetaL = 0\n"
                                    "[sweep]\nparameter = tau\nvalues = 0, 0.5\n");
    CHECK(run_tool("--config " + diverge) == 3);
}
