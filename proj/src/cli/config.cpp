#include <cmath>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "halfcavity/cli.hpp"
#include "halfcavity/errors.hpp"
#include "halfcavity/weakdrive.hpp"

namespace halfcavity::cli {

const char* const kVersion = "1.0.0";

ConfigError::ConfigError(std::string source, int line, std::string field, const std::string& message)
    : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) +
                         ": field '" + field + "': " + message),
      line_(line),
      field_(std::move(field)) {}

namespace {

struct ModeName {
    Mode mode;
    const char* name;
};

constexpr ModeName kModes[] = {
    {Mode::DecayPopulation, "decay-population"}, {Mode::DecayField, "decay-field"},
    {Mode::DecaySpectrum, "decay-spectrum"},     {Mode::WeakPopulation, "weak-population"},
    {Mode::WeakG2, "weak-g2"},                   {Mode::BlochSteadySweep, "bloch-steady-sweep"},
    {Mode::BlochTransient, "bloch-transient"},   {Mode::EmissionSpectrum, "emission-spectrum"},
    {Mode::FluxCheck, "flux-check"},
};

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::optional<double> to_double(const std::string& s) {
    if (s.empty()) return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

// number, or [a][*]pi[/b]
std::optional<double> to_real(const std::string& text) {
    const std::string s = trim(text);
    if (auto v = to_double(s)) return v;
    static const std::regex re(R"(^([+-]?[0-9.eE+-]*)\s*\*?\s*pi\s*(?:/\s*([0-9.eE+-]+))?$)");
    std::smatch m;
    if (!std::regex_match(s, m, re)) return std::nullopt;
    double a = 1.0, b = 1.0;
    const std::string as = m[1].str();
    if (as == "-")
        a = -1.0;
    else if (!as.empty() && as != "+") {
        auto v = to_double(as);
        if (!v) return std::nullopt;
        a = *v;
    }
    if (m[2].matched) {
        auto v = to_double(m[2].str());
        if (!v || *v == 0.0) return std::nullopt;
        b = *v;
    }
    return a * kPi / b;
}

struct Entry {
    std::string value;
    int line;
};

class Parser {
public:
    Parser(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void fail(int line, const std::string& field, const std::string& msg) const {
        throw ConfigError(source_, line, field, msg);
    }

    double real(const std::string& key, const Entry& e) const {
        auto v = to_real(e.value);
        if (!v) fail(e.line, key, "expected a real number, got '" + e.value + "'");
        return *v;
    }

    long integer(const std::string& key, const Entry& e) const {
        const std::string s = trim(e.value);
        char* end = nullptr;
        const long v = std::strtol(s.c_str(), &end, 10);
        if (s.empty() || end != s.c_str() + s.size()) fail(e.line, key, "expected an integer, got '" + e.value + "'");
        return v;
    }

    bool boolean(const std::string& key, const Entry& e) const {
        const std::string s = trim(e.value);
        if (s == "true" || s == "yes" || s == "1") return true;
        if (s == "false" || s == "no" || s == "0") return false;
        fail(e.line, key, "expected true or false, got '" + e.value + "'");
    }

    GridSpec grid(const std::string& section, const std::map<std::string, Entry>& kv) const {
        GridSpec g;
        const bool explicit_values = kv.count("values");
        const bool range = kv.count("start") || kv.count("stop") || kv.count("points");
        const int first_line = kv.empty() ? 0 : kv.begin()->second.line;
        if (explicit_values && range)
            fail(kv.at("values").line, section + ".values", "give either values or start/stop/points");
        if (explicit_values) {
            const Entry& e = kv.at("values");
            std::stringstream ss(e.value);
            std::string item;
            while (std::getline(ss, item, ',')) g.values.push_back(real(section + ".values", {item, e.line}));
            g.description = "explicit (" + std::to_string(g.values.size()) + " values)";
            g.line = e.line;
        } else if (range) {
            for (const char* k : {"start", "stop", "points"})
                if (!kv.count(k)) fail(first_line, section + "." + k, "missing");
            const double a = real(section + ".start", kv.at("start"));
            const double b = real(section + ".stop", kv.at("stop"));
            const long n = integer(section + ".points", kv.at("points"));
            if (n < 2) fail(kv.at("points").line, section + ".points", "need at least 2 points");
            if (n > 10'000'000) fail(kv.at("points").line, section + ".points", "too many points");
            for (long i = 0; i < n; ++i) g.values.push_back(a + (b - a) * double(i) / double(n - 1));
            g.values.back() = b;
            std::ostringstream d;
            d << format_number(a) << ".." << format_number(b) << " (" << n << " points)";
            g.description = d.str();
            g.line = kv.at("start").line;
        } else {
            return g;
        }
        if (g.values.size() < 2) fail(g.line, section + ".values", "need at least 2 grid points");
        for (std::size_t i = 1; i < g.values.size(); ++i)
            if (!(g.values[i] > g.values[i - 1]))
                fail(g.line, section, "grid must be strictly increasing");
        return g;
    }

private:
    std::string source_;
};

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys = {
        {"", {"mode"}},
        {"params", {"gamma", "epsilon", "tau", "theta0", "thetaL", "Omega0", "Delta", "omega0",
                    "optical_cycles"}},
        {"options", {"method", "channel", "normalization", "at_time", "include_I1", "reference",
                     "amplitude", "n_phases", "tol"}},
        {"time", {"start", "stop", "points", "values"}},
        {"frequency", {"start", "stop", "points", "values"}},
        {"position", {"start", "stop", "points", "values"}},
        {"delay", {"start", "stop", "points", "values"}},
        {"sweep", {"parameter", "start", "stop", "points", "values"}},
        {"output", {"path"}},
    };
    return keys;
}

}  // namespace

std::string to_string(Mode m) {
    for (const auto& n : kModes)
        if (n.mode == m) return n.name;
    return "unknown";
}

std::optional<Mode> parse_mode(const std::string& name) {
    for (const auto& n : kModes)
        if (name == n.name) return n.mode;
    return std::nullopt;
}

const std::vector<std::string>& mode_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& n : kModes) v.emplace_back(n.name);
        return v;
    }();
    return names;
}

int ScenarioConfig::line_of(const std::string& key) const {
    auto it = lines.find(key);
    return it == lines.end() ? 0 : it->second;
}

ScenarioConfig parse_config(std::istream& in, const std::string& source) {
    Parser P(source);
    std::map<std::string, std::map<std::string, Entry>> sections;
    std::string section;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        const auto c = s.find_first_of("#;");
        if (c != std::string::npos) s.erase(c);
        s = trim(s);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') P.fail(line, s, "malformed section header");
            section = trim(s.substr(1, s.size() - 2));
            if (!known_keys().count(section) || section.empty()) P.fail(line, section, "unknown section");
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) P.fail(line, s, "expected 'key = value'");
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        const std::string full = section.empty() ? key : section + "." + key;
        if (!known_keys().at(section).count(key)) P.fail(line, full, "unknown key");
        if (value.empty()) P.fail(line, full, "empty value");
        if (sections[section].count(key)) P.fail(line, full, "duplicate key");
        sections[section][key] = {value, line};
    }

    ScenarioConfig cfg;
    cfg.source = source;
    for (const auto& [sec, kv] : sections)
        for (const auto& [k, e] : kv) cfg.lines[sec.empty() ? k : sec + "." + k] = e.line;

    auto get = [&](const std::string& sec, const std::string& key) -> const Entry* {
        auto s = sections.find(sec);
        if (s == sections.end()) return nullptr;
        auto k = s->second.find(key);
        return k == s->second.end() ? nullptr : &k->second;
    };

    if (auto e = get("", "mode")) {
        cfg.mode = parse_mode(e->value);
        if (!cfg.mode) P.fail(e->line, "mode", "unknown mode '" + e->value + "'");
    }

    auto& in_p = cfg.input;
    auto real = [&](const char* key, double& dst) {
        if (auto e = get("params", key)) dst = P.real(std::string("params.") + key, *e);
    };
    auto opt_real = [&](const char* sec, const char* key, std::optional<double>& dst) {
        if (auto e = get(sec, key)) dst = P.real(std::string(sec) + "." + key, *e);
    };
    real("gamma", in_p.gamma);
    real("epsilon", in_p.epsilon);
    real("tau", in_p.tau);
    real("Omega0", in_p.Omega0);
    real("Delta", in_p.Delta);
    opt_real("params", "theta0", in_p.theta0);
    opt_real("params", "thetaL", in_p.thetaL);
    opt_real("params", "omega0", in_p.omega0);
    if (auto e = get("params", "optical_cycles"))
        in_p.optical_cycles = int(P.integer("params.optical_cycles", *e));

    if (auto e = get("options", "method")) cfg.method = e->value;
    if (auto e = get("options", "channel")) cfg.channel = int(P.integer("options.channel", *e));
    if (auto e = get("options", "normalization")) cfg.normalization = e->value;
    if (auto e = get("options", "at_time")) {
        if (e->value != "steady") cfg.at_time = P.real("options.at_time", *e);
    }
    if (auto e = get("options", "include_I1")) cfg.include_I1 = P.boolean("options.include_I1", *e);
    if (auto e = get("options", "reference")) cfg.reference = P.boolean("options.reference", *e);
    if (auto e = get("options", "amplitude")) cfg.amplitude = P.boolean("options.amplitude", *e);
    if (auto e = get("options", "n_phases")) cfg.n_phases = int(P.integer("options.n_phases", *e));
    opt_real("options", "tol", cfg.tol);

    auto section_map = [&](const std::string& sec) {
        std::map<std::string, Entry> kv;
        if (sections.count(sec))
            for (const auto& [k, e] : sections.at(sec))
                if (k != "parameter") kv[k] = e;
        return kv;
    };
    cfg.time = P.grid("time", section_map("time"));
    cfg.frequency = P.grid("frequency", section_map("frequency"));
    cfg.position = P.grid("position", section_map("position"));
    cfg.delay = P.grid("delay", section_map("delay"));
    cfg.sweep = P.grid("sweep", section_map("sweep"));
    if (auto e = get("sweep", "parameter")) cfg.sweep_parameter = e->value;
    if (auto e = get("output", "path")) cfg.output_path = e->value;
    return cfg;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError(path, 0, "config", "cannot open file");
    return parse_config(f, path);
}

SystemParams resolve_params(const ScenarioConfig& cfg, const ParamInput& in) {
    try {
        return SystemParams::make(in.epsilon, in.tau, in.theta0, in.thetaL, in.Omega0, in.Delta,
                                  in.gamma);
    } catch (const ParameterError& e) {
        std::string field = e.field();
        int line = cfg.line_of("params." + field);
        if (field == "thetaL" && line == 0) line = cfg.line_of("params.theta0");
        std::string msg = e.what();
        msg = msg.substr(msg.find(": ") + 2);
        throw ConfigError(cfg.source, line, field, msg);
    }
}

void validate(ScenarioConfig& cfg) {
    auto fail = [&](const std::string& key, const std::string& msg) {
        throw ConfigError(cfg.source, cfg.line_of(key), key, msg);
    };
    if (!cfg.mode) fail("mode", "missing; expected one of the documented modes");
    cfg.params = resolve_params(cfg, cfg.input);
    const auto& p = cfg.params;
    if (cfg.input.optical_cycles < 0) fail("params.optical_cycles", "must be non-negative");
    if (cfg.tol && !(*cfg.tol >= 1e-14 && *cfg.tol <= 1e-4))
        fail("options.tol", "must lie in [1e-14, 1e-4]");

    auto need = [&](const GridSpec& g, const char* name) {
        if (!g.present()) fail(name, std::string("mode ") + to_string(*cfg.mode) + " requires a [" + name + "] grid");
    };
    auto non_negative = [&](const GridSpec& g, const char* name) {
        if (g.present() && g.values.front() < 0.0) fail(name, "grid values must be non-negative");
    };
    auto undriven = [&] {
        if (p.Omega0 != 0.0) fail("params.Omega0", "decay modes require Omega0 = 0");
    };
    auto driven = [&] {
        if (!(p.Omega0 > 0.0)) fail("params.Omega0", "must be positive for this mode");
    };
    auto method = [&](std::initializer_list<const char*> allowed) {
        if (cfg.method.empty()) cfg.method = *allowed.begin();
        for (const char* a : allowed)
            if (cfg.method == a) return;
        std::string list;
        for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
        fail("options.method", "expected one of " + list);
    };
    auto channel = [&] {
        if (cfg.channel != 1 && cfg.channel != 2) fail("options.channel", "must be 1 or 2");
    };
    non_negative(cfg.time, "time");
    non_negative(cfg.delay, "delay");

    switch (*cfg.mode) {
        case Mode::DecayPopulation:
            undriven();
            need(cfg.time, "time");
            method({"series", "dde", "markov"});
            break;
        case Mode::DecayField:
            undriven();
            need(cfg.time, "time");
            need(cfg.position, "position");
            if (cfg.position.values.front() < 0.0) fail("position", "positions must be non-negative");
            break;
        case Mode::DecaySpectrum:
            undriven();
            need(cfg.frequency, "frequency");
            channel();
            if (cfg.at_time && *cfg.at_time < 0.0) fail("options.at_time", "must be non-negative");
            if (!cfg.at_time && cfg.channel == 2 && p.epsilon >= 1.0)
                fail("params.epsilon", "the long-time channel-2 spectrum needs epsilon < 1");
            break;
        case Mode::WeakPopulation:
            need(cfg.time, "time");
            break;
        case Mode::WeakG2:
            need(cfg.delay, "delay");
            channel();
            if (cfg.normalization != "raw" && cfg.normalization != "steady")
                fail("options.normalization", "expected raw or steady");
            if (cfg.normalization == "steady" && !(weakdrive::g2_limit(p, cfg.channel) > 0.0))
                fail("options.normalization", "long-delay limit is zero here; use raw");
            break;
        case Mode::BlochSteadySweep: {
            need(cfg.sweep, "sweep");
            static const std::set<std::string> allowed = {"tau", "theta0", "thetaL", "Omega0",
                                                          "Delta", "epsilon"};
            if (!allowed.count(cfg.sweep_parameter))
                fail("sweep.parameter", "expected one of tau, theta0, thetaL, Omega0, Delta, epsilon");
            for (double v : cfg.sweep.values) resolve_params(cfg, sweep_point(cfg, v));
            if (cfg.amplitude && cfg.n_phases < 4) fail("options.n_phases", "must be at least 4");
            break;
        }
        case Mode::BlochTransient:
            need(cfg.time, "time");
            method({"delay", "markov"});
            break;
        case Mode::EmissionSpectrum:
            driven();
            break;
        case Mode::FluxCheck:
            driven();
            if (p.epsilon > 0.2) fail("params.epsilon", "flux check is defined for epsilon <= 0.2");
            break;
    }
}

ParamInput sweep_point(const ScenarioConfig& cfg, double value) {
    ParamInput in = cfg.input;
    const std::string& k = cfg.sweep_parameter;
    if (k == "tau") {
        in.tau = value;
        if (in.omega0) {
            in.theta0 = *in.omega0 * value;
            in.thetaL.reset();
        } else if (in.theta0) {
            in.thetaL.reset();
        }
    } else if (k == "theta0") {
        in.theta0 = value;
        in.thetaL.reset();
    } else if (k == "thetaL") {
        in.thetaL = value;
        in.theta0.reset();
    } else if (k == "Omega0") {
        in.Omega0 = value;
    } else if (k == "Delta") {
        in.Delta = value;
        if (in.theta0) in.thetaL.reset();
    } else if (k == "epsilon") {
        in.epsilon = value;
    }
    return in;
}

std::string describe(const ScenarioConfig& cfg) {
    const auto& p = cfg.params;
    std::ostringstream o;
    o << "ok\n";
    o << "mode = " << to_string(*cfg.mode) << "\n";
    o << "gamma = " << format_number(p.gamma) << "\n";
    o << "epsilon = " << format_number(p.epsilon) << "\n";
    o << "tau = " << format_number(p.tau) << "\n";
    o << "theta0 = " << format_number(p.theta0) << "\n";
    o << "thetaL = " << format_number(p.thetaL) << "\n";
    o << "Omega0 = " << format_number(p.Omega0) << "\n";
    o << "Delta = " << format_number(p.Delta) << "\n";
    o << "gamma_tilde = " << format_number(p.gamma_tilde()) << "\n";
    o << "gamma_tilde_L = " << format_number(p.gamma_tilde_L()) << "\n";
    o << "Delta_tilde = " << format_number(p.delta_tilde()) << "\n";
    o << "Gamma0 = " << format_number(p.gamma0()) << "\n";
    o << "Gamma0_tau = " << format_number(p.gamma0() * p.tau) << "\n";
    o << "regime = " << to_string(p.regime()) << "\n";
    auto grid = [&](const char* name, const GridSpec& g) {
        if (g.present()) o << name << " = " << g.description << "\n";
    };
    grid("time", cfg.time);
    grid("frequency", cfg.frequency);
    grid("position", cfg.position);
    grid("delay", cfg.delay);
    if (cfg.sweep.present()) o << "sweep = " << cfg.sweep_parameter << " " << cfg.sweep.description << "\n";
    return o.str();
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

}  // namespace halfcavity::cli
