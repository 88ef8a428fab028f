#include <algorithm>
#include <cmath>
#include <ostream>

#include "json.hpp"

#include "halfcavity/bloch.hpp"
#include "halfcavity/cli.hpp"
#include "halfcavity/decay.hpp"
#include "halfcavity/parallel.hpp"
#include "halfcavity/spectrum.hpp"
#include "halfcavity/weakdrive.hpp"

namespace halfcavity::cli {

namespace {

constexpr double kDefaultDecayTol = 1e-11;
constexpr double kDefaultBlochTol = 1e-10;

double decay_tol(const ScenarioConfig& c) { return c.tol.value_or(kDefaultDecayTol); }
double bloch_tol(const ScenarioConfig& c) { return c.tol.value_or(kDefaultBlochTol); }

Table decay_population(const ScenarioConfig& c) {
    const auto& p = c.params;
    const auto& ts = c.time.values;
    Table t;
    t.columns = {"t [1/gamma]", "population"};
    t.metadata.emplace_back("method", c.method);
    if (c.method == "dde") {
        const auto sol = decay::dde_amplitude(p, std::max(ts.back(), 1e-12), decay_tol(c));
        for (double x : ts) t.rows.push_back({x, std::norm(sol.query(x)[0])});
    } else {
        std::vector<double> v(ts.size());
        parallel_for(ts.size(), [&](std::size_t i) {
            v[i] = c.method == "series" ? std::norm(decay::series_amplitude(p, ts[i]))
                                        : decay::markov_population(p, ts[i]);
        });
        for (std::size_t i = 0; i < ts.size(); ++i) t.rows.push_back({ts[i], v[i]});
    }
    return t;
}

Table decay_field(const ScenarioConfig& c) {
    const auto& zs = c.position.values;
    const auto& ts = c.time.values;
    Table t;
    t.columns = {"zeta [c tau/2]", "t [1/gamma]", "intensity"};
    t.metadata.emplace_back("optical_cycles", std::to_string(c.input.optical_cycles));
    std::vector<double> v(zs.size() * ts.size());
    parallel_for(v.size(), [&](std::size_t k) {
        v[k] = decay::field_intensity(c.params, zs[k / ts.size()], ts[k % ts.size()],
                                      c.input.optical_cycles);
    });
    for (std::size_t k = 0; k < v.size(); ++k) t.rows.push_back({zs[k / ts.size()], ts[k % ts.size()], v[k]});
    return t;
}

Table decay_spectrum(const ScenarioConfig& c) {
    Table t;
    t.columns = {"delta [gamma] (w - w0)", "density"};
    t.metadata.emplace_back("channel", std::to_string(c.channel));
    t.metadata.emplace_back("at_time", c.at_time ? format_number(*c.at_time) : "steady");
    const auto s = c.at_time ? decay::transient_spectrum(c.params, *c.at_time, c.channel, c.frequency.values)
                             : decay::steady_spectrum(c.params, c.channel, c.frequency.values);
    for (std::size_t i = 0; i < s.delta_omega.size(); ++i) t.rows.push_back({s.delta_omega[i], s.density[i]});
    return t;
}

Table weak_population(const ScenarioConfig& c) {
    const auto& p = c.params;
    const auto& ts = c.time.values;
    Table t;
    t.columns = {"t [1/gamma]", "population", "population_dde"};
    const double pss = weakdrive::steady_population_weak(p);
    t.metadata.emplace_back("steady_population", format_number(pss));
    if (std::isinf(pss)) t.warnings.push_back("no finite steady state: perfect feedback at this phase");
    const auto sol = weakdrive::oscillator_dde(p, std::max(ts.back(), 1e-12), 0.0, decay_tol(c));
    for (double x : ts)
        t.rows.push_back({x, weakdrive::oscillator_population(p, x), std::norm(sol.query(x)[0])});
    return t;
}

Table weak_g2(const ScenarioConfig& c) {
    const auto norm = c.normalization == "raw" ? weakdrive::Normalization::Raw
                                               : weakdrive::Normalization::SteadyStateSquared;
    const auto r = c.channel == 1 ? weakdrive::g2_channel1(c.params, c.delay.values, norm)
                                  : weakdrive::g2_channel2(c.params, c.delay.values, norm);
    Table t;
    t.columns = {"T [1/gamma]", c.normalization == "raw" ? "G2" : "g2"};
    t.metadata.emplace_back("channel", std::to_string(c.channel));
    t.metadata.emplace_back("normalization", c.normalization);
    t.metadata.emplace_back("G2_limit", format_number(weakdrive::g2_limit(c.params, c.channel)));
    for (std::size_t i = 0; i < r.delays.size(); ++i) t.rows.push_back({r.delays[i], r.values[i]});
    return t;
}

Table bloch_steady_sweep(const ScenarioConfig& c) {
    const auto& xs = c.sweep.values;
    std::vector<SystemParams> ps;
    for (double x : xs) ps.push_back(resolve_params(c, sweep_point(c, x)));
    const bool resonant = std::all_of(ps.begin(), ps.end(), [](const auto& p) { return p.Delta == 0.0; });

    Table t;
    t.columns = {c.sweep_parameter, "theta0", "thetaL", "pop_e", "re_s_minus", "im_s_minus"};
    if (resonant) {
        t.columns.insert(t.columns.end(), {"envelope", "envelope_node", "envelope_antinode"});
    } else {
        t.warnings.push_back("envelope columns omitted: the strong-drive envelope needs Delta = 0");
    }
    if (c.amplitude) t.columns.push_back("oscillation_amplitude");

    std::vector<std::vector<double>> rows(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const auto& p = ps[i];
        const auto s = bloch::delay_bloch_steady(p);
        auto& row = rows[i];
        row = {xs[i], p.theta0, p.thetaL, s.pop_e.real(), s.s_minus.real(), s.s_minus.imag()};
        if (resonant) {
            SystemParams node = p, anti = p;
            node.theta0 = node.thetaL = 0.0;
            anti.theta0 = anti.thetaL = kPi;
            row.insert(row.end(), {bloch::strong_drive_envelope(p), bloch::strong_drive_envelope(node),
                                   bloch::strong_drive_envelope(anti)});
        }
        if (c.amplitude) row.push_back(bloch::phase_oscillation_amplitude(p, c.n_phases));
    }
    t.rows = std::move(rows);
    return t;
}

Table bloch_transient(const ScenarioConfig& c) {
    const auto& ts = c.time.values;
    bloch::Trajectory tr;
    if (c.method == "markov") {
        tr = bloch::markov_bloch_transient(c.params, ts);
    } else {
        const auto sol = bloch::delay_bloch_transient(c.params, std::max(ts.back(), 1e-12),
                                                      bloch::BlochVector::ground(), bloch_tol(c));
        tr = bloch::sample(sol, ts);
    }
    Table t;
    t.columns = {"t [1/gamma]", "pop_e", "pop_g", "re_s_minus", "im_s_minus"};
    t.metadata.emplace_back("method", c.method);
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        const auto& s = tr.states[i];
        t.rows.push_back({tr.times[i], s.pop_e.real(), s.pop_g.real(), s.s_minus.real(), s.s_minus.imag()});
    }
    return t;
}

Table emission_spectrum(const ScenarioConfig& c) {
    const auto& p = c.params;
    const auto grid = c.frequency.present() ? c.frequency.values : spectrum::default_grid(p);
    const auto r = spectrum::incoherent_spectrum(p, grid, c.include_I1);
    Table t;
    t.columns = {"nu [gamma] (w - wL)", "incoherent"};
    t.metadata.emplace_back("coherent_weight", format_number(r.coherent_weight));
    t.metadata.emplace_back("include_I1", c.include_I1 ? "true" : "false");
    t.metadata.emplace_back("grid", c.frequency.present() ? c.frequency.description : "default");
    if (r.negative_flag)
        t.warnings.push_back("negative spectral density down to " + format_number(r.most_negative));
    std::vector<double> ref;
    if (c.reference) {
        t.columns.push_back("mollow_markov");
        ref = spectrum::mollow_spectrum(p.gamma_tilde_L(), p.delta_tilde(), p.Omega0, grid).incoherent;
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
        t.rows.push_back({grid[i], r.incoherent[i]});
        if (c.reference) t.rows.back().push_back(ref[i]);
    }
    return t;
}

Table flux_check(const ScenarioConfig& c) {
    const double flux = spectrum::total_flux_check(c.params);
    const double pop = bloch::delay_bloch_steady(c.params).pop_e.real();
    Table t;
    t.columns = {"flux", "pop_e", "relative_error"};
    t.rows.push_back({flux, pop, std::abs(flux - pop) / pop});
    return t;
}

}  // namespace

Table run(const ScenarioConfig& c) {
    switch (*c.mode) {
        case Mode::DecayPopulation: return decay_population(c);
        case Mode::DecayField: return decay_field(c);
        case Mode::DecaySpectrum: return decay_spectrum(c);
        case Mode::WeakPopulation: return weak_population(c);
        case Mode::WeakG2: return weak_g2(c);
        case Mode::BlochSteadySweep: return bloch_steady_sweep(c);
        case Mode::BlochTransient: return bloch_transient(c);
        case Mode::EmissionSpectrum: return emission_spectrum(c);
        case Mode::FluxCheck: return flux_check(c);
    }
    return {};
}

namespace {

const char* kConvention = "gamma = 1 units; Delta = w0 - wL; frequencies relative to wL unless noted";

std::vector<std::pair<std::string, double>> param_list(const SystemParams& p) {
    return {{"gamma", p.gamma},   {"epsilon", p.epsilon}, {"tau", p.tau},     {"theta0", p.theta0},
            {"thetaL", p.thetaL}, {"Omega0", p.Omega0},   {"Delta", p.Delta}};
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
}

}  // namespace

void write_csv(const ScenarioConfig& c, const Table& t, std::ostream& out) {
    out << "# halfcavity " << kVersion << "\n";
    out << "# mode = " << to_string(*c.mode) << "\n";
    out << "# convention = " << kConvention << "\n";
    for (const auto& [k, v] : param_list(c.params)) out << "# " << k << " = " << format_number(v) << "\n";
    for (const auto& [k, v] : t.metadata) out << "# " << k << " = " << v << "\n";
    for (const auto& w : t.warnings) out << "# warning: " << w << "\n";
    for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << csv_field(t.columns[i]);
    out << "\n";
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_number(row[i]);
        out << "\n";
    }
}

std::string sidecar_json(const ScenarioConfig& c, const Table& t) {
    using nlohmann::ordered_json;
    const auto& p = c.params;
    ordered_json j;
    j["program"] = "halfcavity";
    j["version"] = kVersion;
    j["mode"] = to_string(*c.mode);
    j["convention"] = kConvention;
    j["source"] = c.source;
    ordered_json params;
    for (const auto& [k, v] : param_list(p)) params[k] = v;
    params["optical_cycles"] = c.input.optical_cycles;
    if (c.input.omega0) params["omega0"] = *c.input.omega0;
    j["params"] = params;
    j["derived"] = {{"gamma_tilde", p.gamma_tilde()},
                    {"gamma_tilde_L", p.gamma_tilde_L()},
                    {"Delta_tilde", p.delta_tilde()},
                    {"Gamma0", p.gamma0()},
                    {"Gamma0_tau", p.gamma0() * p.tau},
                    {"regime", to_string(p.regime())}};
    j["tolerances"] = {{"dde_decay", decay_tol(c)}, {"dde_bloch", bloch_tol(c)}};
    ordered_json grids = ordered_json::object();
    auto grid = [&](const char* name, const GridSpec& g) {
        if (g.present())
            grids[name] = {{"description", g.description}, {"points", g.values.size()},
                           {"first", g.values.front()}, {"last", g.values.back()}};
    };
    grid("time", c.time);
    grid("frequency", c.frequency);
    grid("position", c.position);
    grid("delay", c.delay);
    grid("sweep", c.sweep);
    if (c.sweep.present()) grids["sweep"]["parameter"] = c.sweep_parameter;
    j["grids"] = grids;
    j["columns"] = t.columns;
    j["rows"] = t.rows.size();
    ordered_json meta = ordered_json::object();
    for (const auto& [k, v] : t.metadata) meta[k] = v;
    j["metadata"] = meta;
    j["warnings"] = t.warnings;
    return j.dump(2) + "\n";
}

}  // namespace halfcavity::cli
