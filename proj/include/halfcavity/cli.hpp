#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "halfcavity/params.hpp"

/// Scenario configuration, validation and table generation behind the
/// command-line tool.
///
/// Config files are flat `key = value` lines grouped by `[section]` headers;
/// `#` and `;` start comments. Keys before the first section belong to the
/// top level (`mode`). Sections: params, options, time, frequency, position,
/// delay, sweep, output. A grid section holds either `start`, `stop`, `points`
/// or `values = a, b, c`. Angles accept multiples of pi (`pi`, `0.5pi`,
/// `pi/2`, `3*pi/2`).
namespace halfcavity::cli {

extern const char* const kVersion;

/// Parse or validation failure; line is 0 when no single line is responsible.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string source, int line, std::string field, const std::string& message);
    int line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    int line_;
    std::string field_;
};

enum class Mode {
    DecayPopulation,
    DecayField,
    DecaySpectrum,
    WeakPopulation,
    WeakG2,
    BlochSteadySweep,
    BlochTransient,
    EmissionSpectrum,
    FluxCheck,
};

std::string to_string(Mode m);
std::optional<Mode> parse_mode(const std::string& name);
const std::vector<std::string>& mode_names();

struct GridSpec {
    std::vector<double> values;
    std::string description;  ///< "start..stop (n points)" or "explicit (n values)"
    int line = 0;
    bool present() const { return !values.empty(); }
};

/// Physical inputs as written; either phase may be omitted.
struct ParamInput {
    double gamma = 1.0;
    double epsilon = 0.0;
    double tau = 0.0;
    std::optional<double> theta0;
    std::optional<double> thetaL;
    double Omega0 = 0.0;
    double Delta = 0.0;
    std::optional<double> omega0;  ///< atomic frequency; sets theta0 = omega0 tau in tau sweeps
    int optical_cycles = 0;
};

struct ScenarioConfig {
    std::string source = "<config>";
    std::optional<Mode> mode;
    ParamInput input;
    SystemParams params;  ///< filled by validate()

    GridSpec time, frequency, position, delay, sweep;
    std::string sweep_parameter;

    // options
    std::string method;          ///< decay-population: series|dde|markov; bloch-transient: delay|markov
    int channel = 2;
    std::string normalization = "raw";
    std::optional<double> at_time;  ///< decay-spectrum; empty means the long-time spectrum
    bool include_I1 = true;
    bool reference = false;      ///< emission-spectrum: add the Markov Mollow column
    bool amplitude = false;      ///< bloch-steady-sweep: add the phase-oscillation amplitude
    int n_phases = 32;
    std::optional<double> tol;

    std::string output_path;

    std::map<std::string, int> lines;  ///< "section.key" -> line number
    int line_of(const std::string& key) const;
};

ScenarioConfig parse_config(std::istream& in, const std::string& source = "<config>");
ScenarioConfig load_config(const std::string& path);

/// Resolves SystemParams and checks everything the selected mode needs.
/// Throws ConfigError naming the offending field.
void validate(ScenarioConfig& cfg);

/// Physical inputs at one sweep value. Sweeping tau with omega0 set uses
/// theta0 = omega0 tau; otherwise a given theta0 is held fixed over tau and
/// Delta sweeps, else thetaL is.
ParamInput sweep_point(const ScenarioConfig& cfg, double value);

/// SystemParams from inputs; ParameterError becomes ConfigError with the line.
SystemParams resolve_params(const ScenarioConfig& cfg, const ParamInput& in);

/// Human-readable report of the validated configuration and derived parameters.
std::string describe(const ScenarioConfig& cfg);

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<std::pair<std::string, std::string>> metadata;
    std::vector<std::string> warnings;
};

/// Runs the physics chain of the validated configuration.
Table run(const ScenarioConfig& cfg);

/// Comma-separated table with `# key = value` header lines.
void write_csv(const ScenarioConfig& cfg, const Table& table, std::ostream& out);

/// JSON sidecar: parameters, derived quantities, tolerances, grids, warnings.
std::string sidecar_json(const ScenarioConfig& cfg, const Table& table);

/// Formats a double with 15 significant digits.
std::string format_number(double v);

}  // namespace halfcavity::cli
