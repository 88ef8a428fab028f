#pragma once

#include <complex>
#include <optional>
#include <string>

namespace halfcavity {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr cplx kI{0.0, 1.0};

/// Reduce an angle to [0, 2pi).
double wrap_phase(double angle);

/// True when thetaL == theta0 - Delta*tau (mod 2pi) within tol.
bool phases_consistent(double theta0, double thetaL, double Delta, double tau, double tol = 1e-9);

/// Dimensionless parameters of the atom-mirror system. Rates in units of gamma,
/// times in units of 1/gamma. Frequencies are detunings: Delta = w0 - wL.
struct SystemParams {
    double gamma = 1.0;
    double epsilon = 0.0;
    double tau = 0.0;
    double theta0 = 0.0;  ///< w0*tau mod 2pi
    double thetaL = 0.0;  ///< wL*tau mod 2pi
    double Omega0 = 0.0;
    double Delta = 0.0;

    /// Build with phases reconciled: a missing phase is derived from the other
    /// one via thetaL = theta0 - Delta*tau; if both are given they must agree.
    static SystemParams make(double epsilon, double tau, std::optional<double> theta0,
                             std::optional<double> thetaL, double Omega0 = 0.0,
                             double Delta = 0.0, double gamma = 1.0);

    /// Throws ParameterError naming the offending field.
    void validate() const;

    double gamma_tilde() const;      ///< gamma (1 - eps cos theta0)
    double gamma_tilde_L() const;    ///< gamma (1 - eps cos thetaL)
    double delta_tilde() const;      ///< Delta - eps gamma/2 sin thetaL
    double omega0_shift() const;     ///< -eps gamma/2 sin theta0
    cplx mu() const;                 ///< eps gamma / (gamma + 2 i Delta)
    double rabi() const;             ///< sqrt(Omega0^2 + Delta^2)
    double gamma0() const;           ///< 2 Omega + gamma
    double big_gamma() const;        ///< gamma^2 + 2 Omega0^2 + 4 Delta^2
    double phi() const;              ///< atan2(2 Delta, gamma)

    enum class Regime { Markov, Intermediate, LargeDelay };
    /// Classification by Gamma0*tau: < 0.1 Markov, > 10 large delay.
    Regime regime() const;
};

std::string to_string(SystemParams::Regime r);

}  // namespace halfcavity
