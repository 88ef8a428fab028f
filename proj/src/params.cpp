#include "halfcavity/params.hpp"

#include <cmath>

#include "halfcavity/errors.hpp"

namespace halfcavity {

double wrap_phase(double angle) {
    double r = std::fmod(angle, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    if (r >= kTwoPi) r = 0.0;
    return r;
}

bool phases_consistent(double theta0, double thetaL, double Delta, double tau, double tol) {
    double d = wrap_phase(thetaL - (theta0 - Delta * tau));
    return std::min(d, kTwoPi - d) <= tol;
}

SystemParams SystemParams::make(double epsilon, double tau, std::optional<double> theta0,
                                std::optional<double> thetaL, double Omega0, double Delta,
                                double gamma) {
    SystemParams p;
    p.gamma = gamma;
    p.epsilon = epsilon;
    p.tau = tau;
    p.Omega0 = Omega0;
    p.Delta = Delta;
    if (theta0 && thetaL) {
        if (!phases_consistent(*theta0, *thetaL, Delta, tau))
            throw ParameterError("thetaL", "inconsistent with theta0 - Delta*tau (mod 2pi)");
        p.theta0 = wrap_phase(*theta0);
        p.thetaL = wrap_phase(*thetaL);
    } else if (theta0) {
        p.theta0 = wrap_phase(*theta0);
        p.thetaL = wrap_phase(*theta0 - Delta * tau);
    } else if (thetaL) {
        p.thetaL = wrap_phase(*thetaL);
        p.theta0 = wrap_phase(*thetaL + Delta * tau);
    }
    p.validate();
    return p;
}

void SystemParams::validate() const {
    auto finite = [](double v, const char* name) {
        if (!std::isfinite(v)) throw ParameterError(name, "must be finite");
    };
    finite(gamma, "gamma");
    finite(epsilon, "epsilon");
    finite(tau, "tau");
    finite(theta0, "theta0");
    finite(thetaL, "thetaL");
    finite(Omega0, "Omega0");
    finite(Delta, "Delta");
    if (gamma <= 0.0) throw ParameterError("gamma", "must be positive");
    if (epsilon < 0.0 || epsilon > 1.0) throw ParameterError("epsilon", "must lie in [0, 1]");
    if (tau < 0.0) throw ParameterError("tau", "must be non-negative");
    if (Omega0 < 0.0) throw ParameterError("Omega0", "must be non-negative");
    if (theta0 < 0.0 || theta0 >= kTwoPi) throw ParameterError("theta0", "must lie in [0, 2pi)");
    if (thetaL < 0.0 || thetaL >= kTwoPi) throw ParameterError("thetaL", "must lie in [0, 2pi)");
}

double SystemParams::gamma_tilde() const { return gamma * (1.0 - epsilon * std::cos(theta0)); }
double SystemParams::gamma_tilde_L() const { return gamma * (1.0 - epsilon * std::cos(thetaL)); }
double SystemParams::delta_tilde() const { return Delta - epsilon * gamma / 2.0 * std::sin(thetaL); }
double SystemParams::omega0_shift() const { return -epsilon * gamma / 2.0 * std::sin(theta0); }
cplx SystemParams::mu() const { return epsilon * gamma / cplx(gamma, 2.0 * Delta); }
double SystemParams::rabi() const { return std::sqrt(Omega0 * Omega0 + Delta * Delta); }
double SystemParams::gamma0() const { return 2.0 * rabi() + gamma; }
double SystemParams::big_gamma() const {
    return gamma * gamma + 2.0 * Omega0 * Omega0 + 4.0 * Delta * Delta;
}
double SystemParams::phi() const { return std::atan2(2.0 * Delta, gamma); }

SystemParams::Regime SystemParams::regime() const {
    double x = gamma0() * tau;
    if (x < 0.1) return Regime::Markov;
    if (x > 10.0) return Regime::LargeDelay;
    return Regime::Intermediate;
}

std::string to_string(SystemParams::Regime r) {
    switch (r) {
        case SystemParams::Regime::Markov: return "markov";
        case SystemParams::Regime::Intermediate: return "intermediate";
        case SystemParams::Regime::LargeDelay: return "large-delay";
    }
    return "unknown";
}

}  // namespace halfcavity
