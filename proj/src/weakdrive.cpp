#include "halfcavity/weakdrive.hpp"

#include <cmath>
#include <limits>

#include "halfcavity/errors.hpp"
#include "halfcavity/numerics.hpp"

namespace halfcavity::weakdrive {

namespace {

constexpr double kTruncation = 1e-16;

enum class Kernel { Driven, Free };

// sum_n alpha2^n/n! T^n K_n(alpha1 T), T = t - n tau > 0, where
// K_n = G_n[-alpha1 T] (Driven) or e^{-alpha1 T} (Free)
cplx delay_series(cplx a1, cplx a2, double tau, double t, Kernel kind) {
    auto kernel = [&](int n, double T) -> cplx {
        if (kind == Kernel::Free) return std::exp(-a1 * T);
        return n == 0 ? -numerics::expm1(-a1 * T) : numerics::g_n(n, -a1 * T);
    };
    cplx sum = kernel(0, t);
    const double k = std::abs(a2);
    if (k == 0.0 || t == 0.0) return sum;
    const double phase = std::arg(a2);
    for (int n = 1;; ++n) {
        const double T = t - n * tau;
        if (T <= 0.0) break;
        const double log_mag = n * std::log(k * T) - std::lgamma(n + 1.0);
        sum += std::exp(log_mag) * std::polar(1.0, n * phase) * kernel(n, T);
        if (n > k * t && (n + 1) * std::log(k * t) - std::lgamma(n + 2.0) < std::log(kTruncation))
            break;
    }
    return sum;
}

void require_time(double t, const char* op) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError(std::string(op) + ": time must be >= 0");
}

}  // namespace

cplx OscillatorCoeffs::A(double t) const {
    require_time(t, "A(t)");
    if (alpha3 == 0.0) return 0.0;
    return alpha3 / alpha1 * delay_series(alpha1, alpha2, tau, t, Kernel::Driven);
}

cplx OscillatorCoeffs::B(double t) const {
    require_time(t, "B(t)");
    return delay_series(alpha1, alpha2, tau, t, Kernel::Free);
}

OscillatorCoeffs oscillator_coeffs(const SystemParams& p) {
    p.validate();
    OscillatorCoeffs c;
    c.alpha1 = cplx(0.5 * p.gamma, p.Delta);
    c.alpha2 = 0.5 * p.epsilon * p.gamma * std::polar(1.0, p.thetaL);
    c.alpha3 = cplx(0.0, 0.5 * p.Omega0);
    c.tau = p.tau;
    return c;
}

cplx perturbative_amplitude(const SystemParams& p, double t) {
    return oscillator_coeffs(p).A(t);
}

double steady_population_weak(const SystemParams& p) {
    p.validate();
    const double g = p.gamma_tilde_L(), d = p.delta_tilde();
    const double den = g * g + 4.0 * d * d;
    if (den == 0.0) return std::numeric_limits<double>::infinity();
    return p.Omega0 * p.Omega0 / den;
}

cplx rabi_staircase(const SystemParams& p, int n) {
    p.validate();
    if (n < 0) throw DomainError("rabi_staircase: n must be >= 0");
    const cplx m = p.mu() * std::polar(1.0, p.thetaL);
    cplx om = p.Omega0;
    for (int k = 1; k <= n; ++k) om = p.Omega0 + m * om;
    return om;
}

cplx rabi_fixed_point(const SystemParams& p) {
    p.validate();
    if (std::abs(p.mu()) >= 1.0) throw DomainError("rabi_fixed_point: |mu| >= 1, the staircase diverges");
    return p.Omega0 / (1.0 - p.mu() * std::polar(1.0, p.thetaL));
}

dde::HistorySolution oscillator_dde(const SystemParams& p, double t_end, cplx c0, double tol) {
    const auto k = oscillator_coeffs(p);
    dde::DdeProblem pb;
    pb.A = ComplexMatrix::Constant(1, 1, -k.alpha1);
    pb.B = ComplexMatrix::Constant(1, 1, k.alpha2);
    pb.c = ComplexVector::Constant(1, k.alpha3);
    pb.tau = p.tau;
    if (p.tau == 0.0) {
        pb.A(0, 0) += k.alpha2;
        pb.B.setZero();
        pb.tau = std::max(t_end, 1.0);
    }
    pb.x0 = ComplexVector::Constant(1, c0);
    pb.t_end = t_end;
    return dde::integrate(pb, tol);
}

double oscillator_population(const SystemParams& p, double t, cplx c0, double n0) {
    const auto k = oscillator_coeffs(p);
    const cplx B = k.B(t);
    return std::norm(k.A(t) + B * c0) + std::norm(B) * (n0 - std::norm(c0));
}

namespace {

CorrelationResult finish(CorrelationResult r, Normalization norm, double limit) {
    r.normalization = norm;
    if (norm == Normalization::SteadyStateSquared) {
        if (!(limit > 0.0) || !std::isfinite(limit))
            throw DomainError("g2: long-delay limit is zero; normalized g2 undefined");
        for (double& v : r.values) v /= limit;
    }
    return r;
}

void require_delays(const std::vector<double>& d) {
    for (double T : d)
        if (!(T >= 0.0) || !std::isfinite(T)) throw DomainError("g2: delays must be >= 0");
}

}  // namespace

CorrelationResult g2_channel2(const SystemParams& p, const std::vector<double>& delays,
                              Normalization norm) {
    require_delays(delays);
    const auto k = oscillator_coeffs(p);
    const double pss = steady_population_weak(p);
    CorrelationResult r;
    r.channel = 2;
    r.delays = delays;
    for (double T : delays) r.values.push_back(pss * std::norm(k.A(T)));
    return finish(std::move(r), norm, g2_limit(p, 2));
}

CorrelationResult g2_channel1(const SystemParams& p, const std::vector<double>& delays,
                              Normalization norm) {
    require_delays(delays);
    const auto k = oscillator_coeffs(p);
    const double pss = steady_population_weak(p);
    const double c = std::cos(p.thetaL);
    CorrelationResult r;
    r.channel = 1;
    r.delays = delays;
    for (double T : delays) {
        const cplx amp = 2.0 * k.A(T) * c - k.A(T + p.tau) - k.A(std::abs(T - p.tau));
        r.values.push_back(pss * std::norm(amp));
    }
    return finish(std::move(r), norm, g2_limit(p, 1));
}

double g2_channel1_transient(const SystemParams& p, double t, double T) {
    require_time(t, "g2_channel1_transient");
    require_time(T, "g2_channel1_transient");
    const auto k = oscillator_coeffs(p);
    auto b = [&](double s) { return s < 0.0 ? cplx(0.0) : k.A(s); };
    const cplx e1 = std::polar(1.0, p.thetaL), e2 = std::polar(1.0, 2.0 * p.thetaL);
    const double s = T > p.tau ? 0.0 : T - p.tau;
    const cplx amp = b(T) * b(t) + e2 * b(T) * b(t - p.tau) - e1 * b(T + p.tau) * b(t - p.tau) -
                     e1 * b(std::abs(T - p.tau)) * b(t + s);
    return std::norm(amp);
}

double g2_limit(const SystemParams& p, int channel) {
    const double pss = steady_population_weak(p);
    if (channel == 2) return pss * pss;
    if (channel == 1) {
        const double s = std::sin(0.5 * p.thetaL);
        return 16.0 * s * s * s * s * pss * pss;
    }
    throw DomainError("channel must be 1 or 2");
}

MonochromaticSpectrum weak_emission_spectrum(const SystemParams& p) {
    p.validate();
    MonochromaticSpectrum s;
    // <c>_ss = alpha3 / (alpha1 - alpha2)
    const auto k = oscillator_coeffs(p);
    const cplx den = k.alpha1 - k.alpha2;
    if (den == 0.0) throw DomainError("weak_emission_spectrum: no steady state at perfect feedback");
    s.c_ss = k.alpha3 / den;
    const double h = std::sin(0.5 * p.thetaL);
    s.weight2 = std::norm(s.c_ss);
    s.weight1 = h * h * s.weight2;
    return s;
}

}  // namespace halfcavity::weakdrive
