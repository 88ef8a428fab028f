#include "halfcavity/decay.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "halfcavity/errors.hpp"
#include "halfcavity/numerics.hpp"
#include "halfcavity/parallel.hpp"

namespace halfcavity::decay {

namespace {

constexpr double kTruncation = 1e-16;

void require_undriven(const SystemParams& p, const char* op) {
    p.validate();
    if (p.Omega0 != 0.0) throw DomainError(std::string(op) + ": requires Omega0 = 0");
}

void require_time(double t, const char* op) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError(std::string(op) + ": t must be >= 0");
}

// log of the bound (k t)^n / n! on the n-th series term
double log_bound(int n, double kt) {
    return n * std::log(kt) - std::lgamma(n + 1.0);
}

bool series_done(int n, double kt) {
    return n > kt && log_bound(n + 1, kt) < std::log(kTruncation);
}

// sum_n (k T)^n/n! e^{i n (theta0 + dw tau)} G_n[-q T], T = t - n tau > 0
cplx photon_sum(const SystemParams& p, double t, double delta) {
    const double k = 0.5 * p.epsilon * p.gamma;
    const cplx q(0.5 * p.gamma, -delta);
    const double phase = p.theta0 + delta * p.tau;
    cplx sum = -numerics::expm1(-q * t);
    if (k == 0.0 || t == 0.0) return sum;
    for (int n = 1;; ++n) {
        const double T = t - n * p.tau;
        if (T <= 0.0) break;
        const double mag = std::exp(log_bound(n, k * T));
        sum += mag * std::polar(1.0, n * phase) * numerics::g_n(n, -q * T);
        if (series_done(n, k * t)) break;
    }
    return sum;
}

}  // namespace

cplx series_amplitude(const SystemParams& p, double t) {
    require_undriven(p, "series_amplitude");
    require_time(t, "series_amplitude");
    const double g = p.gamma, k = 0.5 * p.epsilon * g;
    if (p.tau == 0.0) return std::exp(-0.5 * g * t + k * std::polar(1.0, p.theta0) * t);
    cplx sum = std::exp(-0.5 * g * t);
    if (k == 0.0) return sum;
    for (int n = 1;; ++n) {
        const double T = t - n * p.tau;
        if (T <= 0.0) break;
        sum += std::exp(log_bound(n, k * T) - 0.5 * g * T) * std::polar(1.0, n * p.theta0);
        if (series_done(n, k * t)) break;
    }
    return sum;
}

dde::HistorySolution dde_amplitude(const SystemParams& p, double t_end, double tol) {
    require_undriven(p, "dde_amplitude");
    require_time(t_end, "dde_amplitude");
    const cplx feedback = 0.5 * p.epsilon * p.gamma * std::polar(1.0, p.theta0);
    dde::DdeProblem pb;
    pb.A = ComplexMatrix::Constant(1, 1, -0.5 * p.gamma);
    pb.B = ComplexMatrix::Constant(1, 1, feedback);
    pb.tau = p.tau;
    if (p.tau == 0.0) {
        // instantaneous feedback: plain ODE
        pb.A(0, 0) += feedback;
        pb.B.setZero();
        pb.tau = std::max(t_end, 1.0);
    }
    pb.x0 = ComplexVector::Ones(1);
    pb.t_end = t_end;
    return dde::integrate(pb, tol);
}

double markov_population(const SystemParams& p, double t) {
    require_undriven(p, "markov_population");
    require_time(t, "markov_population");
    if (t <= p.tau) return std::exp(-p.gamma * t);
    return std::exp(-p.gamma * p.tau - p.gamma_tilde() * (t - p.tau));
}

double channel_weight(const SystemParams& p, int channel, double delta_omega) {
    if (channel == 1)
        return std::sqrt(p.epsilon * p.gamma / kPi) *
               std::sin(0.5 * p.theta0 + 0.5 * delta_omega * p.tau);
    if (channel == 2) return std::sqrt((1.0 - p.epsilon) * p.gamma / (2.0 * kPi));
    throw DomainError("channel must be 1 or 2");
}

cplx photon_amplitude(const SystemParams& p, double t, int channel, double delta_omega) {
    require_undriven(p, "photon_amplitude");
    require_time(t, "photon_amplitude");
    const double A = channel_weight(p, channel, delta_omega);
    if (A == 0.0) return 0.0;
    return A / cplx(0.5 * p.gamma, -delta_omega) * photon_sum(p, t, delta_omega);
}

SpectralAmplitude transient_spectrum(const SystemParams& p, double t, int channel,
                                     const std::vector<double>& grid) {
    require_undriven(p, "transient_spectrum");
    require_time(t, "transient_spectrum");
    channel_weight(p, channel, 0.0);
    SpectralAmplitude out;
    out.channel = channel;
    out.delta_omega = grid;
    out.amplitude.resize(grid.size());
    out.density.resize(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        out.amplitude[i] = photon_amplitude(p, t, channel, grid[i]);
        out.density[i] = std::norm(out.amplitude[i]);
    });
    return out;
}

SpectralAmplitude steady_spectrum(const SystemParams& p, int channel,
                                  const std::vector<double>& grid) {
    require_undriven(p, "steady_spectrum");
    if (channel == 2 && p.epsilon >= 1.0)
        throw DomainError("steady_spectrum: channel 2 requires epsilon < 1");
    channel_weight(p, channel, 0.0);
    SpectralAmplitude out;
    out.channel = channel;
    out.delta_omega = grid;
    out.density.resize(grid.size());
    const double g = p.gamma, e = p.epsilon;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double d = grid[i];
        const double wt = p.theta0 + d * p.tau;
        const double A = channel_weight(p, channel, d);
        const double re = 0.5 * g * (1.0 - e * std::cos(wt));
        const double im = 0.5 * e * g * std::sin(wt) + d;
        out.density[i] = A * A / (re * re + im * im);
    }
    return out;
}

NormBudget norm_budget(const SystemParams& p, double t, double half_width, double step) {
    require_undriven(p, "norm_budget");
    require_time(t, "norm_budget");
    if (!(half_width > 0.0) || !(step > 0.0)) throw DomainError("norm_budget: bad quadrature grid");
    int m = int(std::ceil(2.0 * half_width / step));
    if (m % 2) ++m;
    const double h = 2.0 * half_width / m;

    std::vector<double> f1(m + 1), f2(m + 1);
    parallel_for(std::size_t(m + 1), [&](std::size_t i) {
        const double d = -half_width + h * double(i);
        const cplx base = photon_sum(p, t, d) / cplx(0.5 * p.gamma, -d);
        f1[i] = std::norm(channel_weight(p, 1, d) * base);
        f2[i] = std::norm(channel_weight(p, 2, d) * base);
    });
    auto simpson = [&](const std::vector<double>& f) {
        double s = f.front() + f.back();
        for (int i = 1; i < m; ++i) s += (i % 2 ? 4.0 : 2.0) * f[i];
        return s * h / 3.0;
    };

    NormBudget nb;
    nb.excited = std::norm(series_amplitude(p, t));
    if (t > 0.0) {
        // |A/p|^2 (1 + |b_e|^2) averaged over the fast phase, beyond the grid
        const double lorentz_tail =
            (4.0 / p.gamma) * (0.5 * kPi - std::atan(2.0 * half_width / p.gamma));
        nb.tail = p.gamma / (2.0 * kPi) * (1.0 + nb.excited) * lorentz_tail;
    }
    nb.channel1 = simpson(f1) + p.epsilon * nb.tail;
    nb.channel2 = simpson(f2) + (1.0 - p.epsilon) * nb.tail;
    return nb;
}

double field_intensity(const SystemParams& p, double zeta, double t, int optical_cycles) {
    require_undriven(p, "field_intensity");
    require_time(t, "field_intensity");
    if (!(zeta >= 0.0) || !std::isfinite(zeta)) throw DomainError("field_intensity: z must be >= 0");
    if (!(p.tau > 0.0)) throw DomainError("field_intensity: requires tau > 0");
    const double phi = p.theta0 + kTwoPi * optical_cycles;
    auto b = [&](double s) { return s < 0.0 ? cplx(0.0) : series_amplitude(p, s); };
    const double half = 0.5 * p.tau;
    cplx a = 0.0;
    if (zeta >= 1.0)
        a += std::polar(1.0, 0.5 * phi * (zeta - 1.0)) * b(t - (zeta - 1.0) * half);
    else
        a += std::polar(1.0, -0.5 * phi * (zeta - 1.0)) * b(t + (zeta - 1.0) * half);
    a -= std::polar(1.0, 0.5 * phi * (zeta + 1.0)) * b(t - (zeta + 1.0) * half);
    return std::norm(a);
}

namespace {

struct ModeRun {
    std::vector<cplx> excited;
    std::vector<double> pop1, pop2, detuning;
};

ModeRun run_modes(const SystemParams& p, int n_modes, double bandwidth,
                  const std::vector<double>& times) {
    const double dw = 2.0 * bandwidth / (n_modes - 1);
    Eigen::VectorXd grid(n_modes);
    for (int k = 0; k < n_modes; ++k) grid[k] = -bandwidth + dw * k;

    const bool ch1 = p.epsilon > 0.0, ch2 = p.epsilon < 1.0;
    const int m = (ch1 ? n_modes : 0) + (ch2 ? n_modes : 0);
    Eigen::VectorXd c(m), d(m);
    int off = 0;
    if (ch1) {
        const double s = std::sqrt(p.epsilon * p.gamma / kPi * dw);
        for (int k = 0; k < n_modes; ++k)
            c[k] = s * std::sin(0.5 * p.theta0 + 0.5 * grid[k] * p.tau);
        d.head(n_modes) = grid;
        off = n_modes;
    }
    if (ch2) {
        c.segment(off, n_modes).setConstant(std::sqrt((1.0 - p.epsilon) * p.gamma / (2.0 * kPi) * dw));
        d.segment(off, n_modes) = grid;
    }
    const Eigen::VectorXcd rot = (-kI * d.cast<cplx>()).eval();
    const Eigen::VectorXcd cc = c.cast<cplx>();

    ComplexVector y0 = ComplexVector::Zero(m + 1);
    y0[0] = 1.0;
    ModeRun r;
    ComplexVector last;
    dde::OdeOptions opt;
    opt.rtol = 1e-7;
    opt.atol = 1e-10;
    dde::integrate_ode(
        [&](double, const ComplexVector& y, ComplexVector& dy) {
            dy.resize(m + 1);
            dy[0] = -cc.dot(y.tail(m));
            dy.tail(m) = rot.cwiseProduct(y.tail(m)) + cc * y[0];
        },
        0.0, y0, times,
        [&](double, const ComplexVector& y) {
            r.excited.push_back(y[0]);
            last = y;
        },
        opt);
    r.detuning.assign(grid.data(), grid.data() + n_modes);
    r.pop1.assign(n_modes, 0.0);
    r.pop2.assign(n_modes, 0.0);
    if (last.size()) {
        off = 1;
        if (ch1) {
            for (int k = 0; k < n_modes; ++k) r.pop1[k] = std::norm(last[off + k]);
            off += n_modes;
        }
        if (ch2)
            for (int k = 0; k < n_modes; ++k) r.pop2[k] = std::norm(last[off + k]);
    }
    return r;
}

}  // namespace

DiscreteModeResult discrete_mode_oracle(const SystemParams& p, int n_modes, double bandwidth,
                                        const std::vector<double>& sample_times,
                                        bool check_convergence) {
    require_undriven(p, "discrete_mode_oracle");
    if (n_modes < 1000) throw DomainError("discrete_mode_oracle: n_modes must be >= 1000");
    if (!(bandwidth >= 40.0 * p.gamma)) throw DomainError("discrete_mode_oracle: bandwidth must be >= 40 gamma");
    if (sample_times.empty()) throw DomainError("discrete_mode_oracle: no sample times");

    ModeRun base = run_modes(p, n_modes, bandwidth, sample_times);
    DiscreteModeResult out;
    out.times = sample_times;
    out.excited = base.excited;
    out.mode_population1 = std::move(base.pop1);
    out.mode_population2 = std::move(base.pop2);
    out.mode_detuning = std::move(base.detuning);

    std::ostringstream warn;
    const double revival = kTwoPi / (2.0 * bandwidth / (n_modes - 1));
    if (sample_times.back() >= revival)
        warn << "sample times reach the mode-spacing revival time " << revival << ". ";
    if (check_convergence) {
        ModeRun fine = run_modes(p, 2 * n_modes, bandwidth, sample_times);
        out.convergence_checked = true;
        for (std::size_t i = 0; i < out.excited.size(); ++i)
            out.convergence_change =
                std::max(out.convergence_change, std::abs(out.excited[i] - fine.excited[i]));
        if (out.convergence_change > 1e-3)
            warn << "doubling n_modes changes b_e by " << out.convergence_change << ".";
    }
    out.warning = warn.str();
    return out;
}

}  // namespace halfcavity::decay
