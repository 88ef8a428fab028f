#include "halfcavity/bloch.hpp"

#include <algorithm>
#include <cmath>

#include "halfcavity/errors.hpp"
#include "halfcavity/parallel.hpp"

namespace halfcavity::bloch {

BlochVector BlochVector::from(const ComplexVector& v) {
    if (v.size() != 4) throw DomainError("BlochVector: expected 4 components");
    return {v[0], v[1], v[2], v[3]};
}

ComplexVector BlochVector::vector() const {
    ComplexVector v(4);
    v << s_minus, s_plus, pop_e, pop_g;
    return v;
}

double BlochVector::constraint_violation() const {
    double v = std::abs(s_plus - std::conj(s_minus));
    v = std::max(v, std::abs(pop_e + pop_g - 1.0));
    v = std::max(v, std::abs(pop_e.imag()));
    v = std::max(v, std::abs(pop_g.imag()));
    v = std::max(v, -pop_e.real());
    v = std::max(v, pop_e.real() - 1.0);
    return v;
}

ComplexMatrix generator(const SystemParams& p) {
    p.validate();
    const double g = p.gamma;
    const cplx h(0.0, 0.5 * p.Omega0);
    ComplexMatrix A(4, 4);
    A << cplx(-0.5 * g, -p.Delta), 0.0, -h, h,
         0.0, cplx(-0.5 * g, p.Delta), h, -h,
         -h, h, -g, 0.0,
         h, -h, g, 0.0;
    return A;
}

namespace {

// dA4/dOmega0
ComplexMatrix generator_derivative() {
    const cplx h(0.0, 0.5);
    ComplexMatrix V(4, 4);
    V << 0.0, 0.0, -h, h,
         0.0, 0.0, h, -h,
         -h, h, 0.0, 0.0,
         h, -h, 0.0, 0.0;
    return V;
}

constexpr double kSmallDrive = 1e-6;

}  // namespace

DelayKernel delay_kernel(const SystemParams& p) {
    const ComplexMatrix A = generator(p);
    const double g = p.gamma, tau = p.tau, W = p.Omega0;
    const cplx e = std::polar(1.0, p.thetaL);
    DelayKernel k;
    k.U_tau = numerics::matrix_exponential(A, tau);
    const auto& U = k.U_tau;
    // 1-based element names follow the matrix convention: U34 = U(2,3)
    k.f1 = -e * (U(2, 3) - U(3, 3));
    if (W >= kSmallDrive * g) {
        k.f2 = -e * (2.0 * kI * g / W) * std::conj(U(2, 0));
        k.f3 = e * (kI * g / W) * U(1, 3);
    } else {
        // U31 and U24 vanish linearly in Omega0; use their Omega0-derivative
        // from the block exponential exp([[A, V], [0, A]] tau)
        ComplexMatrix big = ComplexMatrix::Zero(8, 8);
        big.topLeftCorner(4, 4) = A;
        big.bottomRightCorner(4, 4) = A;
        big.topRightCorner(4, 4) = generator_derivative();
        const ComplexMatrix dU = numerics::matrix_exponential(big, tau).topRightCorner(4, 4);
        k.f2 = -e * (2.0 * kI * g) * std::conj(dU(2, 0));
        k.f3 = e * (kI * g) * dU(1, 3);
    }
    k.f4 = 0.5 * (std::conj(e) * U(0, 0) + e * std::conj(U(0, 0)));

    const cplx h(0.0, 0.5 * W);
    ComplexMatrix K = ComplexMatrix::Zero(4, 4);
    K(0, 0) = 0.5 * g * k.f1;
    K(0, 2) = -h * k.f2;
    K(1, 1) = 0.5 * g * std::conj(k.f1);
    K(1, 2) = h * std::conj(k.f2);
    K(2, 0) = -h * k.f3;
    K(2, 1) = h * std::conj(k.f3);
    K(2, 2) = g * k.f4;
    K(3, 0) = h * k.f3;
    K(3, 1) = -h * std::conj(k.f3);
    K(3, 2) = -g * k.f4;
    k.K_tau = K;
    return k;
}

namespace {

// (s-, s+, sz) generator and inhomogeneity of the Markov OBEs
void markov_system(const SystemParams& p, ComplexMatrix& M, ComplexVector& c) {
    const double g = p.gamma_tilde_L(), d = p.delta_tilde(), W = p.Omega0;
    const cplx h(0.0, 0.5 * W);
    M.resize(3, 3);
    M << cplx(-0.5 * g, -d), 0.0, -h,
         0.0, cplx(-0.5 * g, d), h,
         -2.0 * h, 2.0 * h, -g;
    c.resize(3);
    c << 0.0, 0.0, -g;
}

BlochVector from_sz(cplx sm, cplx sp, cplx sz) {
    return {sm, sp, 0.5 * (1.0 + sz), 0.5 * (1.0 - sz)};
}

}  // namespace

BlochVector markov_bloch_steady(const SystemParams& p) {
    p.validate();
    ComplexMatrix M;
    ComplexVector c;
    markov_system(p, M, c);
    if (p.gamma_tilde_L() == 0.0 && p.Omega0 == 0.0)
        throw DomainError("markov_bloch_steady: no relaxation at perfect feedback");
    const ComplexVector x = numerics::solve_linear(M, -c);
    return from_sz(x[0], x[1], x[2]);
}

Trajectory markov_bloch_transient(const SystemParams& p, const std::vector<double>& times) {
    p.validate();
    ComplexMatrix M;
    ComplexVector c;
    markov_system(p, M, c);
    ComplexVector y0(3);
    y0 << 0.0, 0.0, -1.0;
    Trajectory tr;
    dde::OdeOptions opt;
    opt.rtol = 1e-11;
    opt.atol = 1e-13;
    dde::integrate_ode([&](double, const ComplexVector& y, ComplexVector& dy) { dy = M * y + c; },
                       0.0, y0, times,
                       [&](double t, const ComplexVector& y) {
                           tr.times.push_back(t);
                           tr.states.push_back(from_sz(y[0], y[1], y[2]));
                       },
                       opt);
    return tr;
}

double epsilon_expansion_population(const SystemParams& p) {
    p.validate();
    const double g = p.gamma, G = p.big_gamma();
    const double amp = std::sqrt((g * g + 4.0 * p.Delta * p.Delta) / (g * g));
    return p.Omega0 * p.Omega0 / G *
           (1.0 + 2.0 * p.epsilon * g * g / G * amp * std::cos(p.thetaL - p.phi()));
}

dde::HistorySolution delay_bloch_transient(const SystemParams& p, double t_end,
                                           const BlochVector& initial, double tol) {
    dde::DdeProblem pb;
    pb.A = generator(p);
    const auto k = delay_kernel(p);
    pb.B = p.epsilon * k.K_tau;
    pb.tau = p.tau;
    if (p.tau == 0.0) {
        pb.A += pb.B;
        pb.B.setZero();
        pb.tau = std::max(t_end, 1.0);
    }
    pb.x0 = initial.vector();
    pb.t_end = t_end;
    return dde::integrate(pb, tol);
}

Trajectory sample(const dde::HistorySolution& sol, const std::vector<double>& times) {
    Trajectory tr;
    for (double t : times) {
        tr.times.push_back(t);
        tr.states.push_back(BlochVector::from(sol.query(t)));
    }
    return tr;
}

BlochVector delay_bloch_steady(const SystemParams& p) {
    const ComplexMatrix M = generator(p) + p.epsilon * delay_kernel(p).K_tau;
    const ComplexVector v = numerics::null_eigenvector(M);
    const cplx trace = v[2] + v[3];
    if (std::abs(trace) < 1e-12) throw DegenerateKernelError("delay_bloch_steady: null vector has zero trace");
    BlochVector b = BlochVector::from(v / trace);
    const double tol = 1e-9 * std::max(1.0, b.vector().cwiseAbs().maxCoeff());
    if (b.constraint_violation() > tol)
        throw NumericalError("delay_bloch_steady: steady state violates Bloch constraints");
    // remove round-off from the conjugate and real structure
    b.s_plus = std::conj(b.s_minus);
    b.pop_e = b.pop_e.real();
    b.pop_g = 1.0 - b.pop_e.real();
    return b;
}

double strong_drive_modulation(const SystemParams& p) {
    p.validate();
    const double g = p.gamma, W = p.Omega0, t = p.tau;
    return std::exp(-0.75 * g * t) * (0.75 * std::cos(W * t) - W / (2.0 * g) * std::sin(W * t)) +
           0.25 * std::exp(-0.5 * g * t);
}

double strong_drive_envelope(const SystemParams& p) {
    if (p.Delta != 0.0) throw DomainError("strong_drive_envelope: requires Delta = 0");
    const double g = p.gamma, G = g * g + 2.0 * p.Omega0 * p.Omega0;
    return p.Omega0 * p.Omega0 / G *
           (1.0 + 2.0 * p.epsilon * g * g / G * std::cos(p.theta0) * strong_drive_modulation(p));
}

double phase_oscillation_amplitude(const SystemParams& p, int n_phases) {
    if (n_phases < 4) throw DomainError("phase_oscillation_amplitude: need at least 4 phases");
    std::vector<double> pop(n_phases);
    parallel_for(std::size_t(n_phases), [&](std::size_t i) {
        SystemParams q = p;
        q.thetaL = kTwoPi * double(i) / n_phases;
        q.theta0 = wrap_phase(q.thetaL + q.Delta * q.tau);
        pop[i] = delay_bloch_steady(q).pop_e.real();
    });
    const auto [lo, hi] = std::minmax_element(pop.begin(), pop.end());
    return 0.5 * (*hi - *lo);
}

}  // namespace halfcavity::bloch
