#include "halfcavity/spectrum.hpp"

#include <algorithm>
#include <cmath>

#include "halfcavity/errors.hpp"
#include "halfcavity/parallel.hpp"

namespace halfcavity::spectrum {

namespace {

using Mat2 = Eigen::Matrix2cd;

// Coordinates (Tr s- X, Tr s+ X, Tr s+s- X, Tr s-s+ X) in the basis (e, g),
// where s- = |g><e|.
ComplexVector coords(const Mat2& X) {
    ComplexVector v(4);
    v << X(0, 1), X(1, 0), X(0, 0), X(1, 1);
    return v;
}

Mat2 matrix(const ComplexVector& v) {
    Mat2 X;
    X << v[2], v[0], v[1], v[3];
    return X;
}

Mat2 sigma_minus() {
    Mat2 s = Mat2::Zero();
    s(1, 0) = 1.0;
    return s;
}

template <class F>
ComplexMatrix superoperator(F f) {
    ComplexMatrix S(4, 4);
    for (int j = 0; j < 4; ++j) S.col(j) = coords(f(matrix(ComplexVector::Unit(4, j))));
    return S;
}

// (s-, s+, pop_e, pop_g) -> (s-, s+, sz) and back
ComplexMatrix project() {
    ComplexMatrix P = ComplexMatrix::Zero(3, 4);
    P(0, 0) = 1.0;
    P(1, 1) = 1.0;
    P(2, 2) = 1.0;
    P(2, 3) = -1.0;
    return P;
}

ComplexMatrix embed() {
    ComplexMatrix E = ComplexMatrix::Zero(4, 3);
    E(0, 0) = 1.0;
    E(1, 1) = 1.0;
    E(2, 2) = 0.5;
    E(3, 2) = -0.5;
    return E;
}

constexpr double kClip = 1e-12;

void finish(SpectrumResult& r) {
    for (double& s : r.incoherent) {
        if (!std::isfinite(s)) throw NumericalError("spectrum: non-finite density");
        if (s < 0.0) {
            r.most_negative = std::min(r.most_negative, s);
            if (s >= -kClip)
                s = 0.0;
            else
                r.negative_flag = true;
        }
    }
}

}  // namespace

SpectrumKernel build_kernel(const SystemParams& p) {
    p.validate();
    if (!(p.Omega0 > 0.0)) throw DomainError("spectrum: requires Omega0 > 0");
    const double g = p.gamma;
    const Mat2 sm = sigma_minus();
    const Mat2 sp = sm.adjoint();

    SpectrumKernel k;
    k.params = p;
    k.steady = bloch::delay_bloch_steady(p);
    k.A4 = bloch::generator(p);
    const ComplexMatrix U = numerics::matrix_exponential(k.A4, p.tau);

    k.Rsp = superoperator([&](const Mat2& X) { return Mat2(X * sp); });
    const ComplexMatrix Lsp = superoperator([&](const Mat2& X) { return Mat2(sp * X); });
    const ComplexMatrix Rsm = superoperator([&](const Mat2& X) { return Mat2(X * sm); });
    const ComplexMatrix Lsm = superoperator([&](const Mat2& X) { return Mat2(sm * X); });

    const cplx e = std::polar(1.0, p.thetaL);
    k.Ca = -0.5 * g * e * (k.Rsp - Lsp);
    k.Cb = 0.5 * g * std::conj(e) * (Rsm - Lsm);
    k.K4 = k.Ca * U * Lsm + k.Cb * U * k.Rsp;

    const ComplexMatrix P = project(), E = embed();
    k.A3 = P * k.A4 * E;
    k.K_tilde = P * k.K4 * E;

    const ComplexVector rho = k.steady.vector();
    const Mat2 rm = matrix(rho);
    const ComplexVector chi0 = coords(rm * sp);
    k.I0_ss = P * (chi0 - rho[1] * rho);
    k.va = coords(sm * rm);
    k.vb = coords(rm * sp);
    k.Kg_rho = rho[1] * (k.K4 * rho);
    return k;
}

ComplexVector SpectrumKernel::I1(double nu) const {
    const double tau = params.tau;
    const cplx s(0.0, -nu);
    // int_0^tau e^{-s u} e^{A (tau - u)} Rsp e^{A u} du from a block exponential
    ComplexMatrix big = ComplexMatrix::Zero(8, 8);
    big.topLeftCorner(4, 4) = A4 - s * ComplexMatrix::Identity(4, 4);
    big.topRightCorner(4, 4) = Rsp;
    big.bottomRightCorner(4, 4) = A4;
    const ComplexMatrix integral = numerics::matrix_exponential(big, tau).topRightCorner(4, 4);
    const cplx phi = (std::abs(s) * tau < 1e-300) ? cplx(tau) : -numerics::expm1(-s * tau) / s;
    const ComplexVector J = Ca * (integral * va) + Cb * (integral * vb) - phi * Kg_rho;
    return project() * J;
}

double SpectrumKernel::density(double nu, bool include_I1) const {
    const cplx s(0.0, -nu);
    ComplexMatrix M = s * ComplexMatrix::Identity(3, 3) - A3 -
                      params.epsilon * std::exp(-s * params.tau) * K_tilde;
    ComplexVector rhs = I0_ss;
    if (include_I1 && params.epsilon != 0.0) rhs += params.epsilon * I1(nu);
    return numerics::solve_linear(M, rhs)[0].real() / kPi;
}

double SpectrumKernel::coherent_weight() const { return std::norm(steady.s_minus); }

SpectrumResult incoherent_spectrum(const SystemParams& p, const std::vector<double>& delta_grid,
                                   bool include_I1) {
    const SpectrumKernel k = build_kernel(p);
    SpectrumResult r;
    r.delta_grid = delta_grid;
    r.params_used = p;
    r.coherent_weight = k.coherent_weight();
    r.incoherent.resize(delta_grid.size());
    parallel_for(delta_grid.size(), [&](std::size_t i) {
        r.incoherent[i] = k.density(delta_grid[i], include_I1);
    });
    finish(r);
    return r;
}

std::vector<double> default_grid(const SystemParams& p) {
    p.validate();
    const double half = 3.0 * p.rabi() + 20.0 * p.gamma;
    double step = p.gamma / 25.0;
    if (p.tau > 0.0) step = std::min(step, 1.0 / (25.0 * p.tau));
    const auto n = std::size_t(std::ceil(2.0 * half / step)) + 1;
    std::vector<double> grid(n);
    for (std::size_t i = 0; i < n; ++i) grid[i] = -half + 2.0 * half * double(i) / double(n - 1);
    return grid;
}

SpectrumResult mollow_spectrum(double gamma_eff, double Delta_eff, double Omega0,
                               const std::vector<double>& delta_grid) {
    if (!(gamma_eff > 0.0) || !std::isfinite(Delta_eff) || !(Omega0 > 0.0))
        throw DomainError("mollow_spectrum: need gamma_eff > 0, Omega0 > 0");
    const double g = gamma_eff;
    const cplx h(0.0, 0.5 * Omega0);
    ComplexMatrix A(3, 3);
    A << cplx(-0.5 * g, -Delta_eff), 0.0, -h,
         0.0, cplx(-0.5 * g, Delta_eff), h,
         -2.0 * h, 2.0 * h, -g;
    ComplexVector c(3);
    c << 0.0, 0.0, g;
    const ComplexVector ss = numerics::solve_linear(A, c);
    const cplx sm = ss[0], sp = ss[1], sz = ss[2];
    ComplexVector d0(3);
    d0 << 0.5 * (1.0 + sz) - sp * sm, -sp * sp, -sp - sp * sz;

    SpectrumResult r;
    r.delta_grid = delta_grid;
    r.coherent_weight = std::norm(sm);
    r.incoherent.resize(delta_grid.size());
    for (std::size_t i = 0; i < delta_grid.size(); ++i) {
        const ComplexMatrix M = cplx(0.0, -delta_grid[i]) * ComplexMatrix::Identity(3, 3) - A;
        r.incoherent[i] = numerics::solve_linear(M, d0)[0].real() / kPi;
    }
    finish(r);
    return r;
}

double integrate_density(const std::vector<double>& grid, const std::vector<double>& density) {
    if (grid.size() != density.size() || grid.size() < 2)
        throw DomainError("integrate_density: need matching grids of size >= 2");
    double sum = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i)
        sum += 0.5 * (grid[i] - grid[i - 1]) * (density[i] + density[i - 1]);
    // S ~ C / nu^2 beyond the edges
    if (grid.front() < 0.0) sum += density.front() * std::abs(grid.front());
    if (grid.back() > 0.0) sum += density.back() * grid.back();
    return sum;
}

double total_flux_check(const SystemParams& p) {
    const auto grid = default_grid(p);
    const auto r = incoherent_spectrum(p, grid);
    return integrate_density(grid, r.incoherent) + r.coherent_weight;
}

}  // namespace halfcavity::spectrum
