#pragma once

#include <vector>

#include "halfcavity/dde.hpp"
#include "halfcavity/params.hpp"

/// Weak laser drive: first-order amplitude, harmonic-oscillator model and
/// intensity correlations. All amplitudes are in the frame rotating at wL.
namespace halfcavity::weakdrive {

/// Coefficients of <c(t)> = A(t) + B(t) <c(0)> for
/// d<c>/dt = -alpha1 <c> + alpha2 <c(t - tau)> Theta(t - tau) + alpha3.
struct OscillatorCoeffs {
    cplx alpha1;  ///< gamma/2 + i Delta
    cplx alpha2;  ///< eps gamma/2 e^{i thetaL}
    cplx alpha3;  ///< i Omega0/2
    double tau = 0.0;

    cplx A(double t) const;
    cplx B(double t) const;
};

OscillatorCoeffs oscillator_coeffs(const SystemParams& p);

/// First-order excited amplitude b_e^L(t) for a ground-state start.
cplx perturbative_amplitude(const SystemParams& p, double t);

/// Long-time population Omega0^2 / (gammaL~^2 + 4 Delta~^2); +infinity at the
/// perfect-feedback point where the denominator vanishes.
double steady_population_weak(const SystemParams& p);

/// Effective Rabi frequency in the n-th delay interval.
cplx rabi_staircase(const SystemParams& p, int n);
/// Limit n -> infinity. Throws DomainError when |mu| >= 1.
cplx rabi_fixed_point(const SystemParams& p);

/// Numerical solution of the oscillator delay equation with <c(0)> = c0.
dde::HistorySolution oscillator_dde(const SystemParams& p, double t_end, cplx c0 = 0.0,
                                    double tol = 1e-11);

/// <c^dagger c>(t) = |A + B c0|^2 + |B|^2 (n0 - |c0|^2).
double oscillator_population(const SystemParams& p, double t, cplx c0 = 0.0, double n0 = 0.0);

enum class Normalization { Raw, SteadyStateSquared };

struct CorrelationResult {
    int channel = 2;
    Normalization normalization = Normalization::Raw;
    std::vector<double> delays;
    std::vector<double> values;
};

/// Long-time G2 in the free channel: P_ss |b_e^L(T)|^2.
CorrelationResult g2_channel2(const SystemParams& p, const std::vector<double>& delays,
                              Normalization norm = Normalization::Raw);

/// Long-time G2 in the mirror channel:
/// P_ss |2 b(T) cos thetaL - b(T + tau) - b(|T - tau|)|^2.
CorrelationResult g2_channel1(const SystemParams& p, const std::vector<double>& delays,
                              Normalization norm = Normalization::Raw);

/// Finite-t G2 of the mirror channel (four interfering paths); amplitudes
/// with negative arguments vanish.
double g2_channel1_transient(const SystemParams& p, double t, double T);

/// T -> infinity limit of the raw long-time G2 of each channel.
double g2_limit(const SystemParams& p, int channel);

/// Elastic (delta at wL) emission weights of the oscillator model, up to one
/// shared constant; the incoherent part vanishes at this order.
struct MonochromaticSpectrum {
    cplx c_ss;          ///< <c>_ss
    double weight1 = 0; ///< sin^2(thetaL/2) |<c>_ss|^2
    double weight2 = 0; ///< |<c>_ss|^2
    double incoherent = 0.0;
};

MonochromaticSpectrum weak_emission_spectrum(const SystemParams& p);

}  // namespace halfcavity::weakdrive
