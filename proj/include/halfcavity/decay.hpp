#pragma once

#include <string>
#include <vector>

#include "halfcavity/dde.hpp"
#include "halfcavity/params.hpp"

/// Spontaneous emission of an initially excited atom in front of the mirror
/// (no drive: every operation requires Omega0 = 0).
namespace halfcavity::decay {

/// Excited-state amplitude b_e(t) from the delay-series solution.
cplx series_amplitude(const SystemParams& p, double t);

/// Numerical solution of b_e' = -gamma/2 b_e + eps gamma/2 e^{i theta0} b_e(t - tau), b_e(0) = 1.
dde::HistorySolution dde_amplitude(const SystemParams& p, double t_end, double tol = 1e-11);

/// Markov-limit population: e^{-gamma t} up to tau, then decay at gamma_tilde.
double markov_population(const SystemParams& p, double t);

struct SpectralAmplitude {
    int channel = 2;
    std::vector<double> delta_omega;  ///< w - w0
    std::vector<cplx> amplitude;      ///< b_g(w, t); empty for steady spectra
    std::vector<double> density;      ///< |b_g|^2
};

/// Coupling weight A_j(w) of channel j (1: mirror, 2: free) at detuning w - w0.
double channel_weight(const SystemParams& p, int channel, double delta_omega);

/// Single-frequency photon amplitude b_g^j(w, t).
cplx photon_amplitude(const SystemParams& p, double t, int channel, double delta_omega);

SpectralAmplitude transient_spectrum(const SystemParams& p, double t, int channel,
                                     const std::vector<double>& grid);

/// Long-time photon distribution |b_g^j(w)|^2.
SpectralAmplitude steady_spectrum(const SystemParams& p, int channel,
                                  const std::vector<double>& grid);

struct NormBudget {
    double excited = 0.0;     ///< |b_e(t)|^2
    double channel1 = 0.0;    ///< integral of |b_g^1|^2 including the tail estimate
    double channel2 = 0.0;
    double tail = 0.0;        ///< analytic contribution from |w - w0| > half_width
    double total() const { return excited + channel1 + channel2; }
};

/// Probability budget at time t: Simpson quadrature on [-half_width, half_width]
/// plus the large-detuning asymptote (A/p)(1 - e^{i dw t} b_e) integrated outside.
NormBudget norm_budget(const SystemParams& p, double t, double half_width = 400.0,
                       double step = 0.01);

/// Intensity of the mirror-channel field at position zeta = z / (c tau / 2)
/// (mirror at 0, atom at 1), normalized so a single outgoing term has
/// intensity |b_e|^2. The phase w0 tau entering the spatial factors is
/// theta0 + 2 pi optical_cycles.
double field_intensity(const SystemParams& p, double zeta, double t, int optical_cycles = 0);

struct DiscreteModeResult {
    std::vector<double> times;
    std::vector<cplx> excited;             ///< b_e at each sample time
    std::vector<double> mode_population1;  ///< |b_k|^2 of channel 1 at the last sample
    std::vector<double> mode_population2;
    std::vector<double> mode_detuning;     ///< w_k - w0
    bool convergence_checked = false;
    double convergence_change = 0.0;       ///< max |b_e(N) - b_e(2N)| over samples
    std::string warning;                   ///< set when the doubling test exceeds 1e-3
};

/// Direct integration of the amplitude equations with n_modes modes per
/// channel, uniformly spaced on [w0 - bandwidth, w0 + bandwidth].
DiscreteModeResult discrete_mode_oracle(const SystemParams& p, int n_modes, double bandwidth,
                                        const std::vector<double>& sample_times,
                                        bool check_convergence = true);

}  // namespace halfcavity::decay
