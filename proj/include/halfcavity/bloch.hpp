#pragma once

#include <vector>

#include "halfcavity/dde.hpp"
#include "halfcavity/numerics.hpp"
#include "halfcavity/params.hpp"

/// Optical Bloch dynamics with mirror feedback. State ordering is
/// S = (<s->, <s+>, <s+ s->, <s- s+>).
namespace halfcavity::bloch {

struct BlochVector {
    cplx s_minus = 0.0;
    cplx s_plus = 0.0;
    cplx pop_e = 0.0;
    cplx pop_g = 1.0;

    static BlochVector ground() { return {}; }
    static BlochVector excited() { return {0.0, 0.0, 1.0, 0.0}; }
    static BlochVector from(const ComplexVector& v);
    ComplexVector vector() const;

    /// Largest violation of conjugate symmetry, trace, reality and [0,1] range.
    double constraint_violation() const;
};

/// Free-space generator A4 (Delta = w0 - wL).
ComplexMatrix generator(const SystemParams& p);

struct DelayKernel {
    ComplexMatrix U_tau;  ///< e^{A4 tau}
    ComplexMatrix K_tau;
    cplx f1, f2, f3, f4;
};

/// Feedback kernel built from U(tau) with the laser phase thetaL. Below
/// Omega0 = 1e-6 gamma, f2 and f3 use dU/dOmega0 at the given drive.
DelayKernel delay_kernel(const SystemParams& p);

/// Markov-limit steady state (gamma_tilde_L, Delta_tilde in place of gamma, Delta).
BlochVector markov_bloch_steady(const SystemParams& p);

struct Trajectory {
    std::vector<double> times;
    std::vector<BlochVector> states;
};

/// Markov-limit OBEs from the ground state, sampled at `times` (sorted, >= 0).
Trajectory markov_bloch_transient(const SystemParams& p, const std::vector<double>& times);

/// First-order-in-eps expansion of the Markov steady population.
double epsilon_expansion_population(const SystemParams& p);

/// S' = A4 S + eps K S(t - tau) Theta(t - tau).
dde::HistorySolution delay_bloch_transient(const SystemParams& p, double t_end,
                                           const BlochVector& initial = BlochVector::ground(),
                                           double tol = 1e-10);

Trajectory sample(const dde::HistorySolution& sol, const std::vector<double>& times);

/// Null eigenvector of A4 + eps K, normalized to unit trace.
BlochVector delay_bloch_steady(const SystemParams& p);

/// g(tau) of the strong-drive envelope (Delta = 0).
double strong_drive_modulation(const SystemParams& p);

/// (Omega0^2/Gamma)(1 + 2 eps (gamma^2/Gamma) cos(theta0) g(tau)); requires Delta = 0.
double strong_drive_envelope(const SystemParams& p);

/// Half the peak-to-peak variation of the steady pop_e over n_phases values of
/// thetaL in [0, 2pi) at fixed tau, Omega0, Delta, eps.
double phase_oscillation_amplitude(const SystemParams& p, int n_phases = 64);

}  // namespace halfcavity::bloch
