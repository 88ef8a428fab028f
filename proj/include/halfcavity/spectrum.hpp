#pragma once

#include <vector>

#include "halfcavity/bloch.hpp"
#include "halfcavity/numerics.hpp"
#include "halfcavity/params.hpp"

/// Resonance-fluorescence spectrum in the free channel. Frequencies are
/// nu = w - wL in units of gamma; densities are per unit nu.
///
/// The incoherent part is (1/pi) Re of the Laplace transform at -i nu of the
/// forward correlation <d s+(0) d s-(t)>. That correlation obeys the Bloch
/// delay equation with a delayed source from the feedback field acting on the
/// steady state before t = 0; the source is evaluated at zeroth order in eps.
namespace halfcavity::spectrum {

struct SpectrumKernel {
    SystemParams params;
    bloch::BlochVector steady;  ///< delay steady state used for all sources

    ComplexMatrix A4;      ///< free generator in (s-, s+, pop_e, pop_g) coordinates
    ComplexMatrix K4;      ///< feedback superoperator, equal to the Bloch kernel
    ComplexMatrix A3;      ///< A4 reduced to (s-, s+, sz)
    ComplexMatrix K_tilde; ///< K4 reduced to (s-, s+, sz)
    ComplexVector I0_ss;   ///< initial value of the fluctuation correlation (3-vector)

    /// Delayed source of the correlation equation at nu (3-vector). Unlike
    /// I0_ss it depends on nu through the partial Laplace transform over [0, tau].
    ComplexVector I1(double nu) const;

    /// Incoherent density at nu; include_I1 = false drops the delayed source.
    double density(double nu, bool include_I1 = true) const;

    /// |<s->_ss|^2.
    double coherent_weight() const;

    // pieces of I1
    ComplexMatrix Rsp;  ///< X -> X s+
    ComplexMatrix Ca, Cb;
    ComplexVector va, vb, Kg_rho;
};

/// Requires Omega0 > 0 (DomainError otherwise).
SpectrumKernel build_kernel(const SystemParams& p);

struct SpectrumResult {
    std::vector<double> delta_grid;
    std::vector<double> incoherent;
    double coherent_weight = 0.0;
    SystemParams params_used;
    /// Most negative raw density (0 if none). Values in [-1e-12, 0) are
    /// clipped to 0; anything lower is kept and sets `negative_flag`.
    double most_negative = 0.0;
    bool negative_flag = false;
};

SpectrumResult incoherent_spectrum(const SystemParams& p, const std::vector<double>& delta_grid,
                                   bool include_I1 = true);

/// Uniform grid on +-(3 W + 20 gamma), W the generalized Rabi frequency, with
/// at least 25 points per gamma and per 1/tau.
std::vector<double> default_grid(const SystemParams& p);

/// Markov-limit (Mollow) incoherent spectrum for the free OBEs with decay
/// rate gamma_eff and detuning Delta_eff.
SpectrumResult mollow_spectrum(double gamma_eff, double Delta_eff, double Omega0,
                               const std::vector<double>& delta_grid);

/// Trapezoidal integral of the incoherent spectrum over the default grid plus
/// a 1/nu^2 tail estimate, plus the coherent weight.
double total_flux_check(const SystemParams& p);

/// Trapezoid over a grid with the 1/nu^2 tail continuation at both ends.
double integrate_density(const std::vector<double>& grid, const std::vector<double>& density);

}  // namespace halfcavity::spectrum
