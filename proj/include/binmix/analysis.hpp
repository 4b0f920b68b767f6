#pragma once

// Diagnostics built on top of the stepping machinery: the discrete total
// energy, the dissipation quadratures that pair with it, growth-rate fitting
// for near-uniform mixtures, and the dispersion relation of the linearized
// equations about a uniform quiescent background.

#include <array>
#include <complex>
#include <vector>

#include "binmix/energy.hpp"
#include "binmix/scheme.hpp"

namespace binmix {

// Total discrete energy: kinetic + quadratized bulk + gradient parts.
double discrete_energy(const State& s, const EnergyModel& model,
                       const ModelParams& mp);

// Dissipation rates evaluated from one solve's half-step fields and frozen
// coefficients.  The step obeys
//   E^{n+1} - E^n = -dt * (shear + volumetric + mixing)
// up to the linear-solve residual.
struct DissipationTerms {
  double shear = 0.0;
  double volumetric = 0.0;
  double mixing = 0.0;
  double total() const { return shear + volumetric + mixing; }
};

DissipationTerms dissipation_terms(const FrozenCoeffs& c,
                                   const HalfStepFields& h,
                                   const ModelParams& mp);

// | E(cur) - E(prev) + dt * dissipation | for the step that produced h.
double energy_identity_residual(const State& prev, const State& cur,
                                const HalfStepFields& h, const FrozenCoeffs& c,
                                const EnergyModel& model, const ModelParams& mp,
                                double dt);

// L2 norm of the first density's deviation from its interior mean.
double perturbation_amplitude(const State& s);

// Least-squares slope of log(amplitude) against time.  Entries with
// non-positive amplitude are skipped; throws ConfigError when fewer than two
// usable samples remain.
double growth_rate_fit(const std::vector<double>& times,
                       const std::vector<double>& amplitudes);

// Linear modes of the uniform quiescent background (rho1_0, rho2_0) at wave
// number k.  The longitudinal problem couples the two densities with the
// velocity divergence and closes into a cubic in the growth rate; the
// transverse velocity mode decays by itself at rate -eta_s k^2 / rho_0.
struct DispersionModes {
  std::array<std::complex<double>, 3> longitudinal{};
  double transverse = 0.0;
  double growth_rate = 0.0;  // largest real part over all modes
  std::array<double, 4> cubic{};  // a3 lambda^3 + a2 lambda^2 + a1 lambda + a0
};

DispersionModes dispersion_modes(const EnergyModel& model,
                                 const ModelParams& mp, double rho1_0,
                                 double rho2_0, double k);

}  // namespace binmix
