#include "binmix/analysis.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "binmix/common.hpp"
#include "binmix/grid.hpp"

namespace binmix {

namespace {

// c = a - b over the full padded extent (ghosts of a difference of
// boundary-consistent fields stay boundary consistent).
template <typename F>
void subtract(const F& a, const F& b, F& c) {
  const std::vector<double>& ra = a.raw();
  const std::vector<double>& rb = b.raw();
  std::vector<double>& rc = c.raw();
  for (std::size_t m = 0; m < rc.size(); ++m) rc[m] = ra[m] - rb[m];
}

template <typename F>
void add(const F& a, const F& b, F& c) {
  const std::vector<double>& ra = a.raw();
  const std::vector<double>& rb = b.raw();
  std::vector<double>& rc = c.raw();
  for (std::size_t m = 0; m < rc.size(); ++m) rc[m] = ra[m] + rb[m];
}

}  // namespace

// ============================================================================
// Energy and dissipation
// ============================================================================

double discrete_energy(const State& s, const EnergyModel& model,
                       const ModelParams& mp) {
  const GridSpec& g = s.rho1.grid();
  // The gradient terms read ghost cells, so enforce the mirror closure on
  // working copies rather than trusting the caller's ghosts.
  CellField r1 = s.rho1;
  CellField r2 = s.rho2;
  apply_scalar_bc(r1);
  apply_scalar_bc(r2);

  double e = 0.5 * (inner_xface(s.u, s.u) + inner_yface(s.v, s.v));
  e += inner_cell(s.q1, s.q1) - model.shift() * g.lx * g.ly;
  e += 0.5 * mp.kappa[0] * inner_grad(r1, r1) +
       0.5 * mp.kappa[2] * inner_grad(r2, r2) +
       mp.kappa[1] * inner_grad(r1, r2);
  return e;
}

DissipationTerms dissipation_terms(const FrozenCoeffs& c,
                                   const HalfStepFields& h,
                                   const ModelParams& mp) {
  const GridSpec& g = c.inv_re_s.grid();
  DissipationTerms out;

  if (!mp.no_hydro) {
    XFaceField w(g);
    YFaceField z(g);
    multiply(c.ax_r, h.u, w);
    multiply(c.ay_r, h.v, z);

    CellField d11(g), d22(g), tmp(g);
    cell_diff_x(w, d11);
    cell_diff_y(z, d22);

    add(d11, d22, tmp);
    multiply(tmp, tmp, tmp);
    out.volumetric = inner_cell(c.inv_re_v, tmp);

    multiply(d11, d11, d11);
    multiply(d22, d22, d22);
    add(d11, d22, tmp);
    out.shear = 2.0 * inner_cell(c.inv_re_s, tmp);

    VertexField s1(g), s2(g), sv(g);
    vertex_diff_y(w, s1);
    vertex_diff_x(z, s2);
    add(s1, s2, sv);
    multiply(sv, sv, sv);
    out.shear += inner_vertex(c.s_vx, sv);
  }

  CellField mud(g);
  subtract(h.mu1, h.mu2, mud);
  out.mixing = mp.m1 * inner_grad(mud, mud);
  return out;
}

double energy_identity_residual(const State& prev, const State& cur,
                                const HalfStepFields& h, const FrozenCoeffs& c,
                                const EnergyModel& model, const ModelParams& mp,
                                double dt) {
  const double e_prev = discrete_energy(prev, model, mp);
  const double e_cur = discrete_energy(cur, model, mp);
  const DissipationTerms d = dissipation_terms(c, h, mp);
  return std::abs(e_cur - e_prev + dt * d.total());
}

// ============================================================================
// Growth-rate diagnostics
// ============================================================================

double perturbation_amplitude(const State& s) {
  CellField dev = s.rho1;
  const double mean = mean_cell(dev);
  for (double& x : dev.raw()) x -= mean;
  return norm_cell(dev);
}

double growth_rate_fit(const std::vector<double>& times,
                       const std::vector<double>& amplitudes) {
  if (times.size() != amplitudes.size())
    throw ConfigError("growth_rate_fit: times and amplitudes differ in length");

  std::vector<double> t, y;
  t.reserve(times.size());
  y.reserve(times.size());
  for (std::size_t m = 0; m < times.size(); ++m) {
    if (amplitudes[m] > 0.0) {
      t.push_back(times[m]);
      y.push_back(std::log(amplitudes[m]));
    }
  }
  if (t.size() < 2)
    throw ConfigError("growth_rate_fit: need at least two positive amplitudes");

  double t_mean = 0.0;
  for (double v : t) t_mean += v;
  t_mean /= static_cast<double>(t.size());

  double sty = 0.0, stt = 0.0;
  for (std::size_t m = 0; m < t.size(); ++m) {
    const double tc = t[m] - t_mean;
    sty += tc * y[m];
    stt += tc * tc;
  }
  if (stt <= 0.0)
    throw ConfigError("growth_rate_fit: sample times are all identical");
  return sty / stt;
}

// ============================================================================
// Dispersion relation about a uniform quiescent state
// ============================================================================
//
// Perturbing (rho1, rho2, velocity) = (r1 + d1 e^{lambda t + i k x},
// r2 + d2 e^{...}, dv e^{...}) and keeping first-order terms couples the two
// densities to the velocity divergence.  Eliminating the chemical potentials
// with  d mu_i = sum_j H_ij d rho_j,  H_ij = h_ij + kappa_ij k^2,  leaves a
// 3x3 eigenvalue problem whose characteristic polynomial is the cubic below.
// The transverse velocity component sees only shear drag and detaches with
// rate -eta_s k^2 / rho0.

DispersionModes dispersion_modes(const EnergyModel& model,
                                 const ModelParams& mp, double rho1_0,
                                 double rho2_0, double k) {
  const double rho0 = rho1_0 + rho2_0;
  if (!(rho0 > 0.0))
    throw ConfigError("dispersion_modes: background density must be positive");

  const double f1 = rho1_0 / rho0;
  const double f2 = rho2_0 / rho0;
  const double eta_s = f1 / mp.re_s1 + f2 / mp.re_s2;
  const double eta_v = f1 / mp.re_v1 + f2 / mp.re_v2;
  const double eta = 2.0 * eta_s + eta_v;

  const std::array<double, 3> hess = model.bulk_hessian_h(rho1_0, rho2_0);
  const double k2 = k * k;
  const double k4 = k2 * k2;
  const double h11 = hess[0] + mp.kappa[0] * k2;
  const double h12 = hess[1] + mp.kappa[1] * k2;
  const double h22 = hess[2] + mp.kappa[2] * k2;

  const double trace_like = h11 + h22 - 2.0 * h12;
  const double php = rho1_0 * rho1_0 * h11 + 2.0 * rho1_0 * rho2_0 * h12 +
                     rho2_0 * rho2_0 * h22;
  const double det_h = h11 * h22 - h12 * h12;

  DispersionModes out;
  out.cubic = {rho0, k2 * (eta + rho0 * mp.m1 * trace_like),
               k2 * php + eta * mp.m1 * k4 * trace_like,
               k4 * mp.m1 * rho0 * rho0 * det_h};

  Eigen::Matrix3d companion = Eigen::Matrix3d::Zero();
  companion(1, 0) = 1.0;
  companion(2, 1) = 1.0;
  companion(0, 2) = -out.cubic[3] / out.cubic[0];
  companion(1, 2) = -out.cubic[2] / out.cubic[0];
  companion(2, 2) = -out.cubic[1] / out.cubic[0];
  const Eigen::EigenSolver<Eigen::Matrix3d> es(companion);
  for (int m = 0; m < 3; ++m) out.longitudinal[m] = es.eigenvalues()(m);
  std::sort(out.longitudinal.begin(), out.longitudinal.end(),
            [](const std::complex<double>& a, const std::complex<double>& b) {
              return a.real() > b.real();
            });

  out.transverse = -eta_s * k2 / rho0;
  out.growth_rate = out.transverse;
  for (const std::complex<double>& z : out.longitudinal)
    out.growth_rate = std::max(out.growth_rate, z.real());
  return out;
}

}  // namespace binmix
