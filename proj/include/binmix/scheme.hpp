#pragma once

// Linear, second-order time step for the compressible binary phase-field
// system.  Each step solves one linear system in the half-step unknowns
//
//   X = (mu1, mu2, u, v, q1, rho1, rho2)^{n+1/2},
//
// where the equation blocks are, in the same order,
//
//   mass-1 :  (2/dt) rho1 + div(c1 u, c1 v) - M1 lap(mu1 - mu2)
//   mass-2 :  (2/dt) rho2 + div(c2 u, c2 v) + M1 lap(mu1 - mu2)
//   mom-u  :  (2/dt) u + conv_u - visc_u + c1 D_x mu1 + c2 D_x mu2
//   mom-v  :  (2/dt) v + conv_v - visc_v + c1 D_y mu1 + c2 D_y mu2
//   q      :  (4/dt) (q1 - p1 rho1 - p2 rho2)
//   mu1-def: -(2/dt) mu1 + (4/dt) p1 q1 - (2/dt)(k11 lap rho1 + k12 lap rho2)
//   mu2-def: -(2/dt) mu2 + (4/dt) p2 q1 - (2/dt)(k12 lap rho1 + k22 lap rho2)
//
// with c_i = A(rho_i_bar rbar) face coefficients, and the right-hand side
//
//   g = ( (2/dt) rho1^n, (2/dt) rho2^n, (2/dt) u^n, (2/dt) v^n,
//         (4/dt)(q1^n - p1 rho1^n - p2 rho2^n), 0, 0 ).
//
// Full-step fields follow from X by (.)^{n+1} = 2 X - (.)^n, except the
// densities, which are advanced in flux form so the discrete masses telescope
// to machine precision.  Frozen coefficients (bars) are the linear
// extrapolation (3 (.)^n - (.)^{n-1}) / 2 of the pointwise fields.

#include <vector>

#include "binmix/energy.hpp"
#include "binmix/grid.hpp"

namespace binmix {

struct ModelParams {
  double m1 = 1e-3;      // mobility
  double re_s1 = 100.0;  // shear Reynolds numbers per component
  double re_s2 = 100.0;
  double re_v1 = 300.0;  // volumetric Reynolds numbers per component
  double re_v2 = 300.0;
  // gradient-energy matrix (k11, k12, k22) in mass-density form
  std::array<double, 3> kappa{1e-4, 0.0, 1e-4};
  double rho_floor = 1e-10;  // abort threshold for recovered densities
  bool no_hydro = false;     // freeze the velocity at zero
};

struct TimeParams {
  double dt = 1e-3;
  bool first_order_coeffs = false;  // use (.)^n instead of the extrapolation
};

struct State {
  State() = default;
  explicit State(const GridSpec& g) : rho1(g), rho2(g), q1(g), u(g), v(g) {}
  CellField rho1, rho2, q1;
  XFaceField u;
  YFaceField v;
  double t = 0.0;
  long step = 0;
};

// Half-step coefficient fields frozen from steps n and n-1, plus the face and
// vertex averages of them the operator reuses on every application.
struct FrozenCoeffs {
  FrozenCoeffs() = default;
  explicit FrozenCoeffs(const GridSpec& g);

  CellField rho1b, rho2b;        // extrapolated densities
  CellField rbar;                // extrapolated 1/sqrt(rho)
  CellField p1b, p2b;            // extrapolated dq/drho_i
  CellField inv_re_s, inv_re_v;  // mass-fraction-weighted inverse Reynolds
  XFaceField ub;                 // extrapolated velocity
  YFaceField vb;

  XFaceField ax_c1, ax_c2, ax_r;  // A_x(rho_i_bar rbar), A_x(rbar)
  YFaceField ay_c1, ay_c2, ay_r;
  VertexField s_vx;               // A_x A_y (1/Re_s)
  VertexField ax_vb, ay_ub;       // vertex averages of the frozen velocity

  // rebuild ax_*/ay_*/vertex fields from the cell/face members
  void refresh_derived();
};

// Builds the frozen coefficients for the step from n to n+1.  Throws
// PositivityError if the extrapolated total density is not positive.
void extrapolate_coeffs(const State& sn, const State& snm1,
                        const EnergyModel& model, const ModelParams& mp,
                        bool first_order, FrozenCoeffs& out);

// Unknown ordering inside the flat solution vector: interior cells row by
// row for the five cell blocks, interior faces for u and v.
struct DofLayout {
  int nx = 0, ny = 0;

  int n_cell() const { return nx * ny; }
  int n_u() const { return (nx - 1) * ny; }
  int n_v() const { return nx * (ny - 1); }

  int mu1_off() const { return 0; }
  int mu2_off() const { return n_cell(); }
  int u_off() const { return 2 * n_cell(); }
  int v_off() const { return 2 * n_cell() + n_u(); }
  int q_off() const { return 2 * n_cell() + n_u() + n_v(); }
  int rho1_off() const { return 3 * n_cell() + n_u() + n_v(); }
  int rho2_off() const { return 4 * n_cell() + n_u() + n_v(); }
  int total() const { return 5 * n_cell() + n_u() + n_v(); }

  int cell_index(int i, int j) const { return (j - 1) * nx + (i - 1); }
  int u_index(int i, int j) const { return (j - 1) * (nx - 1) + (i - 1); }
  int v_index(int i, int j) const { return (j - 1) * nx + (i - 1); }
};

// Matrix-free application of the step operator.  Not reentrant: apply() uses
// internal scratch fields.
class StepSystem {
 public:
  StepSystem(const GridSpec& g, const ModelParams& mp, double dt);

  const DofLayout& layout() const { return lay_; }
  const GridSpec& grid() const { return g_; }
  const ModelParams& params() const { return mp_; }
  double dt() const { return dt_; }

  void set_coeffs(const FrozenCoeffs* c) { coeffs_ = c; }
  const FrozenCoeffs* coeffs() const { return coeffs_; }

  // y = A x
  void apply(const std::vector<double>& x, std::vector<double>& y) const;

  void assemble_rhs(const State& prev, const FrozenCoeffs& c,
                    std::vector<double>& g) const;

  // Scatter a solution vector into padded fields with the homogeneous wall
  // conditions applied (mirror ghosts for scalars, no-slip for velocities).
  void unpack(const std::vector<double>& x, CellField& mu1, CellField& mu2,
              XFaceField& u, YFaceField& v, CellField& q1, CellField& rho1,
              CellField& rho2) const;

 private:
  GridSpec g_;
  ModelParams mp_;
  double dt_ = 0.0;
  DofLayout lay_;
  const FrozenCoeffs* coeffs_ = nullptr;

  // scratch (mutable so apply() can stay const for the solver)
  mutable CellField mu1_, mu2_, q1_, r1_, r2_;
  mutable XFaceField u_, xa_, xb_, w_;
  mutable YFaceField v_, ya_, yb_, z_;
  mutable CellField ca_, cb_, d11_, d22_, lap1_, lap2_, lapmud_;
  mutable VertexField va_, vb2_, s1_, s2_;
};

// Unpacked half-step solution of one linear solve.
struct HalfStepFields {
  HalfStepFields() = default;
  explicit HalfStepFields(const GridSpec& g)
      : mu1(g), mu2(g), q1(g), rho1(g), rho2(g), u(g), v(g) {}
  CellField mu1, mu2, q1, rho1, rho2;
  XFaceField u;
  YFaceField v;
};

// Advance prev -> next using the solved half-step fields.  Velocities and q
// use 2 X - (.)^n; densities use the flux form of their equations.  Throws
// PositivityError (with the offending slot) if a recovered density falls
// below mp.rho_floor.
void recover_full_step(const State& prev, const HalfStepFields& h,
                       const FrozenCoeffs& c, const ModelParams& mp, double dt,
                       State& next);

namespace ref {

// Independently written serial reference of StepSystem::apply, used to
// cross-validate the production kernels and as the benchmark baseline.  Works
// straight from the primitive coefficient fields with inline stencils.
void apply_step_operator(const GridSpec& g, const ModelParams& mp, double dt,
                         const FrozenCoeffs& c, const std::vector<double>& x,
                         std::vector<double>& y);

}  // namespace ref

}  // namespace binmix
