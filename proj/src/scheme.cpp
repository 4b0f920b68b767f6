#include "binmix/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "binmix/common.hpp"

namespace binmix {

namespace {

constexpr std::size_t kParallelThreshold = std::size_t{1} << 14;

bool parallel_worthwhile(std::size_t n) { return n >= kParallelThreshold; }

// out = a*x + b*y over the full padded extent (same-type fields)
template <typename Field>
void lincomb(double a, const Field& x, double b, const Field& y, Field& out) {
  const std::size_t n = out.raw().size();
  const double* xr = x.raw().data();
  const double* yr = y.raw().data();
  double* o = out.raw().data();
  const bool par = parallel_worthwhile(n);
#pragma omp parallel for schedule(static) if (par)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(n); ++k) {
    o[k] = a * xr[k] + b * yr[k];
  }
}

template <typename Field>
void add_into(Field& acc, const Field& inc) {
  const std::size_t n = acc.raw().size();
  double* a = acc.raw().data();
  const double* b = inc.raw().data();
  const bool par = parallel_worthwhile(n);
#pragma omp parallel for schedule(static) if (par)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(n); ++k) {
    a[k] += b[k];
  }
}

}  // namespace

// ===========================================================================
// Frozen coefficients
// ===========================================================================

FrozenCoeffs::FrozenCoeffs(const GridSpec& g)
    : rho1b(g), rho2b(g), rbar(g), p1b(g), p2b(g), inv_re_s(g), inv_re_v(g),
      ub(g), vb(g), ax_c1(g), ax_c2(g), ax_r(g), ay_c1(g), ay_c2(g), ay_r(g),
      s_vx(g), ax_vb(g), ay_ub(g) {}

void FrozenCoeffs::refresh_derived() {
  const GridSpec& g = rbar.grid();
  CellField prod(g);
  YFaceField ytmp(g);

  multiply(rho1b, rbar, prod);
  face_avg_x(prod, ax_c1);
  face_avg_y(prod, ay_c1);
  multiply(rho2b, rbar, prod);
  face_avg_x(prod, ax_c2);
  face_avg_y(prod, ay_c2);

  face_avg_x(rbar, ax_r);
  face_avg_y(rbar, ay_r);

  face_avg_y(inv_re_s, ytmp);
  vertex_avg_x(ytmp, s_vx);

  vertex_avg_x(vb, ax_vb);
  vertex_avg_y(ub, ay_ub);
}

void extrapolate_coeffs(const State& sn, const State& snm1,
                        const EnergyModel& model, const ModelParams& mp,
                        bool first_order, FrozenCoeffs& out) {
  const GridSpec& g = sn.rho1.grid();
  if (!(out.rbar.grid() == g)) out = FrozenCoeffs(g);

  const double cn = first_order ? 1.0 : 1.5;
  const double cm = first_order ? 0.0 : -0.5;

  lincomb(cn, sn.rho1, cm, snm1.rho1, out.rho1b);
  lincomb(cn, sn.rho2, cm, snm1.rho2, out.rho2b);
  lincomb(cn, sn.u, cm, snm1.u, out.ub);
  lincomb(cn, sn.v, cm, snm1.v, out.vb);

  // 1/sqrt(rho) and the mass-fraction-weighted inverse Reynolds fields are
  // formed pointwise at both time levels, then extrapolated.
  {
    const std::size_t n = out.rbar.raw().size();
    const double* r1n = sn.rho1.raw().data();
    const double* r2n = sn.rho2.raw().data();
    const double* r1m = snm1.rho1.raw().data();
    const double* r2m = snm1.rho2.raw().data();
    double* rb = out.rbar.raw().data();
    double* ss = out.inv_re_s.raw().data();
    double* sv = out.inv_re_v.raw().data();
    for (std::size_t k = 0; k < n; ++k) {
      const double totn = r1n[k] + r2n[k];
      const double totm = r1m[k] + r2m[k];
      if (!(totn > 0.0) || !(totm > 0.0)) {
        PositivityError e("total density lost positivity while freezing step "
                          "coefficients");
        const int w = out.rbar.width();
        e.cell_i = static_cast<int>(k % static_cast<std::size_t>(w));
        e.cell_j = static_cast<int>(k / static_cast<std::size_t>(w));
        e.offending_value = std::min(totn, totm);
        throw e;
      }
      rb[k] = cn / std::sqrt(totn) + cm / std::sqrt(totm);
      const double f1 = cn * (r1n[k] / totn) + cm * (r1m[k] / totm);
      const double f2 = cn * (r2n[k] / totn) + cm * (r2m[k] / totm);
      ss[k] = f1 / mp.re_s1 + f2 / mp.re_s2;
      sv[k] = f1 / mp.re_v1 + f2 / mp.re_v2;
    }
  }

  // slopes dq/drho_i of the quadratized energy at both levels
  {
    CellField p1n(g), p2n(g), p1m(g), p2m(g);
    eq_slopes(model, sn.rho1, sn.rho2, p1n, p2n);
    eq_slopes(model, snm1.rho1, snm1.rho2, p1m, p2m);
    lincomb(cn, p1n, cm, p1m, out.p1b);
    lincomb(cn, p2n, cm, p2m, out.p2b);
  }

  out.refresh_derived();
}

// ===========================================================================
// StepSystem
// ===========================================================================

StepSystem::StepSystem(const GridSpec& g, const ModelParams& mp, double dt)
    : g_(g), mp_(mp), dt_(dt), lay_{g.nx, g.ny},
      mu1_(g), mu2_(g), q1_(g), r1_(g), r2_(g),
      u_(g), xa_(g), xb_(g), w_(g),
      v_(g), ya_(g), yb_(g), z_(g),
      ca_(g), cb_(g), d11_(g), d22_(g), lap1_(g), lap2_(g), lapmud_(g),
      va_(g), vb2_(g), s1_(g), s2_(g) {
  if (g.nx < 2 || g.ny < 2) {
    throw ConfigError("step operator needs at least a 2x2 grid");
  }
  if (dt <= 0.0) throw ConfigError("time step must be positive");
}

void StepSystem::unpack(const std::vector<double>& x, CellField& mu1,
                        CellField& mu2, XFaceField& u, YFaceField& v,
                        CellField& q1, CellField& rho1, CellField& rho2) const {
  const int nx = g_.nx, ny = g_.ny;
  const DofLayout& L = lay_;

  auto scatter_cell = [&](int off, CellField& f) {
    f.zero();
    const bool par = parallel_worthwhile(static_cast<std::size_t>(nx) * ny);
#pragma omp parallel for schedule(static) if (par)
    for (int j = 1; j <= ny; ++j) {
      for (int i = 1; i <= nx; ++i) f(i, j) = x[off + L.cell_index(i, j)];
    }
    apply_scalar_bc(f);
  };
  scatter_cell(L.mu1_off(), mu1);
  scatter_cell(L.mu2_off(), mu2);
  scatter_cell(L.q_off(), q1);
  scatter_cell(L.rho1_off(), rho1);
  scatter_cell(L.rho2_off(), rho2);

  u.zero();
  {
    const bool par = parallel_worthwhile(static_cast<std::size_t>(nx) * ny);
#pragma omp parallel for schedule(static) if (par)
    for (int j = 1; j <= ny; ++j) {
      for (int i = 1; i <= nx - 1; ++i) {
        u(i, j) = x[L.u_off() + L.u_index(i, j)];
      }
    }
  }
  apply_no_slip(u);

  v.zero();
  {
    const bool par = parallel_worthwhile(static_cast<std::size_t>(nx) * ny);
#pragma omp parallel for schedule(static) if (par)
    for (int j = 1; j <= ny - 1; ++j) {
      for (int i = 1; i <= nx; ++i) {
        v(i, j) = x[L.v_off() + L.v_index(i, j)];
      }
    }
  }
  apply_no_slip(v);
}

void StepSystem::apply(const std::vector<double>& x,
                       std::vector<double>& y) const {
  if (coeffs_ == nullptr) {
    throw SolveError("step operator applied without frozen coefficients");
  }
  const FrozenCoeffs& c = *coeffs_;
  const int nx = g_.nx, ny = g_.ny;
  const DofLayout& L = lay_;
  const double r2dt = 2.0 / dt_;
  const double r4dt = 4.0 / dt_;
  const double m1 = mp_.m1;
  const double k11 = mp_.kappa[0], k12 = mp_.kappa[1], k22 = mp_.kappa[2];

  y.assign(static_cast<std::size_t>(L.total()), 0.0);
  unpack(x, mu1_, mu2_, u_, v_, q1_, r1_, r2_);

  // Laplacians shared by the mass and potential rows.
  lincomb(1.0, mu1_, -1.0, mu2_, cb_);
  laplacian(cb_, lapmud_);
  laplacian(r1_, lap1_);
  laplacian(r2_, lap2_);

  const bool parc = parallel_worthwhile(static_cast<std::size_t>(nx) * ny);

  // Row blocks are arranged so that pairing y with x block by block gives the
  // dissipative quadratic form: the mass rows land in the mu slots, the
  // potential-definition rows in the rho slots.

  // --- q and potential-definition rows (pointwise) -------------------------
#pragma omp parallel for schedule(static) if (parc)
  for (int j = 1; j <= ny; ++j) {
    for (int i = 1; i <= nx; ++i) {
      const int k = L.cell_index(i, j);
      y[L.q_off() + k] =
          r4dt * (q1_(i, j) - c.p1b(i, j) * r1_(i, j) - c.p2b(i, j) * r2_(i, j));
      y[L.rho1_off() + k] = -r2dt * mu1_(i, j) + r4dt * c.p1b(i, j) * q1_(i, j) -
                            r2dt * (k11 * lap1_(i, j) + k12 * lap2_(i, j));
      y[L.rho2_off() + k] = -r2dt * mu2_(i, j) + r4dt * c.p2b(i, j) * q1_(i, j) -
                            r2dt * (k12 * lap1_(i, j) + k22 * lap2_(i, j));
    }
  }

  // --- mass rows ------------------------------------------------------------
  if (!mp_.no_hydro) {
    multiply(c.ax_c1, u_, xa_);
    cell_diff_x(xa_, ca_);
    multiply(c.ay_c1, v_, ya_);
    cell_diff_y(ya_, cb_);
#pragma omp parallel for schedule(static) if (parc)
    for (int j = 1; j <= ny; ++j) {
      for (int i = 1; i <= nx; ++i) {
        y[L.mu1_off() + L.cell_index(i, j)] =
            r2dt * r1_(i, j) + ca_(i, j) + cb_(i, j) - m1 * lapmud_(i, j);
      }
    }
    multiply(c.ax_c2, u_, xa_);
    cell_diff_x(xa_, ca_);
    multiply(c.ay_c2, v_, ya_);
    cell_diff_y(ya_, cb_);
#pragma omp parallel for schedule(static) if (parc)
    for (int j = 1; j <= ny; ++j) {
      for (int i = 1; i <= nx; ++i) {
        y[L.mu2_off() + L.cell_index(i, j)] =
            r2dt * r2_(i, j) + ca_(i, j) + cb_(i, j) + m1 * lapmud_(i, j);
      }
    }
  } else {
#pragma omp parallel for schedule(static) if (parc)
    for (int j = 1; j <= ny; ++j) {
      for (int i = 1; i <= nx; ++i) {
        const int k = L.cell_index(i, j);
        y[L.mu1_off() + k] = r2dt * r1_(i, j) - m1 * lapmud_(i, j);
        y[L.mu2_off() + k] = r2dt * r2_(i, j) + m1 * lapmud_(i, j);
      }
    }
  }

  // --- momentum rows ----------------------------------------------------------
  if (mp_.no_hydro) {
#pragma omp parallel for schedule(static) if (parc)
    for (int j = 1; j <= ny; ++j) {
      for (int i = 1; i <= nx - 1; ++i) {
        y[L.u_off() + L.u_index(i, j)] = r2dt * u_(i, j);
      }
    }
#pragma omp parallel for schedule(static) if (parc)
    for (int j = 1; j <= ny - 1; ++j) {
      for (int i = 1; i <= nx; ++i) {
        y[L.v_off() + L.v_index(i, j)] = r2dt * v_(i, j);
      }
    }
    return;
  }

  // shared strain-like intermediates
  multiply(c.ax_r, u_, w_);   // A_x(rbar) u
  multiply(c.ay_r, v_, z_);   // A_y(rbar) v
  cell_diff_x(w_, d11_);
  cell_diff_y(z_, d22_);
  vertex_diff_y(w_, s1_);     // D_y(A_x(rbar) u)
  vertex_diff_x(z_, s2_);     // D_x(A_y(rbar) v)

  // u momentum: convection (sum of four, halved at the end) in xa_
  cell_avg_x(u_, ca_);
  multiply(c.rbar, ca_, ca_);
  face_diff_x(ca_, xb_);
  multiply(c.ub, xb_, xa_);

  multiply(c.ub, u_, xb_);
  cell_diff_x(xb_, ca_);
  multiply(c.rbar, ca_, ca_);
  face_avg_x(ca_, xb_);
  add_into(xa_, xb_);

  multiply(c.ax_vb, s1_, va_);
  face_avg_y(va_, xb_);
  add_into(xa_, xb_);

  vertex_avg_y(u_, va_);
  multiply(c.ax_vb, va_, va_);
  face_diff_y(va_, xb_);
  multiply(c.ax_r, xb_, xb_);
  add_into(xa_, xb_);

  // u viscosity in w_ (w_ free now)
  multiply(c.inv_re_s, d11_, ca_);
  face_diff_x(ca_, xb_);
  lincomb(2.0, xb_, 0.0, xb_, w_);
  multiply(c.s_vx, s1_, va_);
  face_diff_y(va_, xb_);
  add_into(w_, xb_);
  multiply(c.s_vx, s2_, va_);
  face_diff_y(va_, xb_);
  add_into(w_, xb_);
  lincomb(1.0, d11_, 1.0, d22_, ca_);
  multiply(c.inv_re_v, ca_, ca_);
  face_diff_x(ca_, xb_);
  add_into(w_, xb_);
  multiply(c.ax_r, w_, w_);

  // combine with the pressure gradient and pack
  face_diff_x(mu1_, xb_);
  {
    const bool par = parallel_worthwhile(static_cast<std::size_t>(nx) * ny);
#pragma omp parallel for schedule(static) if (par)
    for (int j = 1; j <= ny; ++j) {
      for (int i = 1; i <= nx - 1; ++i) {
        xa_(i, j) = r2dt * u_(i, j) + 0.5 * xa_(i, j) - w_(i, j) +
                    c.ax_c1(i, j) * xb_(i, j);
      }
    }
  }
  face_diff_x(mu2_, xb_);
  {
    const bool par = parallel_worthwhile(static_cast<std::size_t>(nx) * ny);
#pragma omp parallel for schedule(static) if (par)
    for (int j = 1; j <= ny; ++j) {
      for (int i = 1; i <= nx - 1; ++i) {
        y[L.u_off() + L.u_index(i, j)] =
            xa_(i, j) + c.ax_c2(i, j) * xb_(i, j);
      }
    }
  }

  // v momentum: convection in ya_
  multiply(c.ay_ub, s2_, va_);
  face_avg_x(va_, ya_);

  vertex_avg_x(v_, va_);
  multiply(c.ay_ub, va_, va_);
  face_diff_x(va_, yb_);
  multiply(c.ay_r, yb_, yb_);
  add_into(ya_, yb_);

  cell_avg_y(v_, ca_);
  multiply(c.rbar, ca_, ca_);
  face_diff_y(ca_, yb_);
  multiply(c.vb, yb_, yb_);
  add_into(ya_, yb_);

  multiply(c.vb, v_, yb_);
  cell_diff_y(yb_, ca_);
  multiply(c.rbar, ca_, ca_);
  face_avg_y(ca_, yb_);
  add_into(ya_, yb_);

  // v viscosity in z_ (z_ free now)
  multiply(c.inv_re_s, d22_, ca_);
  face_diff_y(ca_, yb_);
  lincomb(2.0, yb_, 0.0, yb_, z_);
  multiply(c.s_vx, s2_, va_);
  face_diff_x(va_, yb_);
  add_into(z_, yb_);
  multiply(c.s_vx, s1_, va_);
  face_diff_x(va_, yb_);
  add_into(z_, yb_);
  lincomb(1.0, d11_, 1.0, d22_, ca_);
  multiply(c.inv_re_v, ca_, ca_);
  face_diff_y(ca_, yb_);
  add_into(z_, yb_);
  multiply(c.ay_r, z_, z_);

  face_diff_y(mu1_, yb_);
  {
    const bool par = parallel_worthwhile(static_cast<std::size_t>(nx) * ny);
#pragma omp parallel for schedule(static) if (par)
    for (int j = 1; j <= ny - 1; ++j) {
      for (int i = 1; i <= nx; ++i) {
        ya_(i, j) = r2dt * v_(i, j) + 0.5 * ya_(i, j) - z_(i, j) +
                    c.ay_c1(i, j) * yb_(i, j);
      }
    }
  }
  face_diff_y(mu2_, yb_);
  {
    const bool par = parallel_worthwhile(static_cast<std::size_t>(nx) * ny);
#pragma omp parallel for schedule(static) if (par)
    for (int j = 1; j <= ny - 1; ++j) {
      for (int i = 1; i <= nx; ++i) {
        y[L.v_off() + L.v_index(i, j)] =
            ya_(i, j) + c.ay_c2(i, j) * yb_(i, j);
      }
    }
  }
}

void StepSystem::assemble_rhs(const State& prev, const FrozenCoeffs& c,
                              std::vector<double>& g) const {
  const int nx = g_.nx, ny = g_.ny;
  const DofLayout& L = lay_;
  const double r2dt = 2.0 / dt_;
  const double r4dt = 4.0 / dt_;

  g.assign(static_cast<std::size_t>(L.total()), 0.0);
  for (int j = 1; j <= ny; ++j) {
    for (int i = 1; i <= nx; ++i) {
      const int k = L.cell_index(i, j);
      g[L.mu1_off() + k] = r2dt * prev.rho1(i, j);
      g[L.mu2_off() + k] = r2dt * prev.rho2(i, j);
      g[L.q_off() + k] = r4dt * (prev.q1(i, j) - c.p1b(i, j) * prev.rho1(i, j) -
                                 c.p2b(i, j) * prev.rho2(i, j));
    }
  }
  for (int j = 1; j <= ny; ++j) {
    for (int i = 1; i <= nx - 1; ++i) {
      g[L.u_off() + L.u_index(i, j)] = r2dt * prev.u(i, j);
    }
  }
  for (int j = 1; j <= ny - 1; ++j) {
    for (int i = 1; i <= nx; ++i) {
      g[L.v_off() + L.v_index(i, j)] = r2dt * prev.v(i, j);
    }
  }
}

// ===========================================================================
// Full-step recovery
// ===========================================================================

void recover_full_step(const State& prev, const HalfStepFields& h,
                       const FrozenCoeffs& c, const ModelParams& mp, double dt,
                       State& next) {
  const GridSpec& g = prev.rho1.grid();
  if (!(next.rho1.grid() == g)) next = State(g);
  const int nx = g.nx, ny = g.ny;

  lincomb(2.0, h.u, -1.0, prev.u, next.u);
  apply_no_slip(next.u);
  lincomb(2.0, h.v, -1.0, prev.v, next.v);
  apply_no_slip(next.v);
  lincomb(2.0, h.q1, -1.0, prev.q1, next.q1);
  apply_scalar_bc(next.q1);

  // densities advance in flux form so total masses telescope
  CellField mud(g), lapm(g), div(g), tmp(g);
  XFaceField fx(g);
  YFaceField fy(g);
  lincomb(1.0, h.mu1, -1.0, h.mu2, mud);
  laplacian(mud, lapm);

  auto advance = [&](const CellField& rprev, const XFaceField& axc,
                     const YFaceField& ayc, double mix_sign, CellField& rnext) {
    if (!mp.no_hydro) {
      multiply(axc, h.u, fx);
      cell_diff_x(fx, div);
      multiply(ayc, h.v, fy);
      cell_diff_y(fy, tmp);
      add_into(div, tmp);
    } else {
      div.zero();
    }
    for (int j = 1; j <= ny; ++j) {
      for (int i = 1; i <= nx; ++i) {
        rnext(i, j) = rprev(i, j) +
                      dt * (-div(i, j) + mix_sign * mp.m1 * lapm(i, j));
      }
    }
    apply_scalar_bc(rnext);
  };
  advance(prev.rho1, c.ax_c1, c.ay_c1, +1.0, next.rho1);
  advance(prev.rho2, c.ax_c2, c.ay_c2, -1.0, next.rho2);

  for (int j = 1; j <= ny; ++j) {
    for (int i = 1; i <= nx; ++i) {
      if (next.rho1(i, j) < mp.rho_floor || next.rho2(i, j) < mp.rho_floor) {
        PositivityError e("recovered density fell below the positivity floor");
        e.cell_i = i;
        e.cell_j = j;
        e.offending_value = std::min(next.rho1(i, j), next.rho2(i, j));
        throw e;
      }
    }
  }

  next.t = prev.t + dt;
  next.step = prev.step + 1;
}

}  // namespace binmix
