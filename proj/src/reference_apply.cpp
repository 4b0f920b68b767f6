#include <cstddef>
#include <vector>

#include "binmix/scheme.hpp"

// Plain-loop serial reference for the step operator.  Written independently
// of the production kernels: boundary closures are realized through index
// accessors on the flat unknown vector, and every face/vertex average of the
// frozen coefficients is recomputed inline from the primitive cell and face
// fields.  Used to cross-check StepSystem::apply and as the benchmark
// baseline.

namespace binmix::ref {

namespace {

// mirror a padded cell index with a single ghost layer into the interior
inline int reflect(int i, int n) { return i == 0 ? 1 : (i == n + 1 ? n : i); }

}  // namespace

void apply_step_operator(const GridSpec& g, const ModelParams& mp, double dt,
                         const FrozenCoeffs& c, const std::vector<double>& x,
                         std::vector<double>& y) {
  const int nx = g.nx, ny = g.ny;
  const double hx = g.hx(), hy = g.hy();
  DofLayout L{nx, ny};
  y.assign(static_cast<std::size_t>(L.total()), 0.0);

  const double r2dt = 2.0 / dt;
  const double r4dt = 4.0 / dt;
  const double m1 = mp.m1;
  const double k11 = mp.kappa[0], k12 = mp.kappa[1], k22 = mp.kappa[2];

  // ---- unknown-field accessors with wall closures --------------------------
  auto cell_at = [&](int off, int i, int j) {
    return x[off + L.cell_index(reflect(i, nx), reflect(j, ny))];
  };
  auto MU1 = [&](int i, int j) { return cell_at(L.mu1_off(), i, j); };
  auto MU2 = [&](int i, int j) { return cell_at(L.mu2_off(), i, j); };
  auto Q = [&](int i, int j) { return cell_at(L.q_off(), i, j); };
  auto RH1 = [&](int i, int j) { return cell_at(L.rho1_off(), i, j); };
  auto RH2 = [&](int i, int j) { return cell_at(L.rho2_off(), i, j); };

  auto u_in = [&](int i, int j) -> double {  // rows j = 1..ny
    if (i <= 0 || i >= nx) return 0.0;
    return x[L.u_off() + L.u_index(i, j)];
  };
  auto U = [&](int i, int j) -> double {
    if (j == 0) return -u_in(i, 1);
    if (j == ny + 1) return -u_in(i, ny);
    return u_in(i, j);
  };
  auto v_in = [&](int i, int j) -> double {  // columns i = 1..nx
    if (j <= 0 || j >= ny) return 0.0;
    return x[L.v_off() + L.v_index(i, j)];
  };
  auto V = [&](int i, int j) -> double {
    if (i == 0) return -v_in(1, j);
    if (i == nx + 1) return -v_in(nx, j);
    return v_in(i, j);
  };

  // ---- frozen-coefficient helpers (recomputed inline) ----------------------
  auto RB = [&](int i, int j) { return c.rbar(i, j); };
  auto c1x = [&](int i, int j) {  // x-face i between cells i, i+1
    return 0.5 * (c.rho1b(i, j) * RB(i, j) + c.rho1b(i + 1, j) * RB(i + 1, j));
  };
  auto c2x = [&](int i, int j) {
    return 0.5 * (c.rho2b(i, j) * RB(i, j) + c.rho2b(i + 1, j) * RB(i + 1, j));
  };
  auto c1y = [&](int i, int j) {  // y-face j between cells j, j+1
    return 0.5 * (c.rho1b(i, j) * RB(i, j) + c.rho1b(i, j + 1) * RB(i, j + 1));
  };
  auto c2y = [&](int i, int j) {
    return 0.5 * (c.rho2b(i, j) * RB(i, j) + c.rho2b(i, j + 1) * RB(i, j + 1));
  };
  auto axr = [&](int i, int j) { return 0.5 * (RB(i, j) + RB(i + 1, j)); };
  auto ayr = [&](int i, int j) { return 0.5 * (RB(i, j) + RB(i, j + 1)); };
  auto sv4 = [&](int i, int j) {  // vertex (i,j) average of 1/Re_s
    return 0.25 * (c.inv_re_s(i, j) + c.inv_re_s(i + 1, j) +
                   c.inv_re_s(i, j + 1) + c.inv_re_s(i + 1, j + 1));
  };
  auto axvb = [&](int i, int j) {  // vertex average of frozen v
    return 0.5 * (c.vb(i, j) + c.vb(i + 1, j));
  };
  auto ayub = [&](int i, int j) {  // vertex average of frozen u
    return 0.5 * (c.ub(i, j) + c.ub(i, j + 1));
  };

  auto w = [&](int i, int j) { return axr(i, j) * U(i, j); };
  auto z = [&](int i, int j) { return ayr(i, j) * V(i, j); };
  auto d11 = [&](int i, int j) { return (w(i, j) - w(i - 1, j)) / hx; };
  auto d22 = [&](int i, int j) { return (z(i, j) - z(i, j - 1)) / hy; };
  auto dyw = [&](int i, int j) { return (w(i, j + 1) - w(i, j)) / hy; };
  auto dxz = [&](int i, int j) { return (z(i + 1, j) - z(i, j)) / hx; };

  auto lap5 = [&](auto&& f, int i, int j) {
    return (f(i + 1, j) - 2.0 * f(i, j) + f(i - 1, j)) / (hx * hx) +
           (f(i, j + 1) - 2.0 * f(i, j) + f(i, j - 1)) / (hy * hy);
  };
  auto mud = [&](int i, int j) { return MU1(i, j) - MU2(i, j); };

  // ---- cell rows ------------------------------------------------------------
  for (int j = 1; j <= ny; ++j) {
    for (int i = 1; i <= nx; ++i) {
      const int k = L.cell_index(i, j);
      const double lm = lap5(mud, i, j);
      double t1 = 0.0, t2 = 0.0;
      if (!mp.no_hydro) {
        t1 = (c1x(i, j) * U(i, j) - c1x(i - 1, j) * U(i - 1, j)) / hx +
             (c1y(i, j) * V(i, j) - c1y(i, j - 1) * V(i, j - 1)) / hy;
        t2 = (c2x(i, j) * U(i, j) - c2x(i - 1, j) * U(i - 1, j)) / hx +
             (c2y(i, j) * V(i, j) - c2y(i, j - 1) * V(i, j - 1)) / hy;
      }
      y[L.mu1_off() + k] = r2dt * RH1(i, j) + t1 - m1 * lm;
      y[L.mu2_off() + k] = r2dt * RH2(i, j) + t2 + m1 * lm;

      y[L.q_off() + k] = r4dt * (Q(i, j) - c.p1b(i, j) * RH1(i, j) -
                                 c.p2b(i, j) * RH2(i, j));
      const double l1 = lap5(RH1, i, j);
      const double l2 = lap5(RH2, i, j);
      y[L.rho1_off() + k] = -r2dt * MU1(i, j) + r4dt * c.p1b(i, j) * Q(i, j) -
                            r2dt * (k11 * l1 + k12 * l2);
      y[L.rho2_off() + k] = -r2dt * MU2(i, j) + r4dt * c.p2b(i, j) * Q(i, j) -
                            r2dt * (k12 * l1 + k22 * l2);
    }
  }

  // ---- u momentum -----------------------------------------------------------
  for (int j = 1; j <= ny; ++j) {
    for (int i = 1; i <= nx - 1; ++i) {
      const int k = L.u_off() + L.u_index(i, j);
      if (mp.no_hydro) {
        y[k] = r2dt * U(i, j);
        continue;
      }
      // convection
      auto axu = [&](int ci, int cj) { return 0.5 * (U(ci - 1, cj) + U(ci, cj)); };
      const double cv1 =
          c.ub(i, j) *
          (RB(i + 1, j) * axu(i + 1, j) - RB(i, j) * axu(i, j)) / hx;
      auto tu = [&](int ci, int cj) {
        return (c.ub(ci, cj) * U(ci, cj) - c.ub(ci - 1, cj) * U(ci - 1, cj)) / hx;
      };
      const double cv2 = 0.5 * (RB(i, j) * tu(i, j) + RB(i + 1, j) * tu(i + 1, j));
      const double cv3 =
          0.5 * (axvb(i, j - 1) * dyw(i, j - 1) + axvb(i, j) * dyw(i, j));
      auto ayu = [&](int vi, int vj) { return 0.5 * (U(vi, vj) + U(vi, vj + 1)); };
      const double cv4 =
          axr(i, j) *
          (ayu(i, j) * axvb(i, j) - ayu(i, j - 1) * axvb(i, j - 1)) / hy;
      const double conv = 0.5 * (cv1 + cv2 + cv3 + cv4);

      // viscosity
      const double vA =
          2.0 * (c.inv_re_s(i + 1, j) * d11(i + 1, j) -
                 c.inv_re_s(i, j) * d11(i, j)) / hx;
      const double vB =
          (sv4(i, j) * dyw(i, j) - sv4(i, j - 1) * dyw(i, j - 1)) / hy;
      const double vC =
          (sv4(i, j) * dxz(i, j) - sv4(i, j - 1) * dxz(i, j - 1)) / hy;
      const double vD = (c.inv_re_v(i + 1, j) * (d11(i + 1, j) + d22(i + 1, j)) -
                         c.inv_re_v(i, j) * (d11(i, j) + d22(i, j))) / hx;
      const double visc = axr(i, j) * (vA + vB + vC + vD);

      const double press = c1x(i, j) * (MU1(i + 1, j) - MU1(i, j)) / hx +
                           c2x(i, j) * (MU2(i + 1, j) - MU2(i, j)) / hx;

      y[k] = r2dt * U(i, j) + conv - visc + press;
    }
  }

  // ---- v momentum -----------------------------------------------------------
  for (int j = 1; j <= ny - 1; ++j) {
    for (int i = 1; i <= nx; ++i) {
      const int k = L.v_off() + L.v_index(i, j);
      if (mp.no_hydro) {
        y[k] = r2dt * V(i, j);
        continue;
      }
      const double cv1 =
          0.5 * (ayub(i - 1, j) * dxz(i - 1, j) + ayub(i, j) * dxz(i, j));
      auto axv = [&](int vi, int vj) { return 0.5 * (V(vi, vj) + V(vi + 1, vj)); };
      const double cv2 =
          ayr(i, j) *
          (ayub(i, j) * axv(i, j) - ayub(i - 1, j) * axv(i - 1, j)) / hx;
      auto ayv = [&](int ci, int cj) { return 0.5 * (V(ci, cj - 1) + V(ci, cj)); };
      const double cv3 =
          c.vb(i, j) *
          (RB(i, j + 1) * ayv(i, j + 1) - RB(i, j) * ayv(i, j)) / hy;
      auto tv = [&](int ci, int cj) {
        return (c.vb(ci, cj) * V(ci, cj) - c.vb(ci, cj - 1) * V(ci, cj - 1)) / hy;
      };
      const double cv4 = 0.5 * (RB(i, j) * tv(i, j) + RB(i, j + 1) * tv(i, j + 1));
      const double conv = 0.5 * (cv1 + cv2 + cv3 + cv4);

      const double vA =
          2.0 * (c.inv_re_s(i, j + 1) * d22(i, j + 1) -
                 c.inv_re_s(i, j) * d22(i, j)) / hy;
      const double vB =
          (sv4(i, j) * dxz(i, j) - sv4(i - 1, j) * dxz(i - 1, j)) / hx;
      const double vC =
          (sv4(i, j) * dyw(i, j) - sv4(i - 1, j) * dyw(i - 1, j)) / hx;
      const double vD = (c.inv_re_v(i, j + 1) * (d11(i, j + 1) + d22(i, j + 1)) -
                         c.inv_re_v(i, j) * (d11(i, j) + d22(i, j))) / hy;
      const double visc = ayr(i, j) * (vA + vB + vC + vD);

      const double press = c1y(i, j) * (MU1(i, j + 1) - MU1(i, j)) / hy +
                           c2y(i, j) * (MU2(i, j + 1) - MU2(i, j)) / hy;

      y[k] = r2dt * V(i, j) + conv - visc + press;
    }
  }
}

}  // namespace binmix::ref
