#include "binmix/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "binmix/common.hpp"

namespace binmix {

// ===========================================================================
// Deterministic vector kernels
// ===========================================================================

namespace {

constexpr std::ptrdiff_t kChunk = 4096;

// Fixed-chunk dot product: partials are accumulated serially within each
// chunk and combined serially in chunk order, so the result is bitwise
// independent of the thread count.
double det_dot(const std::vector<double>& a, const std::vector<double>& b) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(a.size());
  if (n < 4 * kChunk) {
    double s = 0.0;
    for (std::ptrdiff_t k = 0; k < n; ++k) s += a[k] * b[k];
    return s;
  }
  const std::ptrdiff_t nchunks = (n + kChunk - 1) / kChunk;
  std::vector<double> partial(nchunks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < nchunks; ++c) {
    const std::ptrdiff_t lo = c * kChunk;
    const std::ptrdiff_t hi = std::min(lo + kChunk, n);
    double s = 0.0;
    for (std::ptrdiff_t k = lo; k < hi; ++k) s += a[k] * b[k];
    partial[c] = s;
  }
  double s = 0.0;
  for (double p : partial) s += p;
  return s;
}

double det_norm(const std::vector<double>& a) { return std::sqrt(det_dot(a, a)); }

// y += alpha x (elementwise, order independent)
void axpy(double alpha, const std::vector<double>& x, std::vector<double>& y) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
  const bool par = n >= 4 * kChunk;
#pragma omp parallel for schedule(static) if (par)
  for (std::ptrdiff_t k = 0; k < n; ++k) y[k] += alpha * x[k];
}

}  // namespace

// ===========================================================================
// GMRES
// ===========================================================================

SolveReport gmres(const ApplyFn& apply, const ApplyFn& precond,
                  const std::vector<double>& b, std::vector<double>& x,
                  const SolverConfig& cfg) {
  const std::size_t n = b.size();
  if (x.size() != n) x.assign(n, 0.0);

  SolveReport rep;
  rep.rhs_norm = det_norm(b);
  const double tol = std::max(cfg.rel_tol * rep.rhs_norm, cfg.abs_tol);

  std::vector<double> r(n), w(n), z(n);
  auto refresh_residual = [&]() {
    apply(x, w);
    const std::ptrdiff_t sn = static_cast<std::ptrdiff_t>(n);
    const bool par = sn >= 4 * kChunk;
#pragma omp parallel for schedule(static) if (par)
    for (std::ptrdiff_t k = 0; k < sn; ++k) r[k] = b[k] - w[k];
    return det_norm(r);
  };

  rep.residual = refresh_residual();
  if (rep.residual <= tol) {
    rep.converged = true;
    return rep;
  }

  const int m = std::max(1, cfg.restart);
  std::vector<std::vector<double>> V(m + 1, std::vector<double>(n, 0.0));
  std::vector<std::vector<double>> H(m + 1, std::vector<double>(m, 0.0));
  std::vector<double> cs(m, 0.0), snv(m, 0.0), s(m + 1, 0.0);

  while (rep.iterations < cfg.max_iters) {
    const double beta = det_norm(r);
    const double inv_beta = 1.0 / beta;
    for (std::size_t k = 0; k < n; ++k) V[0][k] = r[k] * inv_beta;
    std::fill(s.begin(), s.end(), 0.0);
    s[0] = beta;
    for (auto& row : H) std::fill(row.begin(), row.end(), 0.0);

    int j = 0;
    while (j < m && rep.iterations < cfg.max_iters) {
      const std::vector<double>* vin = &V[j];
      if (precond) {
        precond(V[j], z);
        vin = &z;
      }
      apply(*vin, w);
      ++rep.iterations;

      for (int i = 0; i <= j; ++i) {
        const double hij = det_dot(w, V[i]);
        H[i][j] = hij;
        axpy(-hij, V[i], w);
      }
      const double hnext = det_norm(w);
      H[j + 1][j] = hnext;
      if (hnext > 0.0) {
        const double inv = 1.0 / hnext;
        for (std::size_t k = 0; k < n; ++k) V[j + 1][k] = w[k] * inv;
      }

      for (int i = 0; i < j; ++i) {
        const double t = cs[i] * H[i][j] + snv[i] * H[i + 1][j];
        H[i + 1][j] = -snv[i] * H[i][j] + cs[i] * H[i + 1][j];
        H[i][j] = t;
      }
      const double denom = std::hypot(H[j][j], H[j + 1][j]);
      if (denom == 0.0) {
        cs[j] = 1.0;
        snv[j] = 0.0;
      } else {
        cs[j] = H[j][j] / denom;
        snv[j] = H[j + 1][j] / denom;
      }
      H[j][j] = denom;
      H[j + 1][j] = 0.0;
      s[j + 1] = -snv[j] * s[j];
      s[j] = cs[j] * s[j];
      ++j;
      if (std::fabs(s[j]) <= tol || hnext == 0.0) break;
    }

    // back substitution for the restart's update, then x += M^{-1} V y
    std::vector<double> y(j, 0.0);
    for (int i = j - 1; i >= 0; --i) {
      double t = s[i];
      for (int l = i + 1; l < j; ++l) t -= H[i][l] * y[l];
      y[i] = (H[i][i] != 0.0) ? t / H[i][i] : 0.0;
    }
    std::fill(w.begin(), w.end(), 0.0);
    for (int i = 0; i < j; ++i) axpy(y[i], V[i], w);
    if (precond) {
      precond(w, z);
      axpy(1.0, z, x);
    } else {
      axpy(1.0, w, x);
    }

    rep.residual = refresh_residual();
    if (rep.residual <= tol) {
      rep.converged = true;
      return rep;
    }
  }
  rep.converged = rep.residual <= tol;
  return rep;
}

// ===========================================================================
// Frozen preconditioner: sparse assembly of the constant-coefficient operator
// ===========================================================================

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Trip = Eigen::Triplet<double>;

// flattened padded-field index maps
struct PaddedIndex {
  int nx = 0, ny = 0;
  int cell(int i, int j) const { return j * (nx + 2) + i; }
  int xf(int i, int j) const { return j * (nx + 1) + i; }
  int yf(int i, int j) const { return j * (nx + 2) + i; }
  int vx(int i, int j) const { return j * (nx + 1) + i; }
  int n_cell_pad() const { return (nx + 2) * (ny + 2); }
  int n_xf_pad() const { return (nx + 1) * (ny + 2); }
  int n_yf_pad() const { return (nx + 2) * (ny + 1); }
  int n_vx_pad() const { return (nx + 1) * (ny + 1); }
};

SpMat from_trips(int rows, int cols, std::vector<Trip>& t) {
  SpMat msp(rows, cols);
  msp.setFromTriplets(t.begin(), t.end());
  return msp;
}

// unknown vector -> padded field, encoding the wall closures
SpMat embed_cell(const PaddedIndex& P, const DofLayout& L) {
  auto refl = [](int k, int n) { return k == 0 ? 1 : (k == n + 1 ? n : k); };
  std::vector<Trip> t;
  for (int j = 0; j <= P.ny + 1; ++j)
    for (int i = 0; i <= P.nx + 1; ++i)
      t.emplace_back(P.cell(i, j),
                     L.cell_index(refl(i, P.nx), refl(j, P.ny)), 1.0);
  return from_trips(P.n_cell_pad(), L.n_cell(), t);
}

SpMat embed_u(const PaddedIndex& P, const DofLayout& L) {
  std::vector<Trip> t;
  for (int j = 1; j <= P.ny; ++j)
    for (int i = 1; i <= P.nx - 1; ++i)
      t.emplace_back(P.xf(i, j), L.u_index(i, j), 1.0);
  for (int i = 1; i <= P.nx - 1; ++i) {
    t.emplace_back(P.xf(i, 0), L.u_index(i, 1), -1.0);
    t.emplace_back(P.xf(i, P.ny + 1), L.u_index(i, P.ny), -1.0);
  }
  return from_trips(P.n_xf_pad(), L.n_u(), t);
}

SpMat embed_v(const PaddedIndex& P, const DofLayout& L) {
  std::vector<Trip> t;
  for (int j = 1; j <= P.ny - 1; ++j)
    for (int i = 1; i <= P.nx; ++i)
      t.emplace_back(P.yf(i, j), L.v_index(i, j), 1.0);
  for (int j = 1; j <= P.ny - 1; ++j) {
    t.emplace_back(P.yf(0, j), L.v_index(1, j), -1.0);
    t.emplace_back(P.yf(P.nx + 1, j), L.v_index(P.nx, j), -1.0);
  }
  return from_trips(P.n_yf_pad(), L.n_v(), t);
}

// padded field -> unknown vector
SpMat restrict_cell(const PaddedIndex& P, const DofLayout& L) {
  std::vector<Trip> t;
  for (int j = 1; j <= P.ny; ++j)
    for (int i = 1; i <= P.nx; ++i)
      t.emplace_back(L.cell_index(i, j), P.cell(i, j), 1.0);
  return from_trips(L.n_cell(), P.n_cell_pad(), t);
}

SpMat restrict_u(const PaddedIndex& P, const DofLayout& L) {
  std::vector<Trip> t;
  for (int j = 1; j <= P.ny; ++j)
    for (int i = 1; i <= P.nx - 1; ++i)
      t.emplace_back(L.u_index(i, j), P.xf(i, j), 1.0);
  return from_trips(L.n_u(), P.n_xf_pad(), t);
}

SpMat restrict_v(const PaddedIndex& P, const DofLayout& L) {
  std::vector<Trip> t;
  for (int j = 1; j <= P.ny - 1; ++j)
    for (int i = 1; i <= P.nx; ++i)
      t.emplace_back(L.v_index(i, j), P.yf(i, j), 1.0);
  return from_trips(L.n_v(), P.n_yf_pad(), t);
}

// elementary difference operators on padded fields, with the same computable
// slots as the field kernels (rows outside them stay zero)
SpMat mat_face_diff_x(const PaddedIndex& P, double hx) {
  std::vector<Trip> t;
  for (int j = 0; j <= P.ny + 1; ++j)
    for (int i = 0; i <= P.nx; ++i) {
      t.emplace_back(P.xf(i, j), P.cell(i + 1, j), 1.0 / hx);
      t.emplace_back(P.xf(i, j), P.cell(i, j), -1.0 / hx);
    }
  return from_trips(P.n_xf_pad(), P.n_cell_pad(), t);
}

SpMat mat_face_diff_y(const PaddedIndex& P, double hy) {
  std::vector<Trip> t;
  for (int j = 0; j <= P.ny; ++j)
    for (int i = 0; i <= P.nx + 1; ++i) {
      t.emplace_back(P.yf(i, j), P.cell(i, j + 1), 1.0 / hy);
      t.emplace_back(P.yf(i, j), P.cell(i, j), -1.0 / hy);
    }
  return from_trips(P.n_yf_pad(), P.n_cell_pad(), t);
}

SpMat mat_cell_diff_x(const PaddedIndex& P, double hx) {
  std::vector<Trip> t;
  for (int j = 0; j <= P.ny + 1; ++j)
    for (int i = 1; i <= P.nx; ++i) {
      t.emplace_back(P.cell(i, j), P.xf(i, j), 1.0 / hx);
      t.emplace_back(P.cell(i, j), P.xf(i - 1, j), -1.0 / hx);
    }
  return from_trips(P.n_cell_pad(), P.n_xf_pad(), t);
}

SpMat mat_cell_diff_y(const PaddedIndex& P, double hy) {
  std::vector<Trip> t;
  for (int j = 1; j <= P.ny; ++j)
    for (int i = 0; i <= P.nx + 1; ++i) {
      t.emplace_back(P.cell(i, j), P.yf(i, j), 1.0 / hy);
      t.emplace_back(P.cell(i, j), P.yf(i, j - 1), -1.0 / hy);
    }
  return from_trips(P.n_cell_pad(), P.n_yf_pad(), t);
}

SpMat mat_vertex_diff_y(const PaddedIndex& P, double hy) {
  std::vector<Trip> t;
  for (int j = 0; j <= P.ny; ++j)
    for (int i = 0; i <= P.nx; ++i) {
      t.emplace_back(P.vx(i, j), P.xf(i, j + 1), 1.0 / hy);
      t.emplace_back(P.vx(i, j), P.xf(i, j), -1.0 / hy);
    }
  return from_trips(P.n_vx_pad(), P.n_xf_pad(), t);
}

SpMat mat_vertex_diff_x(const PaddedIndex& P, double hx) {
  std::vector<Trip> t;
  for (int j = 0; j <= P.ny; ++j)
    for (int i = 0; i <= P.nx; ++i) {
      t.emplace_back(P.vx(i, j), P.yf(i + 1, j), 1.0 / hx);
      t.emplace_back(P.vx(i, j), P.yf(i, j), -1.0 / hx);
    }
  return from_trips(P.n_vx_pad(), P.n_yf_pad(), t);
}

SpMat mat_face_diff_y_from_vertex(const PaddedIndex& P, double hy) {
  std::vector<Trip> t;
  for (int j = 1; j <= P.ny; ++j)
    for (int i = 0; i <= P.nx; ++i) {
      t.emplace_back(P.xf(i, j), P.vx(i, j), 1.0 / hy);
      t.emplace_back(P.xf(i, j), P.vx(i, j - 1), -1.0 / hy);
    }
  return from_trips(P.n_xf_pad(), P.n_vx_pad(), t);
}

SpMat mat_face_diff_x_from_vertex(const PaddedIndex& P, double hx) {
  std::vector<Trip> t;
  for (int j = 0; j <= P.ny; ++j)
    for (int i = 1; i <= P.nx; ++i) {
      t.emplace_back(P.yf(i, j), P.vx(i, j), 1.0 / hx);
      t.emplace_back(P.yf(i, j), P.vx(i - 1, j), -1.0 / hx);
    }
  return from_trips(P.n_yf_pad(), P.n_vx_pad(), t);
}

SpMat mat_laplacian(const PaddedIndex& P, double hx, double hy) {
  const double ax = 1.0 / (hx * hx), ay = 1.0 / (hy * hy);
  std::vector<Trip> t;
  for (int j = 1; j <= P.ny; ++j)
    for (int i = 1; i <= P.nx; ++i) {
      const int r = P.cell(i, j);
      t.emplace_back(r, P.cell(i + 1, j), ax);
      t.emplace_back(r, P.cell(i - 1, j), ax);
      t.emplace_back(r, P.cell(i, j + 1), ay);
      t.emplace_back(r, P.cell(i, j - 1), ay);
      t.emplace_back(r, P.cell(i, j), -2.0 * (ax + ay));
    }
  return from_trips(P.n_cell_pad(), P.n_cell_pad(), t);
}

SpMat identity(int n) {
  SpMat m(n, n);
  m.setIdentity();
  return m;
}

void add_block(std::vector<Trip>& trips, int ro, int co, const SpMat& m,
               double scale) {
  if (scale == 0.0) return;
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it)
      trips.emplace_back(ro + static_cast<int>(it.row()),
                         co + static_cast<int>(it.col()), scale * it.value());
}

}  // namespace

struct FrozenPreconditioner::Impl {
  Eigen::SparseLU<SpMat> lu;
  Means means;
  GridSpec g{};
  double dt = 0.0;
  bool ok = false;
};

FrozenPreconditioner::FrozenPreconditioner() : impl_(new Impl) {}
FrozenPreconditioner::~FrozenPreconditioner() = default;
FrozenPreconditioner::FrozenPreconditioner(FrozenPreconditioner&&) noexcept =
    default;
FrozenPreconditioner& FrozenPreconditioner::operator=(
    FrozenPreconditioner&&) noexcept = default;

FrozenPreconditioner::Means FrozenPreconditioner::coefficient_means(
    const FrozenCoeffs& c) {
  Means m;
  m.rho1 = mean_cell(c.rho1b);
  m.rho2 = mean_cell(c.rho2b);
  m.rbar = mean_cell(c.rbar);
  m.p1 = mean_cell(c.p1b);
  m.p2 = mean_cell(c.p2b);
  m.inv_re_s = mean_cell(c.inv_re_s);
  m.inv_re_v = mean_cell(c.inv_re_v);
  return m;
}

bool FrozenPreconditioner::built() const { return impl_->ok; }

bool FrozenPreconditioner::should_rebuild(const GridSpec& g, double dt,
                                          const Means& m, double drift) const {
  if (!impl_->ok) return true;
  if (!(impl_->g == g) || impl_->dt != dt) return true;
  const Means& b = impl_->means;
  auto moved = [&](double cur, double ref) {
    return std::fabs(cur - ref) > drift * std::max(std::fabs(ref), 1e-12);
  };
  return moved(m.rho1, b.rho1) || moved(m.rho2, b.rho2) ||
         moved(m.rbar, b.rbar) || moved(m.p1, b.p1) || moved(m.p2, b.p2) ||
         moved(m.inv_re_s, b.inv_re_s) || moved(m.inv_re_v, b.inv_re_v);
}

void FrozenPreconditioner::build(const GridSpec& g, const ModelParams& mp,
                                 double dt, const Means& m) {
  const PaddedIndex P{g.nx, g.ny};
  const DofLayout L{g.nx, g.ny};
  const double hx = g.hx(), hy = g.hy();
  const double r2dt = 2.0 / dt, r4dt = 4.0 / dt;
  const double k11 = mp.kappa[0], k12 = mp.kappa[1], k22 = mp.kappa[2];
  const double r0 = m.rbar;
  const double c1 = m.rho1 * r0, c2 = m.rho2 * r0;
  const double s0 = m.inv_re_s, sv0 = m.inv_re_v;

  const SpMat Ec = embed_cell(P, L), Eu = embed_u(P, L), Ev = embed_v(P, L);
  const SpMat Rc = restrict_cell(P, L), Ru = restrict_u(P, L),
              Rv = restrict_v(P, L);
  const SpMat Lc = Rc * mat_laplacian(P, hx, hy) * Ec;
  const SpMat Ic = identity(L.n_cell());

  std::vector<Trip> trips;

  // mass rows
  add_block(trips, L.mu1_off(), L.mu1_off(), Lc, -mp.m1);
  add_block(trips, L.mu1_off(), L.mu2_off(), Lc, mp.m1);
  add_block(trips, L.mu1_off(), L.rho1_off(), Ic, r2dt);
  add_block(trips, L.mu2_off(), L.mu1_off(), Lc, mp.m1);
  add_block(trips, L.mu2_off(), L.mu2_off(), Lc, -mp.m1);
  add_block(trips, L.mu2_off(), L.rho2_off(), Ic, r2dt);

  // momentum rows
  add_block(trips, L.u_off(), L.u_off(), identity(L.n_u()), r2dt);
  add_block(trips, L.v_off(), L.v_off(), identity(L.n_v()), r2dt);

  if (!mp.no_hydro) {
    const SpMat Dxc = mat_cell_diff_x(P, hx), Dyc = mat_cell_diff_y(P, hy);
    const SpMat Fdx = mat_face_diff_x(P, hx), Fdy = mat_face_diff_y(P, hy);
    const SpMat DyV = mat_vertex_diff_y(P, hy), DxV = mat_vertex_diff_x(P, hx);
    const SpMat FdyV = mat_face_diff_y_from_vertex(P, hy);
    const SpMat FdxV = mat_face_diff_x_from_vertex(P, hx);

    const SpMat Tu = Rc * (Dxc * Eu);  // transport divergence pieces
    const SpMat Tv = Rc * (Dyc * Ev);
    add_block(trips, L.mu1_off(), L.u_off(), Tu, c1);
    add_block(trips, L.mu1_off(), L.v_off(), Tv, c1);
    add_block(trips, L.mu2_off(), L.u_off(), Tu, c2);
    add_block(trips, L.mu2_off(), L.v_off(), Tv, c2);

    const SpMat DxDxu = Ru * (Fdx * (Dxc * Eu));
    const SpMat dyDyu = Ru * (FdyV * (DyV * Eu));
    const SpMat dyDxv = Ru * (FdyV * (DxV * Ev));
    const SpMat DxDyv = Ru * (Fdx * (Dyc * Ev));
    add_block(trips, L.u_off(), L.u_off(), DxDxu, -r0 * r0 * (2.0 * s0 + sv0));
    add_block(trips, L.u_off(), L.u_off(), dyDyu, -r0 * r0 * s0);
    add_block(trips, L.u_off(), L.v_off(), dyDxv, -r0 * r0 * s0);
    add_block(trips, L.u_off(), L.v_off(), DxDyv, -r0 * r0 * sv0);
    const SpMat Pu = Ru * (Fdx * Ec);
    add_block(trips, L.u_off(), L.mu1_off(), Pu, c1);
    add_block(trips, L.u_off(), L.mu2_off(), Pu, c2);

    const SpMat DyDyv = Rv * (Fdy * (Dyc * Ev));
    const SpMat dxDxv = Rv * (FdxV * (DxV * Ev));
    const SpMat dxDyu = Rv * (FdxV * (DyV * Eu));
    const SpMat DyDxu = Rv * (Fdy * (Dxc * Eu));
    add_block(trips, L.v_off(), L.v_off(), DyDyv, -r0 * r0 * (2.0 * s0 + sv0));
    add_block(trips, L.v_off(), L.v_off(), dxDxv, -r0 * r0 * s0);
    add_block(trips, L.v_off(), L.u_off(), dxDyu, -r0 * r0 * s0);
    add_block(trips, L.v_off(), L.u_off(), DyDxu, -r0 * r0 * sv0);
    const SpMat Pv = Rv * (Fdy * Ec);
    add_block(trips, L.v_off(), L.mu1_off(), Pv, c1);
    add_block(trips, L.v_off(), L.mu2_off(), Pv, c2);
  }

  // q row
  add_block(trips, L.q_off(), L.q_off(), Ic, r4dt);
  add_block(trips, L.q_off(), L.rho1_off(), Ic, -r4dt * m.p1);
  add_block(trips, L.q_off(), L.rho2_off(), Ic, -r4dt * m.p2);

  // potential-definition rows
  add_block(trips, L.rho1_off(), L.mu1_off(), Ic, -r2dt);
  add_block(trips, L.rho1_off(), L.q_off(), Ic, r4dt * m.p1);
  add_block(trips, L.rho1_off(), L.rho1_off(), Lc, -r2dt * k11);
  add_block(trips, L.rho1_off(), L.rho2_off(), Lc, -r2dt * k12);
  add_block(trips, L.rho2_off(), L.mu2_off(), Ic, -r2dt);
  add_block(trips, L.rho2_off(), L.q_off(), Ic, r4dt * m.p2);
  add_block(trips, L.rho2_off(), L.rho1_off(), Lc, -r2dt * k12);
  add_block(trips, L.rho2_off(), L.rho2_off(), Lc, -r2dt * k22);

  SpMat A(L.total(), L.total());
  A.setFromTriplets(trips.begin(), trips.end());
  A.makeCompressed();

  impl_->ok = false;
  impl_->lu.compute(A);
  if (impl_->lu.info() != Eigen::Success) {
    throw SolveError("preconditioner factorization failed");
  }
  impl_->means = m;
  impl_->g = g;
  impl_->dt = dt;
  impl_->ok = true;
}

void FrozenPreconditioner::apply(const std::vector<double>& x,
                                 std::vector<double>& y) const {
  if (!impl_->ok) throw SolveError("preconditioner applied before build");
  Eigen::Map<const Eigen::VectorXd> bx(x.data(),
                                       static_cast<Eigen::Index>(x.size()));
  Eigen::VectorXd sol = impl_->lu.solve(bx);
  if (impl_->lu.info() != Eigen::Success) {
    throw SolveError("preconditioner back substitution failed");
  }
  y.assign(sol.data(), sol.data() + sol.size());
}

}  // namespace binmix
