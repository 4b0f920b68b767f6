#include "binmix/grid.hpp"

#include <cassert>
#include <cmath>

namespace binmix {

namespace {

// Below this size the fork/join overhead outweighs the loop work.
constexpr std::size_t kParallelThreshold = std::size_t{1} << 14;

template <class F>
bool parallel_worthwhile(const F& f) {
  return f.raw().size() >= kParallelThreshold;
}

}  // namespace

// ======================================================================
// cell -> face
// ======================================================================

void face_avg_x(const CellField& c, XFaceField& out) {
  assert(c.grid() == out.grid());
  const int nx = c.grid().nx, ny = c.grid().ny;
  const bool par = parallel_worthwhile(out);
#pragma omp parallel for schedule(static) if (par)
  for (int j = 0; j <= ny + 1; ++j)
    for (int i = 0; i <= nx; ++i)
      out(i, j) = 0.5 * (c(i, j) + c(i + 1, j));
}

void face_diff_x(const CellField& c, XFaceField& out) {
  assert(c.grid() == out.grid());
  const int nx = c.grid().nx, ny = c.grid().ny;
  const double ihx = 1.0 / c.grid().hx();
  const bool par = parallel_worthwhile(out);
#pragma omp parallel for schedule(static) if (par)
  for (int j = 0; j <= ny + 1; ++j)
    for (int i = 0; i <= nx; ++i)
      out(i, j) = (c(i + 1, j) - c(i, j)) * ihx;
}

void face_avg_y(const CellField& c, YFaceField& out) {
  assert(c.grid() == out.grid());
  const int nx = c.grid().nx, ny = c.grid().ny;
  const bool par = parallel_worthwhile(out);
#pragma omp parallel for schedule(static) if (par)
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx + 1; ++i)
      out(i, j) = 0.5 * (c(i, j) + c(i, j + 1));
}

void face_diff_y(const CellField& c, YFaceField& out) {
  assert(c.grid() == out.grid());
  const int nx = c.grid().nx, ny = c.grid().ny;
  const double ihy = 1.0 / c.grid().hy();
  const bool par = parallel_worthwhile(out);
#pragma omp parallel for schedule(static) if (par)
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx + 1; ++i)
      out(i, j) = (c(i, j + 1) - c(i, j)) * ihy;
}

// ======================================================================
// face -> cell
// ======================================================================

void cell_avg_x(const XFaceField& u, CellField& out) {
  assert(u.grid() == out.grid());
  const int nx = u.grid().nx, ny = u.grid().ny;
  const bool par = parallel_worthwhile(out);
#pragma omp parallel for schedule(static) if (par)
  for (int j = 0; j <= ny + 1; ++j) {
    out(0, j) = 0.0;
    for (int i = 1; i <= nx; ++i)
      out(i, j) = 0.5 * (u(i - 1, j) + u(i, j));
    out(nx + 1, j) = 0.0;
  }
}

void cell_diff_x(const XFaceField& u, CellField& out) {
  assert(u.grid() == out.grid());
  const int nx = u.grid().nx, ny = u.grid().ny;
  const double ihx = 1.0 / u.grid().hx();
  const bool par = parallel_worthwhile(out);
#pragma omp parallel for schedule(static) if (par)
  for (int j = 0; j <= ny + 1; ++j) {
    out(0, j) = 0.0;
    for (int i = 1; i <= nx; ++i)
      out(i, j) = (u(i, j) - u(i - 1, j)) * ihx;
    out(nx + 1, j) = 0.0;
  }
}

void cell_avg_y(const YFaceField& v, CellField& out) {
  assert(v.grid() == out.grid());
  const int nx = v.grid().nx, ny = v.grid().ny;
  const bool par = parallel_worthwhile(out);
#pragma omp parallel for schedule(static) if (par)
  for (int j = 0; j <= ny + 1; ++j) {
    if (j == 0 || j == ny + 1) {
      for (int i = 0; i <= nx + 1; ++i) out(i, j) = 0.0;
    } else {
      for (int i = 0; i <= nx + 1; ++i)
        out(i, j) = 0.5 * (v(i, j - 1) + v(i, j));
    }
  }
}

void cell_diff_y(const YFaceField& v, CellField& out) {
  assert(v.grid() == out.grid());
  const int nx = v.grid().nx, ny = v.grid().ny;
  const double ihy = 1.0 / v.grid().hy();
  const bool par = parallel_worthwhile(out);
#pragma omp parallel for schedule(static) if (par)
  for (int j = 0; j <= ny + 1; ++j) {
    if (j == 0 || j == ny + 1) {
      for (int i = 0; i <= nx + 1; ++i) out(i, j) = 0.0;
    } else {
      for (int i = 0; i <= nx + 1; ++i)
        out(i, j) = (v(i, j) - v(i, j - 1)) * ihy;
    }
  }
}

// ======================================================================
// face -> vertex
// ======================================================================

void vertex_avg_y(const XFaceField& u, VertexField& out) {
  assert(u.grid() == out.grid());
  const int nx = u.grid().nx, ny = u.grid().ny;
  const bool par = parallel_worthwhile(out);
#pragma omp parallel for schedule(static) if (par)
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      out(i, j) = 0.5 * (u(i, j) + u(i, j + 1));
}

void vertex_diff_y(const XFaceField& u, VertexField& out) {
  assert(u.grid() == out.grid());
  const int nx = u.grid().nx, ny = u.grid().ny;
  const double ihy = 1.0 / u.grid().hy();
  const bool par = parallel_worthwhile(out);
#pragma omp parallel for schedule(static) if (par)
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      out(i, j) = (u(i, j + 1) - u(i, j)) * ihy;
}

void vertex_avg_x(const YFaceField& v, VertexField& out) {
  assert(v.grid() == out.grid());
  const int nx = v.grid().nx, ny = v.grid().ny;
  const bool par = parallel_worthwhile(out);
#pragma omp parallel for schedule(static) if (par)
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      out(i, j) = 0.5 * (v(i, j) + v(i + 1, j));
}

void vertex_diff_x(const YFaceField& v, VertexField& out) {
  assert(v.grid() == out.grid());
  const int nx = v.grid().nx, ny = v.grid().ny;
  const double ihx = 1.0 / v.grid().hx();
  const bool par = parallel_worthwhile(out);
#pragma omp parallel for schedule(static) if (par)
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      out(i, j) = (v(i + 1, j) - v(i, j)) * ihx;
}

// ======================================================================
// vertex -> face
// ======================================================================

void face_avg_y(const VertexField& f, XFaceField& out) {
  assert(f.grid() == out.grid());
  const int nx = f.grid().nx, ny = f.grid().ny;
  const bool par = parallel_worthwhile(out);
#pragma omp parallel for schedule(static) if (par)
  for (int j = 0; j <= ny + 1; ++j) {
    if (j == 0 || j == ny + 1) {
      for (int i = 0; i <= nx; ++i) out(i, j) = 0.0;
    } else {
      for (int i = 0; i <= nx; ++i)
        out(i, j) = 0.5 * (f(i, j - 1) + f(i, j));
    }
  }
}

void face_diff_y(const VertexField& f, XFaceField& out) {
  assert(f.grid() == out.grid());
  const int nx = f.grid().nx, ny = f.grid().ny;
  const double ihy = 1.0 / f.grid().hy();
  const bool par = parallel_worthwhile(out);
#pragma omp parallel for schedule(static) if (par)
  for (int j = 0; j <= ny + 1; ++j) {
    if (j == 0 || j == ny + 1) {
      for (int i = 0; i <= nx; ++i) out(i, j) = 0.0;
    } else {
      for (int i = 0; i <= nx; ++i)
        out(i, j) = (f(i, j) - f(i, j - 1)) * ihy;
    }
  }
}

void face_avg_x(const VertexField& f, YFaceField& out) {
  assert(f.grid() == out.grid());
  const int nx = f.grid().nx, ny = f.grid().ny;
  const bool par = parallel_worthwhile(out);
#pragma omp parallel for schedule(static) if (par)
  for (int j = 0; j <= ny; ++j) {
    out(0, j) = 0.0;
    for (int i = 1; i <= nx; ++i)
      out(i, j) = 0.5 * (f(i - 1, j) + f(i, j));
    out(nx + 1, j) = 0.0;
  }
}

void face_diff_x(const VertexField& f, YFaceField& out) {
  assert(f.grid() == out.grid());
  const int nx = f.grid().nx, ny = f.grid().ny;
  const double ihx = 1.0 / f.grid().hx();
  const bool par = parallel_worthwhile(out);
#pragma omp parallel for schedule(static) if (par)
  for (int j = 0; j <= ny; ++j) {
    out(0, j) = 0.0;
    for (int i = 1; i <= nx; ++i)
      out(i, j) = (f(i, j) - f(i - 1, j)) * ihx;
    out(nx + 1, j) = 0.0;
  }
}

// ======================================================================
// Laplacian, products
// ======================================================================

void laplacian(const CellField& f, CellField& out) {
  assert(f.grid() == out.grid());
  const int nx = f.grid().nx, ny = f.grid().ny;
  const double ihx2 = 1.0 / (f.grid().hx() * f.grid().hx());
  const double ihy2 = 1.0 / (f.grid().hy() * f.grid().hy());
  const bool par = parallel_worthwhile(out);
#pragma omp parallel for schedule(static) if (par)
  for (int j = 0; j <= ny + 1; ++j) {
    if (j == 0 || j == ny + 1) {
      for (int i = 0; i <= nx + 1; ++i) out(i, j) = 0.0;
    } else {
      out(0, j) = 0.0;
      for (int i = 1; i <= nx; ++i)
        out(i, j) = (f(i + 1, j) - 2.0 * f(i, j) + f(i - 1, j)) * ihx2 +
                    (f(i, j + 1) - 2.0 * f(i, j) + f(i, j - 1)) * ihy2;
      out(nx + 1, j) = 0.0;
    }
  }
}

namespace {

template <class F>
void multiply_impl(const F& a, const F& b, F& out) {
  assert(a.grid() == b.grid() && a.grid() == out.grid());
  const std::size_t n = a.raw().size();
  const double* pa = a.raw().data();
  const double* pb = b.raw().data();
  double* po = out.raw().data();
  const bool par = n >= kParallelThreshold;
#pragma omp parallel for schedule(static) if (par)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(n); ++k)
    po[k] = pa[k] * pb[k];
}

}  // namespace

void multiply(const CellField& a, const CellField& b, CellField& out) {
  multiply_impl(a, b, out);
}
void multiply(const XFaceField& a, const XFaceField& b, XFaceField& out) {
  multiply_impl(a, b, out);
}
void multiply(const YFaceField& a, const YFaceField& b, YFaceField& out) {
  multiply_impl(a, b, out);
}
void multiply(const VertexField& a, const VertexField& b, VertexField& out) {
  multiply_impl(a, b, out);
}

// ======================================================================
// Boundary conditions
// ======================================================================

void apply_scalar_bc(CellField& f) {
  const int nx = f.grid().nx, ny = f.grid().ny;
  for (int j = 1; j <= ny; ++j) {
    f(0, j) = f(1, j);
    f(nx + 1, j) = f(nx, j);
  }
  // after the x mirrors the corner ghosts come out consistent both ways
  for (int i = 0; i <= nx + 1; ++i) {
    f(i, 0) = f(i, 1);
    f(i, ny + 1) = f(i, ny);
  }
}

void apply_no_slip(XFaceField& u) {
  const int nx = u.grid().nx, ny = u.grid().ny;
  for (int j = 1; j <= ny; ++j) {
    u(0, j) = 0.0;
    u(nx, j) = 0.0;
  }
  for (int i = 0; i <= nx; ++i) {
    u(i, 0) = -u(i, 1);
    u(i, ny + 1) = -u(i, ny);
  }
}

void apply_no_slip(YFaceField& v) {
  const int nx = v.grid().nx, ny = v.grid().ny;
  for (int i = 1; i <= nx; ++i) {
    v(i, 0) = 0.0;
    v(i, ny) = 0.0;
  }
  for (int j = 0; j <= ny; ++j) {
    v(0, j) = -v(1, j);
    v(nx + 1, j) = -v(nx, j);
  }
}

void apply_vertex_zero(VertexField& f) {
  const int nx = f.grid().nx, ny = f.grid().ny;
  for (int i = 0; i <= nx; ++i) {
    f(i, 0) = 0.0;
    f(i, ny) = 0.0;
  }
  for (int j = 0; j <= ny; ++j) {
    f(0, j) = 0.0;
    f(nx, j) = 0.0;
  }
}

// ======================================================================
// Inner products
// ======================================================================

double inner_cell(const CellField& a, const CellField& b) {
  assert(a.grid() == b.grid());
  const int nx = a.grid().nx, ny = a.grid().ny;
  double s = 0.0;
  for (int j = 1; j <= ny; ++j) {
    double row = 0.0;
    for (int i = 1; i <= nx; ++i) row += a(i, j) * b(i, j);
    s += row;
  }
  return s * a.grid().hx() * a.grid().hy();
}

double inner_xface(const XFaceField& a, const XFaceField& b) {
  assert(a.grid() == b.grid());
  const int nx = a.grid().nx, ny = a.grid().ny;
  double s = 0.0;
  for (int j = 1; j <= ny; ++j) {
    double row = 0.5 * a(0, j) * b(0, j);
    for (int i = 1; i <= nx - 1; ++i) row += a(i, j) * b(i, j);
    row += 0.5 * a(nx, j) * b(nx, j);
    s += row;
  }
  return s * a.grid().hx() * a.grid().hy();
}

double inner_yface(const YFaceField& a, const YFaceField& b) {
  assert(a.grid() == b.grid());
  const int nx = a.grid().nx, ny = a.grid().ny;
  double s = 0.0;
  for (int j = 0; j <= ny; ++j) {
    const double wj = (j == 0 || j == ny) ? 0.5 : 1.0;
    double row = 0.0;
    for (int i = 1; i <= nx; ++i) row += a(i, j) * b(i, j);
    s += wj * row;
  }
  return s * a.grid().hx() * a.grid().hy();
}

double inner_vertex(const VertexField& a, const VertexField& b) {
  assert(a.grid() == b.grid());
  const int nx = a.grid().nx, ny = a.grid().ny;
  double s = 0.0;
  for (int j = 0; j <= ny; ++j) {
    const double wj = (j == 0 || j == ny) ? 0.5 : 1.0;
    double row = 0.5 * a(0, j) * b(0, j);
    for (int i = 1; i <= nx - 1; ++i) row += a(i, j) * b(i, j);
    row += 0.5 * a(nx, j) * b(nx, j);
    s += wj * row;
  }
  return s * a.grid().hx() * a.grid().hy();
}

double inner_grad(const CellField& a, const CellField& b) {
  assert(a.grid() == b.grid());
  const int nx = a.grid().nx, ny = a.grid().ny;
  const double ihx = 1.0 / a.grid().hx();
  const double ihy = 1.0 / a.grid().hy();
  double sx = 0.0;
  for (int j = 1; j <= ny; ++j) {
    double row = 0.0;
    for (int i = 0; i <= nx; ++i) {
      const double wi = (i == 0 || i == nx) ? 0.5 : 1.0;
      row += wi * ((a(i + 1, j) - a(i, j)) * ihx) * ((b(i + 1, j) - b(i, j)) * ihx);
    }
    sx += row;
  }
  double sy = 0.0;
  for (int j = 0; j <= ny; ++j) {
    const double wj = (j == 0 || j == ny) ? 0.5 : 1.0;
    double row = 0.0;
    for (int i = 1; i <= nx; ++i)
      row += ((a(i, j + 1) - a(i, j)) * ihy) * ((b(i, j + 1) - b(i, j)) * ihy);
    sy += wj * row;
  }
  return (sx + sy) * a.grid().hx() * a.grid().hy();
}

double norm_cell(const CellField& a) { return std::sqrt(inner_cell(a, a)); }
double norm_xface(const XFaceField& a) { return std::sqrt(inner_xface(a, a)); }
double norm_yface(const YFaceField& a) { return std::sqrt(inner_yface(a, a)); }

double integral_cell(const CellField& f) {
  const int nx = f.grid().nx, ny = f.grid().ny;
  double s = 0.0;
  for (int j = 1; j <= ny; ++j) {
    double row = 0.0;
    for (int i = 1; i <= nx; ++i) row += f(i, j);
    s += row;
  }
  return s * f.grid().hx() * f.grid().hy();
}

double mean_cell(const CellField& f) {
  return integral_cell(f) / (f.grid().lx * f.grid().ly);
}

}  // namespace binmix
