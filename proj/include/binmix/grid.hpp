#pragma once

// Staggered (MAC) grid primitives: field containers, averaging/differencing
// operators between the four staggering locations, wall boundary conditions,
// and the discrete inner products / norms built on them.
//
// Layout on [0,lx] x [0,ly] with nx x ny cells, hx = lx/nx, hy = ly/ny:
//
//   cell centers   ((i-1/2)hx, (j-1/2)hy)   i = 1..nx, j = 1..ny
//   x-faces        (i hx, (j-1/2)hy)        i = 0..nx  (u lives here)
//   y-faces        ((i-1/2)hx, j hy)        j = 0..ny  (v lives here)
//   vertices       (i hx, j hy)             i = 0..nx, j = 0..ny
//
// Cell fields carry one ghost ring (slots i = 0, nx+1 and j = 0, ny+1).
// x-face fields carry ghost rows j = 0, ny+1; y-face fields ghost columns
// i = 0, nx+1; vertex fields have no ghosts.  Storage is row major with j
// outer, i inner.

#include <algorithm>
#include <cstddef>
#include <vector>

namespace binmix {

struct GridSpec {
  int nx = 0;
  int ny = 0;
  double lx = 1.0;
  double ly = 1.0;

  double hx() const { return lx / nx; }
  double hy() const { return ly / ny; }
  bool operator==(const GridSpec&) const = default;
};

// One container per staggering location; EX/EY are the extents in excess of
// (nx, ny).  Distinct template instances keep the locations apart in the type
// system, so operator overloads cannot be called with a mislocated field.
template <int EX, int EY>
class StagField {
 public:
  StagField() = default;
  explicit StagField(const GridSpec& g)
      : g_(g), w_(g.nx + EX), h_(g.ny + EY),
        d_(static_cast<std::size_t>(w_) * static_cast<std::size_t>(h_), 0.0) {}

  const GridSpec& grid() const { return g_; }
  int width() const { return w_; }    // number of i slots
  int height() const { return h_; }   // number of j slots

  double& operator()(int i, int j) {
    return d_[static_cast<std::size_t>(j) * w_ + i];
  }
  double operator()(int i, int j) const {
    return d_[static_cast<std::size_t>(j) * w_ + i];
  }

  std::vector<double>& raw() { return d_; }
  const std::vector<double>& raw() const { return d_; }

  void zero() { std::fill(d_.begin(), d_.end(), 0.0); }

 private:
  GridSpec g_;
  int w_ = 0, h_ = 0;
  std::vector<double> d_;
};

using CellField = StagField<2, 2>;    // slot (i,j), i = 0..nx+1, j = 0..ny+1
using XFaceField = StagField<1, 2>;   // slot (i,j) = face i, i = 0..nx, j = 0..ny+1
using YFaceField = StagField<2, 1>;   // slot (i,j) = face j, i = 0..nx+1, j = 0..ny
using VertexField = StagField<1, 1>;  // slot (i,j) = vertex (i,j)

// ---------------------------------------------------------------------------
// Averaging / differencing between staggering locations.
//
// Conventions: outputs are written on every slot where the stencil has data
// (ghost slots of the input included); slots whose stencil would reach outside
// the container are set to zero.  Differences divide by the grid spacing.
// ---------------------------------------------------------------------------

// cell -> x-face: out(i,j) from cells i, i+1 of row j (all slots computable).
void face_avg_x(const CellField& c, XFaceField& out);
void face_diff_x(const CellField& c, XFaceField& out);

// cell -> y-face: out(i,j) from cells j, j+1 of column i.
void face_avg_y(const CellField& c, YFaceField& out);
void face_diff_y(const CellField& c, YFaceField& out);

// x-face -> cell: out(i,j) from faces i-1, i; ghost columns i = 0, nx+1 zeroed.
void cell_avg_x(const XFaceField& u, CellField& out);
void cell_diff_x(const XFaceField& u, CellField& out);

// y-face -> cell: out(i,j) from faces j-1, j; ghost rows j = 0, ny+1 zeroed.
void cell_avg_y(const YFaceField& v, CellField& out);
void cell_diff_y(const YFaceField& v, CellField& out);

// x-face -> vertex: out(i,j) from face rows j, j+1 (ghost rows included).
void vertex_avg_y(const XFaceField& u, VertexField& out);
void vertex_diff_y(const XFaceField& u, VertexField& out);

// y-face -> vertex: out(i,j) from face columns i, i+1.
void vertex_avg_x(const YFaceField& v, VertexField& out);
void vertex_diff_x(const YFaceField& v, VertexField& out);

// vertex -> x-face: out(i,j) from vertex rows j-1, j; ghost rows zeroed.
void face_avg_y(const VertexField& f, XFaceField& out);
void face_diff_y(const VertexField& f, XFaceField& out);

// vertex -> y-face: out(i,j) from vertex columns i-1, i; ghost columns zeroed.
void face_avg_x(const VertexField& f, YFaceField& out);
void face_diff_x(const VertexField& f, YFaceField& out);

// Five-point cell Laplacian (composition of the second-order differences
// above); interior slots only, ghost slots zeroed.  Reads the ghost ring, so
// apply the scalar boundary condition first.
void laplacian(const CellField& f, CellField& out);

// Pointwise products (full extent).
void multiply(const CellField& a, const CellField& b, CellField& out);
void multiply(const XFaceField& a, const XFaceField& b, XFaceField& out);
void multiply(const YFaceField& a, const YFaceField& b, YFaceField& out);
void multiply(const VertexField& a, const VertexField& b, VertexField& out);

// ---------------------------------------------------------------------------
// Wall boundary conditions.  Idempotent; only ghost/boundary slots change.
// ---------------------------------------------------------------------------

// Zero normal derivative for cell scalars: mirror ghosts, corners consistent.
void apply_scalar_bc(CellField& f);

// No-slip walls.  Normal components vanish on boundary faces; ghost slots are
// the odd reflection of the first interior slot so that the tangential
// average vanishes on the wall.
void apply_no_slip(XFaceField& u);
void apply_no_slip(YFaceField& v);

// Zero ring for vertex fields.
void apply_vertex_zero(VertexField& f);

// ---------------------------------------------------------------------------
// Inner products.  All sums run in a fixed (j outer, i inner) serial order so
// results do not depend on the thread count.
// ---------------------------------------------------------------------------

// (a,b)_2: plain sum over interior cells, weighted by hx*hy.
double inner_cell(const CellField& a, const CellField& b);

// [u,r]_ew: x-trapezoid weights (1/2 on boundary faces), interior rows.
double inner_xface(const XFaceField& a, const XFaceField& b);

// [v,w]_ns: y-trapezoid weights, interior columns.
double inner_yface(const YFaceField& a, const YFaceField& b);

// (f,g)_vc: tensor trapezoid weights (1/4 corners, 1/2 edges).
double inner_vertex(const VertexField& a, const VertexField& b);

// (grad a, grad b)_h = [D_x a, D_x b]_ew + [D_y a, D_y b]_ns.  Reads ghosts;
// apply the scalar boundary condition first.
double inner_grad(const CellField& a, const CellField& b);

double norm_cell(const CellField& a);
double norm_xface(const XFaceField& a);
double norm_yface(const YFaceField& a);

// (f,1)_2 and its mean over the interior.
double integral_cell(const CellField& f);
double mean_cell(const CellField& f);

}  // namespace binmix
