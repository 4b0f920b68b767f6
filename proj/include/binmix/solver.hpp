#pragma once

// Linear solver for the half-step system: restarted GMRES with right
// preconditioning, and a constant-coefficient companion operator assembled
// sparse and factored once as the preconditioner.
//
// Determinism: every reduction inside the solver runs in a fixed order
// (chunked partial sums combined serially), so results are bitwise
// independent of the OpenMP thread count.

#include <functional>
#include <memory>
#include <vector>

#include "binmix/scheme.hpp"

namespace binmix {

struct SolverConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-13;
  int max_iters = 200;  // Krylov iterations in total, across restarts
  int restart = 30;
  enum class Precond { frozen, none };
  Precond precond = Precond::frozen;
  double rebuild_drift = 0.1;  // relative drift of coefficient means that
                               // triggers a refactorization
  bool warm_start = true;      // reuse the previous half-step solution
};

struct SolveReport {
  int iterations = 0;
  double residual = 0.0;  // freshly recomputed ||b - A x|| at exit
  double rhs_norm = 0.0;
  bool converged = false;
};

using ApplyFn =
    std::function<void(const std::vector<double>&, std::vector<double>&)>;

// Solves A x = b.  x carries the initial guess in and the solution out.
// `precond`, if set, applies an approximate inverse (right preconditioning).
// Convergence is always judged on a recomputed true residual, never on the
// Krylov recurrence estimate alone.
SolveReport gmres(const ApplyFn& apply, const ApplyFn& precond,
                  const std::vector<double>& b, std::vector<double>& x,
                  const SolverConfig& cfg);

// Sparse direct factorization of the step operator with its coefficient
// fields replaced by their domain means and the frozen velocity by zero.
// At spatially constant coefficients this is the operator itself, so the
// preconditioned iteration converges immediately; otherwise it remains a
// uniformly good approximation while the mixture stays well stirred.
class FrozenPreconditioner {
 public:
  struct Means {
    double rho1 = 0.0, rho2 = 0.0, rbar = 0.0, p1 = 0.0, p2 = 0.0;
    double inv_re_s = 0.0, inv_re_v = 0.0;
  };

  FrozenPreconditioner();
  ~FrozenPreconditioner();
  FrozenPreconditioner(FrozenPreconditioner&&) noexcept;
  FrozenPreconditioner& operator=(FrozenPreconditioner&&) noexcept;

  static Means coefficient_means(const FrozenCoeffs& c);

  void build(const GridSpec& g, const ModelParams& mp, double dt,
             const Means& m);
  bool built() const;
  bool should_rebuild(const GridSpec& g, double dt, const Means& m,
                      double drift) const;

  // y = M^{-1} x
  void apply(const std::vector<double>& x, std::vector<double>& y) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace binmix
