#include "binmix/stepper.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include "binmix/common.hpp"

namespace binmix {

TimeStepper::TimeStepper(const GridSpec& g, const ModelParams& mp,
                         const TimeParams& tp, const EnergyModel& model,
                         const SolverConfig& sc)
    : tp_(tp), sc_(sc), model_(&model), sys_(g, mp, tp.dt), coeffs_(g),
      cur_(g), prev_(g), next_(g), half_(g) {}

void TimeStepper::set_initial(const State& s0) {
  if (!(s0.rho1.grid() == sys_.grid())) {
    throw ConfigError("initial state does not match the stepper grid");
  }
  cur_ = s0;
  prev_ = s0;
  x_.clear();
  initialized_ = true;
}

StepReport TimeStepper::step() {
  if (!initialized_) throw ConfigError("stepper advanced before set_initial");

  extrapolate_coeffs(cur_, prev_, *model_, sys_.params(),
                     tp_.first_order_coeffs, coeffs_);
  sys_.set_coeffs(&coeffs_);

  StepReport out;
  ApplyFn precond_fn;
  if (sc_.precond == SolverConfig::Precond::frozen) {
    const FrozenPreconditioner::Means means =
        FrozenPreconditioner::coefficient_means(coeffs_);
    if (pre_.should_rebuild(sys_.grid(), tp_.dt, means, sc_.rebuild_drift)) {
      pre_.build(sys_.grid(), sys_.params(), tp_.dt, means);
      out.precond_rebuilt = true;
    }
    precond_fn = [this](const std::vector<double>& a, std::vector<double>& b) {
      pre_.apply(a, b);
    };
  }

  sys_.assemble_rhs(cur_, coeffs_, rhs_);
  if (!sc_.warm_start || x_.size() != rhs_.size()) {
    x_.assign(rhs_.size(), 0.0);
  }

  const ApplyFn apply_fn = [this](const std::vector<double>& a,
                                  std::vector<double>& b) {
    sys_.apply(a, b);
  };
  const SolveReport rep = gmres(apply_fn, precond_fn, rhs_, x_, sc_);
  out.iterations = rep.iterations;
  out.residual = rep.residual;
  out.converged = rep.converged;
  if (!rep.converged) {
    throw SolveError("half-step solve stalled at residual " +
                     std::to_string(rep.residual) + " after " +
                     std::to_string(rep.iterations) + " iterations");
  }

  sys_.unpack(x_, half_.mu1, half_.mu2, half_.u, half_.v, half_.q1, half_.rho1,
              half_.rho2);
  recover_full_step(cur_, half_, coeffs_, sys_.params(), tp_.dt, next_);

  std::swap(prev_, cur_);
  std::swap(cur_, next_);
  return out;
}

}  // namespace binmix
