#pragma once

// Drives the half-step linear solves: freezes coefficients, maintains the
// preconditioner, warm starts GMRES from the previous half-step solution, and
// recovers the full-step state.

#include <vector>

#include "binmix/scheme.hpp"
#include "binmix/solver.hpp"

namespace binmix {

struct StepReport {
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  bool precond_rebuilt = false;
};

class TimeStepper {
 public:
  // The energy model must outlive the stepper.
  TimeStepper(const GridSpec& g, const ModelParams& mp, const TimeParams& tp,
              const EnergyModel& model, const SolverConfig& sc);

  // Copies s0 into both time levels (the first step freezes coefficients at
  // the initial state).  The state's q field must be consistent with the
  // model; build it with eq_vars.
  void set_initial(const State& s0);

  // Advances one time step.  Throws SolveError if the linear solve does not
  // reach tolerance and PositivityError if a recovered density crosses the
  // floor; the stepper's states are untouched when it throws.
  StepReport step();

  const State& current() const { return cur_; }
  const State& previous() const { return prev_; }
  const HalfStepFields& half() const { return half_; }
  const FrozenCoeffs& coeffs() const { return coeffs_; }
  const GridSpec& grid() const { return sys_.grid(); }
  const ModelParams& params() const { return sys_.params(); }
  const TimeParams& time_params() const { return tp_; }
  const EnergyModel& model() const { return *model_; }

 private:
  TimeParams tp_;
  SolverConfig sc_;
  const EnergyModel* model_;
  StepSystem sys_;
  FrozenCoeffs coeffs_;
  FrozenPreconditioner pre_;
  State cur_, prev_, next_;
  HalfStepFields half_;
  std::vector<double> x_, rhs_;
  bool initialized_ = false;
};

}  // namespace binmix
