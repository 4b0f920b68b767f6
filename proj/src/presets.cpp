#include <algorithm>
#include <cmath>
#include <numbers>

#include "binmix/common.hpp"
#include "binmix/io_cli.hpp"

namespace binmix {

namespace {

// Fill both densities from a cell-center profile, then complete the state:
// mirror ghosts, q1 from the quadratization, no-slip velocity ghosts.
template <typename Fn>
void fill_densities(State& s, const Fn& fn) {
  const GridSpec& g = s.rho1.grid();
  for (int j = 1; j <= g.ny; ++j)
    for (int i = 1; i <= g.nx; ++i) {
      const double x = (i - 0.5) * g.hx();
      const double y = (j - 0.5) * g.hy();
      const auto [r1, r2] = fn(x, y);
      s.rho1(i, j) = r1;
      s.rho2(i, j) = r2;
    }
}

void check_floor(const State& s, double floor) {
  const GridSpec& g = s.rho1.grid();
  for (int j = 1; j <= g.ny; ++j)
    for (int i = 1; i <= g.nx; ++i) {
      if (!(s.rho1(i, j) > floor))
        throw PositivityError("initial first density at or below the floor", i,
                              j, s.rho1(i, j));
      if (!(s.rho2(i, j) > floor))
        throw PositivityError("initial second density at or below the floor",
                              i, j, s.rho2(i, j));
    }
}

bool all_zero(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

}  // namespace

State make_initial(const RunConfig& c, const EnergyModel& model) {
  const GridSpec& g = c.grid;
  State s(g);
  const InitSpec& in = c.init;

  if (in.preset == "accuracy") {
    const double amp = in.amplitude.value_or(0.01);
    const double k = in.wavenumber.value_or(2.0 * std::numbers::pi);
    fill_densities(s, [&](double x, double) {
      const double p = amp * std::cos(k * x);
      return std::pair{in.base1 + p, in.base2 - p};
    });
  } else if (in.preset == "fh-perturb") {
    const double amp = in.amplitude.value_or(0.005);
    const double k = in.wavenumber.value_or(10.0 * std::numbers::pi);
    fill_densities(s, [&](double, double y) {
      const double p = amp * std::cos(k * y);
      return std::pair{in.base1 + p, in.base2 - p};
    });
  } else if (in.preset == "pr-droplet") {
    const double m1 = c.energy.pr.m1;
    const double m2 = c.energy.pr.m2;
    fill_densities(s, [&](double x, double y) {
      const double xs = x - 0.5 * g.lx;
      const double ys = y - 0.5 * g.ly;
      const double edge =
          in.droplet_r1 +
          in.droplet_r2 * std::cos(in.droplet_lobes * std::atan2(xs, ys));
      const bool inside = xs * xs + ys * ys <= edge * edge;
      return inside ? std::pair{m1 * in.n1_liquid, m2 * in.n2_liquid}
                    : std::pair{m1 * in.n1_gas, m2 * in.n2_gas};
    });
  } else if (in.preset == "from-file") {
    s = load_snapshot(in.file, g);
    s.t = 0.0;
    s.step = 0;
  } else {
    throw ConfigError("unknown init preset '" + in.preset + "'");
  }

  check_floor(s, c.model.rho_floor);
  apply_scalar_bc(s.rho1);
  apply_scalar_bc(s.rho2);
  // A stored quadratization field is kept verbatim (it is an evolved unknown
  // and never identically zero); otherwise rebuild it from the densities.
  if (in.preset != "from-file" || all_zero(s.q1.raw()))
    eq_vars(model, s.rho1, s.rho2, s.q1);
  else
    apply_scalar_bc(s.q1);
  apply_no_slip(s.u);
  apply_no_slip(s.v);
  return s;
}

}  // namespace binmix
