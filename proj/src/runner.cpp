#include <fcntl.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "binmix/common.hpp"
#include "binmix/io_cli.hpp"
#include "binmix/stepper.hpp"
#include "json.hpp"

namespace binmix {

namespace {

double field_mass(const CellField& f) {
  const GridSpec& g = f.grid();
  double s = 0.0;
  for (int j = 1; j <= g.ny; ++j)
    for (int i = 1; i <= g.nx; ++i) s += f(i, j);
  return s * g.hx() * g.hy();
}

// Exclusive ownership of the output directory for the duration of a run.
class LockFile {
 public:
  explicit LockFile(const std::string& path) : path_(path) {
    fd_ = ::open(path.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0)
      throw IoError("output directory is locked (found " + path +
                    "); another run owns it or a previous run crashed");
  }
  ~LockFile() {
    if (fd_ >= 0) {
      ::close(fd_);
      ::unlink(path_.c_str());
    }
  }
  LockFile(const LockFile&) = delete;
  LockFile& operator=(const LockFile&) = delete;

 private:
  std::string path_;
  int fd_ = -1;
};

std::string snapshot_name(long k) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "snap_%06ld", k);
  return buf;
}

void write_failure(const std::string& dir, const std::string& kind,
                   const char* what, long step, double time,
                   const PositivityError* pe) {
  nlohmann::json j;
  j["error"] = kind;
  j["what"] = what;
  j["step"] = step;
  j["time"] = time;
  if (pe) {
    j["cell_i"] = pe->cell_i;
    j["cell_j"] = pe->cell_j;
    j["offending_value"] = pe->offending_value;
  }
  std::ofstream out(dir + "/failure.json");
  out << j.dump(2) << "\n";
}

long step_count(double t_end, double dt) {
  const long steps = std::llround(t_end / dt);
  if (steps < 1) throw ConfigError("t_end shorter than one time step");
  return steps;
}

}  // namespace

RunResult run(const RunConfig& c) {
  validate_config(c);
  const ResolvedSetup setup = resolve_setup(c);
  const long steps = step_count(c.t_end, c.time.dt);

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(c.output.dir, ec);
  if (ec) throw IoError("cannot create output directory " + c.output.dir);
  LockFile lock(c.output.dir + "/.lock");

  {
    std::ofstream cfg(c.output.dir + "/config.cfg");
    if (!cfg) throw IoError("cannot write config copy in " + c.output.dir);
    cfg << serialize_config(c);
  }

  const State s0 = make_initial(c, *setup.energy);
  TimeStepper stepper(c.grid, setup.params, c.time, *setup.energy, c.solver);
  stepper.set_initial(s0);

  std::ofstream diag;
  if (c.output.diagnostics) {
    diag.open(c.output.dir + "/diagnostics.csv");
    if (!diag) throw IoError("cannot write diagnostics in " + c.output.dir);
    diag << "step,time,energy,mass1,mass2,amplitude,iterations\n";
  }

  emit_snapshot(s0, c.output.dir, c.output.format, snapshot_name(0));

  RunResult res;
  for (long k = 1; k <= steps; ++k) {
    StepReport rep;
    try {
      rep = stepper.step();
    } catch (const PositivityError& e) {
      emit_snapshot(stepper.current(), c.output.dir, c.output.format, "abort");
      write_failure(c.output.dir, "positivity", e.what(), k,
                    stepper.current().t, &e);
      throw;
    } catch (const SolveError& e) {
      emit_snapshot(stepper.current(), c.output.dir, c.output.format, "abort");
      write_failure(c.output.dir, "solver", e.what(), k, stepper.current().t,
                    nullptr);
      throw;
    }
    res.total_iterations += rep.iterations;
    if (rep.precond_rebuilt) ++res.precond_rebuilds;

    const State& cur = stepper.current();
    if (c.output.diagnostics) {
      diag << k << ',' << format_double(cur.t) << ','
           << format_double(discrete_energy(cur, *setup.energy, setup.params))
           << ',' << format_double(field_mass(cur.rho1)) << ','
           << format_double(field_mass(cur.rho2)) << ','
           << format_double(perturbation_amplitude(cur)) << ','
           << rep.iterations << '\n';
    }
    if (k % c.output.snapshot_every == 0 || k == steps)
      emit_snapshot(cur, c.output.dir, c.output.format, snapshot_name(k));
  }

  res.steps = steps;
  res.final_time = stepper.current().t;
  res.final_energy =
      discrete_energy(stepper.current(), *setup.energy, setup.params);
  return res;
}

// ============================================================================
// Refinement harness
// ============================================================================

CellField restrict_cell(const CellField& fine) {
  const GridSpec& gf = fine.grid();
  if (gf.nx % 2 || gf.ny % 2)
    throw ConfigError("cell restriction needs even extents");
  const GridSpec gc{gf.nx / 2, gf.ny / 2, gf.lx, gf.ly};
  CellField out(gc);
  for (int j = 1; j <= gc.ny; ++j)
    for (int i = 1; i <= gc.nx; ++i)
      out(i, j) = 0.25 * (fine(2 * i - 1, 2 * j - 1) + fine(2 * i, 2 * j - 1) +
                          fine(2 * i - 1, 2 * j) + fine(2 * i, 2 * j));
  apply_scalar_bc(out);
  return out;
}

XFaceField restrict_xface(const XFaceField& fine) {
  const GridSpec& gf = fine.grid();
  if (gf.nx % 2 || gf.ny % 2)
    throw ConfigError("face restriction needs even extents");
  const GridSpec gc{gf.nx / 2, gf.ny / 2, gf.lx, gf.ly};
  XFaceField out(gc);
  for (int j = 1; j <= gc.ny; ++j)
    for (int i = 0; i <= gc.nx; ++i)
      out(i, j) = 0.5 * (fine(2 * i, 2 * j - 1) + fine(2 * i, 2 * j));
  apply_no_slip(out);
  return out;
}

YFaceField restrict_yface(const YFaceField& fine) {
  const GridSpec& gf = fine.grid();
  if (gf.nx % 2 || gf.ny % 2)
    throw ConfigError("face restriction needs even extents");
  const GridSpec gc{gf.nx / 2, gf.ny / 2, gf.lx, gf.ly};
  YFaceField out(gc);
  for (int j = 0; j <= gc.ny; ++j)
    for (int i = 1; i <= gc.nx; ++i)
      out(i, j) = 0.5 * (fine(2 * i - 1, 2 * j) + fine(2 * i, 2 * j));
  apply_no_slip(out);
  return out;
}

namespace {

// Advance a config to t_end with no file output; tolerances tightened so the
// solver residual stays far below the discretization errors being measured.
State simulate(RunConfig c) {
  c.solver.rel_tol = std::min(c.solver.rel_tol, 1e-12);
  c.solver.abs_tol = std::min(c.solver.abs_tol, 1e-14);
  validate_config(c);
  const ResolvedSetup setup = resolve_setup(c);
  const long steps = step_count(c.t_end, c.time.dt);
  if (std::abs(steps * c.time.dt - c.t_end) > 1e-8 * c.t_end)
    throw ConfigError("t_end is not an integer multiple of dt");
  TimeStepper stepper(c.grid, setup.params, c.time, *setup.energy, c.solver);
  stepper.set_initial(make_initial(c, *setup.energy));
  for (long k = 0; k < steps; ++k) stepper.step();
  return stepper.current();
}

double order_of(double coarse_err, double fine_err) {
  if (!(coarse_err > 0.0) || !(fine_err > 0.0)) return 0.0;
  return std::log2(coarse_err / fine_err);
}

}  // namespace

std::vector<RefinementRow> refinement_study(const RunConfig& base,
                                            const std::string& axis,
                                            const std::vector<double>& levels) {
  if (axis != "time" && axis != "space")
    throw ConfigError("refinement axis must be 'time' or 'space'");
  if (levels.size() < 3)
    throw ConfigError("refinement needs at least three levels");
  const bool temporal = axis == "time";
  for (std::size_t i = 0; i + 1 < levels.size(); ++i) {
    if (temporal) {
      if (std::abs(levels[i + 1] - 0.5 * levels[i]) > 1e-12 * levels[i])
        throw ConfigError("time levels must halve at each refinement");
    } else {
      if (std::abs(levels[i + 1] - 2.0 * levels[i]) > 1e-12 * levels[i + 1])
        throw ConfigError("space levels must double at each refinement");
    }
  }
  if (!temporal)
    for (const double n : levels)
      if (!(n >= 2.0) || std::abs(n - std::round(n)) > 1e-9)
        throw ConfigError("space levels must be whole cell counts >= 2");

  std::vector<State> finals;
  finals.reserve(levels.size());
  for (const double lev : levels) {
    RunConfig c = base;
    if (temporal) {
      c.time.dt = lev;
    } else {
      c.grid.nx = static_cast<int>(std::llround(lev));
      c.grid.ny = c.grid.nx;
    }
    finals.push_back(simulate(c));
  }

  std::vector<RefinementRow> rows(levels.size());
  for (std::size_t i = 0; i < levels.size(); ++i) rows[i].level = levels[i];
  for (std::size_t i = 1; i < levels.size(); ++i) {
    CellField d1, d2;
    XFaceField du;
    YFaceField dv;
    if (temporal) {
      d1 = finals[i].rho1;
      d2 = finals[i].rho2;
      du = finals[i].u;
      dv = finals[i].v;
      const State& ref = finals[i - 1];
      for (std::size_t m = 0; m < d1.raw().size(); ++m) {
        d1.raw()[m] -= ref.rho1.raw()[m];
        d2.raw()[m] -= ref.rho2.raw()[m];
      }
      for (std::size_t m = 0; m < du.raw().size(); ++m)
        du.raw()[m] -= ref.u.raw()[m];
      for (std::size_t m = 0; m < dv.raw().size(); ++m)
        dv.raw()[m] -= ref.v.raw()[m];
    } else {
      d1 = restrict_cell(finals[i].rho1);
      d2 = restrict_cell(finals[i].rho2);
      du = restrict_xface(finals[i].u);
      dv = restrict_yface(finals[i].v);
      const State& ref = finals[i - 1];
      for (std::size_t m = 0; m < d1.raw().size(); ++m) {
        d1.raw()[m] -= ref.rho1.raw()[m];
        d2.raw()[m] -= ref.rho2.raw()[m];
      }
      for (std::size_t m = 0; m < du.raw().size(); ++m)
        du.raw()[m] -= ref.u.raw()[m];
      for (std::size_t m = 0; m < dv.raw().size(); ++m)
        dv.raw()[m] -= ref.v.raw()[m];
    }
    rows[i].err1 = std::sqrt(inner_cell(d1, d1));
    rows[i].err2 = std::sqrt(inner_cell(d2, d2));
    rows[i].errv = std::sqrt(inner_xface(du, du) + inner_yface(dv, dv));
    if (i >= 2) {
      rows[i].ord1 = order_of(rows[i - 1].err1, rows[i].err1);
      rows[i].ord2 = order_of(rows[i - 1].err2, rows[i].err2);
      rows[i].ordv = order_of(rows[i - 1].errv, rows[i].errv);
    }
  }
  return rows;
}

std::string format_refinement_table(const std::vector<RefinementRow>& rows,
                                    const std::string& axis) {
  std::ostringstream o;
  const bool temporal = axis == "time";
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%12s %12s %6s %12s %6s %12s %6s\n",
                temporal ? "dt" : "N", "err_rho1", "ord", "err_rho2", "ord",
                "err_vel", "ord");
  o << buf;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const RefinementRow& r = rows[i];
    if (temporal)
      std::snprintf(buf, sizeof(buf), "%12.4e", r.level);
    else
      std::snprintf(buf, sizeof(buf), "%12.0f", r.level);
    o << buf;
    auto err_ord = [&](double err, double ord) {
      if (i == 0)
        std::snprintf(buf, sizeof(buf), " %12s %6s", "-", "-");
      else if (i == 1)
        std::snprintf(buf, sizeof(buf), " %12.4e %6s", err, "-");
      else
        std::snprintf(buf, sizeof(buf), " %12.4e %6.2f", err, ord);
      o << buf;
    };
    err_ord(r.err1, r.ord1);
    err_ord(r.err2, r.ord2);
    err_ord(r.errv, r.ordv);
    o << '\n';
  }
  return o.str();
}

// ============================================================================
// Linear-mode CSV emitters
// ============================================================================

std::string dispersion_csv(const RunConfig& c, double kmin, double kmax,
                           int samples) {
  if (samples < 2) throw ConfigError("dispersion needs at least two samples");
  if (!(kmin > 0.0) || !(kmax > kmin))
    throw ConfigError("dispersion needs 0 < kmin < kmax");
  const ResolvedSetup setup = resolve_setup(c);
  std::ostringstream o;
  o << "k,alpha_max,re1,im1,re2,im2,re3,im3,transverse\n";
  for (int s = 0; s < samples; ++s) {
    const double k = kmin + (kmax - kmin) * s / (samples - 1);
    const DispersionModes m = dispersion_modes(*setup.energy, setup.params,
                                               c.init.base1, c.init.base2, k);
    o << format_double(k) << ',' << format_double(m.growth_rate);
    for (const auto& z : m.longitudinal)
      o << ',' << format_double(z.real()) << ',' << format_double(z.imag());
    o << ',' << format_double(m.transverse) << '\n';
  }
  return o.str();
}

std::string eqcontour_csv(const RunConfig& c, int n) {
  if (c.energy.type != "peng-robinson")
    throw ConfigError("eqcontour requires the peng-robinson energy");
  if (n < 2) throw ConfigError("eqcontour needs a grid of at least 2");
  const SampleBox box =
      c.energy.box_set ? c.energy.box : SampleBox{0.0, 4.2, 0.0, 7.85};
  const PengRobinsonEnergy pr(c.energy.pr, box, c.energy.shift);
  const auto mu0 = pr.molar_grad_h(c.init.n1_gas, c.init.n2_gas);
  std::ostringstream o;
  o << "n1,n2,hm\n";
  for (int j = 0; j < n; ++j) {
    const double n2 = box.lo2 + (box.hi2 - box.lo2) * (j + 0.5) / n;
    for (int i = 0; i < n; ++i) {
      const double n1 = box.lo1 + (box.hi1 - box.lo1) * (i + 0.5) / n;
      double hm = std::numeric_limits<double>::quiet_NaN();
      try {
        hm = pr.molar_h(n1, n2) - mu0[0] * n1 - mu0[1] * n2;
      } catch (const PositivityError&) {
        // outside the admissible composition set; leave the entry empty
      }
      o << format_double(n1) << ',' << format_double(n2) << ','
        << format_double(hm) << '\n';
    }
  }
  return o.str();
}

}  // namespace binmix
