#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "binmix/analysis.hpp"
#include "binmix/common.hpp"
#include "binmix/energy.hpp"
#include "binmix/grid.hpp"
#include "binmix/io_cli.hpp"
#include "binmix/scheme.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace binmix;

namespace {

std::string make_temp_dir() {
  std::string tmpl =
      (std::filesystem::temp_directory_path() / "binmix_io_XXXXXX").string();
  std::vector<char> buf(tmpl.begin(), tmpl.end());
  buf.push_back('\0');
  REQUIRE(::mkdtemp(buf.data()) != nullptr);
  return std::string(buf.data());
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  REQUIRE(out.good());
  out << text;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(line);
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  return out;
}

// Baseline spinodal setup: 16x16 box, logarithmic mixing energy.
RunConfig fh_config() {
  RunConfig c;
  c.grid = {16, 16, 1.0, 1.0};
  c.time.dt = 1e-3;
  c.t_end = 1e-2;
  c.model.kappa = {4e-4, 0.0, 4e-4};
  c.energy.type = "flory-huggins";
  c.init.preset = "fh-perturb";
  c.output.snapshot_every = 5;
  return c;
}

// Smooth relaxation setup used for the convergence studies.
RunConfig dw_config() {
  RunConfig c;
  c.grid = {16, 16, 1.0, 1.0};
  c.time.dt = 1e-3;
  c.t_end = 2e-2;
  c.model.re_s1 = c.model.re_s2 = 1.0;
  c.model.re_v1 = c.model.re_v2 = 3.0;
  c.energy.type = "double-well";
  c.init.preset = "accuracy";
  return c;
}

// Two-component equation-of-state setup in reduced units.
RunConfig pr_config() {
  RunConfig c;
  c.grid = {64, 64, 4.0, 4.0};
  c.time.dt = 1e-3;
  c.t_end = 5e-3;
  c.model.m1 = 9.7136180725597367e-4;
  c.model.re_s1 = c.model.re_s2 = 1.0;
  c.model.re_v1 = c.model.re_v2 = 3.0303124747655765;
  c.model.kappa = {1.8041620420175249e-3, 1.4398002396139855e-4,
                   4.5960731230446447e-5};
  c.energy.type = "peng-robinson";
  c.energy.kappa_molar = true;
  c.energy.pr.r_gas = 1.4565793158435321;
  c.energy.pr.temperature = 1.2087912087912087;
  c.energy.pr.tc1 = 2.2626373626373626;
  c.energy.pr.pc1 = 1.3495119240131088;
  c.energy.pr.w1 = 0.4884;
  c.energy.pr.m1 = 8.8687760241354372;
  c.energy.pr.tc2 = 0.69803663003663;
  c.energy.pr.pc2 = 2.9513434336286686;
  c.energy.pr.w2 = 0.01142;
  c.energy.pr.m2 = 1.0;
  c.init.preset = "pr-droplet";
  return c;
}

}  // namespace

// ============================================================================
// Numeric text
// ============================================================================

TEST_CASE("double formatting round-trips bitwise") {
  CHECK(format_double(1.0) == "1.0000000000000000e0");
  CHECK(format_double(1e-4) == "1.0000000000000000e-4");
  CHECK(format_double(-2.5e16) == "-2.5000000000000000e16");

  const double nasty[] = {0.0,
                          -0.0,
                          1.0,
                          -1.0,
                          std::numbers::pi,
                          2.0 / 3.0,
                          4.9406564584124654e-324,
                          1.7976931348623157e308,
                          2.2250738585072014e-308,
                          -1.2345678912345678e-7,
                          6.02214076e23};
  for (const double v : nasty) {
    const double back = parse_double(format_double(v));
    CHECK(std::memcmp(&back, &v, sizeof v) == 0);
  }

  CHECK_THROWS_AS(parse_double(""), ConfigError);
  CHECK_THROWS_AS(parse_double("abc"), ConfigError);
  CHECK_THROWS_AS(parse_double("1.0x"), ConfigError);
  CHECK_THROWS_AS(parse_double("1e"), ConfigError);
}

// ============================================================================
// Config text
// ============================================================================

TEST_CASE("config serialization round-trips through the parser") {
  SUBCASE("defaults") {
    const std::string s1 = serialize_config(RunConfig{});
    const std::string s2 = serialize_config(parse_config(s1));
    CHECK(s1 == s2);
  }

  SUBCASE("every field set to awkward values") {
    RunConfig c = pr_config();
    c.grid.lx = 2.0 / 3.0;
    c.grid.ly = std::numbers::pi;
    c.full.nx = 256;
    c.full.ny = 192;
    c.full.dt = 1.25e-4;
    c.full.t_end = 15000.0;
    c.time.first_order_coeffs = true;
    c.model.rho_floor = 3.7e-11;
    c.model.no_hydro = true;
    c.energy.shift = 1.0e4 / 3.0;
    c.energy.box = {0.1, 4.1, 0.2, 7.7};
    c.energy.box_set = true;
    c.energy.fh.chi = 2.5000000000000004;
    c.energy.pr.k12 = 0.0323;
    c.energy.pr.eps_reg = 3e-7;
    c.solver.rel_tol = 1e-11;
    c.solver.abs_tol = 0.0;
    c.solver.max_iters = 77;
    c.solver.restart = 13;
    c.solver.precond = SolverConfig::Precond::none;
    c.solver.rebuild_drift = 0.25;
    c.solver.warm_start = false;
    c.init.amplitude = 0.0123;
    c.init.wavenumber = 14.0 * std::numbers::pi;
    c.init.base1 = 0.49;
    c.init.base2 = 0.51;
    c.init.droplet_r1 = 1.125;
    c.init.droplet_lobes = 5;
    c.init.file = "some/prefix";
    c.init.seed = 42;
    c.output.dir = "elsewhere";
    c.output.snapshot_every = 250;
    c.output.format = "vtk-legacy";
    c.output.diagnostics = false;

    const std::string s1 = serialize_config(c);
    const RunConfig d = parse_config(s1);
    CHECK(serialize_config(d) == s1);
    CHECK(d.grid.lx == c.grid.lx);
    CHECK(d.full.dt.value() == c.full.dt.value());
    CHECK(d.energy.shift.value() == c.energy.shift.value());
    CHECK(d.energy.box.hi2 == c.energy.box.hi2);
    CHECK(d.init.amplitude.value() == c.init.amplitude.value());
    CHECK(d.init.wavenumber.value() == c.init.wavenumber.value());
    CHECK(d.init.seed == c.init.seed);
    CHECK(d.solver.precond == SolverConfig::Precond::none);
    CHECK(d.solver.warm_start == false);
    CHECK(d.model.no_hydro == true);
    CHECK(d.output.format == "vtk-legacy");
    CHECK(d.energy.pr.pc2 == c.energy.pr.pc2);
  }

  SUBCASE("malformed inputs are hard errors") {
    CHECK_THROWS_AS(parse_config("[nosuch]\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[grid]\nbogus = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[grid]\nnx 4\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("nx = 4\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[grid]\nnx =\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[grid]\nlx = abc\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[grid\nnx = 4\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[solver]\npreconditioner = magic\n"),
                    ConfigError);
    try {
      parse_config("[grid]\nnx = 4\nbogus = 1\n");
      FAIL("expected a parse error");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
  }

  SUBCASE("comments, blanks, and whitespace are tolerated") {
    const RunConfig c = parse_config(
        "# leading comment\n"
        "\n"
        "[grid]\n"
        "  nx   =   24\n"
        "; another comment style\n"
        "ny = 12\n");
    CHECK(c.grid.nx == 24);
    CHECK(c.grid.ny == 12);
  }

  SUBCASE("validation rejects inconsistent configs") {
    RunConfig c = fh_config();
    c.grid.nx = 1;
    CHECK_THROWS_AS(validate_config(c), ConfigError);
    c = fh_config();
    c.time.dt = 0.0;
    CHECK_THROWS_AS(validate_config(c), ConfigError);
    c = fh_config();
    c.energy.kappa_molar = true;  // only meaningful with the EOS energy
    CHECK_THROWS_AS(validate_config(c), ConfigError);
    c = fh_config();
    c.output.format = "hdf5";
    CHECK_THROWS_AS(validate_config(c), ConfigError);
    c = fh_config();
    c.init.preset = "from-file";
    CHECK_THROWS_AS(validate_config(c), ConfigError);  // missing file
    c = pr_config();
    c.energy.pr.m2 = 0.0;
    CHECK_THROWS_AS(validate_config(c), ConfigError);
  }

  SUBCASE("full-scale overrides promote into the active fields") {
    RunConfig c = fh_config();
    c.full.nx = 256;
    c.full.ny = 128;
    c.full.dt = 5e-4;
    c.full.t_end = 500.0;
    apply_full_scale(c);
    CHECK(c.grid.nx == 256);
    CHECK(c.grid.ny == 128);
    CHECK(c.time.dt == 5e-4);
    CHECK(c.t_end == 500.0);
  }
}

// ============================================================================
// Characteristic scaling
// ============================================================================

TEST_CASE("characteristic scaling reproduces the reference mixture") {
  CharacteristicScales s;
  s.t0 = 6.4171e-11;
  s.l0 = 2e-8;
  s.rho0 = 16.0428;
  s.n0 = 1e3;
  s.temp0 = 273.0;

  PhysicalParams p;
  p.mobility = 1e-12;
  p.shear_visc1 = p.shear_visc2 = 1e-4;
  p.bulk_visc1 = p.bulk_visc2 = 0.33e-4;
  p.kappa = {1.1246e-18, 8.9748e-20, 2.8649e-20};
  p.kappa_molar = true;
  p.temperature = 330.0;
  p.r_gas = 8.3144598;
  p.molar_mass1 = 0.14228;
  p.molar_mass2 = 0.0160428;
  p.tc1 = 617.7;
  p.pc1 = 2.103e6;
  p.w1 = 0.4884;
  p.tc2 = 190.564;
  p.pc2 = 4.5992e6;
  p.w2 = 0.01142;

  const DimensionlessSet d = nondimensionalize(s, p);
  CHECK(d.model.m1 == doctest::Approx(9.7136e-4).epsilon(1e-4));
  CHECK(d.model.re_s1 == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(d.model.re_v1 == doctest::Approx(3.0303).epsilon(1e-4));
  CHECK(d.kappa_molar[0] == doctest::Approx(1.8042e-3).epsilon(1e-3));
  CHECK(d.kappa_molar[1] == doctest::Approx(1.4398e-4).epsilon(1e-3));
  CHECK(d.kappa_molar[2] == doctest::Approx(4.5961e-5).epsilon(1e-3));
  CHECK(d.pr.r_gas == doctest::Approx(1.4566).epsilon(1e-4));
  CHECK(d.pr.temperature == doctest::Approx(1.2088).epsilon(1e-4));
  CHECK(d.pr.m1 == doctest::Approx(8.8688).epsilon(1e-4));
  CHECK(d.pr.m2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(d.pr.tc1 == doctest::Approx(2.2626).epsilon(1e-4));
  CHECK(d.pr.tc2 == doctest::Approx(0.6980).epsilon(1e-3));
  CHECK(d.pr.pc1 == doctest::Approx(1.3495).epsilon(1e-4));
  CHECK(d.pr.pc2 == doctest::Approx(2.9513).epsilon(1e-4));
  CHECK(d.pr.w1 == 0.4884);
  CHECK(d.pr.w2 == 0.01142);

  // The two coordinate systems for the gradient coefficients stay consistent.
  CHECK(d.model.kappa[0] * d.pr.m1 * d.pr.m1 ==
        doctest::Approx(d.kappa_molar[0]).epsilon(1e-12));
  CHECK(d.model.kappa[1] * d.pr.m1 * d.pr.m2 ==
        doctest::Approx(d.kappa_molar[1]).epsilon(1e-12));

  SUBCASE("unit scales leave mass-form parameters unchanged") {
    CharacteristicScales one;
    PhysicalParams q = p;
    q.kappa_molar = false;
    q.kappa = {1e-4, 0.0, 1e-4};
    const DimensionlessSet e = nondimensionalize(one, q);
    CHECK(e.model.m1 == q.mobility);
    CHECK(e.model.re_s1 == doctest::Approx(1.0 / q.shear_visc1).epsilon(1e-15));
    CHECK(e.model.kappa[0] == q.kappa[0]);
    CHECK(e.model.kappa[2] == q.kappa[2]);
    CHECK(e.pr.temperature == q.temperature);
    CHECK(e.pr.m1 == q.molar_mass1);
  }

  SUBCASE("nonpositive scales and parameters are rejected") {
    CharacteristicScales bad = s;
    bad.l0 = 0.0;
    CHECK_THROWS_AS(nondimensionalize(bad, p), ConfigError);
    PhysicalParams q = p;
    q.shear_visc1 = 0.0;
    CHECK_THROWS_AS(nondimensionalize(s, q), ConfigError);
    q = p;
    q.molar_mass2 = -1.0;
    CHECK_THROWS_AS(nondimensionalize(s, q), ConfigError);
  }

  SUBCASE("scales and physical parameter files parse") {
    const CharacteristicScales s2 = parse_scales(
        "[scales]\nt0 = 6.4171e-11\nl0 = 2e-8\nrho0 = 16.0428\nn0 = 1e3\n"
        "T0 = 273\n");
    CHECK(s2.t0 == 6.4171e-11);
    CHECK(s2.temp0 == 273.0);
    CHECK_THROWS_AS(parse_scales("[scales]\nbogus = 1\n"), ConfigError);
    const PhysicalParams p2 = parse_physical(
        "[physical]\nmobility = 1e-12\neta_s1 = 1e-4\neta_s2 = 1e-4\n"
        "eta_v1 = 0.33e-4\neta_v2 = 0.33e-4\nkappa11 = 1.1246e-18\n"
        "temperature = 330\nmolar_mass1 = 0.14228\nmolar_mass2 = 0.0160428\n");
    CHECK(p2.kappa[0] == 1.1246e-18);
    CHECK(p2.molar_mass1 == 0.14228);
    CHECK_THROWS_AS(parse_physical("[physical]\nbogus = 1\n"), ConfigError);
    const std::string text = format_dimensionless(d);
    CHECK(text.find("m1 = 9.7136") != std::string::npos);
    CHECK(text.find("kappa11_molar") != std::string::npos);
  }
}

// ============================================================================
// Initial presets
// ============================================================================

TEST_CASE("initial presets sample the documented profiles") {
  SUBCASE("x-cosine perturbation") {
    RunConfig c = dw_config();
    c.grid = {32, 8, 1.0, 1.0};
    const ResolvedSetup r = resolve_setup(c);
    const State s = make_initial(c, *r.energy);
    const GridSpec& g = c.grid;
    for (int j = 1; j <= g.ny; ++j)
      for (int i = 1; i <= g.nx; ++i) {
        const double x = (i - 0.5) * g.hx();
        const double p = 0.01 * std::cos(2.0 * std::numbers::pi * x);
        CHECK(s.rho1(i, j) == 0.5 + p);
        CHECK(s.rho2(i, j) == 0.5 - p);
        CHECK(std::abs(s.rho1(i, j) + s.rho2(i, j) - 1.0) <= 1e-15);
        CHECK(s.q1(i, j) > 0.0);
      }
    for (const double u : s.u.raw()) CHECK(u == 0.0);
    for (const double v : s.v.raw()) CHECK(v == 0.0);
    CHECK(s.t == 0.0);

    // Custom amplitude and wave number are honored.
    c.init.amplitude = 0.03;
    c.init.wavenumber = 4.0 * std::numbers::pi;
    const State s2 = make_initial(c, *r.energy);
    const double x1 = 0.5 * g.hx();
    CHECK(s2.rho1(1, 1) == 0.5 + 0.03 * std::cos(4.0 * std::numbers::pi * x1));
  }

  SUBCASE("y-cosine perturbation is constant along x") {
    RunConfig c = fh_config();
    c.grid = {12, 40, 1.0, 1.0};
    const ResolvedSetup r = resolve_setup(c);
    const State s = make_initial(c, *r.energy);
    const GridSpec& g = c.grid;
    for (int j = 1; j <= g.ny; ++j) {
      const double y = (j - 0.5) * g.hy();
      const double p = 0.005 * std::cos(10.0 * std::numbers::pi * y);
      for (int i = 1; i <= g.nx; ++i) {
        CHECK(s.rho1(i, j) == 0.5 + p);
        CHECK(s.rho1(i, j) == s.rho1(1, j));
        CHECK(std::abs(s.rho1(i, j) + s.rho2(i, j) - 1.0) <= 1e-15);
      }
    }
  }

  SUBCASE("lobed droplet with bulk densities") {
    RunConfig c = pr_config();
    const ResolvedSetup r = resolve_setup(c);
    const State s = make_initial(c, *r.energy);
    const GridSpec& g = c.grid;
    const double m1 = c.energy.pr.m1;
    const double m2 = c.energy.pr.m2;

    int liquid = 0, gas = 0, band_in = 0, band_out = 0;
    for (int j = 1; j <= g.ny; ++j)
      for (int i = 1; i <= g.nx; ++i) {
        const double xs = (i - 0.5) * g.hx() - 0.5 * g.lx;
        const double ys = (j - 0.5) * g.hy() - 0.5 * g.ly;
        const double edge = 1.0 + 0.2 * std::cos(8.0 * std::atan2(xs, ys));
        const bool inside = xs * xs + ys * ys <= edge * edge;
        if (inside) {
          ++liquid;
          CHECK(s.rho1(i, j) == m1 * 3.8146);
          CHECK(s.rho2(i, j) == m2 * 3.5132);
        } else {
          ++gas;
          CHECK(s.rho1(i, j) == m1 * 0.0265);
          CHECK(s.rho2(i, j) == m2 * 7.1339);
        }
        // The rim band between the trough and lobe radii must be mixed:
        // lobes reach past r = 1, troughs pull under it.
        const double rad = std::sqrt(xs * xs + ys * ys);
        if (rad > 1.01 && rad < 1.19) (inside ? ++band_in : ++band_out);
      }
    CHECK(liquid > 0);
    CHECK(gas > 0);
    CHECK(band_in > 0);
    CHECK(band_out > 0);
    CHECK(s.rho1(32, 32) == m1 * 3.8146);  // center is liquid
    CHECK(s.rho2(1, 1) == m2 * 7.1339);    // far corner is gas
  }

  SUBCASE("from-file keeps stored fields verbatim") {
    const std::string dir = make_temp_dir();
    RunConfig c = dw_config();
    c.grid = {12, 10, 1.0, 0.8};
    const ResolvedSetup r = resolve_setup(c);
    State crafted = make_initial(c, *r.energy);
    for (int j = 0; j < crafted.u.height(); ++j)
      for (int i = 0; i < crafted.u.width(); ++i)
        crafted.u(i, j) = 0.01 * i - 0.003 * j;
    for (int j = 0; j < crafted.v.height(); ++j)
      for (int i = 0; i < crafted.v.width(); ++i)
        crafted.v(i, j) = 0.002 * j + 0.001 * i;
    apply_no_slip(crafted.u);
    apply_no_slip(crafted.v);
    for (int j = 1; j <= c.grid.ny; ++j)
      for (int i = 1; i <= c.grid.nx; ++i) crafted.q1(i, j) *= 1.01;
    apply_scalar_bc(crafted.q1);
    crafted.t = 0.37;
    emit_snapshot(crafted, dir, "csv", "ckpt");

    RunConfig c2 = c;
    c2.init.preset = "from-file";
    c2.init.file = dir + "/ckpt";
    const State loaded = make_initial(c2, *r.energy);
    CHECK(loaded.t == 0.0);
    CHECK(loaded.step == 0);
    for (int j = 1; j <= c.grid.ny; ++j)
      for (int i = 1; i <= c.grid.nx; ++i) {
        CHECK(loaded.rho1(i, j) == crafted.rho1(i, j));
        CHECK(loaded.rho2(i, j) == crafted.rho2(i, j));
        CHECK(loaded.q1(i, j) == crafted.q1(i, j));
      }
    for (int j = 1; j <= c.grid.ny; ++j)
      for (int i = 0; i <= c.grid.nx; ++i)
        CHECK(loaded.u(i, j) == crafted.u(i, j));
    for (int j = 0; j <= c.grid.ny; ++j)
      for (int i = 1; i <= c.grid.nx; ++i)
        CHECK(loaded.v(i, j) == crafted.v(i, j));

    // Without a stored quadratization field it is rebuilt from the densities.
    std::filesystem::remove(dir + "/ckpt_q1.csv");
    const State rebuilt = make_initial(c2, *r.energy);
    CellField q_ref(c.grid);
    eq_vars(*r.energy, rebuilt.rho1, rebuilt.rho2, q_ref);
    for (int j = 1; j <= c.grid.ny; ++j)
      for (int i = 1; i <= c.grid.nx; ++i)
        CHECK(rebuilt.q1(i, j) == q_ref(i, j));

    // A mismatched grid is rejected.
    RunConfig c3 = c2;
    c3.grid = {6, 6, 1.0, 0.8};
    const ResolvedSetup r3 = resolve_setup(c3);
    CHECK_THROWS_AS(make_initial(c3, *r3.energy), ConfigError);
    std::filesystem::remove_all(dir);
  }

  SUBCASE("inadmissible presets are rejected") {
    RunConfig c = dw_config();
    c.init.base1 = -0.2;
    const ResolvedSetup r = resolve_setup(dw_config());
    CHECK_THROWS_AS(make_initial(c, *r.energy), PositivityError);
    RunConfig c2 = dw_config();
    c2.init.preset = "nope";
    CHECK_THROWS_AS(make_initial(c2, *r.energy), ConfigError);
  }
}

// ============================================================================
// Field files
// ============================================================================

TEST_CASE("field CSV files round-trip bitwise") {
  const std::string dir = make_temp_dir();
  FieldFrame f;
  f.name = "rho1";
  f.nx = 5;
  f.ny = 3;
  f.hx = 0.2;
  f.hy = 1.0 / 3.0;
  f.t = 0.125;
  f.values = {0.0,     -0.0,   1.0,      2.0 / 3.0, std::numbers::pi,
              1e308,   5e-324, -2.5e-17, 42.0,      -1.0,
              1.5e-10, 7.0,    0.1,      0.2,       0.3};
  const std::string path = dir + "/frame.csv";
  write_field_csv(path, f);

  const FieldFrame g = read_field_csv(path);
  CHECK(g.name == f.name);
  CHECK(g.nx == f.nx);
  CHECK(g.ny == f.ny);
  CHECK(g.hx == f.hx);
  CHECK(g.hy == f.hy);
  CHECK(g.t == f.t);
  REQUIRE(g.values.size() == f.values.size());
  for (std::size_t i = 0; i < f.values.size(); ++i)
    CHECK(std::memcmp(&g.values[i], &f.values[i], sizeof(double)) == 0);

  const std::string text = slurp(path);
  CHECK(text.find("# field=rho1 Nx=5 Ny=3 hx=") == 0);
  CHECK(split_lines(text).size() == 4);  // header + 3 rows

  SUBCASE("read errors are I/O errors") {
    CHECK_THROWS_AS(read_field_csv(dir + "/absent.csv"), IoError);
    write_text(dir + "/bad1.csv", "no header here\n1,2\n");
    CHECK_THROWS_AS(read_field_csv(dir + "/bad1.csv"), IoError);
    write_text(dir + "/bad2.csv", "# field=a Nx=2 Ny=2 hx=1 hy=1 t=0\n1,2\n3\n");
    CHECK_THROWS_AS(read_field_csv(dir + "/bad2.csv"), IoError);
    write_text(dir + "/bad3.csv",
               "# field=a Nx=2 Ny=1 hx=1 hy=1 t=0\n1,oops\n");
    CHECK_THROWS_AS(read_field_csv(dir + "/bad3.csv"), IoError);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("legacy VTK snapshots follow the structured-points grammar") {
  const std::string dir = make_temp_dir();
  RunConfig c = dw_config();
  c.grid = {8, 4, 2.0, 1.0};
  const ResolvedSetup r = resolve_setup(c);
  State s = make_initial(c, *r.energy);
  for (int j = 0; j < s.u.height(); ++j)
    for (int i = 0; i < s.u.width(); ++i) s.u(i, j) = i * c.grid.hx();
  emit_snapshot(s, dir, "vtk-legacy", "frame");

  const std::string text = slurp(dir + "/frame.vtk");
  const std::vector<std::string> lines = split_lines(text);
  REQUIRE(lines.size() >= 10);
  CHECK(lines[0] == "# vtk DataFile Version 3.0");
  CHECK(lines[2] == "ASCII");
  CHECK(lines[3] == "DATASET STRUCTURED_POINTS");
  CHECK(lines[4] == "DIMENSIONS 9 5 1");
  CHECK(lines[5] == "ORIGIN 0 0 0");
  CHECK(lines[6].find("SPACING ") == 0);
  CHECK(lines[7] == "CELL_DATA 32");

  int scalar_blocks = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].rfind("SCALARS ", 0) == 0) {
      ++scalar_blocks;
      CHECK(lines[i].find(" double 1") != std::string::npos);
      REQUIRE(i + 1 < lines.size());
      CHECK(lines[i + 1] == "LOOKUP_TABLE default");
      int count = 0;
      for (std::size_t k = i + 2; k < lines.size(); ++k) {
        if (lines[k].rfind("SCALARS ", 0) == 0) break;
        std::istringstream row(lines[k]);
        std::string tok;
        while (row >> tok) {
          parse_double(tok);  // throws if not numeric
          ++count;
        }
      }
      CHECK(count == 32);
    }
  }
  CHECK(scalar_blocks == 5);

  // The first u cell value is the average of the two bounding face values.
  std::size_t u_at = text.find("SCALARS u double 1");
  REQUIRE(u_at != std::string::npos);
  std::istringstream ublock(text.substr(u_at));
  std::string skip;
  std::getline(ublock, skip);
  std::getline(ublock, skip);
  double first = 0.0;
  ublock >> first;
  CHECK(first == 0.5 * (s.u(0, 1) + s.u(1, 1)));
  std::filesystem::remove_all(dir);
}

// ============================================================================
// Run loop
// ============================================================================

TEST_CASE("the run loop writes diagnostics, snapshots, and a config copy") {
  const std::string base = make_temp_dir();
  RunConfig c = fh_config();
  c.output.dir = base + "/out";
  const RunResult res = run(c);
  CHECK(res.steps == 10);
  CHECK(res.final_time == doctest::Approx(1e-2).epsilon(1e-12));
  CHECK(res.total_iterations > 0);

  CHECK(slurp(c.output.dir + "/config.cfg") == serialize_config(c));
  CHECK_FALSE(std::filesystem::exists(c.output.dir + "/.lock"));
  for (const char* snap : {"snap_000000", "snap_000005", "snap_000010"})
    for (const char* fld : {"rho1", "rho2", "q1", "u", "v"})
      CHECK(std::filesystem::exists(c.output.dir + "/" + snap + "_" + fld +
                                    ".csv"));
  CHECK_FALSE(std::filesystem::exists(c.output.dir + "/snap_000001_rho1.csv"));

  const std::vector<std::string> lines =
      split_lines(slurp(c.output.dir + "/diagnostics.csv"));
  REQUIRE(lines.size() == 11);  // header + one row per step
  CHECK(lines[0] == "step,time,energy,mass1,mass2,amplitude,iterations");
  std::vector<double> energies;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const std::vector<std::string> cols = split_csv(lines[k]);
    REQUIRE(cols.size() == 7);
    CHECK(cols[0] == std::to_string(k));
    CHECK(parse_double(cols[1]) ==
          doctest::Approx(k * c.time.dt).epsilon(1e-12));
    energies.push_back(parse_double(cols[2]));
    // Total masses stay at their initial values (0.5 each on the unit box).
    CHECK(parse_double(cols[3]) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(parse_double(cols[4]) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(parse_double(cols[5]) > 0.0);
    CHECK(std::stol(cols[6]) >= 0);
  }
  for (std::size_t k = 1; k < energies.size(); ++k)
    CHECK(energies[k] <=
          energies[k - 1] + 1e-8 * (1.0 + std::abs(energies[k - 1])));

  SUBCASE("reruns are byte-identical") {
    RunConfig c2 = c;
    c2.output.dir = base + "/out2";
    run(c2);
    CHECK(slurp(c2.output.dir + "/diagnostics.csv") ==
          slurp(c.output.dir + "/diagnostics.csv"));
    for (const char* fld : {"rho1", "rho2", "q1", "u", "v"})
      CHECK(slurp(c2.output.dir + "/snap_000010_" + std::string(fld) +
                  ".csv") ==
            slurp(c.output.dir + "/snap_000010_" + std::string(fld) + ".csv"));
  }

  SUBCASE("a held lock blocks the run") {
    RunConfig c3 = c;
    c3.output.dir = base + "/locked";
    std::filesystem::create_directories(c3.output.dir);
    write_text(c3.output.dir + "/.lock", "");
    CHECK_THROWS_AS(run(c3), IoError);
  }

  SUBCASE("diagnostics can be switched off") {
    RunConfig c4 = c;
    c4.output.dir = base + "/quiet";
    c4.output.diagnostics = false;
    c4.t_end = 2e-3;
    run(c4);
    CHECK_FALSE(std::filesystem::exists(c4.output.dir + "/diagnostics.csv"));
  }
  std::filesystem::remove_all(base);
}

TEST_CASE("stepping failures leave a checkpoint and a machine-readable record") {
  const std::string base = make_temp_dir();

  SUBCASE("positivity abort") {
    RunConfig c = fh_config();
    c.grid = {32, 32, 1.0, 1.0};
    c.time.dt = 1e-2;
    c.t_end = 0.5;
    c.model.rho_floor = 0.4949;  // just under the initial minimum of 0.495
    c.output.dir = base + "/pos";
    c.output.snapshot_every = 1000;
    CHECK_THROWS_AS(run(c), PositivityError);
    const nlohmann::json j =
        nlohmann::json::parse(slurp(c.output.dir + "/failure.json"));
    CHECK(j.at("error") == "positivity");
    CHECK(j.at("step").get<long>() >= 1);
    CHECK(j.at("offending_value").get<double>() < 0.4949);
    CHECK(j.contains("cell_i"));
    CHECK(j.contains("cell_j"));
    CHECK(std::filesystem::exists(c.output.dir + "/abort_rho1.csv"));
    CHECK_FALSE(std::filesystem::exists(c.output.dir + "/.lock"));
    const State chk = load_snapshot(c.output.dir + "/abort", c.grid);
    CHECK(chk.t >= 0.0);  // last completed state is readable
  }

  SUBCASE("solver abort") {
    RunConfig c = fh_config();
    c.solver.max_iters = 1;
    c.solver.restart = 1;
    c.solver.rel_tol = 1e-30;
    c.solver.abs_tol = 0.0;
    c.solver.precond = SolverConfig::Precond::none;
    c.output.dir = base + "/stall";
    CHECK_THROWS_AS(run(c), SolveError);
    const nlohmann::json j =
        nlohmann::json::parse(slurp(c.output.dir + "/failure.json"));
    CHECK(j.at("error") == "solver");
    CHECK(j.at("step").get<long>() == 1);
    CHECK(std::filesystem::exists(c.output.dir + "/abort_rho1.csv"));
  }
  std::filesystem::remove_all(base);
}

// ============================================================================
// Refinement harness
// ============================================================================

TEST_CASE("restriction operators are exact on affine fields") {
  const GridSpec gf{32, 16, 1.3, 0.7};
  auto affine = [](double x, double y) { return 0.3 + 1.7 * x - 0.9 * y; };

  CellField fc(gf);
  for (int j = 0; j < fc.height(); ++j)
    for (int i = 0; i < fc.width(); ++i)
      fc(i, j) = affine((i - 0.5) * gf.hx(), (j - 0.5) * gf.hy());
  const CellField cc = restrict_cell(fc);
  const GridSpec gc = cc.grid();
  CHECK(gc.nx == 16);
  CHECK(gc.ny == 8);
  CHECK(gc.lx == gf.lx);
  for (int j = 1; j <= gc.ny; ++j)
    for (int i = 1; i <= gc.nx; ++i)
      CHECK(cc(i, j) ==
            doctest::Approx(affine((i - 0.5) * gc.hx(), (j - 0.5) * gc.hy()))
                .epsilon(1e-13));

  // Restriction re-applies the wall condition, so only interior faces carry
  // the affine values; the wall-normal boundary faces are pinned to zero.
  XFaceField fu(gf);
  for (int j = 0; j < fu.height(); ++j)
    for (int i = 0; i < fu.width(); ++i)
      fu(i, j) = affine(i * gf.hx(), (j - 0.5) * gf.hy());
  const XFaceField cu = restrict_xface(fu);
  for (int j = 1; j <= gc.ny; ++j) {
    CHECK(cu(0, j) == 0.0);
    CHECK(cu(gc.nx, j) == 0.0);
    for (int i = 1; i < gc.nx; ++i)
      CHECK(cu(i, j) ==
            doctest::Approx(affine(i * gc.hx(), (j - 0.5) * gc.hy()))
                .epsilon(1e-13));
  }

  YFaceField fv(gf);
  for (int j = 0; j < fv.height(); ++j)
    for (int i = 0; i < fv.width(); ++i)
      fv(i, j) = affine((i - 0.5) * gf.hx(), j * gf.hy());
  const YFaceField cv = restrict_yface(fv);
  for (int i = 1; i <= gc.nx; ++i) {
    CHECK(cv(i, 0) == 0.0);
    CHECK(cv(i, gc.ny) == 0.0);
    for (int j = 1; j < gc.ny; ++j)
      CHECK(cv(i, j) ==
            doctest::Approx(affine((i - 0.5) * gc.hx(), j * gc.hy()))
                .epsilon(1e-13));
  }

  const GridSpec odd{9, 6, 1.0, 1.0};
  CHECK_THROWS_AS(restrict_cell(CellField(odd)), ConfigError);
  CHECK_THROWS_AS(restrict_xface(XFaceField(odd)), ConfigError);
  CHECK_THROWS_AS(restrict_yface(YFaceField(odd)), ConfigError);
}

TEST_CASE("refinement studies measure the documented orders") {
  SUBCASE("level validation") {
    const RunConfig c = dw_config();
    CHECK_THROWS_AS(refinement_study(c, "time", {1e-3, 5e-4}), ConfigError);
    CHECK_THROWS_AS(refinement_study(c, "time", {1e-3, 4e-4, 2e-4}),
                    ConfigError);
    CHECK_THROWS_AS(refinement_study(c, "space", {8, 16, 24}), ConfigError);
    CHECK_THROWS_AS(refinement_study(c, "space", {8.5, 17, 34}), ConfigError);
    CHECK_THROWS_AS(refinement_study(c, "both", {8, 16, 32}), ConfigError);
  }

  SUBCASE("second-order in time; the frozen-coefficient variant is first") {
    const std::vector<double> dts{4e-3, 2e-3, 1e-3, 5e-4};
    const RunConfig c = dw_config();
    const std::vector<RefinementRow> rows = refinement_study(c, "time", dts);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].err1 == 0.0);
    CHECK(rows[1].ord1 == 0.0);
    CHECK(rows[3].ord1 == doctest::Approx(2.0).epsilon(0.15));
    CHECK(rows[3].ord2 == doctest::Approx(2.0).epsilon(0.15));
    CHECK(rows[3].ordv >= 1.6);
    CHECK(rows[2].err1 > rows[3].err1);

    RunConfig c1 = dw_config();
    c1.time.first_order_coeffs = true;
    const std::vector<RefinementRow> rows1 =
        refinement_study(c1, "time", dts);
    CHECK(rows1[3].ord1 == doctest::Approx(1.0).epsilon(0.3));
    CHECK(rows1[3].ord2 == doctest::Approx(1.0).epsilon(0.3));
    CHECK(rows1[3].ordv == doctest::Approx(1.0).epsilon(0.5));
    // The degraded variant is genuinely less accurate at the finest level.
    CHECK(rows1[3].err1 > rows[3].err1);
  }

  SUBCASE("second-order in space") {
    RunConfig c = dw_config();
    c.t_end = 1e-2;
    const std::vector<RefinementRow> rows =
        refinement_study(c, "space", {8, 16, 32});
    REQUIRE(rows.size() == 3);
    CHECK(rows[2].ord1 == doctest::Approx(2.0).epsilon(0.2));
    CHECK(rows[2].ord2 == doctest::Approx(2.0).epsilon(0.2));
    CHECK(rows[2].ordv >= 1.2);
  }

  SUBCASE("table formatting") {
    std::vector<RefinementRow> rows(3);
    rows[0].level = 4e-3;
    rows[1].level = 2e-3;
    rows[1].err1 = rows[1].err2 = rows[1].errv = 1e-8;
    rows[2].level = 1e-3;
    rows[2].err1 = rows[2].err2 = rows[2].errv = 2.5e-9;
    rows[2].ord1 = rows[2].ord2 = rows[2].ordv = 2.0;
    const std::string t = format_refinement_table(rows, "time");
    CHECK(t.find("dt") != std::string::npos);
    CHECK(t.find("2.00") != std::string::npos);
    CHECK(split_lines(t).size() == 4);
    const std::string s = format_refinement_table(rows, "space");
    CHECK(s.find("N") != std::string::npos);
  }
}

// ============================================================================
// Linear-mode emitters
// ============================================================================

TEST_CASE("dispersion and contour emitters produce plot-ready tables") {
  SUBCASE("growth-mode table") {
    RunConfig c = fh_config();
    const std::string csv =
        dispersion_csv(c, std::numbers::pi, 40.0 * std::numbers::pi, 9);
    const std::vector<std::string> lines = split_lines(csv);
    REQUIRE(lines.size() == 10);
    CHECK(lines[0] == "k,alpha_max,re1,im1,re2,im2,re3,im3,transverse");
    double prev_k = 0.0;
    for (std::size_t r = 1; r < lines.size(); ++r) {
      const std::vector<std::string> cols = split_csv(lines[r]);
      REQUIRE(cols.size() == 9);
      const double k = parse_double(cols[0]);
      CHECK(k > prev_k);
      prev_k = k;
      // The headline growth rate is the max over all modes, the transverse
      // shear branch included.
      const double alpha = parse_double(cols[1]);
      CHECK(alpha == std::max({parse_double(cols[2]), parse_double(cols[4]),
                               parse_double(cols[6]), parse_double(cols[8])}));
      // Equal split at rho = 1 gives shear viscosity 1/100 here.
      CHECK(parse_double(cols[8]) ==
            doctest::Approx(-0.01 * k * k).epsilon(1e-12));
    }
    CHECK_THROWS_AS(dispersion_csv(c, 1.0, 10.0, 1), ConfigError);
    CHECK_THROWS_AS(dispersion_csv(c, -1.0, 10.0, 4), ConfigError);
    CHECK_THROWS_AS(dispersion_csv(c, 10.0, 1.0, 4), ConfigError);
  }

  SUBCASE("tangent-shifted bulk energy table") {
    CHECK_THROWS_AS(eqcontour_csv(fh_config(), 8), ConfigError);
    CHECK_THROWS_AS(eqcontour_csv(pr_config(), 1), ConfigError);
    const std::string csv = eqcontour_csv(pr_config(), 8);
    const std::vector<std::string> lines = split_lines(csv);
    REQUIRE(lines.size() == 65);
    CHECK(lines[0] == "n1,n2,hm");
    int finite = 0;
    for (std::size_t r = 1; r < lines.size(); ++r) {
      const std::vector<std::string> cols = split_csv(lines[r]);
      REQUIRE(cols.size() == 3);
      const double n1 = parse_double(cols[0]);
      CHECK(n1 > 0.0);
      CHECK(n1 < 4.2);
      if (std::isfinite(parse_double(cols[2]))) ++finite;
    }
    CHECK(finite > 32);  // most of the box is admissible
  }
}

// ============================================================================
// Command-line surface
// ============================================================================

namespace {

int exit_code(const std::string& cmd) {
  const int rc = std::system((cmd + " > /dev/null 2>&1").c_str());
  REQUIRE(rc != -1);
  REQUIRE(WIFEXITED(rc));
  return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("the command line maps failures to distinct exit codes") {
  const char* env = std::getenv("BINMIX_BIN");
  REQUIRE_MESSAGE(env != nullptr, "BINMIX_BIN must point at the CLI binary");
  const std::string bin(env);
  const std::string dir = make_temp_dir();

  RunConfig ok = fh_config();
  ok.grid = {8, 8, 1.0, 1.0};
  ok.t_end = 2e-3;
  ok.output.dir = dir + "/ok_out";
  write_text(dir + "/ok.cfg", serialize_config(ok));
  CHECK(exit_code(bin + " run --config " + dir + "/ok.cfg") == 0);
  CHECK(std::filesystem::exists(ok.output.dir + "/diagnostics.csv"));

  // Output directory override.
  CHECK(exit_code(bin + " run --config " + dir + "/ok.cfg --out " + dir +
                  "/ovr") == 0);
  CHECK(std::filesystem::exists(dir + "/ovr/diagnostics.csv"));

  write_text(dir + "/bad.cfg", "[grid]\nnx = 8\nbogus = 1\n");
  CHECK(exit_code(bin + " run --config " + dir + "/bad.cfg") == 2);

  RunConfig stall = fh_config();
  stall.solver.max_iters = 1;
  stall.solver.restart = 1;
  stall.solver.rel_tol = 1e-30;
  stall.solver.abs_tol = 0.0;
  stall.solver.precond = SolverConfig::Precond::none;
  stall.output.dir = dir + "/stall_out";
  write_text(dir + "/stall.cfg", serialize_config(stall));
  CHECK(exit_code(bin + " run --config " + dir + "/stall.cfg") == 3);

  RunConfig pos = fh_config();
  pos.grid = {32, 32, 1.0, 1.0};
  pos.time.dt = 1e-2;
  pos.t_end = 0.5;
  pos.model.rho_floor = 0.4949;
  pos.output.dir = dir + "/pos_out";
  pos.output.snapshot_every = 1000;
  write_text(dir + "/pos.cfg", serialize_config(pos));
  CHECK(exit_code(bin + " run --config " + dir + "/pos.cfg") == 4);
  CHECK(std::filesystem::exists(dir + "/pos_out/failure.json"));

  CHECK(exit_code(bin + " run --config " + dir + "/absent.cfg") == 5);
  CHECK(exit_code(bin + " frobnicate") == 2);
  CHECK(exit_code(bin + " run") == 2);  // missing required --config

  // Convergence study through the CLI.
  RunConfig ref = dw_config();
  ref.t_end = 8e-3;
  write_text(dir + "/ref.cfg", serialize_config(ref));
  CHECK(exit_code(bin + " refine --config " + dir +
                  "/ref.cfg --axis time --levels 4e-3,2e-3,1e-3 --out " + dir +
                  "/table.txt") == 0);
  CHECK(slurp(dir + "/table.txt").find("dt") != std::string::npos);
  CHECK(exit_code(bin + " refine --config " + dir +
                  "/ref.cfg --axis time --levels 4e-3,2e-3") == 2);

  // Growth-mode table through the CLI.
  CHECK(exit_code(bin + " dispersion --config " + dir +
                  "/ok.cfg --kmin 3.14 --kmax 62.8 --samples 5 --out " + dir +
                  "/disp.csv") == 0);
  const std::vector<std::string> rows = split_lines(slurp(dir + "/disp.csv"));
  REQUIRE(rows.size() == 6);
  double prev = 0.0;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const double k = parse_double(split_csv(rows[r])[0]);
    CHECK(k > prev);
    prev = k;
  }

  // Scale reduction through the CLI.
  write_text(dir + "/scales.cfg",
             "[scales]\nt0 = 6.4171e-11\nl0 = 2e-8\nrho0 = 16.0428\n"
             "n0 = 1e3\nT0 = 273\n");
  write_text(dir + "/phys.cfg",
             "[physical]\nmobility = 1e-12\neta_s1 = 1e-4\neta_s2 = 1e-4\n"
             "eta_v1 = 0.33e-4\neta_v2 = 0.33e-4\nkappa11 = 1.1246e-18\n"
             "kappa12 = 8.9748e-20\nkappa22 = 2.8649e-20\nkappa_molar = true\n"
             "temperature = 330\nr_gas = 8.3144598\nmolar_mass1 = 0.14228\n"
             "molar_mass2 = 0.0160428\ntc1 = 617.7\npc1 = 2.103e6\n"
             "w1 = 0.4884\ntc2 = 190.564\npc2 = 4.5992e6\nw2 = 0.01142\n");
  CHECK(exit_code(bin + " nondim --scales " + dir + "/scales.cfg --params " +
                  dir + "/phys.cfg") == 0);

  // Bulk-energy contour through the CLI.
  RunConfig prc = pr_config();
  write_text(dir + "/pr.cfg", serialize_config(prc));
  CHECK(exit_code(bin + " eqcontour --config " + dir +
                  "/pr.cfg --grid 6 --out " + dir + "/hm.csv") == 0);
  CHECK(split_lines(slurp(dir + "/hm.csv")).size() == 37);

  std::filesystem::remove_all(dir);
}
