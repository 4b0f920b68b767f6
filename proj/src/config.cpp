#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>

#include "binmix/common.hpp"
#include "binmix/io_cli.hpp"

namespace binmix {

// ============================================================================
// Number and token formatting
// ============================================================================

std::string format_double(double v) {
  char buf[64];
  const std::to_chars_result r =
      std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::scientific, 16);
  std::string s(buf, r.ptr);
  // Trim the exponent ("e+04" -> "e4", "e-04" -> "e-4"); re-parses identically.
  const std::size_t e = s.find('e');
  if (e != std::string::npos) {
    std::size_t d = e + 1;
    std::string sign;
    if (d < s.size() && (s[d] == '+' || s[d] == '-')) {
      if (s[d] == '-') sign = "-";
      ++d;
    }
    while (d + 1 < s.size() && s[d] == '0') ++d;
    s = s.substr(0, e + 1) + sign + s.substr(d);
  }
  return s;
}

double parse_double(const std::string& s) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  double v = 0.0;
  const std::from_chars_result r = std::from_chars(first, last, v);
  if (r.ec != std::errc{} || r.ptr != last)
    throw ConfigError("malformed number: '" + s + "'");
  return v;
}

namespace {

std::string trim(std::string_view s) {
  const char* ws = " \t\r\n";
  const std::size_t b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const std::size_t e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

long parse_long(const std::string& s) {
  long v = 0;
  const std::from_chars_result r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
    throw ConfigError("malformed integer: '" + s + "'");
  return v;
}

int parse_int(const std::string& s) { return static_cast<int>(parse_long(s)); }

unsigned long parse_ulong(const std::string& s) {
  unsigned long v = 0;
  const std::from_chars_result r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
    throw ConfigError("malformed unsigned integer: '" + s + "'");
  return v;
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("malformed boolean: '" + s + "'");
}

std::string bool_str(bool b) { return b ? "true" : "false"; }

[[noreturn]] void unknown_key(const std::string& section, const std::string& key,
                              int lineno) {
  throw ConfigError("unknown key '" + key + "' in section [" + section +
                    "] (line " + std::to_string(lineno) + ")");
}

}  // namespace

// ============================================================================
// Config parsing
// ============================================================================

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("malformed section header (line " +
                          std::to_string(lineno) + ")");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (section != "grid" && section != "time" && section != "model" &&
          section != "energy" && section != "solver" && section != "init" &&
          section != "output")
        throw ConfigError("unknown section [" + section + "] (line " +
                          std::to_string(lineno) + ")");
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected key = value (line " + std::to_string(lineno) +
                        ")");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string val = trim(std::string_view(line).substr(eq + 1));
    if (section.empty())
      throw ConfigError("key '" + key + "' before any section (line " +
                        std::to_string(lineno) + ")");
    if (key.empty() || val.empty())
      throw ConfigError("empty key or value (line " + std::to_string(lineno) +
                        ")");

    if (section == "grid") {
      if (key == "nx") c.grid.nx = parse_int(val);
      else if (key == "ny") c.grid.ny = parse_int(val);
      else if (key == "lx") c.grid.lx = parse_double(val);
      else if (key == "ly") c.grid.ly = parse_double(val);
      else if (key == "nx_full") c.full.nx = parse_int(val);
      else if (key == "ny_full") c.full.ny = parse_int(val);
      else unknown_key(section, key, lineno);
    } else if (section == "time") {
      if (key == "dt") c.time.dt = parse_double(val);
      else if (key == "t_end") c.t_end = parse_double(val);
      else if (key == "first_order_coeffs") c.time.first_order_coeffs = parse_bool(val);
      else if (key == "dt_full") c.full.dt = parse_double(val);
      else if (key == "t_end_full") c.full.t_end = parse_double(val);
      else unknown_key(section, key, lineno);
    } else if (section == "model") {
      if (key == "m1") c.model.m1 = parse_double(val);
      else if (key == "re_s1") c.model.re_s1 = parse_double(val);
      else if (key == "re_s2") c.model.re_s2 = parse_double(val);
      else if (key == "re_v1") c.model.re_v1 = parse_double(val);
      else if (key == "re_v2") c.model.re_v2 = parse_double(val);
      else if (key == "kappa11") c.model.kappa[0] = parse_double(val);
      else if (key == "kappa12") c.model.kappa[1] = parse_double(val);
      else if (key == "kappa22") c.model.kappa[2] = parse_double(val);
      else if (key == "rho_floor") c.model.rho_floor = parse_double(val);
      else if (key == "no_hydro") c.model.no_hydro = parse_bool(val);
      else unknown_key(section, key, lineno);
    } else if (section == "energy") {
      if (key == "type") c.energy.type = val;
      else if (key == "shift") c.energy.shift = parse_double(val);
      else if (key == "kappa_molar") c.energy.kappa_molar = parse_bool(val);
      else if (key == "box_lo1") { c.energy.box.lo1 = parse_double(val); c.energy.box_set = true; }
      else if (key == "box_hi1") { c.energy.box.hi1 = parse_double(val); c.energy.box_set = true; }
      else if (key == "box_lo2") { c.energy.box.lo2 = parse_double(val); c.energy.box_set = true; }
      else if (key == "box_hi2") { c.energy.box.hi2 = parse_double(val); c.energy.box_set = true; }
      else if (key == "chi") c.energy.fh.chi = parse_double(val);
      else if (key == "n1") c.energy.fh.n1 = parse_double(val);
      else if (key == "n2") c.energy.fh.n2 = parse_double(val);
      else if (key == "prefactor") c.energy.fh.prefactor = parse_double(val);
      else if (key == "r_gas") c.energy.pr.r_gas = parse_double(val);
      else if (key == "temperature") c.energy.pr.temperature = parse_double(val);
      else if (key == "tc1") c.energy.pr.tc1 = parse_double(val);
      else if (key == "pc1") c.energy.pr.pc1 = parse_double(val);
      else if (key == "w1") c.energy.pr.w1 = parse_double(val);
      else if (key == "m1") c.energy.pr.m1 = parse_double(val);
      else if (key == "tc2") c.energy.pr.tc2 = parse_double(val);
      else if (key == "pc2") c.energy.pr.pc2 = parse_double(val);
      else if (key == "w2") c.energy.pr.w2 = parse_double(val);
      else if (key == "m2") c.energy.pr.m2 = parse_double(val);
      else if (key == "k12") c.energy.pr.k12 = parse_double(val);
      else if (key == "eps_reg") c.energy.pr.eps_reg = parse_double(val);
      else unknown_key(section, key, lineno);
    } else if (section == "solver") {
      if (key == "rel_tol") c.solver.rel_tol = parse_double(val);
      else if (key == "abs_tol") c.solver.abs_tol = parse_double(val);
      else if (key == "max_iters") c.solver.max_iters = parse_int(val);
      else if (key == "restart") c.solver.restart = parse_int(val);
      else if (key == "preconditioner") {
        if (val == "frozen") c.solver.precond = SolverConfig::Precond::frozen;
        else if (val == "none") c.solver.precond = SolverConfig::Precond::none;
        else throw ConfigError("unknown preconditioner '" + val + "' (line " +
                               std::to_string(lineno) + ")");
      }
      else if (key == "rebuild_drift") c.solver.rebuild_drift = parse_double(val);
      else if (key == "warm_start") c.solver.warm_start = parse_bool(val);
      else unknown_key(section, key, lineno);
    } else if (section == "init") {
      if (key == "preset") c.init.preset = val;
      else if (key == "base1") c.init.base1 = parse_double(val);
      else if (key == "base2") c.init.base2 = parse_double(val);
      else if (key == "amplitude") c.init.amplitude = parse_double(val);
      else if (key == "wavenumber") c.init.wavenumber = parse_double(val);
      else if (key == "r1") c.init.droplet_r1 = parse_double(val);
      else if (key == "r2") c.init.droplet_r2 = parse_double(val);
      else if (key == "lobes") c.init.droplet_lobes = parse_int(val);
      else if (key == "n1_liquid") c.init.n1_liquid = parse_double(val);
      else if (key == "n1_gas") c.init.n1_gas = parse_double(val);
      else if (key == "n2_liquid") c.init.n2_liquid = parse_double(val);
      else if (key == "n2_gas") c.init.n2_gas = parse_double(val);
      else if (key == "file") c.init.file = val;
      else if (key == "seed") c.init.seed = parse_ulong(val);
      else unknown_key(section, key, lineno);
    } else if (section == "output") {
      if (key == "dir") c.output.dir = val;
      else if (key == "snapshot_every") c.output.snapshot_every = parse_long(val);
      else if (key == "format") c.output.format = val;
      else if (key == "diagnostics") c.output.diagnostics = parse_bool(val);
      else unknown_key(section, key, lineno);
    }
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

// ============================================================================
// Config serialization
// ============================================================================

std::string serialize_config(const RunConfig& c) {
  std::ostringstream o;
  auto kv = [&o](const char* k, const std::string& v) { o << k << " = " << v << "\n"; };
  auto kd = [&](const char* k, double v) { kv(k, format_double(v)); };

  o << "[grid]\n";
  kv("nx", std::to_string(c.grid.nx));
  kv("ny", std::to_string(c.grid.ny));
  kd("lx", c.grid.lx);
  kd("ly", c.grid.ly);
  if (c.full.nx) kv("nx_full", std::to_string(*c.full.nx));
  if (c.full.ny) kv("ny_full", std::to_string(*c.full.ny));

  o << "\n[time]\n";
  kd("dt", c.time.dt);
  kd("t_end", c.t_end);
  kv("first_order_coeffs", bool_str(c.time.first_order_coeffs));
  if (c.full.dt) kd("dt_full", *c.full.dt);
  if (c.full.t_end) kd("t_end_full", *c.full.t_end);

  o << "\n[model]\n";
  kd("m1", c.model.m1);
  kd("re_s1", c.model.re_s1);
  kd("re_s2", c.model.re_s2);
  kd("re_v1", c.model.re_v1);
  kd("re_v2", c.model.re_v2);
  kd("kappa11", c.model.kappa[0]);
  kd("kappa12", c.model.kappa[1]);
  kd("kappa22", c.model.kappa[2]);
  kd("rho_floor", c.model.rho_floor);
  kv("no_hydro", bool_str(c.model.no_hydro));

  o << "\n[energy]\n";
  kv("type", c.energy.type);
  if (c.energy.shift) kd("shift", *c.energy.shift);
  kv("kappa_molar", bool_str(c.energy.kappa_molar));
  if (c.energy.box_set) {
    kd("box_lo1", c.energy.box.lo1);
    kd("box_hi1", c.energy.box.hi1);
    kd("box_lo2", c.energy.box.lo2);
    kd("box_hi2", c.energy.box.hi2);
  }
  kd("chi", c.energy.fh.chi);
  kd("n1", c.energy.fh.n1);
  kd("n2", c.energy.fh.n2);
  kd("prefactor", c.energy.fh.prefactor);
  kd("r_gas", c.energy.pr.r_gas);
  kd("temperature", c.energy.pr.temperature);
  kd("tc1", c.energy.pr.tc1);
  kd("pc1", c.energy.pr.pc1);
  kd("w1", c.energy.pr.w1);
  kd("m1", c.energy.pr.m1);
  kd("tc2", c.energy.pr.tc2);
  kd("pc2", c.energy.pr.pc2);
  kd("w2", c.energy.pr.w2);
  kd("m2", c.energy.pr.m2);
  kd("k12", c.energy.pr.k12);
  kd("eps_reg", c.energy.pr.eps_reg);

  o << "\n[solver]\n";
  kd("rel_tol", c.solver.rel_tol);
  kd("abs_tol", c.solver.abs_tol);
  kv("max_iters", std::to_string(c.solver.max_iters));
  kv("restart", std::to_string(c.solver.restart));
  kv("preconditioner",
     c.solver.precond == SolverConfig::Precond::frozen ? "frozen" : "none");
  kd("rebuild_drift", c.solver.rebuild_drift);
  kv("warm_start", bool_str(c.solver.warm_start));

  o << "\n[init]\n";
  kv("preset", c.init.preset);
  kd("base1", c.init.base1);
  kd("base2", c.init.base2);
  if (c.init.amplitude) kd("amplitude", *c.init.amplitude);
  if (c.init.wavenumber) kd("wavenumber", *c.init.wavenumber);
  kd("r1", c.init.droplet_r1);
  kd("r2", c.init.droplet_r2);
  kv("lobes", std::to_string(c.init.droplet_lobes));
  kd("n1_liquid", c.init.n1_liquid);
  kd("n1_gas", c.init.n1_gas);
  kd("n2_liquid", c.init.n2_liquid);
  kd("n2_gas", c.init.n2_gas);
  if (!c.init.file.empty()) kv("file", c.init.file);
  if (c.init.seed != 0) kv("seed", std::to_string(c.init.seed));

  o << "\n[output]\n";
  kv("dir", c.output.dir);
  kv("snapshot_every", std::to_string(c.output.snapshot_every));
  kv("format", c.output.format);
  kv("diagnostics", bool_str(c.output.diagnostics));
  return o.str();
}

// ============================================================================
// Validation and setup resolution
// ============================================================================

void validate_config(const RunConfig& c) {
  if (c.grid.nx < 2 || c.grid.ny < 2)
    throw ConfigError("grid must be at least 2 x 2");
  if (!(c.grid.lx > 0.0) || !(c.grid.ly > 0.0))
    throw ConfigError("domain lengths must be positive");
  if (!(c.time.dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(c.t_end > 0.0)) throw ConfigError("t_end must be positive");
  if (!(c.model.m1 >= 0.0)) throw ConfigError("m1 must be nonnegative");
  if (!(c.model.re_s1 > 0.0) || !(c.model.re_s2 > 0.0) ||
      !(c.model.re_v1 > 0.0) || !(c.model.re_v2 > 0.0))
    throw ConfigError("Reynolds numbers must be positive");
  if (c.energy.type != "double-well" && c.energy.type != "flory-huggins" &&
      c.energy.type != "peng-robinson")
    throw ConfigError("unknown energy type '" + c.energy.type + "'");
  if (c.energy.kappa_molar && c.energy.type != "peng-robinson")
    throw ConfigError("kappa_molar requires the peng-robinson energy");
  if (c.energy.type == "flory-huggins" &&
      (!(c.energy.fh.n1 > 0.0) || !(c.energy.fh.n2 > 0.0)))
    throw ConfigError("polymerization degrees must be positive");
  if (c.energy.type == "peng-robinson" &&
      (!(c.energy.pr.m1 > 0.0) || !(c.energy.pr.m2 > 0.0) ||
       !(c.energy.pr.temperature > 0.0) || !(c.energy.pr.r_gas > 0.0) ||
       !(c.energy.pr.tc1 > 0.0) || !(c.energy.pr.tc2 > 0.0) ||
       !(c.energy.pr.pc1 > 0.0) || !(c.energy.pr.pc2 > 0.0)))
    throw ConfigError("equation-of-state parameters must be positive");
  if (!(c.solver.rel_tol >= 0.0) || !(c.solver.abs_tol >= 0.0))
    throw ConfigError("solver tolerances must be nonnegative");
  if (c.solver.max_iters < 1 || c.solver.restart < 1)
    throw ConfigError("solver iteration limits must be at least 1");
  if (!(c.solver.rebuild_drift > 0.0))
    throw ConfigError("rebuild_drift must be positive");
  if (c.init.preset != "accuracy" && c.init.preset != "fh-perturb" &&
      c.init.preset != "pr-droplet" && c.init.preset != "from-file")
    throw ConfigError("unknown init preset '" + c.init.preset + "'");
  if (c.init.preset == "from-file" && c.init.file.empty())
    throw ConfigError("from-file preset needs init.file");
  if (c.init.preset == "pr-droplet" && c.energy.type != "peng-robinson")
    throw ConfigError("pr-droplet preset requires the peng-robinson energy");
  if (c.output.snapshot_every < 1)
    throw ConfigError("snapshot_every must be at least 1");
  if (c.output.format != "csv" && c.output.format != "vtk-legacy")
    throw ConfigError("unknown output format '" + c.output.format + "'");
}

void apply_full_scale(RunConfig& c) {
  if (c.full.nx) c.grid.nx = *c.full.nx;
  if (c.full.ny) c.grid.ny = *c.full.ny;
  if (c.full.dt) c.time.dt = *c.full.dt;
  if (c.full.t_end) c.t_end = *c.full.t_end;
}

ResolvedSetup resolve_setup(const RunConfig& c) {
  validate_config(c);
  ResolvedSetup r;
  r.params = c.model;
  if (c.energy.type == "double-well") {
    r.energy = std::make_unique<DoubleWellEnergy>(c.energy.shift);
  } else if (c.energy.type == "flory-huggins") {
    const SampleBox box = c.energy.box_set ? c.energy.box : SampleBox{};
    r.energy = std::make_unique<FloryHugginsEnergy>(c.energy.fh, box, c.energy.shift);
  } else {
    const SampleBox box =
        c.energy.box_set ? c.energy.box : SampleBox{0.0, 4.2, 0.0, 7.85};
    r.energy = std::make_unique<PengRobinsonEnergy>(c.energy.pr, box, c.energy.shift);
    if (c.energy.kappa_molar)
      r.params.kappa =
          mass_kappa_from_molar(c.model.kappa, c.energy.pr.m1, c.energy.pr.m2);
  }
  return r;
}

// ============================================================================
// Characteristic scales
// ============================================================================

DimensionlessSet nondimensionalize(const CharacteristicScales& s,
                                   const PhysicalParams& p) {
  if (!(s.t0 > 0.0) || !(s.l0 > 0.0) || !(s.rho0 > 0.0) || !(s.n0 > 0.0) ||
      !(s.temp0 > 0.0))
    throw ConfigError("characteristic scales must all be positive");
  if (!(p.shear_visc1 > 0.0) || !(p.shear_visc2 > 0.0) ||
      !(p.bulk_visc1 > 0.0) || !(p.bulk_visc2 > 0.0))
    throw ConfigError("viscosities must be positive");
  if (!(p.mobility >= 0.0)) throw ConfigError("mobility must be nonnegative");
  if (!(p.molar_mass1 > 0.0) || !(p.molar_mass2 > 0.0))
    throw ConfigError("molar masses must be positive");

  DimensionlessSet d;
  // inverse Reynolds number of a viscosity eta is eta t0 / (rho0 l0^2)
  const double visc_group = s.t0 / (s.rho0 * s.l0 * s.l0);
  d.model.m1 = p.mobility / (s.t0 * s.rho0);
  d.model.re_s1 = 1.0 / (p.shear_visc1 * visc_group);
  d.model.re_s2 = 1.0 / (p.shear_visc2 * visc_group);
  d.model.re_v1 = 1.0 / (p.bulk_visc1 * visc_group);
  d.model.re_v2 = 1.0 / (p.bulk_visc2 * visc_group);

  const double mref1 = p.molar_mass1 * s.n0 / s.rho0;
  const double mref2 = p.molar_mass2 * s.n0 / s.rho0;
  const double l4 = s.l0 * s.l0 * s.l0 * s.l0;
  if (p.kappa_molar) {
    const double group = s.n0 * s.n0 * s.t0 * s.t0 / (s.rho0 * l4);
    for (int k = 0; k < 3; ++k) d.kappa_molar[k] = p.kappa[k] * group;
    d.model.kappa = mass_kappa_from_molar(d.kappa_molar, mref1, mref2);
  } else {
    const double group = s.rho0 * s.t0 * s.t0 / l4;
    for (int k = 0; k < 3; ++k) d.model.kappa[k] = p.kappa[k] * group;
    d.kappa_molar = molar_kappa_from_mass(d.model.kappa, mref1, mref2);
  }

  const double press_group = s.t0 * s.t0 / (s.rho0 * s.l0 * s.l0);
  d.pr.r_gas = p.r_gas * s.n0 * s.temp0 * press_group;
  d.pr.temperature = p.temperature / s.temp0;
  d.pr.tc1 = p.tc1 / s.temp0;
  d.pr.pc1 = p.pc1 * press_group;
  d.pr.w1 = p.w1;
  d.pr.m1 = mref1;
  d.pr.tc2 = p.tc2 / s.temp0;
  d.pr.pc2 = p.pc2 * press_group;
  d.pr.w2 = p.w2;
  d.pr.m2 = mref2;
  return d;
}

namespace {

// Shared machinery for the two flat single-section files.
void parse_flat(const std::string& text, const std::string& want_section,
                const std::function<bool(const std::string&, const std::string&)>& sink) {
  std::istringstream in(text);
  std::string raw, section;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("malformed section header (line " +
                          std::to_string(lineno) + ")");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (section != want_section)
        throw ConfigError("unknown section [" + section + "] (line " +
                          std::to_string(lineno) + ")");
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected key = value (line " + std::to_string(lineno) + ")");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string val = trim(std::string_view(line).substr(eq + 1));
    if (section != want_section)
      throw ConfigError("key '" + key + "' before section [" + want_section +
                        "] (line " + std::to_string(lineno) + ")");
    if (!sink(key, val)) unknown_key(section, key, lineno);
  }
}

}  // namespace

CharacteristicScales parse_scales(const std::string& text) {
  CharacteristicScales s;
  parse_flat(text, "scales", [&](const std::string& k, const std::string& v) {
    if (k == "t0") s.t0 = parse_double(v);
    else if (k == "l0") s.l0 = parse_double(v);
    else if (k == "rho0") s.rho0 = parse_double(v);
    else if (k == "n0") s.n0 = parse_double(v);
    else if (k == "T0") s.temp0 = parse_double(v);
    else return false;
    return true;
  });
  return s;
}

PhysicalParams parse_physical(const std::string& text) {
  PhysicalParams p;
  parse_flat(text, "physical", [&](const std::string& k, const std::string& v) {
    if (k == "mobility") p.mobility = parse_double(v);
    else if (k == "eta_s1") p.shear_visc1 = parse_double(v);
    else if (k == "eta_s2") p.shear_visc2 = parse_double(v);
    else if (k == "eta_v1") p.bulk_visc1 = parse_double(v);
    else if (k == "eta_v2") p.bulk_visc2 = parse_double(v);
    else if (k == "kappa11") p.kappa[0] = parse_double(v);
    else if (k == "kappa12") p.kappa[1] = parse_double(v);
    else if (k == "kappa22") p.kappa[2] = parse_double(v);
    else if (k == "kappa_molar") p.kappa_molar = parse_bool(v);
    else if (k == "temperature") p.temperature = parse_double(v);
    else if (k == "r_gas") p.r_gas = parse_double(v);
    else if (k == "molar_mass1") p.molar_mass1 = parse_double(v);
    else if (k == "molar_mass2") p.molar_mass2 = parse_double(v);
    else if (k == "tc1") p.tc1 = parse_double(v);
    else if (k == "pc1") p.pc1 = parse_double(v);
    else if (k == "w1") p.w1 = parse_double(v);
    else if (k == "tc2") p.tc2 = parse_double(v);
    else if (k == "pc2") p.pc2 = parse_double(v);
    else if (k == "w2") p.w2 = parse_double(v);
    else return false;
    return true;
  });
  return p;
}

std::string format_dimensionless(const DimensionlessSet& d) {
  std::ostringstream o;
  auto kd = [&o](const char* k, double v) { o << k << " = " << format_double(v) << "\n"; };
  o << "[model]\n";
  kd("m1", d.model.m1);
  kd("re_s1", d.model.re_s1);
  kd("re_s2", d.model.re_s2);
  kd("re_v1", d.model.re_v1);
  kd("re_v2", d.model.re_v2);
  kd("kappa11", d.model.kappa[0]);
  kd("kappa12", d.model.kappa[1]);
  kd("kappa22", d.model.kappa[2]);
  o << "\n# molar-form gradient coefficients\n";
  kd("kappa11_molar", d.kappa_molar[0]);
  kd("kappa12_molar", d.kappa_molar[1]);
  kd("kappa22_molar", d.kappa_molar[2]);
  o << "\n[energy]\n";
  o << "type = peng-robinson\n";
  kd("r_gas", d.pr.r_gas);
  kd("temperature", d.pr.temperature);
  kd("tc1", d.pr.tc1);
  kd("pc1", d.pr.pc1);
  kd("w1", d.pr.w1);
  kd("m1", d.pr.m1);
  kd("tc2", d.pr.tc2);
  kd("pc2", d.pr.pc2);
  kd("w2", d.pr.w2);
  kd("m2", d.pr.m2);
  return o.str();
}

}  // namespace binmix
