#pragma once

// Everything between the solver core and the command line: the sectioned
// key = value configuration format, characteristic-scale reduction of
// physical parameters, initial-condition presets, snapshot / diagnostics
// emission, the stepping loop with its failure records, the refinement
// harness, and CSV emitters for the linear-mode diagnostics.

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "binmix/analysis.hpp"
#include "binmix/energy.hpp"
#include "binmix/grid.hpp"
#include "binmix/scheme.hpp"
#include "binmix/solver.hpp"

namespace binmix {

// ============================================================================
// Configuration
// ============================================================================

struct EnergySpec {
  std::string type = "double-well";  // double-well | flory-huggins | peng-robinson
  FloryHugginsParams fh;
  PengRobinsonParams pr;
  SampleBox box;                 // admissible-state box for shift sampling
  bool box_set = false;          // whether the config supplied a box
  std::optional<double> shift;   // explicit quadratization shift
  bool kappa_molar = false;      // [model] kappa values are in molar variables
};

struct InitSpec {
  std::string preset = "accuracy";  // accuracy | fh-perturb | pr-droplet | from-file
  double base1 = 0.5;
  double base2 = 0.5;
  std::optional<double> amplitude;   // default 0.01 (accuracy) / 0.005 (fh-perturb)
  std::optional<double> wavenumber;  // default 2*pi (accuracy) / 10*pi (fh-perturb)
  double droplet_r1 = 1.0;           // mean radius of the lobed droplet
  double droplet_r2 = 0.2;           // lobe amplitude
  int droplet_lobes = 8;
  double n1_liquid = 3.8146;
  double n1_gas = 0.0265;
  double n2_liquid = 3.5132;
  double n2_gas = 7.1339;
  std::string file;                  // snapshot prefix for preset = from-file
  unsigned long seed = 0;            // reserved; presets are deterministic
};

struct OutputSpec {
  std::string dir = "out";
  long snapshot_every = 100;
  std::string format = "csv";  // csv | vtk-legacy
  bool diagnostics = true;
};

// Optional full-scale overrides selected by --full-scale.
struct FullScaleSpec {
  std::optional<int> nx, ny;
  std::optional<double> dt, t_end;
};

struct RunConfig {
  GridSpec grid{128, 128, 1.0, 1.0};
  TimeParams time;
  double t_end = 1.0;
  ModelParams model;
  EnergySpec energy;
  InitSpec init;
  SolverConfig solver;
  OutputSpec output;
  FullScaleSpec full;
};

// Parse the sectioned key = value text; unknown sections or keys are hard
// errors (ConfigError), as are malformed values.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);  // IoError on unreadable file
// Emit every set key in a fixed order with 17-significant-digit numbers so
// that parse(serialize(c)) reproduces c exactly.
std::string serialize_config(const RunConfig& c);
void validate_config(const RunConfig& c);  // ConfigError on violations
// Promote the [grid]/[time] *_full overrides into the active fields.
void apply_full_scale(RunConfig& c);

// Instantiated energy model plus model parameters with the gradient-energy
// coefficients converted to mass form when the config declared molar ones.
struct ResolvedSetup {
  std::unique_ptr<EnergyModel> energy;
  ModelParams params;
};
ResolvedSetup resolve_setup(const RunConfig& c);

// ============================================================================
// Characteristic scales
// ============================================================================

struct CharacteristicScales {
  double t0 = 1.0;     // s
  double l0 = 1.0;     // m
  double rho0 = 1.0;   // kg m^-d
  double n0 = 1.0;     // mol m^-d
  double temp0 = 1.0;  // K
};

struct PhysicalParams {
  double mobility = 0.0;      // m^2 s^-1
  double shear_visc1 = 0.0;   // Pa s
  double shear_visc2 = 0.0;
  double bulk_visc1 = 0.0;
  double bulk_visc2 = 0.0;
  std::array<double, 3> kappa{0.0, 0.0, 0.0};
  bool kappa_molar = true;    // coordinates of the kappa values above
  double temperature = 0.0;   // K
  double r_gas = 8.3144598;   // J mol^-1 K^-1
  double molar_mass1 = 1.0;   // kg mol^-1
  double molar_mass2 = 1.0;
  double tc1 = 0.0, pc1 = 0.0, w1 = 0.0;  // critical data (K, Pa, acentric)
  double tc2 = 0.0, pc2 = 0.0, w2 = 0.0;
};

struct DimensionlessSet {
  ModelParams model;                    // mobility, Reynolds numbers, mass kappas
  std::array<double, 3> kappa_molar{};  // molar-form kappas (when input molar)
  PengRobinsonParams pr;                // reduced gas constant, T, critical data
};

// Apply the scaling rules; throws ConfigError on nonpositive scales.
DimensionlessSet nondimensionalize(const CharacteristicScales& s,
                                   const PhysicalParams& p);
CharacteristicScales parse_scales(const std::string& text);
PhysicalParams parse_physical(const std::string& text);
std::string format_dimensionless(const DimensionlessSet& d);

// ============================================================================
// Initial conditions
// ============================================================================

// Build the preset initial state: densities sampled at cell centers,
// velocities zero (or loaded), q1 from the quadratization, boundary ghosts
// filled.  Throws ConfigError (unknown preset) or PositivityError
// (inadmissible densities).
State make_initial(const RunConfig& c, const EnergyModel& model);

// ============================================================================
// Field and text output
// ============================================================================

// Scientific notation with 17 significant digits; round-trips any double.
std::string format_double(double v);
double parse_double(const std::string& s);  // ConfigError on malformed text

struct FieldFrame {
  std::string name;
  int nx = 0, ny = 0;   // stored extents (faces included for u, v)
  double hx = 0.0, hy = 0.0, t = 0.0;
  std::vector<double> values;  // row-major, ny rows of nx values
};

void write_field_csv(const std::string& path, const FieldFrame& f);
FieldFrame read_field_csv(const std::string& path);

// Write one snapshot under dir with the given basename: CSV emits
// <basename>_<field>.csv per field (rho1, rho2, q1, u, v; u spans
// (nx+1) x ny faces, v spans nx x (ny+1)); vtk-legacy emits <basename>.vtk
// with cell data (face fields averaged to centers).
void emit_snapshot(const State& s, const std::string& dir,
                   const std::string& format, const std::string& basename);

// Load the cell and face fields written by a CSV snapshot with this prefix;
// u/v files are optional (zero velocity when absent).
State load_snapshot(const std::string& prefix, const GridSpec& g);

// ============================================================================
// Run loop
// ============================================================================

struct RunResult {
  long steps = 0;
  double final_time = 0.0;
  double final_energy = 0.0;
  long precond_rebuilds = 0;
  long total_iterations = 0;
};

// Step the configured problem to t_end, writing diagnostics.csv (one row per
// step: step, time, energy, mass1, mass2, amplitude, iterations), periodic
// snapshots, and a copy of the effective config.  The output directory is
// owned exclusively via a lock file for the duration.  On solver or
// positivity failure an abort checkpoint plus failure.json are written and
// the error is rethrown for the caller to map to an exit status.
RunResult run(const RunConfig& c);

// ============================================================================
// Refinement harness
// ============================================================================

struct RefinementRow {
  double level = 0.0;  // dt (time axis) or cell count N (space axis)
  double err1 = 0.0, err2 = 0.0, errv = 0.0;  // consecutive-difference norms
  double ord1 = 0.0, ord2 = 0.0, ordv = 0.0;  // observed orders (0 when n/a)
};

// axis = "time": levels are dts, each half the previous, same grid.
// axis = "space": levels are N (nx = ny), each double the previous, fixed dt;
// fine solutions are restricted to the coarse grid by cell averaging.
// Throws ConfigError for fewer than 3 levels or non-nested ratios.
std::vector<RefinementRow> refinement_study(const RunConfig& base,
                                            const std::string& axis,
                                            const std::vector<double>& levels);
std::string format_refinement_table(const std::vector<RefinementRow>& rows,
                                    const std::string& axis);

// 2:1 restriction operators used by the spatial study (exposed for tests).
CellField restrict_cell(const CellField& fine);
XFaceField restrict_xface(const XFaceField& fine);
YFaceField restrict_yface(const YFaceField& fine);

// ============================================================================
// Linear-mode CSV emitters
// ============================================================================

// Rows: k, alpha_max, re/im of the three coupled modes, transverse root.
std::string dispersion_csv(const RunConfig& c, double kmin, double kmax,
                           int samples);

// Tangent-plane-shifted bulk energy h_m(n1, n2) over the admissible molar box
// on an n x n grid, with the reference chemical potentials taken at the
// configured bulk gas state.  Peng-Robinson configs only.
std::string eqcontour_csv(const RunConfig& c, int n);

}  // namespace binmix
