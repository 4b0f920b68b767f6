#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "binmix/common.hpp"
#include "binmix/io_cli.hpp"

namespace binmix {

namespace {

std::string field_path(const std::string& prefix, const std::string& field) {
  return prefix + "_" + field + ".csv";
}

// Split "key=value" tokens of the header comment line.
void parse_header(const std::string& line, FieldFrame& f, const std::string& path) {
  std::istringstream in(line);
  std::string tok;
  in >> tok;  // leading '#'
  if (tok != "#") throw IoError("missing header line in " + path);
  bool have_name = false, have_nx = false, have_ny = false;
  while (in >> tok) {
    const std::size_t eq = tok.find('=');
    if (eq == std::string::npos)
      throw IoError("malformed header token '" + tok + "' in " + path);
    const std::string key = tok.substr(0, eq);
    const std::string val = tok.substr(eq + 1);
    try {
      if (key == "field") { f.name = val; have_name = true; }
      else if (key == "Nx") { f.nx = static_cast<int>(parse_double(val)); have_nx = true; }
      else if (key == "Ny") { f.ny = static_cast<int>(parse_double(val)); have_ny = true; }
      else if (key == "hx") f.hx = parse_double(val);
      else if (key == "hy") f.hy = parse_double(val);
      else if (key == "t") f.t = parse_double(val);
      else throw IoError("unknown header key '" + key + "' in " + path);
    } catch (const ConfigError& e) {
      throw IoError(std::string(e.what()) + " in " + path);
    }
  }
  if (!have_name || !have_nx || !have_ny)
    throw IoError("incomplete header in " + path);
}

}  // namespace

void write_field_csv(const std::string& path, const FieldFrame& f) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "# field=" << f.name << " Nx=" << f.nx << " Ny=" << f.ny
      << " hx=" << format_double(f.hx) << " hy=" << format_double(f.hy)
      << " t=" << format_double(f.t) << "\n";
  if (f.values.size() != static_cast<std::size_t>(f.nx) * f.ny)
    throw IoError("field frame size mismatch for " + path);
  for (int j = 0; j < f.ny; ++j) {
    for (int i = 0; i < f.nx; ++i) {
      if (i) out << ',';
      out << format_double(f.values[static_cast<std::size_t>(j) * f.nx + i]);
    }
    out << '\n';
  }
  if (!out) throw IoError("write failure on " + path);
}

FieldFrame read_field_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  FieldFrame f;
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty file " + path);
  parse_header(line, f, path);
  if (f.nx < 1 || f.ny < 1) throw IoError("bad extents in " + path);
  f.values.reserve(static_cast<std::size_t>(f.nx) * f.ny);
  while (std::getline(in, line)) {
    std::string_view rest = line;
    if (rest.empty()) continue;
    while (!rest.empty()) {
      const std::size_t comma = rest.find(',');
      const std::string_view cell =
          comma == std::string_view::npos ? rest : rest.substr(0, comma);
      try {
        f.values.push_back(parse_double(std::string(cell)));
      } catch (const ConfigError& e) {
        throw IoError(std::string(e.what()) + " in " + path);
      }
      rest = comma == std::string_view::npos ? std::string_view{}
                                             : rest.substr(comma + 1);
    }
  }
  if (f.values.size() != static_cast<std::size_t>(f.nx) * f.ny)
    throw IoError("value count does not match extents in " + path);
  return f;
}

// ============================================================================
// Snapshots
// ============================================================================

namespace {

FieldFrame cell_frame(const CellField& f, const std::string& name, double t) {
  const GridSpec& g = f.grid();
  FieldFrame fr{name, g.nx, g.ny, g.hx(), g.hy(), t, {}};
  fr.values.reserve(static_cast<std::size_t>(g.nx) * g.ny);
  for (int j = 1; j <= g.ny; ++j)
    for (int i = 1; i <= g.nx; ++i) fr.values.push_back(f(i, j));
  return fr;
}

FieldFrame xface_frame(const XFaceField& f, double t) {
  const GridSpec& g = f.grid();
  FieldFrame fr{"u", g.nx + 1, g.ny, g.hx(), g.hy(), t, {}};
  fr.values.reserve(static_cast<std::size_t>(g.nx + 1) * g.ny);
  for (int j = 1; j <= g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) fr.values.push_back(f(i, j));
  return fr;
}

FieldFrame yface_frame(const YFaceField& f, double t) {
  const GridSpec& g = f.grid();
  FieldFrame fr{"v", g.nx, g.ny + 1, g.hx(), g.hy(), t, {}};
  fr.values.reserve(static_cast<std::size_t>(g.nx) * (g.ny + 1));
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 1; i <= g.nx; ++i) fr.values.push_back(f(i, j));
  return fr;
}

void write_vtk(const State& s, const std::string& path) {
  const GridSpec& g = s.rho1.grid();
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "# vtk DataFile Version 3.0\n";
  out << "binmix snapshot t=" << format_double(s.t) << "\n";
  out << "ASCII\n";
  out << "DATASET STRUCTURED_POINTS\n";
  out << "DIMENSIONS " << g.nx + 1 << " " << g.ny + 1 << " 1\n";
  out << "ORIGIN 0 0 0\n";
  out << "SPACING " << format_double(g.hx()) << " " << format_double(g.hy())
      << " 1\n";
  out << "CELL_DATA " << static_cast<long>(g.nx) * g.ny << "\n";
  auto scalars = [&](const std::string& name, auto&& value) {
    out << "SCALARS " << name << " double 1\n";
    out << "LOOKUP_TABLE default\n";
    for (int j = 1; j <= g.ny; ++j) {
      for (int i = 1; i <= g.nx; ++i) {
        if (i > 1) out << ' ';
        out << format_double(value(i, j));
      }
      out << '\n';
    }
  };
  scalars("rho1", [&](int i, int j) { return s.rho1(i, j); });
  scalars("rho2", [&](int i, int j) { return s.rho2(i, j); });
  scalars("q1", [&](int i, int j) { return s.q1(i, j); });
  scalars("u", [&](int i, int j) { return 0.5 * (s.u(i - 1, j) + s.u(i, j)); });
  scalars("v", [&](int i, int j) { return 0.5 * (s.v(i, j - 1) + s.v(i, j)); });
  if (!out) throw IoError("write failure on " + path);
}

}  // namespace

void emit_snapshot(const State& s, const std::string& dir,
                   const std::string& format, const std::string& basename) {
  const std::string prefix = dir + "/" + basename;
  if (format == "csv") {
    write_field_csv(field_path(prefix, "rho1"), cell_frame(s.rho1, "rho1", s.t));
    write_field_csv(field_path(prefix, "rho2"), cell_frame(s.rho2, "rho2", s.t));
    write_field_csv(field_path(prefix, "q1"), cell_frame(s.q1, "q1", s.t));
    write_field_csv(field_path(prefix, "u"), xface_frame(s.u, s.t));
    write_field_csv(field_path(prefix, "v"), yface_frame(s.v, s.t));
  } else if (format == "vtk-legacy") {
    write_vtk(s, prefix + ".vtk");
  } else {
    throw ConfigError("unknown output format '" + format + "'");
  }
}

State load_snapshot(const std::string& prefix, const GridSpec& g) {
  auto check_cell = [&](const FieldFrame& f, const std::string& which) {
    if (f.nx != g.nx || f.ny != g.ny)
      throw ConfigError("snapshot field " + which + " has extents " +
                        std::to_string(f.nx) + " x " + std::to_string(f.ny) +
                        ", expected " + std::to_string(g.nx) + " x " +
                        std::to_string(g.ny));
  };
  auto scatter_cell = [&](const FieldFrame& f, CellField& out) {
    for (int j = 1; j <= g.ny; ++j)
      for (int i = 1; i <= g.nx; ++i)
        out(i, j) = f.values[static_cast<std::size_t>(j - 1) * g.nx + (i - 1)];
  };

  State s(g);
  const FieldFrame r1 = read_field_csv(field_path(prefix, "rho1"));
  const FieldFrame r2 = read_field_csv(field_path(prefix, "rho2"));
  check_cell(r1, "rho1");
  check_cell(r2, "rho2");
  scatter_cell(r1, s.rho1);
  scatter_cell(r2, s.rho2);
  s.t = r1.t;

  namespace fs = std::filesystem;
  if (fs::exists(field_path(prefix, "q1"))) {
    const FieldFrame q = read_field_csv(field_path(prefix, "q1"));
    check_cell(q, "q1");
    scatter_cell(q, s.q1);
  }
  if (fs::exists(field_path(prefix, "u"))) {
    const FieldFrame fu = read_field_csv(field_path(prefix, "u"));
    if (fu.nx != g.nx + 1 || fu.ny != g.ny)
      throw ConfigError("snapshot field u has wrong extents");
    for (int j = 1; j <= g.ny; ++j)
      for (int i = 0; i <= g.nx; ++i)
        s.u(i, j) = fu.values[static_cast<std::size_t>(j - 1) * (g.nx + 1) + i];
  }
  if (fs::exists(field_path(prefix, "v"))) {
    const FieldFrame fv = read_field_csv(field_path(prefix, "v"));
    if (fv.nx != g.nx || fv.ny != g.ny + 1)
      throw ConfigError("snapshot field v has wrong extents");
    for (int j = 0; j <= g.ny; ++j)
      for (int i = 1; i <= g.nx; ++i)
        s.v(i, j) = fv.values[static_cast<std::size_t>(j) * g.nx + (i - 1)];
  }

  apply_scalar_bc(s.rho1);
  apply_scalar_bc(s.rho2);
  apply_scalar_bc(s.q1);
  apply_no_slip(s.u);
  apply_no_slip(s.v);
  return s;
}

}  // namespace binmix
