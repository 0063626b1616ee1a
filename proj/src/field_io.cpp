#include "rdafront/field_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "rdafront/error.hpp"

namespace rdafront {

namespace {

constexpr const char* kStage = "harness.export_field";

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, kStage, "cannot open '" + path.string() + "' for writing");
  return out;
}

void check_written(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error(ErrorKind::Io, kStage, "write failed for '" + path.string() + "'");
}

}  // namespace

ExportFormat parse_export_format(const std::string& tag) {
  if (tag == "fld1") return ExportFormat::Fld1;
  if (tag == "csv") return ExportFormat::Csv;
  if (tag == "vtk") return ExportFormat::Vtk;
  throw Error(ErrorKind::InvalidArgument, kStage, "unknown format tag '" + tag + "'");
}

const char* extension(ExportFormat format) {
  switch (format) {
    case ExportFormat::Fld1: return ".fld";
    case ExportFormat::Csv: return ".csv";
    case ExportFormat::Vtk: return ".vtk";
  }
  return "";
}

void write_fld1(const std::filesystem::path& path, const FieldFile& f) {
  if (f.values.size() != static_cast<std::size_t>(f.nx) * f.ny * f.nz) {
    throw Error(ErrorKind::InvalidArgument, kStage, "FLD1 value count does not match header");
  }
  auto out = open_out(path);
  out << "FLD1 " << f.nx << ' ' << f.ny << ' ' << f.nz << ' ' << fmt17(f.x0) << ' ' << fmt17(f.L) << ' '
      << fmt17(f.y0) << ' ' << fmt17(f.M) << ' ' << fmt17(f.a) << ' ' << fmt17(f.t) << '\n';
  for (double v : f.values) out << fmt17(v) << '\n';
  check_written(out, path);
}

FieldFile read_fld1(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "harness.read_fld1", "cannot open '" + path.string() + "'");
  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  std::string magic;
  FieldFile f;
  hs >> magic >> f.nx >> f.ny >> f.nz >> f.x0 >> f.L >> f.y0 >> f.M >> f.a >> f.t;
  if (magic != "FLD1" || !hs || f.nx < 1 || f.ny < 1 || f.nz < 1) {
    throw Error(ErrorKind::Io, "harness.read_fld1", "malformed FLD1 header in '" + path.string() + "'");
  }
  const std::size_t n = static_cast<std::size_t>(f.nx) * f.ny * f.nz;
  f.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(in >> f.values[i])) {
      throw Error(ErrorKind::Io, "harness.read_fld1",
                  "expected " + std::to_string(n) + " values, got " + std::to_string(i));
    }
  }
  return f;
}

FieldFile to_field_file(const ScalarField3D& field, double t) {
  const Grid3D& g = field.grid();
  FieldFile f{g.nx(), g.ny(), g.nz(), g.x0(), g.L(), g.y0(), g.M(), g.a(), t, {}};
  f.values.assign(field.values().begin(), field.values().end());
  return f;
}

ScalarField3D from_field_file(const FieldFile& f) {
  return ScalarField3D(Grid3D(f.nx, f.ny, f.nz, f.x0, f.L, f.y0, f.M, f.a), f.values);
}

void write_csv(const std::filesystem::path& path, const ScalarField3D& field) {
  const Grid3D& g = field.grid();
  auto out = open_out(path);
  out << "x,y,z,value\n";
  for (int k = 0; k < g.nz(); ++k)
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i)
        out << fmt17(g.x(i)) << ',' << fmt17(g.y(j)) << ',' << fmt17(g.z(k)) << ',' << fmt17(field.at(i, j, k))
            << '\n';
  check_written(out, path);
}

void write_vtk(const std::filesystem::path& path, const ScalarField3D& field, const std::string& name) {
  const Grid3D& g = field.grid();
  auto out = open_out(path);
  out << "# vtk DataFile Version 3.0\n"
      << "rdafront field " << name << "\n"
      << "ASCII\n"
      << "DATASET STRUCTURED_POINTS\n"
      << "DIMENSIONS " << g.nx() << ' ' << g.ny() << ' ' << g.nz() << '\n'
      << "ORIGIN " << fmt17(g.x0()) << ' ' << fmt17(g.y0()) << " 0\n"
      << "SPACING " << fmt17(g.hx()) << ' ' << fmt17(g.hy()) << ' ' << fmt17(g.hz()) << '\n'
      << "POINT_DATA " << g.size() << '\n'
      << "SCALARS " << name << " double 1\n"
      << "LOOKUP_TABLE default\n";
  for (double v : field.values()) out << fmt17(v) << '\n';
  check_written(out, path);
}

void export_field(const ScalarField3D& field, ExportFormat format, const std::filesystem::path& path, double t) {
  switch (format) {
    case ExportFormat::Fld1: write_fld1(path, to_field_file(field, t)); break;
    case ExportFormat::Csv: write_csv(path, field); break;
    case ExportFormat::Vtk: write_vtk(path, field); break;
  }
}

}  // namespace rdafront
