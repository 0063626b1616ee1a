#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "rdafront/error.hpp"
#include "rdafront/field_io.hpp"

using namespace rdafront;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "rdafront_test_field_io";
  fs::create_directories(dir);
  return dir / name;
}

ScalarField3D random_field(const Grid3D& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1e3, 1e3);
  std::vector<double> v(g.size());
  for (auto& x : v) x = d(rng) * std::exp(d(rng) / 100.0);
  return ScalarField3D(g, v);
}

std::size_t count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) ++n;
  return n;
}

}  // namespace

TEST_CASE("FLD1 round trip is exact") {
  const Grid3D g(5, 3, 4, -1.0, 2.0, -0.5, 1.5, 0.75);
  const auto f = random_field(g, 42);
  const auto path = scratch("rt.fld1");
  write_fld1(path, to_field_file(f, 0.125));
  const FieldFile back = read_fld1(path);
  CHECK(back.nx == 5);
  CHECK(back.ny == 3);
  CHECK(back.nz == 4);
  CHECK(back.t == 0.125);
  const auto g2 = from_field_file(back);
  CHECK(g2.grid() == g);
  double maxdiff = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) maxdiff = std::max(maxdiff, std::fabs(g2[i] - f[i]));
  CHECK(maxdiff == 0.0);
}

TEST_CASE("FLD1 header layout") {
  const Grid3D g(2, 2, 2, 0, 1, 0, 1, 1);
  const auto path = scratch("hdr.fld1");
  write_fld1(path, to_field_file(ScalarField3D::constant(g, 0.5), 0.0));
  std::ifstream in(path);
  std::string tag;
  in >> tag;
  CHECK(tag == "FLD1");
  CHECK(count_lines(path) == 1 + g.size());
}

TEST_CASE("FLD1 surface files with nz = 1 are accepted") {
  FieldFile f;
  f.nx = 4;
  f.ny = 4;
  f.nz = 1;
  f.L = f.M = 1.0;
  f.values.assign(16, 0.25);
  const auto path = scratch("surf.fld1");
  write_fld1(path, f);
  const FieldFile back = read_fld1(path);
  CHECK(back.nz == 1);
  CHECK(back.values.size() == 16u);
}

TEST_CASE("FLD1 read errors") {
  CHECK_THROWS_AS(read_fld1(scratch("missing-file.fld1")), Error);
  const auto bad = scratch("bad.fld1");
  {
    std::ofstream out(bad);
    out << "FLD1 2 2 2 0 1 0 1 1 0\n1\n2\n";
  }
  CHECK_THROWS_AS(read_fld1(bad), Error);
  const auto junk = scratch("junk.fld1");
  {
    std::ofstream out(junk);
    out << "NOPE\n";
  }
  CHECK_THROWS_AS(read_fld1(junk), Error);
}

TEST_CASE("CSV has one row per node plus a header") {
  const Grid3D g(3, 4, 5, 0, 1, 0, 1, 1);
  const auto path = scratch("f.csv");
  write_csv(path, random_field(g, 7));
  CHECK(count_lines(path) == g.size() + 1);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "x,y,z,value");
}

TEST_CASE("legacy structured-points export") {
  const Grid3D g(3, 2, 4, -1, 2, 0, 1, 1);
  const auto path = scratch("f.vtk");
  export_field(random_field(g, 9), ExportFormat::Vtk, path);
  std::ifstream in(path);
  std::string first;
  std::getline(in, first);
  CHECK(first == "# vtk DataFile Version 3.0");
  CHECK(count_lines(path) == 10 + g.size());
}

TEST_CASE("format tags") {
  CHECK(parse_export_format("fld1") == ExportFormat::Fld1);
  CHECK(parse_export_format("csv") == ExportFormat::Csv);
  CHECK(parse_export_format("vtk") == ExportFormat::Vtk);
  CHECK_THROWS_AS(parse_export_format("hdf5"), Error);
  CHECK(std::string(extension(ExportFormat::Csv)) == ".csv");
}

TEST_CASE("write to an unwritable path reports the path") {
  const Grid3D g(2, 2, 2, 0, 1, 0, 1, 1);
  try {
    write_csv("/nonexistent-dir/x/y.csv", ScalarField3D::constant(g, 1.0));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Io);
    CHECK(std::string(e.what()).find("/nonexistent-dir/x/y.csv") != std::string::npos);
  }
}
