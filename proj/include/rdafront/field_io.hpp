#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rdafront/grid.hpp"

namespace rdafront {

/// Contents of an FLD1 file. nz may be 1 for front-surface snapshots.
struct FieldFile {
  int nx = 0, ny = 0, nz = 0;
  double x0 = 0, L = 0, y0 = 0, M = 0, a = 0, t = 0;
  std::vector<double> values;
};

enum class ExportFormat { Fld1, Csv, Vtk };

/// Accepts "fld1", "csv" or "vtk"; anything else is an InvalidArgument error.
ExportFormat parse_export_format(const std::string& tag);
const char* extension(ExportFormat format);

// FLD1: header line "FLD1 nx ny nz x0 L y0 M a t", then one value per line,
// x fastest, printed with 17 significant digits.
void write_fld1(const std::filesystem::path& path, const FieldFile& file);
FieldFile read_fld1(const std::filesystem::path& path);

FieldFile to_field_file(const ScalarField3D& field, double t);
ScalarField3D from_field_file(const FieldFile& file);

void write_csv(const std::filesystem::path& path, const ScalarField3D& field);
/// Legacy structured-points text readable by common viewers.
void write_vtk(const std::filesystem::path& path, const ScalarField3D& field, const std::string& name = "u");

void export_field(const ScalarField3D& field, ExportFormat format, const std::filesystem::path& path, double t = 0.0);

}  // namespace rdafront
