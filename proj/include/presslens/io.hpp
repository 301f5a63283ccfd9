#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "presslens/fem.hpp"
#include "presslens/time_series.hpp"

namespace presslens::io {

namespace fs = std::filesystem;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file refers to a mesh whose checksum differs from the one supplied.
class ChecksumError : public IoError {
 public:
  using IoError::IoError;
};

/// Shortest decimal string that reads back to the same double.
std::string format_double(double x);

void write_mesh(const fs::path& path, const TriangleMesh& mesh);
/// Reads a mesh file and checks its stored checksum against the rebuilt mesh.
MeshPtr read_mesh(const fs::path& path);

void write_field(const fs::path& path, const ScalarField& f);
void write_field(const fs::path& path, const VectorField& f);
void write_field(const fs::path& path, const DualFunctional& f);
ScalarField read_scalar_field(const fs::path& path, const MeshPtr& mesh);
VectorField read_vector_field(const fs::path& path, const MeshPtr& mesh);
DualFunctional read_dual_functional(const fs::path& path, const MeshPtr& mesh);

/// Directory with series.json (a, b, M, kind, mesh checksum, file list) and one field file per node.
template <class F>
void write_series(const fs::path& dir, const TimeSeries<F>& s);
template <class F>
TimeSeries<F> read_series(const fs::path& dir, const MeshPtr& mesh);

/// "scalar", "vector" or "dual" as stored in a field file or series.json.
std::string field_kind(const fs::path& path);

/// Legacy ASCII VTK unstructured grid with the field as POINT_DATA (vector fields at vertices).
void write_vtk(const fs::path& path, const ScalarField& f, const std::string& name = "p");
void write_vtk(const fs::path& path, const VectorField& f, const std::string& name = "u");

void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);

}  // namespace presslens::io
