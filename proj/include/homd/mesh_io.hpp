#pragma once

#include "homd/mesh.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace homd {

/// Raw parse result, not yet checked for manifoldness or orientation.
struct MeshData {
  Positions vertices;
  std::vector<Triangle> triangles;
  /// OBJ records other than v and f (vn, vt, g, usemtl, ...) that were skipped.
  int skipped_directives = 0;
};

// Parsers throw ParseError with the 1-based line of the offending record.
// Polygons are fan-triangulated from their first vertex.

/// `v x y z` and `f i j k ...` records. Indices are 1-based or negative
/// (relative to the vertices read so far); anything after a '/' is ignored.
MeshData read_obj(std::string_view text);
/// `OFF`, then `V F E`, then V coordinate rows and F rows `n i0 ... i(n-1)`.
MeshData read_off(std::string_view text);

// Canonical writers: fixed notation with at most 9 significant digits, no
// trailing zeros, LF endings, no comments. write(read(write(m))) reproduces
// write(m) byte for byte.
std::string write_obj(const Mesh& mesh);
std::string write_off(const Mesh& mesh);

/// Canonical text for one coordinate.
std::string format_coordinate(double value);

/// Reads or writes by extension (.obj or .off, any case). I/O failures and
/// unknown extensions throw Error(kIoError); parse failures throw ParseError.
/// `skipped`, when given, receives the number of skipped OBJ records.
Mesh read_mesh_file(const std::filesystem::path& path, int* skipped = nullptr);
void write_mesh_file(const std::filesystem::path& path, const Mesh& mesh);

}  // namespace homd
