#pragma once

#include "pneutop/mesh_domain.hpp"
#include "pneutop/types.hpp"

#include <filesystem>
#include <string>

namespace pneutop {

/// Writes through a temporary file in the same directory and renames it
/// into place. Creates missing parent directories.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

/// Element field as nely rows of nelx values, top row first, in shortest
/// round-trip decimal form.
std::string density_matrix_text(int nelx, int nely, const Vector& field);

struct DensityMatrix {
    int nelx = 0;
    int nely = 0;
    Vector values;  // column-major element numbering
};

/// Inverse of density_matrix_text. Lines starting with '#' are skipped.
/// Throws ConfigError on ragged rows or non-numeric entries.
DensityMatrix parse_density_matrix(const std::string& text);

/// Binary greyscale PGM (P5), value round(255 (1 - rho)), top row first.
std::string density_pgm(int nelx, int nely, const Vector& field);

/// Legacy ASCII VTK STRUCTURED_POINTS with nodal pressure, nodal
/// displacement vectors and cell densities. Empty vectors are omitted.
std::string fields_vtk(const DomainModel& domain, const Vector& rho_bar, const Vector& pressure,
                       const Vector& displacement, const std::string& title);

} // namespace pneutop
