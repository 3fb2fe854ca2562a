#pragma once

// Field persistence. CSV rows are (index, coordinates, value) written with 17
// significant digits. Binary files are flat little-endian f64 node values with
// a JSON sidecar <path>.json holding {dim, n, h, shape}.

#include <filesystem>

#include "perimeter_phase/energy.hpp"

namespace perimeter_phase {

enum class FieldFormat { csv, binary };

/// ".csv" selects CSV; ".bin" and ".f64" select binary. Throws config_error otherwise.
FieldFormat field_format_for(const std::filesystem::path& path);

void write_field(const ScalarField& field, const std::filesystem::path& path);
void write_field(const ScalarField& field, const std::filesystem::path& path, FieldFormat format);

/// Binary files carry their own domain; when `expected` is given it must
/// describe the same grid. CSV files need `expected` and must list its nodes
/// in order. Throws io_error on unreadable or inconsistent files.
ScalarField read_field(const std::filesystem::path& path, DomainPtr expected = nullptr);

}  // namespace perimeter_phase
