#pragma once

// Matrix files.
//
// CSV: UTF-8, comma separated, optional single header row, one sample per
// row. Values are written with 17 significant digits so they read back
// exactly.
//
// Binary ("SPL1"): the 4 magic bytes, row count and column count as
// little-endian uint64, then rows×cols little-endian IEEE-754 doubles in
// row-major order.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "spectral/matrix.hpp"

namespace spectral::io {

enum class MatrixFormat { csv, bin };

Matrix read_matrix(const std::string& path);
Matrix read_matrix_csv(std::istream& in, const std::string& name = "<stream>");
Matrix read_matrix_bin(std::istream& in, const std::string& name = "<stream>");

void write_matrix(const std::string& path, const Matrix& m, MatrixFormat format);
void write_matrix_csv(std::ostream& out, const Matrix& m);
void write_matrix_bin(std::ostream& out, const Matrix& m);

/// One non-negative integer per line; a non-numeric first line is a header.
std::vector<int> read_labels(const std::string& path);
void write_labels(const std::string& path, const std::vector<int>& labels);

/// FNV-1a over the binary encoding of the values, so CSV and binary files
/// holding the same numbers share a digest.
std::string matrix_digest(const Matrix& m);
std::string labels_digest(const std::vector<int>& labels);
std::string text_digest(const std::string& text);

/// %.17g
std::string format_double(double v);

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

}  // namespace spectral::io
