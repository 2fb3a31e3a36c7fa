#pragma once

// Data-parallel inner loops. Every kernel has a serial reference and an
// OpenMP variant; both accumulate each output entry in the same index order,
// so their results are bit-identical for any thread count.

#include <span>

#include "spectral/matrix.hpp"

namespace spectral::kernels {

enum class Exec { serial, parallel };

/// Column means of an N×D matrix.
Vector column_means(const Matrix& x, Exec exec = Exec::parallel);

/// x(r, c) -= means[c] for every row.
void subtract_row(Matrix& x, std::span<const double> means, Exec exec = Exec::parallel);

/// XᵀX / divisor, exactly symmetric.
Matrix gram(const Matrix& x, double divisor, Exec exec = Exec::parallel);

/// scores[r] = x.row(r) · w
Vector project(const Matrix& x, std::span<const double> w, Exec exec = Exec::parallel);

/// out.row(r) = offset + A · z.row(r) for symmetric or general A (D×D).
Matrix affine_rows(const Matrix& z, const Matrix& a, std::span<const double> offset,
                   Exec exec = Exec::parallel);

/// Number of OpenMP threads a parallel kernel would use here (1 inside an
/// active parallel region or without OpenMP).
int available_threads();

}  // namespace spectral::kernels
