#pragma once

// Deterministic dense linear algebra for embedding covariance spectra.
//
// The spectrum of an embedding matrix can be read either from the SVD of the
// centered data X or from the eigendecomposition of its covariance XᵀX/N: the
// right singular vectors of X are the covariance eigenvectors and
// λ_i = s_i² / N. This library standardizes on the covariance route.

#include <cstddef>
#include <optional>
#include <vector>

#include "spectral/matrix.hpp"

namespace spectral {

/// N×D embeddings (rows are samples) with optional class labels.
struct EmbeddingSet {
  Matrix data;
  std::optional<std::vector<int>> labels;

  std::size_t n() const noexcept { return data.rows(); }
  std::size_t d() const noexcept { return data.cols(); }
  /// Number of classes (max label + 1); 0 when unlabeled.
  int num_classes() const;
};

/// Checks N ≥ 2, D ≥ 1, finite data, and label coverage of [0, C).
void validate(const EmbeddingSet& e);

enum class Divisor { population, unbiased };

struct CovarianceMatrix {
  Matrix entries;
  Divisor divisor = Divisor::population;
  std::size_t source_n = 0;

  std::size_t d() const noexcept { return entries.rows(); }
};

struct Spectrum {
  Vector eigenvalues;      // non-increasing, clamped at 0
  Vector raw_eigenvalues;  // before clamping
  Matrix eigenvectors;     // column i pairs with eigenvalues[i]
  std::size_t source_n = 0;

  std::size_t d() const noexcept { return eigenvalues.size(); }
  Vector vector(std::size_t i) const { return eigenvectors.column(i); }
};

/// General symmetric eigendecomposition (values may be negative).
struct SymmetricEigen {
  Vector values;  // non-increasing
  Matrix vectors;
  int sweeps = 0;
};

struct PrincipalAngles {
  Vector sines;  // non-decreasing, each in [0, 1]
  std::size_t k = 0;

  double max_sine() const { return sines.empty() ? 0.0 : sines.back(); }
};

inline constexpr double kJacobiRelTol = 1e-12;
inline constexpr int kJacobiMaxSweeps = 100;

EmbeddingSet center(const EmbeddingSet& e);
/// Subtracts each class's own mean; the result is also globally centered.
EmbeddingSet center_within_classes(const EmbeddingSet& e);

CovarianceMatrix covariance(const EmbeddingSet& centered, Divisor divisor = Divisor::population);

/// Cyclic Jacobi on the symmetrized input. Eigenvectors are sign-fixed so the
/// largest-magnitude entry is non-negative (first such index on ties).
SymmetricEigen eigen_symmetric(const Matrix& m, double rel_tol = kJacobiRelTol,
                               int max_sweeps = kJacobiMaxSweeps);

Spectrum eig_sym(const CovarianceMatrix& m);

/// Spectral norm of a - b.
double op_norm_sym_diff(const Matrix& a, const Matrix& b);
inline double op_norm_sym_diff(const CovarianceMatrix& a, const CovarianceMatrix& b) {
  return op_norm_sym_diff(a.entries, b.entries);
}

/// Principal-angle sines between the leading-k eigenvector blocks.
PrincipalAngles principal_angles(const Spectrum& ref, const Spectrum& test, std::size_t k);
PrincipalAngles principal_angles(const Matrix& ref_basis, const Matrix& test_basis, std::size_t k);

/// Largest-magnitude entry made non-negative, in place, for every column.
void fix_signs(Matrix& vectors);

}  // namespace spectral
