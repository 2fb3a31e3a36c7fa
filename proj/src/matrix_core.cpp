#include "spectral/matrix_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "spectral/error.hpp"
#include "spectral/kernels.hpp"

namespace spectral {

int EmbeddingSet::num_classes() const {
  if (!labels || labels->empty()) return 0;
  return *std::max_element(labels->begin(), labels->end()) + 1;
}

void validate(const EmbeddingSet& e) {
  require(e.n() >= 2, "embedding set needs at least 2 samples");
  require(e.d() >= 1, "embedding set needs at least 1 dimension");
  const auto data = e.data.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data[i])) {
      std::ostringstream msg;
      msg << "non-finite value at row " << i / e.d() << ", column " << i % e.d();
      fail(Errc::data_quality, msg.str());
    }
  }
  if (!e.labels) return;
  require(e.labels->size() == e.n(), "label count does not match row count");
  const int c = e.num_classes();
  std::vector<char> seen(static_cast<std::size_t>(std::max(c, 0)), 0);
  for (int y : *e.labels) {
    require(y >= 0, "labels must be non-negative");
    seen[static_cast<std::size_t>(y)] = 1;
  }
  for (int k = 0; k < c; ++k)
    if (!seen[static_cast<std::size_t>(k)])
      fail(Errc::contract, "class " + std::to_string(k) + " has no samples");
}

EmbeddingSet center(const EmbeddingSet& e) {
  validate(e);
  EmbeddingSet out = e;
  const Vector means = kernels::column_means(out.data);
  kernels::subtract_row(out.data, means);
  return out;
}

EmbeddingSet center_within_classes(const EmbeddingSet& e) {
  validate(e);
  require(e.labels.has_value(), "per-class centering needs labels");
  const int c = e.num_classes();
  const std::size_t d = e.d();
  std::vector<Vector> sums(static_cast<std::size_t>(c), Vector(d, 0.0));
  std::vector<std::size_t> counts(static_cast<std::size_t>(c), 0);
  for (std::size_t r = 0; r < e.n(); ++r) {
    const auto y = static_cast<std::size_t>((*e.labels)[r]);
    ++counts[y];
    const auto row = e.data.row(r);
    for (std::size_t j = 0; j < d; ++j) sums[y][j] += row[j];
  }
  for (std::size_t y = 0; y < sums.size(); ++y)
    for (double& v : sums[y]) v /= double(counts[y]);
  EmbeddingSet out = e;
  for (std::size_t r = 0; r < out.n(); ++r) {
    const auto& mu = sums[static_cast<std::size_t>((*e.labels)[r])];
    auto row = out.data.row(r);
    for (std::size_t j = 0; j < d; ++j) row[j] -= mu[j];
  }
  return out;
}

CovarianceMatrix covariance(const EmbeddingSet& centered, Divisor divisor) {
  validate(centered);
  const Vector means = kernels::column_means(centered.data);
  const double scale = std::max(1.0, max_abs(centered.data));
  for (std::size_t j = 0; j < means.size(); ++j) {
    if (std::abs(means[j]) > 1e-8 * scale) {
      std::ostringstream msg;
      msg << "covariance input is not centered: column " << j << " has mean " << means[j];
      fail(Errc::contract, msg.str());
    }
  }
  const double n = double(centered.n());
  const double div = divisor == Divisor::population ? n : n - 1.0;
  return {kernels::gram(centered.data, div), divisor, centered.n()};
}

void fix_signs(Matrix& vectors) {
  for (std::size_t c = 0; c < vectors.cols(); ++c) {
    std::size_t best = 0;
    double best_abs = -1.0;
    for (std::size_t r = 0; r < vectors.rows(); ++r) {
      const double a = std::abs(vectors(r, c));
      if (a > best_abs) {
        best_abs = a;
        best = r;
      }
    }
    if (vectors(best, c) < 0.0)
      for (std::size_t r = 0; r < vectors.rows(); ++r) vectors(r, c) = -vectors(r, c);
  }
}

namespace {

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

// One Jacobi rotation zeroing a(p, q); see Golub & Van Loan, Alg. 8.5.1.
void rotate(Matrix& a, Matrix& v, std::size_t p, std::size_t q) {
  const double apq = a(p, q);
  if (apq == 0.0) return;
  const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
  const double t = tau >= 0.0 ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                              : -1.0 / (-tau + std::sqrt(1.0 + tau * tau));
  const double c = 1.0 / std::sqrt(1.0 + t * t);
  const double s = t * c;
  const std::size_t n = a.rows();
  for (std::size_t k = 0; k < n; ++k) {
    if (k == p || k == q) continue;
    const double akp = a(k, p);
    const double akq = a(k, q);
    a(k, p) = a(p, k) = c * akp - s * akq;
    a(k, q) = a(q, k) = s * akp + c * akq;
  }
  a(p, p) -= t * apq;
  a(q, q) += t * apq;
  a(p, q) = a(q, p) = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double vkp = v(k, p);
    const double vkq = v(k, q);
    v(k, p) = c * vkp - s * vkq;
    v(k, q) = s * vkp + c * vkq;
  }
}

}  // namespace

SymmetricEigen eigen_symmetric(const Matrix& m, double rel_tol, int max_sweeps) {
  require(m.rows() == m.cols(), "eigendecomposition needs a square matrix");
  const std::size_t n = m.rows();
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (m(i, j) + m(j, i));
  for (double x : a.data())
    if (!std::isfinite(x)) fail(Errc::data_quality, "non-finite entry in symmetric matrix");

  Matrix v = Matrix::identity(n);
  const double tol = rel_tol * frobenius_norm(a);
  int sweep = 0;
  double off = off_diagonal_norm(a);
  while (off > tol) {
    if (sweep == max_sweeps) {
      std::ostringstream msg;
      msg << "Jacobi eigensolver did not converge in " << max_sweeps
          << " sweeps; off-diagonal residual " << off << " > " << tol;
      fail(Errc::numerical, msg.str());
    }
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) rotate(a, v, p, q);
    ++sweep;
    off = off_diagonal_norm(a);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });
  SymmetricEigen out{Vector(n), Matrix(n, n), sweep};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = v(r, order[k]);
  }
  fix_signs(out.vectors);
  return out;
}

Spectrum eig_sym(const CovarianceMatrix& m) {
  const double scale = std::max(1.0, max_abs(m.entries));
  if (asymmetry(m.entries) > 1e-10 * scale)
    fail(Errc::contract, "covariance matrix is not symmetric");
  SymmetricEigen se = eigen_symmetric(m.entries);
  Spectrum s;
  s.raw_eigenvalues = se.values;
  s.eigenvalues = se.values;
  for (double& l : s.eigenvalues) l = std::max(l, 0.0);
  s.eigenvectors = std::move(se.vectors);
  s.source_n = m.source_n;
  return s;
}

double op_norm_sym_diff(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols() && a.rows() == a.cols(),
          "op_norm_sym_diff: dimension mismatch");
  const SymmetricEigen se = eigen_symmetric(a - b);
  if (se.values.empty()) return 0.0;
  return std::max(std::abs(se.values.front()), std::abs(se.values.back()));
}

PrincipalAngles principal_angles(const Matrix& ref_basis, const Matrix& test_basis,
                                 std::size_t k) {
  require(ref_basis.rows() == test_basis.rows(), "principal_angles: dimension mismatch");
  require(k >= 1 && k <= ref_basis.cols() && k <= test_basis.cols(),
          "principal_angles: k out of range");
  const std::size_t d = ref_basis.rows();
  Matrix a(d, k);
  Matrix b(d, k);
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < k; ++c) {
      a(r, c) = ref_basis(r, c);
      b(r, c) = test_basis(r, c);
    }
  // The sines are the singular values of the residual (I - AAᵀ)B, i.e. the
  // square roots of eig(I - MᵀM) with M = AᵀB, without the cancellation of
  // forming 1 - σ² for nearly aligned subspaces.
  const Matrix cross = a.transpose() * b;
  const Matrix residual = b - a * cross;
  const SymmetricEigen se = eigen_symmetric(residual.transpose() * residual);
  PrincipalAngles out;
  out.k = k;
  out.sines.resize(k);
  for (std::size_t j = 0; j < k; ++j)
    out.sines[j] = std::min(1.0, std::sqrt(std::max(0.0, se.values[k - 1 - j])));
  return out;
}

PrincipalAngles principal_angles(const Spectrum& ref, const Spectrum& test, std::size_t k) {
  return principal_angles(ref.eigenvectors, test.eigenvectors, k);
}

}  // namespace spectral
