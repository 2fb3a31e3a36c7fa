#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>

#include "doctest.h"
#include "spectral/matrix_core.hpp"
#include "test_util.hpp"

using namespace spectral;
using namespace testutil;

namespace {

EmbeddingSet set_of(std::size_t n, std::size_t d, std::vector<double> values) {
  return EmbeddingSet{Matrix(n, d, std::move(values)), std::nullopt};
}

Matrix reconstruct(const Vector& values, const Matrix& v) {
  return v * Matrix::diagonal(values) * v.transpose();
}

double orthonormality_error(const Matrix& v) { return max_abs(v.transpose() * v - Matrix::identity(v.cols())); }

// Basis whose columns are the given vectors (each of length d).
Matrix basis(std::size_t d, std::vector<Vector> cols) {
  Matrix m(d, cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c) m.set_column(c, cols[c]);
  return m;
}

}  // namespace

TEST_CASE("center subtracts column means") {
  const EmbeddingSet c = center(set_of(2, 2, {1, 3, 3, 5}));
  CHECK(c.data == Matrix(2, 2, {-1, -1, 1, 1}));

  const EmbeddingSet again = center(c);
  CHECK(max_abs(again.data - c.data) <= 1e-12);

  const EmbeddingSet constant = center(set_of(4, 3, {1, 2, 3, 1, 2, 3, 1, 2, 3, 1, 2, 3}));
  CHECK(max_abs(constant.data) == 0.0);
}

TEST_CASE("center keeps labels and zeroes means on random data") {
  EmbeddingSet e{random_matrix(50, 7, 11), std::vector<int>(50, 0)};
  for (std::size_t i = 25; i < 50; ++i) (*e.labels)[i] = 1;
  const EmbeddingSet c = center(e);
  REQUIRE(c.labels);
  CHECK(*c.labels == *e.labels);
  for (std::size_t j = 0; j < 7; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < 50; ++i) mean += c.data(i, j);
    CHECK(std::abs(mean / 50.0) <= 1e-12);
  }
}

TEST_CASE("validate rejects bad embedding sets") {
  CHECK_ERRC(center(set_of(2, 1, {1.0, std::numeric_limits<double>::quiet_NaN()})), Errc::data_quality);
  CHECK_ERRC(center(set_of(2, 1, {1.0, std::numeric_limits<double>::infinity()})), Errc::data_quality);
  CHECK_ERRC(center(set_of(1, 2, {1.0, 2.0})), Errc::contract);
  EmbeddingSet gap{Matrix(3, 1, {1, 2, 3}), std::vector<int>{0, 2, 2}};  // class 1 missing
  CHECK_ERRC(validate(gap), Errc::contract);
  EmbeddingSet short_labels{Matrix(3, 1, {1, 2, 3}), std::vector<int>{0, 1}};
  CHECK_ERRC(validate(short_labels), Errc::contract);
}

TEST_CASE("center_within_classes removes each class mean") {
  EmbeddingSet e{Matrix(4, 1, {1, 3, 10, 14}), std::vector<int>{0, 0, 1, 1}};
  const EmbeddingSet c = center_within_classes(e);
  CHECK(c.data == Matrix(4, 1, {-1, 1, -2, 2}));
}

TEST_CASE("covariance examples") {
  const CovarianceMatrix c = covariance(set_of(2, 2, {1, -1, -1, 1}));
  CHECK(c.entries == Matrix(2, 2, {1, -1, -1, 1}));
  CHECK(c.source_n == 2);

  CHECK(max_abs(covariance(set_of(3, 2, {0, 0, 0, 0, 0, 0})).entries) == 0.0);

  // Orthogonal centered columns of norm √N give the identity.
  const CovarianceMatrix id = covariance(set_of(4, 2, {1, 1, -1, 1, 1, -1, -1, -1}));
  CHECK(max_abs(id.entries - Matrix::identity(2)) <= 1e-15);

  const CovarianceMatrix unbiased = covariance(set_of(2, 2, {1, -1, -1, 1}), Divisor::unbiased);
  CHECK(unbiased.entries == Matrix(2, 2, {2, -2, -2, 2}));

  CHECK_ERRC(covariance(set_of(2, 1, {1.0, 2.0})), Errc::contract);
}

TEST_CASE("eig_sym examples") {
  const Spectrum d = eig_sym(cov_of(Matrix::diagonal(Vector{3, 1})));
  CHECK(d.eigenvalues == Vector{3, 1});
  CHECK(max_abs(d.eigenvectors - Matrix::identity(2)) == 0.0);

  const Spectrum s = eig_sym(cov_of(Matrix(2, 2, {1, -1, -1, 1})));
  CHECK(s.eigenvalues[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(std::abs(s.eigenvalues[1]) <= 1e-15);
  // Largest-magnitude entries tie; the first one is made non-negative.
  CHECK(s.eigenvectors(0, 0) == doctest::Approx(std::numbers::sqrt2 / 2).epsilon(1e-14));
  CHECK(s.eigenvectors(1, 0) == doctest::Approx(-std::numbers::sqrt2 / 2).epsilon(1e-14));

  const Matrix m = random_spd(8, 3);
  const Spectrum r = eig_sym(cov_of(m));
  CHECK(frobenius_norm(reconstruct(r.eigenvalues, r.eigenvectors) - m) / frobenius_norm(m) <= 1e-8);
}

TEST_CASE("symmetric eigendecomposition properties against Eigen") {
  for (std::size_t d : {1u, 2u, 3u, 5u, 8u, 16u, 33u, 64u}) {
    CAPTURE(d);
    const Matrix m = random_symmetric(d, 100 + d);
    const SymmetricEigen se = eigen_symmetric(m);
    CHECK(frobenius_norm(reconstruct(se.values, se.vectors) - m) / frobenius_norm(m) <= 1e-8);
    CHECK(orthonormality_error(se.vectors) <= 1e-10);
    double trace = 0.0, sum = 0.0;
    for (std::size_t i = 0; i < d; ++i) trace += m(i, i), sum += se.values[i];
    CHECK(std::abs(sum - trace) <= 1e-9 * std::max(1.0, std::abs(trace)));
    for (std::size_t i = 1; i < d; ++i) CHECK(se.values[i] <= se.values[i - 1]);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> oracle(to_eigen(m));
    const Eigen::VectorXd ev = oracle.eigenvalues();  // ascending
    for (std::size_t i = 0; i < d; ++i)
      CHECK(std::abs(se.values[i] - ev(Eigen::Index(d - 1 - i))) <= 1e-12 * frobenius_norm(m));
  }
}

TEST_CASE("eig_sym on covariances: clamping, sign convention, determinism") {
  const Matrix x = random_matrix(10, 20, 5);  // N < D: rank-deficient covariance
  const CovarianceMatrix c = covariance(center(EmbeddingSet{x, std::nullopt}));
  const Spectrum s = eig_sym(c);
  for (std::size_t i = 0; i < s.d(); ++i) {
    CHECK(s.eigenvalues[i] >= 0.0);
    CHECK(s.raw_eigenvalues[i] >= -1e-10 * s.eigenvalues[0]);
    std::size_t arg = 0;
    for (std::size_t r = 1; r < s.d(); ++r)
      if (std::abs(s.eigenvectors(r, i)) > std::abs(s.eigenvectors(arg, i))) arg = r;
    CHECK(s.eigenvectors(arg, i) >= 0.0);
  }
  CHECK(orthonormality_error(s.eigenvectors) <= 1e-10);
  const Spectrum again = eig_sym(c);
  CHECK(again.eigenvalues == s.eigenvalues);
  CHECK(again.eigenvectors == s.eigenvectors);
}

TEST_CASE("eig_sym rejects asymmetric input and reports non-convergence") {
  Matrix m = random_spd(4, 9);
  m(0, 1) += 1e-3;
  CHECK_ERRC(eig_sym(cov_of(m)), Errc::contract);

  try {
    (void)eigen_symmetric(random_symmetric(16, 4), 1e-12, 1);
    FAIL("expected a convergence failure");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::numerical);
    CHECK(std::string(e.what()).find("residual") != std::string::npos);
  }
}

TEST_CASE("op_norm_sym_diff") {
  const Matrix a = random_spd(6, 21);
  CHECK(op_norm_sym_diff(a, a) == 0.0);
  CHECK(op_norm_sym_diff(Matrix::diagonal(Vector{1, 2}), Matrix::identity(2)) == doctest::Approx(1.0));

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix x = random_symmetric(7, 3 * seed), y = random_symmetric(7, 3 * seed + 1),
                 z = random_symmetric(7, 3 * seed + 2);
    const double xy = op_norm_sym_diff(x, y);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> oracle(to_eigen(x - y));
    CHECK(std::abs(xy - oracle.eigenvalues().cwiseAbs().maxCoeff()) <= 1e-10);
    CHECK(xy == op_norm_sym_diff(y, x));
    CHECK(op_norm_sym_diff(x, z) <= xy + op_norm_sym_diff(y, z) + 1e-12);
  }
  CHECK_ERRC(op_norm_sym_diff(Matrix::identity(2), Matrix::identity(3)), Errc::contract);
}

TEST_CASE("principal_angles examples") {
  const Matrix e1 = basis(2, {{1, 0}});
  const Matrix e2 = basis(2, {{0, 1}});
  const Matrix diag = basis(2, {{std::numbers::sqrt2 / 2, std::numbers::sqrt2 / 2}});
  CHECK(principal_angles(e1, e1, 1).max_sine() == doctest::Approx(0.0));
  CHECK(principal_angles(e1, e2, 1).max_sine() == doctest::Approx(1.0));
  CHECK(principal_angles(e1, diag, 1).max_sine() == doctest::Approx(0.70710678118654752).epsilon(1e-12));

  const Spectrum s = eig_sym(cov_of(random_spd(5, 8)));
  const PrincipalAngles same = principal_angles(s, s, 3);
  CHECK(same.sines.size() == 3);
  CHECK(same.max_sine() <= 1e-12);
  CHECK_ERRC(principal_angles(s, s, 0), Errc::contract);
  CHECK_ERRC(principal_angles(s, s, 6), Errc::contract);
}

TEST_CASE("principal_angles: invariances and agreement with the cross-Gram formula") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const std::size_t d = 9, k = 1 + seed % 4;
    const Spectrum a = eig_sym(cov_of(random_spd(d, 50 + seed)));
    const Spectrum b = eig_sym(cov_of(random_spd(d, 70 + seed)));
    const PrincipalAngles pa = principal_angles(a, b, k);
    for (std::size_t i = 0; i < k; ++i) {
      CHECK(pa.sines[i] >= 0.0);
      CHECK(pa.sines[i] <= 1.0);
      if (i > 0) CHECK(pa.sines[i] >= pa.sines[i - 1]);
    }

    Matrix flipped = b.eigenvectors;
    for (std::size_t r = 0; r < d; ++r) flipped(r, 0) = -flipped(r, 0);
    const PrincipalAngles pf = principal_angles(a.eigenvectors, flipped, k);
    for (std::size_t i = 0; i < k; ++i) CHECK(std::abs(pf.sines[i] - pa.sines[i]) <= 1e-12);

    // Cross-Gram route: sines = √(1 − σ²) from the SVD of AᵀB.
    const Eigen::MatrixXd ea = to_eigen(a.eigenvectors).leftCols(Eigen::Index(k));
    const Eigen::MatrixXd eb = to_eigen(b.eigenvectors).leftCols(Eigen::Index(k));
    const Eigen::VectorXd sigma = Eigen::JacobiSVD<Eigen::MatrixXd>(ea.transpose() * eb).singularValues();
    for (std::size_t i = 0; i < k; ++i) {
      const double cross = std::sqrt(std::max(0.0, 1.0 - sigma(Eigen::Index(i)) * sigma(Eigen::Index(i))));
      CHECK(std::abs(pa.sines[i] - cross) <= 1e-7);
    }
  }
}

TEST_CASE("principal_angles: rotation within a subspace leaves angles unchanged") {
  const Spectrum a = eig_sym(cov_of(random_spd(6, 31)));
  const Spectrum b = eig_sym(cov_of(random_spd(6, 32)));
  const double t = 0.7;
  Matrix rotated = b.eigenvectors;
  for (std::size_t r = 0; r < 6; ++r) {
    rotated(r, 0) = std::cos(t) * b.eigenvectors(r, 0) - std::sin(t) * b.eigenvectors(r, 1);
    rotated(r, 1) = std::sin(t) * b.eigenvectors(r, 0) + std::cos(t) * b.eigenvectors(r, 1);
  }
  const PrincipalAngles p0 = principal_angles(a.eigenvectors, b.eigenvectors, 2);
  const PrincipalAngles p1 = principal_angles(a.eigenvectors, rotated, 2);
  for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(p0.sines[i] - p1.sines[i]) <= 1e-12);
}
