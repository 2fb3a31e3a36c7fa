#include "spectral/kernels.hpp"

#include <cstdint>

#include "spectral/error.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace spectral::kernels {

namespace {

// Below this many flops the fork/join overhead dominates.
constexpr double kParallelThreshold = 1 << 15;

bool go_parallel(Exec exec, double work) {
#ifdef _OPENMP
  return exec == Exec::parallel && work >= kParallelThreshold && !omp_in_parallel();
#else
  (void)exec;
  (void)work;
  return false;
#endif
}

}  // namespace

int available_threads() {
#ifdef _OPENMP
  return omp_in_parallel() ? 1 : omp_get_max_threads();
#else
  return 1;
#endif
}

Vector column_means(const Matrix& x, Exec exec) {
  const auto n = static_cast<std::int64_t>(x.rows());
  const auto d = static_cast<std::int64_t>(x.cols());
  Vector means(x.cols(), 0.0);
  const bool par = go_parallel(exec, double(n) * double(d));
  // Per-column sums run down the rows in order, independent of threads.
#pragma omp parallel for schedule(static) if (par)
  for (std::int64_t c = 0; c < d; ++c) {
    double s = 0.0;
    for (std::int64_t r = 0; r < n; ++r) s += x(r, c);
    means[c] = s / double(n);
  }
  return means;
}

void subtract_row(Matrix& x, std::span<const double> means, Exec exec) {
  require(means.size() == x.cols(), "mean vector length mismatch");
  const auto n = static_cast<std::int64_t>(x.rows());
  const bool par = go_parallel(exec, double(n) * double(x.cols()));
#pragma omp parallel for schedule(static) if (par)
  for (std::int64_t r = 0; r < n; ++r) {
    auto row = x.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] -= means[c];
  }
}

Matrix gram(const Matrix& x, double divisor, Exec exec) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  Matrix out(d, d);
  if (exec == Exec::serial) {
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i; j < d; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += x(k, i) * x(k, j);
        out(i, j) = s / divisor;
        out(j, i) = out(i, j);
      }
    return out;
  }

  // Column-major copy makes each entry a contiguous dot product.
  const Matrix xt = x.transpose();
  const auto dd = static_cast<std::int64_t>(d);
  const bool par = go_parallel(exec, double(n) * double(d) * double(d) / 2.0);
#pragma omp parallel for schedule(dynamic, 1) if (par)
  for (std::int64_t i = 0; i < dd; ++i) {
    const auto ci = xt.row(i);
    for (std::int64_t j = i; j < dd; ++j) {
      const auto cj = xt.row(j);
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += ci[k] * cj[k];
      out(i, j) = s / divisor;
      out(j, i) = out(i, j);
    }
  }
  return out;
}

Vector project(const Matrix& x, std::span<const double> w, Exec exec) {
  require(w.size() == x.cols(), "projection vector length mismatch");
  const auto n = static_cast<std::int64_t>(x.rows());
  Vector scores(x.rows());
  if (exec == Exec::serial) {
    for (std::int64_t r = 0; r < n; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < x.cols(); ++c) s += x(r, c) * w[c];
      scores[r] = s;
    }
    return scores;
  }
  const bool par = go_parallel(exec, double(n) * double(x.cols()));
#pragma omp parallel for schedule(static) if (par)
  for (std::int64_t r = 0; r < n; ++r) scores[r] = dot(x.row(r), w);
  return scores;
}

Matrix affine_rows(const Matrix& z, const Matrix& a, std::span<const double> offset,
                   Exec exec) {
  require(a.cols() == z.cols() && offset.size() == a.rows(), "affine_rows shape mismatch");
  const auto n = static_cast<std::int64_t>(z.rows());
  const std::size_t d_out = a.rows();
  Matrix out(z.rows(), d_out);
  if (exec == Exec::serial) {
    for (std::int64_t r = 0; r < n; ++r)
      for (std::size_t i = 0; i < d_out; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * z(r, k);
        out(r, i) = offset[i] + s;
      }
    return out;
  }
  const bool par = go_parallel(exec, double(n) * double(d_out) * double(a.cols()));
#pragma omp parallel for schedule(static) if (par)
  for (std::int64_t r = 0; r < n; ++r) {
    const auto zr = z.row(r);
    for (std::size_t i = 0; i < d_out; ++i) out(r, i) = offset[i] + dot(a.row(i), zr);
  }
  return out;
}

}  // namespace spectral::kernels
