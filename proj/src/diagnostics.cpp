#include "spectral/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "spectral/error.hpp"
#include "spectral/rng.hpp"

namespace spectral {

namespace {

bool valid_mode(double lambda, double threshold) { return lambda > 0.0 && lambda > threshold; }

EmbeddingSet rows_of(const EmbeddingSet& e, std::span<const std::size_t> idx) {
  EmbeddingSet out{Matrix(idx.size(), e.d()), std::nullopt};
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const auto src = e.data.row(idx[r]);
    std::copy(src.begin(), src.end(), out.data.row(r).begin());
  }
  return out;
}

}  // namespace

std::string to_string(FloorMethod m) { return m == FloorMethod::theory ? "theory" : "split_half"; }

FloorMethod floor_method_from_string(const std::string& s) {
  if (s == "theory") return FloorMethod::theory;
  if (s == "split_half" || s == "split-half") return FloorMethod::split_half;
  fail(Errc::config, "unknown noise-floor method '" + s + "' (expected theory or split_half)");
}

FitResult linear_fit(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), "linear_fit: length mismatch");
  require(x.size() >= 2, "linear_fit: need at least 2 points");
  const double n = double(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0, ymax = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
    ymax = std::max(ymax, std::abs(dy));
  }
  require(sxx > 0.0, "linear_fit: predictor is constant");
  FitResult fit;
  fit.points = x.size();
  if (ymax <= 1e-14 * std::max(1.0, std::abs(my))) {
    fit.slope = 0.0;
    fit.intercept = my;
    return fit;
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
  return fit;
}

double pinv_threshold(std::span<const double> lambdas) {
  if (lambdas.empty()) return 0.0;
  return std::max(lambdas.front(), 0.0) * kPinvCutoff;
}

std::size_t effective_rank(const Spectrum& s, double variance_fraction) {
  require(variance_fraction > 0.0 && variance_fraction <= 1.0,
          "variance fraction must lie in (0, 1]");
  const double total = std::accumulate(s.eigenvalues.begin(), s.eigenvalues.end(), 0.0);
  require(total > 0.0, "effective rank is undefined for an all-zero spectrum");
  // Cumulative sums carry rounding; a 1e-12 relative slack keeps exact
  // fractions such as 19/20 from landing one mode late.
  const double target = variance_fraction * total - 1e-12 * total;
  double cum = 0.0;
  for (std::size_t m = 0; m < s.eigenvalues.size(); ++m) {
    cum += s.eigenvalues[m];
    if (cum >= target) return m + 1;
  }
  return s.eigenvalues.size();
}

Vector class_mean_difference(const EmbeddingSet& e, Contrast contrast) {
  require(e.labels.has_value(), "class contrast needs labels");
  require(e.labels->size() == e.n(), "label count does not match row count");
  const std::size_t d = e.d();
  Vector pos(d, 0.0), neg(d, 0.0);
  std::size_t n_pos = 0, n_neg = 0;
  for (std::size_t r = 0; r < e.n(); ++r) {
    const int y = (*e.labels)[r];
    Vector* target = nullptr;
    if (y == contrast.cls) {
      target = &pos;
      ++n_pos;
    } else if (!contrast.other || y == *contrast.other) {
      target = &neg;
      ++n_neg;
    }
    if (!target) continue;
    const auto row = e.data.row(r);
    for (std::size_t j = 0; j < d; ++j) (*target)[j] += row[j];
  }
  if (n_pos == 0 || n_neg == 0)
    fail(Errc::contract, "class " + std::to_string(contrast.cls) +
                             " contrast needs at least one sample on each side");
  Vector diff(d);
  for (std::size_t j = 0; j < d; ++j) diff[j] = pos[j] / double(n_pos) - neg[j] / double(n_neg);
  return diff;
}

SignalDecomposition signal_decomposition(const Spectrum& s, std::span<const double> difference,
                                         Contrast contrast) {
  require(difference.size() == s.d(), "mean-difference length does not match spectrum");
  SignalDecomposition sd;
  sd.lambdas = s.eigenvalues;
  sd.difference.assign(difference.begin(), difference.end());
  sd.contrast = contrast;
  const std::size_t d = s.d();
  sd.alphas.resize(d);
  sd.alphas_sq.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    double a = 0.0;
    for (std::size_t r = 0; r < d; ++r) a += s.eigenvectors(r, i) * difference[r];
    sd.alphas[i] = a;
    sd.alphas_sq[i] = a * a;
  }
  const double thr = pinv_threshold(sd.lambdas);
  sd.modes = static_cast<std::size_t>(std::count_if(
      sd.lambdas.begin(), sd.lambdas.end(), [&](double l) { return valid_mode(l, thr); }));
  return sd;
}

SignalDecomposition signal_decomposition(const Spectrum& s, const EmbeddingSet& e,
                                         Contrast contrast) {
  const Vector diff = class_mean_difference(e, contrast);
  return signal_decomposition(s, diff, contrast);
}

std::size_t structural_dimensionality(const SignalDecomposition& sd, double tau) {
  require(tau > 0.0, "tau must be positive");
  const double thr = pinv_threshold(sd.lambdas);
  std::size_t count = 0;
  for (std::size_t i = 0; i < sd.lambdas.size(); ++i)
    if (valid_mode(sd.lambdas[i], thr) && sd.alphas_sq[i] / sd.lambdas[i] >= tau) ++count;
  return count;
}

NoiseFloor noise_floor_theory(const Spectrum& s, double c0) {
  require(s.source_n > 0, "noise floor needs the spectrum's sample count");
  require(c0 >= 0.0, "c0 must be non-negative");
  const double lambda1 = s.eigenvalues.empty() ? 0.0 : s.eigenvalues.front();
  NoiseFloor nf;
  nf.method = FloorMethod::theory;
  nf.c0 = c0;
  nf.value = c0 * lambda1 * std::sqrt(double(s.d()) / double(s.source_n));
  return nf;
}

NoiseFloor noise_floor_split_half(const EmbeddingSet& half_a, const EmbeddingSet& half_b) {
  require(half_a.d() == half_b.d(), "split halves differ in dimension");
  const CovarianceMatrix ca = covariance(center(half_a));
  const CovarianceMatrix cb = covariance(center(half_b));
  NoiseFloor nf;
  nf.method = FloorMethod::split_half;
  nf.value = op_norm_sym_diff(ca, cb) / 2.0;
  return nf;
}

NoiseFloor noise_floor_split_half(const EmbeddingSet& e, std::uint64_t seed) {
  require(e.n() >= 4, "split-half noise floor needs N >= 4");
  Rng rng(seed);
  const auto perm = permutation(e.n(), rng);
  const std::size_t h = e.n() / 2;
  const std::span<const std::size_t> all(perm);
  NoiseFloor nf = noise_floor_split_half(rows_of(e, all.first(h)), rows_of(e, all.subspan(h, h)));
  nf.seed = seed;
  return nf;
}

std::size_t recoverable_dimension(std::span<const double> lambdas, double floor) {
  std::size_t k = 0;
  for (double l : lambdas) {
    if (!(l > 0.0 && l >= floor)) break;
    ++k;
  }
  return k;
}

std::size_t recoverable_dimension(const Spectrum& s, const NoiseFloor& nf) {
  return recoverable_dimension(s.eigenvalues, nf.value);
}

SlopeFit spectral_slope(std::span<const double> lambdas, std::size_t first, std::size_t last) {
  require(first >= 1 && first <= last && last <= lambdas.size(), "fit range out of bounds");
  const double thr = std::max(lambdas.front(), 0.0) * kFitCutoff;
  Vector x, y;
  for (std::size_t i = first; i <= last; ++i) {
    const double l = lambdas[i - 1];
    if (l > 0.0 && l > thr) {
      x.push_back(std::log(double(i)));
      y.push_back(std::log(l));
    }
  }
  if (x.size() < 3)
    fail(Errc::contract, "spectral slope needs at least 3 non-negligible modes in range " +
                             std::to_string(first) + ".." + std::to_string(last));
  const FitResult fit = linear_fit(x, y);
  return {fit.slope == 0.0 ? 0.0 : -fit.slope, fit.r_squared, first, last, x.size()};
}

SlopeFit spectral_slope(const Spectrum& s, std::size_t first, std::size_t last) {
  return spectral_slope(s.eigenvalues, first, last);
}

SlopeFit spectral_slope(const Spectrum& s, std::size_t recoverable) {
  const std::size_t last = std::min(s.d(), std::max<std::size_t>(5, recoverable));
  return spectral_slope(s.eigenvalues, 1, last);
}

double truncated_zeta(double beta, std::size_t K) {
  require(K >= 1, "truncated zeta needs K >= 1");
  double sum = 0.0;
  for (std::size_t i = K; i >= 1; --i) sum += std::pow(double(i), -beta);
  return sum;
}

bool zeta_converges(double beta) noexcept { return beta > 1.0 + 1e-6; }

double riemann_zeta(double beta) {
  if (!zeta_converges(beta))
    fail(Errc::contract, "zeta(" + std::to_string(beta) + ") diverges (harmonic regime, beta <= 1)");
  // Euler-Maclaurin with the partial sum to M and the first Bernoulli
  // correction; the remainder is O(M^(-beta-3)).
  constexpr double M = 100000.0;
  const double partial = truncated_zeta(beta, static_cast<std::size_t>(M));
  return partial + std::pow(M, 1.0 - beta) / (beta - 1.0) - 0.5 * std::pow(M, -beta) +
         beta * std::pow(M, -beta - 1.0) / 12.0;
}

double eigengap(std::span<const double> lambdas, std::size_t k) {
  require(k >= 1 && k < lambdas.size(), "eigengap index k out of range");
  return lambdas[k - 1] - lambdas[k];
}

double davis_kahan_bound(double op_err, std::span<const double> lambdas, std::size_t k) {
  require(op_err >= 0.0, "operator-norm error must be non-negative");
  const double gap = eigengap(lambdas, k);
  if (gap <= 1e-14) return 1.0;
  return std::min(1.0, 2.0 * op_err / gap);
}

double davis_kahan_bound(double op_err, const Spectrum& reference, std::size_t k) {
  return davis_kahan_bound(op_err, reference.eigenvalues, k);
}

}  // namespace spectral
