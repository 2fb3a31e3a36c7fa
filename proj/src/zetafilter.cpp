#include "spectral/zetafilter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spectral/error.hpp"

namespace spectral {

Spectrum CalibratedSpectrum::as_spectrum() const {
  Spectrum s;
  s.eigenvalues = eigenvalues;
  s.raw_eigenvalues = eigenvalues;
  s.eigenvectors = eigenvectors;
  s.source_n = source_n;
  return s;
}

CalibratedSpectrum calibrate(const Spectrum& s, std::size_t K, double beta) {
  const std::size_t d = s.d();
  if (K == 0) fail(Errc::calibration_refused, "no recoverable modes (K = 0); calibration refused");
  require(K < d, "zeta filter needs K < D (K = " + std::to_string(K) + ", D = " +
                     std::to_string(d) + ")");
  require(std::isfinite(beta) && beta >= 0.0, "zeta filter needs beta >= 0");
  const double anchor = s.eigenvalues[K - 1];
  if (!(anchor > 0.0))
    fail(Errc::calibration_refused, "eigenvalue at splice index K is not positive");

  CalibratedSpectrum cs;
  cs.eigenvalues = s.eigenvalues;
  cs.eigenvectors = s.eigenvectors;
  cs.source_n = s.source_n;
  cs.K = K;
  cs.beta = beta;
  cs.c = anchor * std::pow(double(K), beta);
  for (std::size_t i = K + 1; i <= d; ++i) cs.eigenvalues[i - 1] = cs.c * std::pow(double(i), -beta);
  cs.trace_raw = std::accumulate(s.eigenvalues.begin(), s.eigenvalues.end(), 0.0);
  cs.trace_calibrated = std::accumulate(cs.eigenvalues.begin(), cs.eigenvalues.end(), 0.0);
  return cs;
}

CalibratedSpectrum calibrate(const Spectrum& s, std::optional<std::size_t> K,
                             std::optional<double> beta, const NoiseFloor& floor) {
  const std::size_t d = s.d();
  const std::size_t k = K.value_or(recoverable_dimension(s, floor));
  if (k == 0) fail(Errc::calibration_refused, "no recoverable modes (K = 0); calibration refused");

  std::vector<std::string> warnings;
  double b = 0.0;
  std::optional<SlopeFit> fit;
  bool floored = false;
  if (beta) {
    b = *beta;
  } else {
    const std::size_t last = std::min(d, std::max<std::size_t>(k, 3));
    try {
      fit = spectral_slope(s, 1, last);
      b = fit->beta;
    } catch (const Error& e) {
      warnings.push_back(std::string("beta fit failed (") + e.what() + "); using beta = 0");
      b = 0.0;
      floored = true;
    }
    if (fit && b <= 0.0) {
      warnings.push_back("fitted beta " + std::to_string(b) + " <= 0; floored to 0 (flat tail)");
      b = 0.0;
      floored = true;
    }
  }

  CalibratedSpectrum cs;
  if (k >= d && !K) {
    // Every mode is above the floor: nothing to replace.
    cs.eigenvalues = s.eigenvalues;
    cs.eigenvectors = s.eigenvectors;
    cs.source_n = s.source_n;
    cs.K = d;
    cs.beta = b;
    cs.c = s.eigenvalues[d - 1] * std::pow(double(d), b);
    cs.trace_raw = cs.trace_calibrated =
        std::accumulate(s.eigenvalues.begin(), s.eigenvalues.end(), 0.0);
    warnings.push_back("all modes recoverable; spectrum left unchanged");
  } else {
    cs = calibrate(s, k, b);
  }
  cs.k_auto = !K.has_value();
  cs.beta_auto = !beta.has_value();
  cs.beta_floored = floored;
  cs.beta_fit = fit;
  cs.warnings = std::move(warnings);
  return cs;
}

MahalanobisResult calibrated_mahalanobis(const SignalDecomposition& sd,
                                         const CalibratedSpectrum& cs) {
  require(sd.alphas_sq.size() == cs.d(), "calibrated spectrum and decomposition differ in D");
  MahalanobisResult out;
  out.per_mode.resize(cs.d());
  for (std::size_t i = 0; i < cs.d(); ++i) {
    const double l = cs.eigenvalues[i];
    require(l > 0.0, "calibrated eigenvalue is not positive");
    out.per_mode[i] = sd.alphas_sq[i] / l;
    out.full_energy += out.per_mode[i];
  }
  out.truncated_energy = out.full_energy;
  out.K_used = cs.d();
  out.valid_modes = cs.d();
  return out;
}

Vector calibrated_fisher(const Spectrum& s, const CalibratedSpectrum& cs, std::span<const double> d) {
  const std::size_t dim = s.d();
  require(cs.d() == dim && d.size() == dim, "calibrated_fisher: dimension mismatch");
  Vector w(dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) {
    const double l = cs.eigenvalues[i];
    if (!(l > 0.0)) fail(Errc::contract, "calibrated eigenvalue is not positive");
    double alpha = 0.0;
    for (std::size_t r = 0; r < dim; ++r) alpha += s.eigenvectors(r, i) * d[r];
    const double coef = alpha / l;
    for (std::size_t r = 0; r < dim; ++r) w[r] += coef * s.eigenvectors(r, i);
  }
  return w;
}

}  // namespace spectral
