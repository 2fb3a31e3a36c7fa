#pragma once

// Post-hoc spectral calibration by tail splicing.
//
// The leading K eigenvalues are kept; every later eigenvalue is replaced by
// the power law c·i^(-β), with c = λ̂_K·K^β so the tail passes through the
// last kept eigenvalue. Total variance is not renormalized.
// Unlike Wiener filtering, which shrinks data coefficients by their SNR,
// this acts only on the covariance spectrum; no Wiener mode is provided.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "spectral/diagnostics.hpp"
#include "spectral/separation.hpp"

namespace spectral {

struct CalibratedSpectrum {
  Vector eigenvalues;
  Matrix eigenvectors;
  std::size_t source_n = 0;
  std::size_t K = 0;
  double beta = 0.0;
  double c = 0.0;
  bool k_auto = false;
  bool beta_auto = false;
  bool beta_floored = false;
  std::optional<SlopeFit> beta_fit;
  double trace_raw = 0.0;
  double trace_calibrated = 0.0;
  std::vector<std::string> warnings;

  std::size_t d() const noexcept { return eigenvalues.size(); }
  /// Same eigenvectors with the calibrated eigenvalues.
  Spectrum as_spectrum() const;
};

/// Explicit splice: 1 ≤ K < D, β ≥ 0.
CalibratedSpectrum calibrate(const Spectrum& s, std::size_t K, double beta);

/// Empty K: K = recoverable_dimension(s, floor). Empty β: slope fitted over
/// modes 1..max(K, 3), floored at 0. Throws calibration_refused when K = 0.
/// When every mode is recoverable the result is the unmodified spectrum.
CalibratedSpectrum calibrate(const Spectrum& s, std::optional<std::size_t> K,
                             std::optional<double> beta, const NoiseFloor& floor);

MahalanobisResult calibrated_mahalanobis(const SignalDecomposition& sd,
                                         const CalibratedSpectrum& cs);

Vector calibrated_fisher(const Spectrum& s, const CalibratedSpectrum& cs, std::span<const double> d);

}  // namespace spectral
