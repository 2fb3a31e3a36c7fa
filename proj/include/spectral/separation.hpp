#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "spectral/diagnostics.hpp"

namespace spectral {

struct MahalanobisResult {
  double full_energy = 0.0;       // d_M² over all valid modes
  double truncated_energy = 0.0;  // d_M²(N) over valid modes 1..K
  Vector per_mode;                // α_i²/λ_i, 0 for invalid modes
  std::size_t K_used = 0;
  std::size_t valid_modes = 0;
};

/// Spectral Mahalanobis energy. `K` empty means all valid modes.
MahalanobisResult mahalanobis_energy(const SignalDecomposition& sd,
                                     std::optional<std::size_t> K = std::nullopt);

/// Spectral pseudo-inverse Σ⁺d, optionally truncated to the leading K modes.
Vector fisher_direction(const Spectrum& s, std::span<const double> d,
                        std::optional<std::size_t> K = std::nullopt);

double normal_cdf(double x);

/// Φ(d_M / 2), the textbook link between d_M and AUC. For two Gaussians
/// with shared covariance this is the accuracy of the midpoint threshold on
/// the Fisher score, not its ROC-AUC; see binormal_auc.
double gaussian_auc(double d_m_squared);

/// Φ(d_M / √2): ROC-AUC of the Fisher score for two Gaussians with shared
/// covariance (the score difference of a random pair is N(d_M², 2·d_M²)).
double binormal_auc(double d_m_squared);

/// Mann-Whitney AUC with half credit for ties.
double roc_auc(std::span<const double> scores_pos, std::span<const double> scores_neg);

struct OvrAuc {
  double macro = 0.0;
  Vector per_class;
};

/// scores(r, c) is the class-c score of sample r.
OvrAuc macro_ovr_auc(const Matrix& scores, std::span<const int> labels);

}  // namespace spectral
