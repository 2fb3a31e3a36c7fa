#pragma once

// End-to-end assembly of the diagnostics report and the Fisher classifier.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spectral/diagnostics.hpp"
#include "spectral/separation.hpp"
#include "spectral/zetafilter.hpp"

namespace spectral {

enum class Centering { global, per_class };

std::string to_string(Centering c);
Centering centering_from_string(const std::string& s);

inline constexpr std::uint64_t kDefaultSeed = 20260416;

struct DiagnosticsConfig {
  double variance_fraction = kDefaultVarianceFraction;
  double tau = kDefaultTau;
  FloorMethod floor_method = FloorMethod::theory;
  double c0 = kDefaultC0;
  std::uint64_t seed = kDefaultSeed;
  Centering centering = Centering::global;
  /// Empty means 1..min(5, D-1).
  std::vector<std::size_t> k_list;
  std::optional<std::size_t> zeta_K;
  std::optional<double> zeta_beta;
  /// 1-based inclusive; empty means 1..max(5, K(N)).
  std::optional<std::pair<std::size_t, std::size_t>> fit_range;
};

/// Centers (globally or per class), forms the population-divisor covariance
/// and decomposes it.
Spectrum embedding_spectrum(const EmbeddingSet& e, Centering centering);

NoiseFloor estimate_noise_floor(const Spectrum& s, const EmbeddingSet& e,
                                const DiagnosticsConfig& cfg);

struct ClassBlock {
  int class_id = 0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  std::size_t k_of_N = 0;
  MahalanobisResult energy;
  std::optional<double> calibrated_energy;
  Vector alphas_sq;
};

struct StabilityRow {
  std::size_t k = 0;
  double eigengap = 0.0;
  double bound = 0.0;
};

struct DiagnosticsReport {
  std::size_t n = 0;
  std::size_t d = 0;
  int num_classes = 0;
  DiagnosticsConfig config;
  Spectrum spectrum;
  std::size_t effective_rank = 0;
  std::size_t K_of_N = 0;
  NoiseFloor noise_floor;
  std::optional<SlopeFit> beta_fit;
  std::optional<double> truncated_zeta;
  std::optional<double> zeta;  // empty when divergent or β unavailable
  std::vector<StabilityRow> stability;
  std::string gap_source = "empirical";
  std::vector<ClassBlock> classes;
  std::optional<double> k_of_N_mean;
  std::optional<double> energy_mean;  // mean truncated d_M² over classes
  std::optional<CalibratedSpectrum> calibration;
  std::optional<std::string> calibration_refused;
  std::vector<std::string> warnings;
};

/// `reference` supplies eigengaps when a population or data-rich spectrum is
/// known; otherwise the empirical spectrum is used.
DiagnosticsReport diagnose(const EmbeddingSet& e, const DiagnosticsConfig& cfg,
                           const Spectrum* reference = nullptr);

struct ClassifyResult {
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::size_t d = 0;
  int num_classes = 0;
  NoiseFloor noise_floor;
  OvrAuc raw;
  std::optional<OvrAuc> calibrated;
  std::optional<CalibratedSpectrum> calibration;
  std::optional<std::string> calibration_refused;
};

/// Fisher directions from the training spectrum (one-vs-rest), scored on the
/// test set. With `use_calibration` the zeta-filtered spectrum is also used.
ClassifyResult classify(const EmbeddingSet& train, const EmbeddingSet& test,
                        const DiagnosticsConfig& cfg, bool use_calibration);

}  // namespace spectral
