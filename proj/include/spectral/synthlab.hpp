#pragma once

// Gaussian two-class populations with a known power-law covariance and a
// seeded Monte-Carlo sweep over sample sizes.
//
// Population: Σ = U·diag(i^-β)·Uᵀ with U a seeded random orthogonal basis,
// class means ∓d/2 with d = Σ a_i·u_i. Leading modes with a_i = 0 carry the
// most variance and none of the signal; they play the role of nuisance
// directions that dominate the embedding without separating the classes.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spectral/diagnostics.hpp"
#include "spectral/pipeline.hpp"

namespace spectral {

struct SyntheticSpec {
  std::size_t dim = 64;
  double beta = 2.0;
  Vector signal;  // a_i, length ≤ dim, zero-padded
  std::size_t n_per_class = 1000;  // held-out test draws per class
  std::uint64_t rotation_seed = 1;
  std::uint64_t noise_seed = kDefaultSeed;
};

void validate(const SyntheticSpec& spec);

struct Population {
  CovarianceMatrix sigma;
  Matrix sqrt_sigma;
  Spectrum spectrum;
  Vector difference;  // μ₁ − μ₀
  Vector mu0;
  Vector mu1;
  double dm2 = 0.0;  // Σ a_i² i^β
};

Population gen_population(const SyntheticSpec& spec);

/// Seed of the (N, trial, stream) draw; stream 0 is the training sample.
std::uint64_t stream_seed(std::uint64_t noise_seed, std::size_t n, std::size_t trial,
                          std::uint64_t stream = 0);

/// N/2 samples per class (class 0 rows first). Odd N is rounded down per
/// class and reported through `warning` when given.
EmbeddingSet sample(const SyntheticSpec& spec, const Population& pop, std::size_t n,
                    std::size_t trial, std::uint64_t stream = 0, std::string* warning = nullptr);
EmbeddingSet sample(const SyntheticSpec& spec, std::size_t n, std::size_t trial);
EmbeddingSet sample_seeded(const SyntheticSpec& spec, const Population& pop, std::size_t n,
                           std::uint64_t seed, std::string* warning = nullptr);

struct SweepConfig {
  std::vector<std::size_t> n_grid;
  std::size_t trials = 20;
  std::vector<std::size_t> k_list = {1, 2, 3, 4};
  double variance_fraction = kDefaultVarianceFraction;
  double tau = kDefaultTau;
  FloorMethod floor_method = FloorMethod::theory;
  double c0 = kDefaultC0;
  std::optional<std::size_t> zeta_K;
  std::optional<double> zeta_beta;
  /// When set, principal angles and eigengaps use a data-rich sample of this
  /// size instead of the exact population basis.
  std::optional<std::size_t> reference_n;
  int workers = 1;
};

struct ModeRecord {
  double lambda = 0.0;
  double alpha_sq = 0.0;
};

struct KRecord {
  std::size_t k = 0;
  double sin_theta = 0.0;
  double eigengap = 0.0;
  double dk_bound = 0.0;
  bool applicable = false;  // eigengap > 2·op_err
};

struct SweepRow {
  std::size_t n = 0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::string status = "ok";
  double effective_rank = 0.0;
  double K_of_N = 0.0;
  double k_of_N_class0 = 0.0;
  double k_of_N_class1 = 0.0;
  double beta = 0.0;
  double beta_r2 = 0.0;
  double me_full = 0.0;
  double me_truncated = 0.0;
  double me_calibrated = 0.0;
  double noise_floor = 0.0;
  double op_err = 0.0;
  double lambda1 = 0.0;
  double auc_raw = 0.0;
  double auc_calibrated = 0.0;
  std::string calibration = "applied";
  double zeta_K = 0.0;
  double zeta_beta = 0.0;
  double zeta_c = 0.0;
  std::vector<KRecord> ks;
  std::vector<ModeRecord> modes;

  bool ok() const { return status == "ok"; }
};

struct SweepResult {
  SyntheticSpec spec;
  SweepConfig config;
  std::uint64_t master_seed = 0;
  double population_dm2 = 0.0;
  double population_auc = 0.0;
  std::string reference = "population";
  std::vector<SweepRow> rows;  // ordered by (N index, trial)
};

SweepRow run_row(const SyntheticSpec& spec, const Population& pop, const Spectrum& reference,
                 const SweepConfig& cfg, std::size_t n, std::size_t trial);

SweepResult run_sweep(const SyntheticSpec& spec, const SweepConfig& cfg);

/// Named numeric column of a row; empty when missing (NaN or absent k).
std::optional<double> sweep_field(const SweepRow& row, const std::string& field);
std::vector<std::string> sweep_field_names(const SweepConfig& cfg);

struct MedianPoint {
  std::size_t n = 0;
  double median = 0.0;
  std::size_t count = 0;
};

std::vector<MedianPoint> medians_by_n(const SweepResult& sr, const std::string& field);

/// OLS of log(median field) on log N.
FitResult scaling_fit(const SweepResult& sr, const std::string& field);

double median(Vector values);

}  // namespace spectral
