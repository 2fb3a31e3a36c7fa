#include "spectral/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "spectral/error.hpp"
#include "spectral/kernels.hpp"

namespace spectral {

std::string to_string(Centering c) { return c == Centering::global ? "global" : "per_class"; }

Centering centering_from_string(const std::string& s) {
  if (s == "global") return Centering::global;
  if (s == "per_class" || s == "per-class") return Centering::per_class;
  fail(Errc::config, "unknown centering '" + s + "' (expected global or per_class)");
}

Spectrum embedding_spectrum(const EmbeddingSet& e, Centering centering) {
  const EmbeddingSet centered =
      centering == Centering::global ? center(e) : center_within_classes(e);
  return eig_sym(covariance(centered));
}

NoiseFloor estimate_noise_floor(const Spectrum& s, const EmbeddingSet& e,
                                const DiagnosticsConfig& cfg) {
  if (cfg.floor_method == FloorMethod::theory) return noise_floor_theory(s, cfg.c0);
  if (cfg.centering == Centering::per_class) {
    EmbeddingSet centered = center_within_classes(e);
    centered.labels.reset();
    return noise_floor_split_half(centered, cfg.seed);
  }
  return noise_floor_split_half(e, cfg.seed);
}

namespace {

std::vector<std::size_t> resolve_k_list(const DiagnosticsConfig& cfg, std::size_t d) {
  if (cfg.k_list.empty()) {
    std::vector<std::size_t> ks;
    for (std::size_t k = 1; k <= std::min<std::size_t>(5, d - 1); ++k) ks.push_back(k);
    return ks;
  }
  for (std::size_t k : cfg.k_list)
    require(k >= 1 && k < d, "k = " + std::to_string(k) + " out of range 1..D-1 (D = " +
                                 std::to_string(d) + ")");
  return cfg.k_list;
}

}  // namespace

DiagnosticsReport diagnose(const EmbeddingSet& e, const DiagnosticsConfig& cfg,
                           const Spectrum* reference) {
  validate(e);
  require(cfg.tau > 0.0, "tau must be positive");
  DiagnosticsReport rep;
  rep.n = e.n();
  rep.d = e.d();
  rep.num_classes = e.num_classes();
  rep.config = cfg;
  if (cfg.centering == Centering::per_class && !e.labels) {
    rep.warnings.push_back("per_class centering requested without labels; using global");
    rep.config.centering = Centering::global;
  }
  rep.spectrum = embedding_spectrum(e, rep.config.centering);
  const Spectrum& s = rep.spectrum;

  rep.effective_rank = effective_rank(s, cfg.variance_fraction);
  rep.noise_floor = estimate_noise_floor(s, e, rep.config);
  rep.K_of_N = recoverable_dimension(s, rep.noise_floor);

  try {
    rep.beta_fit = cfg.fit_range ? spectral_slope(s, cfg.fit_range->first, cfg.fit_range->second)
                                 : spectral_slope(s, rep.K_of_N);
  } catch (const Error& err) {
    if (err.code() != Errc::contract || cfg.fit_range) throw;
    rep.warnings.push_back(std::string("spectral slope unavailable: ") + err.what());
  }
  if (rep.beta_fit) {
    rep.truncated_zeta = truncated_zeta(rep.beta_fit->beta, std::max<std::size_t>(1, rep.K_of_N));
    if (zeta_converges(rep.beta_fit->beta)) rep.zeta = riemann_zeta(rep.beta_fit->beta);
  }

  if (reference) {
    require(reference->d() == s.d(), "reference spectrum dimension mismatch");
    rep.gap_source = "reference";
  }
  const Spectrum& gaps = reference ? *reference : s;
  if (s.d() >= 2)
    for (std::size_t k : resolve_k_list(cfg, s.d()))
      rep.stability.push_back({k, eigengap(gaps.eigenvalues, k),
                               davis_kahan_bound(rep.noise_floor.value, gaps, k)});

  try {
    rep.calibration = calibrate(s, cfg.zeta_K, cfg.zeta_beta, rep.noise_floor);
  } catch (const Error& err) {
    if (err.code() != Errc::calibration_refused) throw;
    rep.calibration_refused = err.what();
  }

  if (rep.num_classes >= 2) {
    double k_sum = 0.0, e_sum = 0.0;
    for (int c = 0; c < rep.num_classes; ++c) {
      ClassBlock block;
      block.class_id = c;
      for (int y : *e.labels) (y == c ? block.n_pos : block.n_neg) += 1;
      const SignalDecomposition sd = signal_decomposition(s, e, Contrast{c, std::nullopt});
      block.k_of_N = structural_dimensionality(sd, cfg.tau);
      block.energy = mahalanobis_energy(sd, std::min(rep.K_of_N, sd.modes));
      if (rep.calibration) block.calibrated_energy = calibrated_mahalanobis(sd, *rep.calibration).full_energy;
      block.alphas_sq = sd.alphas_sq;
      k_sum += double(block.k_of_N);
      e_sum += block.energy.truncated_energy;
      rep.classes.push_back(std::move(block));
    }
    rep.k_of_N_mean = k_sum / rep.num_classes;
    rep.energy_mean = e_sum / rep.num_classes;
  }
  return rep;
}

ClassifyResult classify(const EmbeddingSet& train, const EmbeddingSet& test,
                        const DiagnosticsConfig& cfg, bool use_calibration) {
  validate(train);
  validate(test);
  require(train.labels.has_value() && test.labels.has_value(), "classify needs labeled train and test sets");
  require(train.d() == test.d(), "train and test dimensions differ");
  const int c = train.num_classes();
  require(c >= 2, "classify needs at least 2 training classes");
  for (int y : *test.labels)
    if (y >= c)
      fail(Errc::contract, "class " + std::to_string(y) + " present in test but absent in train");

  ClassifyResult out;
  out.n_train = train.n();
  out.n_test = test.n();
  out.d = train.d();
  out.num_classes = c;

  const Spectrum s = embedding_spectrum(train, cfg.centering);
  out.noise_floor = estimate_noise_floor(s, train, cfg);

  std::vector<Vector> diffs;
  for (int k = 0; k < c; ++k) diffs.push_back(class_mean_difference(train, Contrast{k, std::nullopt}));

  auto score = [&](auto&& direction) {
    Matrix scores(test.n(), static_cast<std::size_t>(c));
    for (int k = 0; k < c; ++k) {
      const Vector w = direction(diffs[static_cast<std::size_t>(k)]);
      const Vector col = kernels::project(test.data, w);
      scores.set_column(static_cast<std::size_t>(k), col);
    }
    return macro_ovr_auc(scores, *test.labels);
  };

  out.raw = score([&](const Vector& d) { return fisher_direction(s, d); });
  if (use_calibration) {
    try {
      out.calibration = calibrate(s, cfg.zeta_K, cfg.zeta_beta, out.noise_floor);
      const CalibratedSpectrum& cs = *out.calibration;
      out.calibrated = score([&](const Vector& d) { return calibrated_fisher(s, cs, d); });
    } catch (const Error& err) {
      if (err.code() != Errc::calibration_refused) throw;
      out.calibration_refused = err.what();
    }
  }
  return out;
}

}  // namespace spectral
