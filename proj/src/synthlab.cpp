#include "spectral/synthlab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "spectral/error.hpp"
#include "spectral/kernels.hpp"
#include "spectral/rng.hpp"
#include "spectral/separation.hpp"
#include "spectral/zetafilter.hpp"

namespace spectral {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Q of a Gaussian matrix by Gram-Schmidt with one reorthogonalization pass;
// R's diagonal comes out positive, which fixes the signs.
Matrix random_orthogonal(std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  Matrix g(d, d);
  fill_normal(g.data(), rng);
  Matrix q(d, d);
  Vector v(d);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t r = 0; r < d; ++r) v[r] = g(r, j);
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t i = 0; i < j; ++i) {
        double proj = 0.0;
        for (std::size_t r = 0; r < d; ++r) proj += q(r, i) * v[r];
        for (std::size_t r = 0; r < d; ++r) v[r] -= proj * q(r, i);
      }
    const double norm = norm2(v);
    if (!(norm > 0.0)) fail(Errc::numerical, "degenerate Gaussian draw in random rotation");
    for (std::size_t r = 0; r < d; ++r) q(r, j) = v[r] / norm;
  }
  return q;
}

// U·diag(w)·Uᵀ, symmetric by construction.
Matrix spectral_product(const Matrix& u, std::span<const double> w) {
  const std::size_t d = u.rows();
  Matrix out(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) s += u(i, k) * w[k] * u(j, k);
      out(i, j) = out(j, i) = s;
    }
  return out;
}

std::size_t index_of_k(const SweepRow& row, std::size_t k) {
  for (std::size_t i = 0; i < row.ks.size(); ++i)
    if (row.ks[i].k == k) return i;
  return row.ks.size();
}

}  // namespace

void validate(const SyntheticSpec& spec) {
  if (spec.dim < 2) fail(Errc::config, "synthetic spec needs D >= 2");
  if (!(spec.beta >= 0.0) || !std::isfinite(spec.beta))
    fail(Errc::config, "synthetic spec needs beta >= 0");
  if (spec.signal.size() > spec.dim) fail(Errc::config, "signal longer than D");
  for (double a : spec.signal)
    if (!std::isfinite(a)) fail(Errc::config, "signal coefficients must be finite");
  if (spec.n_per_class < 1) fail(Errc::config, "n_per_class must be positive");
}

Population gen_population(const SyntheticSpec& spec) {
  validate(spec);
  const std::size_t d = spec.dim;
  Matrix u = random_orthogonal(d, spec.rotation_seed);
  fix_signs(u);

  Vector lambdas(d), roots(d);
  for (std::size_t i = 0; i < d; ++i) {
    lambdas[i] = std::pow(double(i + 1), -spec.beta);
    roots[i] = std::sqrt(lambdas[i]);
  }

  Population pop;
  pop.sigma = {spectral_product(u, lambdas), Divisor::population, 0};
  pop.sqrt_sigma = spectral_product(u, roots);
  pop.difference.assign(d, 0.0);
  for (std::size_t i = 0; i < spec.signal.size(); ++i) {
    const double a = spec.signal[i];
    for (std::size_t r = 0; r < d; ++r) pop.difference[r] += a * u(r, i);
    pop.dm2 += a * a * std::pow(double(i + 1), spec.beta);
  }
  pop.mu0.resize(d);
  pop.mu1.resize(d);
  for (std::size_t r = 0; r < d; ++r) {
    pop.mu0[r] = -0.5 * pop.difference[r];
    pop.mu1[r] = 0.5 * pop.difference[r];
  }
  pop.spectrum.eigenvalues = lambdas;
  pop.spectrum.raw_eigenvalues = lambdas;
  pop.spectrum.eigenvectors = std::move(u);
  pop.spectrum.source_n = 0;
  return pop;
}

std::uint64_t stream_seed(std::uint64_t noise_seed, std::size_t n, std::size_t trial,
                          std::uint64_t stream) {
  const std::uint64_t base = mix_seed(noise_seed, n, trial);
  return stream == 0 ? base : mix_seed(base, stream, 0xD1B54A32D192ED03ULL);
}

EmbeddingSet sample(const SyntheticSpec& spec, const Population& pop, std::size_t n,
                    std::size_t trial, std::uint64_t stream, std::string* warning) {
  return sample_seeded(spec, pop, n, stream_seed(spec.noise_seed, n, trial, stream), warning);
}

EmbeddingSet sample_seeded(const SyntheticSpec& spec, const Population& pop, std::size_t n,
                           std::uint64_t seed, std::string* warning) {
  const std::size_t per_class = n / 2;
  if (per_class < 2) fail(Errc::contract, "sample needs at least 2 samples per class (N >= 4)");
  if (n % 2 != 0 && warning)
    *warning = "odd N = " + std::to_string(n) + " rounded down to " +
               std::to_string(2 * per_class) + " (" + std::to_string(per_class) + " per class)";
  const std::size_t d = spec.dim;
  const std::size_t rows = 2 * per_class;

  Rng rng(seed);
  Matrix z(rows, d);
  fill_normal(z.data(), rng);
  const Vector zero(d, 0.0);
  EmbeddingSet out{kernels::affine_rows(z, pop.sqrt_sigma, zero), std::vector<int>(rows, 0)};
  for (std::size_t r = 0; r < rows; ++r) {
    const bool cls1 = r >= per_class;
    (*out.labels)[r] = cls1 ? 1 : 0;
    const Vector& mu = cls1 ? pop.mu1 : pop.mu0;
    auto row = out.data.row(r);
    for (std::size_t j = 0; j < d; ++j) row[j] += mu[j];
  }
  return out;
}

EmbeddingSet sample(const SyntheticSpec& spec, std::size_t n, std::size_t trial) {
  return sample(spec, gen_population(spec), n, trial);
}

SweepRow run_row(const SyntheticSpec& spec, const Population& pop, const Spectrum& reference,
                 const SweepConfig& cfg, std::size_t n, std::size_t trial) {
  SweepRow row;
  row.n = n;
  row.trial = trial;
  row.seed = stream_seed(spec.noise_seed, n, trial);

  const EmbeddingSet train = sample(spec, pop, n, trial, 0);
  const EmbeddingSet test =
      sample_seeded(spec, pop, 2 * spec.n_per_class, stream_seed(spec.noise_seed, n, trial, 1));

  const CovarianceMatrix cov = covariance(center_within_classes(train));
  const Spectrum s = eig_sym(cov);
  row.lambda1 = s.eigenvalues.front();
  row.effective_rank = double(effective_rank(s, cfg.variance_fraction));

  DiagnosticsConfig dcfg;
  dcfg.floor_method = cfg.floor_method;
  dcfg.c0 = cfg.c0;
  dcfg.seed = row.seed;
  dcfg.centering = Centering::per_class;
  const NoiseFloor nf = estimate_noise_floor(s, train, dcfg);
  row.noise_floor = nf.value;
  const std::size_t K = recoverable_dimension(s, nf);
  row.K_of_N = double(K);

  try {
    const SlopeFit fit = spectral_slope(s, K);
    row.beta = fit.beta;
    row.beta_r2 = fit.r_squared.value_or(kNaN);
  } catch (const Error&) {
    row.beta = row.beta_r2 = kNaN;
  }

  const SignalDecomposition sd0 = signal_decomposition(s, train, Contrast{0, std::nullopt});
  const SignalDecomposition sd1 = signal_decomposition(s, train, Contrast{1, std::nullopt});
  row.k_of_N_class0 = double(structural_dimensionality(sd0, cfg.tau));
  row.k_of_N_class1 = double(structural_dimensionality(sd1, cfg.tau));
  const MahalanobisResult me = mahalanobis_energy(sd1, std::min(K, sd1.modes));
  row.me_full = me.full_energy;
  row.me_truncated = me.truncated_energy;
  row.modes.reserve(s.d());
  for (std::size_t i = 0; i < s.d(); ++i) row.modes.push_back({sd1.lambdas[i], sd1.alphas_sq[i]});

  row.op_err = op_norm_sym_diff(cov, pop.sigma);
  for (std::size_t k : cfg.k_list) {
    KRecord kr;
    kr.k = k;
    kr.sin_theta = principal_angles(reference, s, k).max_sine();
    kr.eigengap = eigengap(reference.eigenvalues, k);
    kr.dk_bound = davis_kahan_bound(row.op_err, reference, k);
    kr.applicable = kr.eigengap > 2.0 * row.op_err;
    row.ks.push_back(kr);
  }

  std::vector<double> pos, neg;
  auto auc_of = [&](const Vector& w) {
    const Vector scores = kernels::project(test.data, w);
    pos.clear();
    neg.clear();
    for (std::size_t r = 0; r < scores.size(); ++r)
      ((*test.labels)[r] == 1 ? pos : neg).push_back(scores[r]);
    return roc_auc(pos, neg);
  };
  row.auc_raw = auc_of(fisher_direction(s, sd1.difference));
  try {
    const CalibratedSpectrum cs = calibrate(s, cfg.zeta_K, cfg.zeta_beta, nf);
    row.auc_calibrated = auc_of(calibrated_fisher(s, cs, sd1.difference));
    row.me_calibrated = calibrated_mahalanobis(sd1, cs).full_energy;
    row.zeta_K = double(cs.K);
    row.zeta_beta = cs.beta;
    row.zeta_c = cs.c;
    if (cs.beta_floored) row.calibration = "beta_floored";
    if (cs.K >= cs.d()) row.calibration = "identity";
  } catch (const Error& err) {
    if (err.code() != Errc::calibration_refused) throw;
    row.calibration = "refused";
    row.auc_calibrated = row.auc_raw;
    row.me_calibrated = row.me_full;
    row.zeta_K = 0.0;
    row.zeta_beta = row.zeta_c = kNaN;
  }
  return row;
}

SweepResult run_sweep(const SyntheticSpec& spec, const SweepConfig& cfg) {
  validate(spec);
  if (cfg.n_grid.empty()) fail(Errc::config, "sweep N grid is empty");
  for (std::size_t i = 0; i < cfg.n_grid.size(); ++i) {
    if (cfg.n_grid[i] < 4) fail(Errc::config, "sweep N values must be >= 4");
    if (i > 0 && cfg.n_grid[i] <= cfg.n_grid[i - 1])
      fail(Errc::config, "sweep N grid must be strictly ascending");
  }
  if (cfg.trials < 1) fail(Errc::config, "sweep needs at least one trial");
  for (std::size_t k : cfg.k_list)
    if (k < 1 || k >= spec.dim) fail(Errc::config, "k_list entries must lie in 1..D-1");

  SweepResult sr;
  sr.spec = spec;
  sr.config = cfg;
  sr.master_seed = spec.noise_seed;
  const Population pop = gen_population(spec);
  sr.population_dm2 = pop.dm2;
  sr.population_auc = gaussian_auc(pop.dm2);

  Spectrum reference = pop.spectrum;
  if (cfg.reference_n) {
    // Data-rich proxy: its own stream, independent of every grid row.
    const EmbeddingSet big = sample(spec, pop, *cfg.reference_n, 0, 2);
    reference = embedding_spectrum(big, Centering::per_class);
    sr.reference = "sample:" + std::to_string(*cfg.reference_n);
  }

  const std::size_t total = cfg.n_grid.size() * cfg.trials;
  sr.rows.resize(total);
  const int workers = std::max(1, cfg.workers);
  const auto count = static_cast<std::int64_t>(total);
  // Each row owns its random stream and output slot, so scheduling cannot
  // change the result.
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
  for (std::int64_t idx = 0; idx < count; ++idx) {
    const std::size_t g = static_cast<std::size_t>(idx) / cfg.trials;
    const std::size_t t = static_cast<std::size_t>(idx) % cfg.trials;
    const std::size_t n = cfg.n_grid[g];
    try {
      sr.rows[idx] = run_row(spec, pop, reference, cfg, n, t);
    } catch (const std::exception& e) {
      SweepRow failed;
      failed.n = n;
      failed.trial = t;
      failed.seed = stream_seed(spec.noise_seed, n, t);
      failed.status = std::string("error: ") + e.what();
      sr.rows[idx] = std::move(failed);
    }
  }
  return sr;
}

std::vector<std::string> sweep_field_names(const SweepConfig& cfg) {
  std::vector<std::string> names = {"effective_rank", "K_of_N",      "k_of_N_class0", "k_of_N_class1",
                                    "beta",           "beta_r2",     "me_full",       "me_truncated",
                                    "me_calibrated",  "noise_floor", "op_err",        "lambda1",
                                    "auc_raw",        "auc_calibrated", "zeta_K",     "zeta_beta",
                                    "zeta_c"};
  for (std::size_t k : cfg.k_list) {
    names.push_back("sin_theta_k" + std::to_string(k));
    names.push_back("eigengap_k" + std::to_string(k));
    names.push_back("dk_bound_k" + std::to_string(k));
  }
  return names;
}

std::optional<double> sweep_field(const SweepRow& row, const std::string& field) {
  static const std::map<std::string, double SweepRow::*> scalars = {
      {"effective_rank", &SweepRow::effective_rank}, {"K_of_N", &SweepRow::K_of_N},
      {"k_of_N_class0", &SweepRow::k_of_N_class0},   {"k_of_N_class1", &SweepRow::k_of_N_class1},
      {"beta", &SweepRow::beta},                     {"beta_r2", &SweepRow::beta_r2},
      {"me_full", &SweepRow::me_full},               {"me_truncated", &SweepRow::me_truncated},
      {"me_calibrated", &SweepRow::me_calibrated},   {"noise_floor", &SweepRow::noise_floor},
      {"op_err", &SweepRow::op_err},                 {"lambda1", &SweepRow::lambda1},
      {"auc_raw", &SweepRow::auc_raw},               {"auc_calibrated", &SweepRow::auc_calibrated},
      {"zeta_K", &SweepRow::zeta_K},                 {"zeta_beta", &SweepRow::zeta_beta},
      {"zeta_c", &SweepRow::zeta_c},
  };
  double value = kNaN;
  if (auto it = scalars.find(field); it != scalars.end()) {
    value = row.*(it->second);
  } else {
    const std::pair<const char*, double KRecord::*> per_k[] = {
        {"sin_theta_k", &KRecord::sin_theta},
        {"eigengap_k", &KRecord::eigengap},
        {"dk_bound_k", &KRecord::dk_bound},
    };
    bool known = false;
    for (const auto& [prefix, member] : per_k) {
      const std::string p(prefix);
      if (field.rfind(p, 0) != 0) continue;
      std::size_t k = 0;
      try {
        k = std::stoul(field.substr(p.size()));
      } catch (const std::exception&) {
        break;
      }
      known = true;
      const std::size_t i = index_of_k(row, k);
      if (i < row.ks.size()) value = row.ks[i].*member;
    }
    if (!known) fail(Errc::config, "unknown sweep field '" + field + "'");
  }
  if (!row.ok() || std::isnan(value)) return std::nullopt;
  return value;
}

double median(Vector values) {
  require(!values.empty(), "median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  return values.size() % 2 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

std::vector<MedianPoint> medians_by_n(const SweepResult& sr, const std::string& field) {
  std::vector<MedianPoint> out;
  for (std::size_t n : sr.config.n_grid) {
    Vector vals;
    for (const SweepRow& row : sr.rows)
      if (row.n == n)
        if (auto v = sweep_field(row, field)) vals.push_back(*v);
    if (vals.empty()) continue;
    out.push_back({n, median(vals), vals.size()});
  }
  return out;
}

FitResult scaling_fit(const SweepResult& sr, const std::string& field) {
  const auto points = medians_by_n(sr, field);
  if (points.size() < 3)
    fail(Errc::contract, "scaling fit of '" + field + "' needs at least 3 distinct N values");
  Vector x, y;
  for (const auto& p : points) {
    if (!(p.median > 0.0))
      fail(Errc::contract, "non-positive median of '" + field + "' at N = " + std::to_string(p.n) +
                               "; log-log fit impossible");
    x.push_back(std::log(double(p.n)));
    y.push_back(std::log(p.median));
  }
  return linear_fit(x, y);
}

}  // namespace spectral
