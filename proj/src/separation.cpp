#include "spectral/separation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

#include "spectral/error.hpp"

namespace spectral {

MahalanobisResult mahalanobis_energy(const SignalDecomposition& sd, std::optional<std::size_t> K) {
  require(sd.alphas_sq.size() == sd.lambdas.size(), "decomposition length mismatch");
  const double thr = pinv_threshold(sd.lambdas);
  MahalanobisResult out;
  out.per_mode.assign(sd.lambdas.size(), 0.0);
  for (std::size_t i = 0; i < sd.lambdas.size(); ++i)
    if (sd.lambdas[i] > 0.0 && sd.lambdas[i] > thr) {
      out.per_mode[i] = sd.alphas_sq[i] / sd.lambdas[i];
      ++out.valid_modes;
    }
  if (out.valid_modes == 0) fail(Errc::contract, "no valid modes for Mahalanobis energy");
  const std::size_t k = K.value_or(out.valid_modes);
  require(k <= out.valid_modes, "truncation K exceeds the number of valid modes");
  // Valid modes form a prefix because the spectrum is sorted.
  for (std::size_t i = 0; i < out.valid_modes; ++i) {
    out.full_energy += out.per_mode[i];
    if (i < k) out.truncated_energy += out.per_mode[i];
  }
  out.K_used = k;
  return out;
}

Vector fisher_direction(const Spectrum& s, std::span<const double> d, std::optional<std::size_t> K) {
  require(d.size() == s.d(), "mean-difference length does not match spectrum");
  const double thr = pinv_threshold(s.eigenvalues);
  const std::size_t dim = s.d();
  const std::size_t k = std::min(K.value_or(dim), dim);
  Vector w(dim, 0.0);
  std::size_t used = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double l = s.eigenvalues[i];
    if (!(l > 0.0 && l > thr)) break;
    double alpha = 0.0;
    for (std::size_t r = 0; r < dim; ++r) alpha += s.eigenvectors(r, i) * d[r];
    const double coef = alpha / l;
    for (std::size_t r = 0; r < dim; ++r) w[r] += coef * s.eigenvectors(r, i);
    ++used;
  }
  if (used == 0) fail(Errc::contract, "all eigenvalues are below the pseudo-inverse cutoff");
  return w;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double gaussian_auc(double d_m_squared) {
  require(d_m_squared >= 0.0, "squared Mahalanobis distance must be non-negative");
  return normal_cdf(std::sqrt(d_m_squared) / 2.0);
}

double binormal_auc(double d_m_squared) {
  require(d_m_squared >= 0.0, "squared Mahalanobis distance must be non-negative");
  return normal_cdf(std::sqrt(d_m_squared) / std::numbers::sqrt2);
}

double roc_auc(std::span<const double> scores_pos, std::span<const double> scores_neg) {
  require(!scores_pos.empty() && !scores_neg.empty(), "ROC-AUC needs both classes non-empty");
  std::vector<std::pair<double, bool>> all;
  all.reserve(scores_pos.size() + scores_neg.size());
  for (double s : scores_pos) all.emplace_back(s, true);
  for (double s : scores_neg) all.emplace_back(s, false);
  std::sort(all.begin(), all.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  // Twice the Mann-Whitney U, kept integral: each tie group contributes
  // 2·pos·(negatives below) + pos·neg.
  std::uint64_t twice_u = 0;
  std::uint64_t neg_below = 0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    std::uint64_t pos = 0, neg = 0;
    while (j < all.size() && all[j].first == all[i].first) {
      (all[j].second ? pos : neg) += 1;
      ++j;
    }
    twice_u += 2 * pos * neg_below + pos * neg;
    neg_below += neg;
    i = j;
  }
  const double pairs = double(scores_pos.size()) * double(scores_neg.size());
  return double(twice_u) / (2.0 * pairs);
}

OvrAuc macro_ovr_auc(const Matrix& scores, std::span<const int> labels) {
  require(scores.rows() == labels.size(), "score rows do not match label count");
  const std::size_t c = scores.cols();
  require(c >= 2, "one-vs-rest AUC needs at least 2 classes");
  OvrAuc out;
  out.per_class.resize(c);
  for (std::size_t k = 0; k < c; ++k) {
    Vector pos, neg;
    for (std::size_t r = 0; r < labels.size(); ++r)
      (labels[r] == int(k) ? pos : neg).push_back(scores(r, k));
    if (pos.empty()) fail(Errc::contract, "class " + std::to_string(k) + " absent from labels");
    out.per_class[k] = roc_auc(pos, neg);
    out.macro += out.per_class[k];
  }
  out.macro /= double(c);
  return out;
}

}  // namespace spectral
