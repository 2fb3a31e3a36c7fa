#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include "spectral/matrix_core.hpp"

namespace spectral {

/// Modes with λ_i ≤ λ_1·kPinvCutoff are treated as numerical zeros and kept
/// out of every α²/λ ratio (pseudo-inverse convention).
inline constexpr double kPinvCutoff = 1e-10;
/// Modes with λ_i ≤ λ_1·kFitCutoff are excluded from log-log fits.
inline constexpr double kFitCutoff = 1e-12;

inline constexpr double kDefaultVarianceFraction = 0.95;
inline constexpr double kDefaultTau = 0.1;
inline constexpr double kDefaultC0 = 1.0;

/// Which class means are contrasted. `other` empty means one-vs-rest.
struct Contrast {
  int cls = 0;
  std::optional<int> other;
};

struct SignalDecomposition {
  Vector lambdas;
  Vector alphas;     // v_iᵀd, signed
  Vector alphas_sq;  // (v_iᵀd)²
  Vector difference; // d
  Contrast contrast;
  std::size_t modes = 0;  // λ_i above the pseudo-inverse cutoff
};

enum class FloorMethod { theory, split_half };

struct NoiseFloor {
  double value = 0.0;
  FloorMethod method = FloorMethod::theory;
  double c0 = kDefaultC0;
  std::uint64_t seed = 0;  // split_half shuffle seed
};

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  std::optional<double> r_squared;  // empty when the response is constant
  std::size_t points = 0;
};

struct SlopeFit {
  double beta = 0.0;
  std::optional<double> r_squared;
  std::size_t first = 1;  // 1-based inclusive mode range
  std::size_t last = 1;
  std::size_t used = 0;
};

/// OLS of y on x.
FitResult linear_fit(std::span<const double> x, std::span<const double> y);

/// Valid-mode threshold λ_1·kPinvCutoff.
double pinv_threshold(std::span<const double> lambdas);

std::size_t effective_rank(const Spectrum& s, double variance_fraction = kDefaultVarianceFraction);

SignalDecomposition signal_decomposition(const Spectrum& s, std::span<const double> difference,
                                         Contrast contrast = {});
SignalDecomposition signal_decomposition(const Spectrum& s, const EmbeddingSet& e,
                                         Contrast contrast);
/// μ_cls − μ_other, or μ_cls − μ_rest for one-vs-rest.
Vector class_mean_difference(const EmbeddingSet& e, Contrast contrast);

std::size_t structural_dimensionality(const SignalDecomposition& sd, double tau = kDefaultTau);

NoiseFloor noise_floor_theory(const Spectrum& s, double c0 = kDefaultC0);
NoiseFloor noise_floor_split_half(const EmbeddingSet& e, std::uint64_t seed);
NoiseFloor noise_floor_split_half(const EmbeddingSet& half_a, const EmbeddingSet& half_b);

std::size_t recoverable_dimension(const Spectrum& s, const NoiseFloor& nf);
std::size_t recoverable_dimension(std::span<const double> lambdas, double floor);

/// β fit over modes [first, last] (1-based, inclusive).
SlopeFit spectral_slope(const Spectrum& s, std::size_t first, std::size_t last);
SlopeFit spectral_slope(std::span<const double> lambdas, std::size_t first, std::size_t last);
/// Default range 1..max(5, K), clipped to D.
SlopeFit spectral_slope(const Spectrum& s, std::size_t recoverable);

double truncated_zeta(double beta, std::size_t K);
/// ζ(β) for β > 1 by Euler-Maclaurin; throws a contract error when divergent.
double riemann_zeta(double beta);
bool zeta_converges(double beta) noexcept;

double eigengap(std::span<const double> lambdas, std::size_t k);
double davis_kahan_bound(double op_err, const Spectrum& reference, std::size_t k);
double davis_kahan_bound(double op_err, std::span<const double> lambdas, std::size_t k);

std::string to_string(FloorMethod m);
FloorMethod floor_method_from_string(const std::string& s);

}  // namespace spectral
