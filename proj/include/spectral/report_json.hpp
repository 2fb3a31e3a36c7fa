#pragma once

// JSON and CSV encodings of reports. Schemas are documented in
// docs/schemas.md; bump kSchemaVersion on any incompatible change.

#include <iosfwd>
#include <string>

#include "json.hpp"
#include "spectral/pipeline.hpp"
#include "spectral/synthlab.hpp"

namespace spectral::report {

using json = nlohmann::json;

inline constexpr const char* kToolName = "spectral_lab";
inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

/// Common envelope: tool, version, schema, command.
json envelope(const std::string& command);

json to_json(const NoiseFloor& nf);
json to_json(const SlopeFit& fit);
json to_json(const FitResult& fit);
json to_json(const OvrAuc& auc);
json to_json(const MahalanobisResult& me);
json to_json(const Spectrum& s, bool with_vectors);
/// Same layout as a raw spectrum plus a "provenance" block.
json to_json(const CalibratedSpectrum& cs, bool with_vectors);
json to_json(const DiagnosticsConfig& cfg);
json to_json(const DiagnosticsReport& rep);
json to_json(const ClassifyResult& res);
json to_json(const SyntheticSpec& spec);
json to_json(const SweepConfig& cfg);
json to_json(const SweepResult& sr);

/// Inverse of the spectrum layout (eigenvectors optional).
Spectrum spectrum_from_json(const json& j);

void write_sweep_csv(std::ostream& out, const SweepResult& sr);
/// Per-mode (i, λ_i, α_i²) with log columns, trial 0 of every N.
void write_modes_csv(std::ostream& out, const SweepResult& sr);
/// (N, k) → median / quartiles of sinΘ and the Davis-Kahan bound.
void write_stability_csv(std::ostream& out, const SweepResult& sr);
/// Log-log scaling fits of the main sweep fields.
json scaling_summary(const SweepResult& sr);

}  // namespace spectral::report
