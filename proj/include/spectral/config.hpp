#pragma once

// Run configuration (JSON). Unknown keys at any level are rejected with
// Errc::config, naming every offending key.
//
//   {
//     "input": "x.csv", "labels": "y.csv", "output_dir": "out",
//     "variance_fraction": 0.95, "tau": 0.1,
//     "noise_floor": {"method": "theory" | "split_half", "c0": 1.0},
//     "k_list": [1, 2, 3, 4],
//     "zeta": {"K": 3 | "auto", "beta": 1.5 | "auto"},
//     "seed": 20260416,
//     "centering": "global" | "per_class",
//     "sweep": {"dim": 64, "beta": 2.0, "signal": [..], "n_per_class": 1000,
//               "rotation_seed": 1, "n_grid": [..], "trials": 20,
//               "reference_n": 50000}
//   }

#include <optional>
#include <string>

#include "json.hpp"
#include "spectral/pipeline.hpp"
#include "spectral/synthlab.hpp"

namespace spectral {

struct SweepBlock {
  SyntheticSpec spec;
  SweepConfig config;
};

struct RunConfig {
  std::optional<std::string> input;
  std::optional<std::string> labels;
  std::optional<std::string> output_dir;
  DiagnosticsConfig diagnostics;
  std::optional<SweepBlock> sweep;
};

RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

/// Sweep settings with the shared thresholds, floor, zeta and k_list copied in.
SweepBlock effective_sweep(const RunConfig& rc);

/// Effective values (paths excluded), echoed into every report.
nlohmann::json to_json(const RunConfig& rc);

}  // namespace spectral
