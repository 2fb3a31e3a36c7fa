#include "spectral/config.hpp"

#include <set>

#include "spectral/error.hpp"
#include "spectral/io.hpp"

namespace spectral {

using nlohmann::json;

namespace {

void collect_unknown(const json& j, const std::string& where, const std::set<std::string>& allowed,
                     std::string& bad) {
  if (!j.is_object()) return;  // type errors are reported by the field parsers
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) bad += (bad.empty() ? "" : ", ") + where + key;
}

const json& object_at(const json& j, const std::string& key) {
  const json& v = j.at(key);
  if (!v.is_object()) fail(Errc::config, "config key '" + key + "' must be an object");
  return v;
}

double number(const json& j, const std::string& key) {
  const json& v = j.at(key);
  if (!v.is_number()) fail(Errc::config, "config key '" + key + "' must be a number");
  return v.get<double>();
}

std::uint64_t unsigned_int(const json& j, const std::string& key) {
  const json& v = j.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
    fail(Errc::config, "config key '" + key + "' must be a non-negative integer");
  return v.get<std::uint64_t>();
}

std::string string(const json& j, const std::string& key) {
  const json& v = j.at(key);
  if (!v.is_string()) fail(Errc::config, "config key '" + key + "' must be a string");
  return v.get<std::string>();
}

std::vector<std::size_t> size_list(const json& j, const std::string& key) {
  const json& v = j.at(key);
  if (!v.is_array()) fail(Errc::config, "config key '" + key + "' must be an array");
  std::vector<std::size_t> out;
  for (const json& x : v) {
    if (!x.is_number_integer() || x.get<long long>() < 1)
      fail(Errc::config, "config key '" + key + "' must hold positive integers");
    out.push_back(x.get<std::size_t>());
  }
  return out;
}

Vector number_list(const json& j, const std::string& key) {
  const json& v = j.at(key);
  if (!v.is_array()) fail(Errc::config, "config key '" + key + "' must be an array");
  Vector out;
  for (const json& x : v) {
    if (!x.is_number()) fail(Errc::config, "config key '" + key + "' must hold numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

bool is_auto(const json& v) { return v.is_string() && v.get<std::string>() == "auto"; }

json auto_or(const std::optional<double>& v) { return v ? json(*v) : json("auto"); }
json auto_or(const std::optional<std::size_t>& v) { return v ? json(*v) : json("auto"); }

}  // namespace

RunConfig parse_run_config(const json& j) {
  if (!j.is_object()) fail(Errc::config, "config must be a JSON object");
  std::string bad;
  collect_unknown(j, "",
                  {"input", "labels", "output_dir", "variance_fraction", "tau", "noise_floor", "k_list",
                   "zeta", "seed", "centering", "sweep"},
                  bad);
  if (j.contains("noise_floor")) collect_unknown(j.at("noise_floor"), "noise_floor.", {"method", "c0"}, bad);
  if (j.contains("zeta")) collect_unknown(j.at("zeta"), "zeta.", {"K", "beta"}, bad);
  if (j.contains("sweep"))
    collect_unknown(j.at("sweep"), "sweep.",
                    {"dim", "beta", "signal", "n_per_class", "rotation_seed", "n_grid", "trials",
                     "reference_n"},
                    bad);
  if (!bad.empty()) fail(Errc::config, "unknown config key(s): " + bad);

  RunConfig rc;
  DiagnosticsConfig& d = rc.diagnostics;
  if (j.contains("input")) rc.input = string(j, "input");
  if (j.contains("labels")) rc.labels = string(j, "labels");
  if (j.contains("output_dir")) rc.output_dir = string(j, "output_dir");
  if (j.contains("variance_fraction")) d.variance_fraction = number(j, "variance_fraction");
  if (j.contains("tau")) d.tau = number(j, "tau");
  if (j.contains("noise_floor")) {
    const json& nf = object_at(j, "noise_floor");
    if (nf.contains("method")) d.floor_method = floor_method_from_string(string(nf, "method"));
    if (nf.contains("c0")) d.c0 = number(nf, "c0");
  }
  if (j.contains("k_list")) d.k_list = size_list(j, "k_list");
  if (j.contains("zeta")) {
    const json& z = object_at(j, "zeta");
    if (z.contains("K") && !is_auto(z.at("K"))) d.zeta_K = unsigned_int(z, "K");
    if (z.contains("beta") && !is_auto(z.at("beta"))) d.zeta_beta = number(z, "beta");
  }
  if (j.contains("seed")) d.seed = unsigned_int(j, "seed");
  if (j.contains("centering")) d.centering = centering_from_string(string(j, "centering"));

  if (!(d.variance_fraction > 0.0 && d.variance_fraction <= 1.0))
    fail(Errc::config, "variance_fraction must lie in (0, 1]");
  if (!(d.tau > 0.0)) fail(Errc::config, "tau must be positive");
  if (!(d.c0 > 0.0)) fail(Errc::config, "noise_floor.c0 must be positive");
  if (d.zeta_beta && !(*d.zeta_beta >= 0.0)) fail(Errc::config, "zeta.beta must be non-negative");

  if (j.contains("sweep")) {
    const json& s = object_at(j, "sweep");
    SweepBlock b;
    if (s.contains("dim")) b.spec.dim = unsigned_int(s, "dim");
    if (s.contains("beta")) b.spec.beta = number(s, "beta");
    if (s.contains("signal")) b.spec.signal = number_list(s, "signal");
    if (s.contains("n_per_class")) b.spec.n_per_class = unsigned_int(s, "n_per_class");
    if (s.contains("rotation_seed")) b.spec.rotation_seed = unsigned_int(s, "rotation_seed");
    if (!s.contains("n_grid")) fail(Errc::config, "sweep.n_grid is required");
    b.config.n_grid = size_list(s, "n_grid");
    if (b.config.n_grid.empty()) fail(Errc::config, "sweep.n_grid must not be empty");
    if (s.contains("trials")) b.config.trials = unsigned_int(s, "trials");
    if (b.config.trials == 0) fail(Errc::config, "sweep.trials must be positive");
    if (s.contains("reference_n")) b.config.reference_n = unsigned_int(s, "reference_n");
    rc.sweep = std::move(b);
  }
  return rc;
}

RunConfig load_run_config(const std::string& path) {
  const std::string text = io::read_text(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(Errc::config, path + ": invalid JSON: " + e.what());
  }
  return parse_run_config(j);
}

SweepBlock effective_sweep(const RunConfig& rc) {
  if (!rc.sweep) fail(Errc::config, "config has no sweep block");
  SweepBlock b = *rc.sweep;
  const DiagnosticsConfig& d = rc.diagnostics;
  b.spec.noise_seed = d.seed;
  b.config.variance_fraction = d.variance_fraction;
  b.config.tau = d.tau;
  b.config.floor_method = d.floor_method;
  b.config.c0 = d.c0;
  b.config.zeta_K = d.zeta_K;
  b.config.zeta_beta = d.zeta_beta;
  if (!d.k_list.empty()) b.config.k_list = d.k_list;
  return b;
}

json to_json(const RunConfig& rc) {
  const DiagnosticsConfig& d = rc.diagnostics;
  // Paths are left out so equal data under different names or encodings
  // gives equal reports; inputs are identified by digest instead.
  json j{{"variance_fraction", d.variance_fraction},
         {"tau", d.tau},
         {"noise_floor", {{"method", to_string(d.floor_method)}, {"c0", d.c0}}},
         {"k_list", d.k_list},
         {"zeta", {{"K", auto_or(d.zeta_K)}, {"beta", auto_or(d.zeta_beta)}}},
         {"seed", d.seed},
         {"centering", to_string(d.centering)}};
  if (rc.sweep) {
    const SweepBlock b = effective_sweep(rc);
    j["sweep"] = {{"dim", b.spec.dim},
                  {"beta", b.spec.beta},
                  {"signal", b.spec.signal},
                  {"n_per_class", b.spec.n_per_class},
                  {"rotation_seed", b.spec.rotation_seed},
                  {"n_grid", b.config.n_grid},
                  {"trials", b.config.trials},
                  {"reference_n", b.config.reference_n ? json(*b.config.reference_n) : json(nullptr)}};
  }
  return j;
}

}  // namespace spectral
