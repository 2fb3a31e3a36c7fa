#include "spectral/cli.hpp"

#include <omp.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "spectral/config.hpp"
#include "spectral/error.hpp"
#include "spectral/io.hpp"
#include "spectral/report_json.hpp"

namespace spectral {

namespace {

using nlohmann::json;

constexpr const char* kExitCodes =
    "Exit codes:\n"
    "  0  success\n"
    "  1  numerical failure (eigensolver did not converge)\n"
    "  2  I/O error (missing, unreadable or malformed file)\n"
    "  3  data quality (NaN or Inf in the input)\n"
    "  4  contract violation (shape mismatch, k >= D, unknown class, ...)\n"
    "  5  calibration refused (K = 0, nothing above the noise floor)\n"
    "  6  configuration error (bad flag, unknown or ill-typed config key)\n"
    "Environment: SPECTRAL_LAB_THREADS caps the worker count of 'simulate'.";

// Flags shared by the analysis commands. Each overrides the config file
// only when given on the command line.
struct AnalysisFlags {
  std::string config;
  double tau = 0.0;
  double variance_fraction = 0.0;
  std::string noise_floor;
  double c0 = 0.0;
  std::uint64_t seed = 0;
  std::string zeta_k;
  std::string zeta_beta;
  std::string centering;
  std::vector<std::size_t> k_list;

  CLI::Option* o_tau = nullptr;
  CLI::Option* o_fraction = nullptr;
  CLI::Option* o_floor = nullptr;
  CLI::Option* o_c0 = nullptr;
  CLI::Option* o_seed = nullptr;
  CLI::Option* o_k = nullptr;
  CLI::Option* o_beta = nullptr;
  CLI::Option* o_centering = nullptr;
  CLI::Option* o_k_list = nullptr;
};

void add_analysis_flags(CLI::App* sub, AnalysisFlags& f, bool zeta, bool k_list) {
  sub->add_option("--config", f.config, "JSON run configuration");
  f.o_tau = sub->add_option("--tau", f.tau, "Structural threshold on alpha_i^2/lambda_i (default 0.1)");
  f.o_fraction = sub->add_option("--variance-fraction", f.variance_fraction,
                                 "Variance fraction for the effective rank (default 0.95)");
  f.o_floor = sub->add_option("--noise-floor", f.noise_floor, "Noise floor method: theory | split_half")
                  ->check(CLI::IsMember({"theory", "split_half"}));
  f.o_c0 = sub->add_option("--c0", f.c0, "Constant of the theory floor (default 1)");
  f.o_seed = sub->add_option("--seed", f.seed, "Seed for split-half floors and sweeps");
  f.o_centering = sub->add_option("--centering", f.centering, "global | per_class")
                      ->check(CLI::IsMember({"global", "per_class"}));
  if (zeta) {
    f.o_k = sub->add_option("--k", f.zeta_k, "Zeta-filter splice index K, or 'auto'");
    f.o_beta = sub->add_option("--beta", f.zeta_beta, "Zeta-filter tail exponent, or 'auto'");
  }
  if (k_list)
    f.o_k_list = sub->add_option("--k-list", f.k_list, "Subspace sizes for the stability rows")
                     ->delimiter(',');
}

std::optional<std::size_t> parse_k(const std::string& s) {
  if (s == "auto") return std::nullopt;
  std::size_t pos = 0;
  long long v = -1;
  try {
    v = std::stoll(s, &pos);
  } catch (const std::exception&) {
  }
  if (pos != s.size() || v < 0) fail(Errc::config, "--k expects a non-negative integer or 'auto', got '" + s + "'");
  return static_cast<std::size_t>(v);
}

std::optional<double> parse_beta(const std::string& s) {
  if (s == "auto") return std::nullopt;
  std::size_t pos = 0;
  double v = -1.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
  }
  if (pos != s.size() || !(v >= 0.0)) fail(Errc::config, "--beta expects a non-negative number or 'auto', got '" + s + "'");
  return v;
}

RunConfig resolve_config(const AnalysisFlags& f) {
  RunConfig rc = f.config.empty() ? RunConfig{} : load_run_config(f.config);
  DiagnosticsConfig& d = rc.diagnostics;
  if (f.o_tau && f.o_tau->count()) d.tau = f.tau;
  if (f.o_fraction && f.o_fraction->count()) d.variance_fraction = f.variance_fraction;
  if (f.o_floor && f.o_floor->count()) d.floor_method = floor_method_from_string(f.noise_floor);
  if (f.o_c0 && f.o_c0->count()) d.c0 = f.c0;
  if (f.o_seed && f.o_seed->count()) d.seed = f.seed;
  if (f.o_centering && f.o_centering->count()) d.centering = centering_from_string(f.centering);
  if (f.o_k && f.o_k->count()) d.zeta_K = parse_k(f.zeta_k);
  if (f.o_beta && f.o_beta->count()) d.zeta_beta = parse_beta(f.zeta_beta);
  if (f.o_k_list && f.o_k_list->count()) d.k_list = f.k_list;
  if (!(d.tau > 0.0)) fail(Errc::config, "tau must be positive");
  if (!(d.variance_fraction > 0.0 && d.variance_fraction <= 1.0))
    fail(Errc::config, "variance_fraction must lie in (0, 1]");
  if (!(d.c0 > 0.0)) fail(Errc::config, "c0 must be positive");
  return rc;
}

std::string need_path(const std::string& flag_value, const std::optional<std::string>& from_config,
                      const std::string& flag) {
  if (!flag_value.empty()) return flag_value;
  if (from_config) return *from_config;
  fail(Errc::config, flag + " is required");
}

EmbeddingSet load_set(const std::string& path, const std::string& labels_path, json& inputs,
                      const std::string& role) {
  EmbeddingSet e;
  e.data = io::read_matrix(path);
  inputs[role] = {{"digest", io::matrix_digest(e.data)}, {"N", e.n()}, {"D", e.d()}};
  if (!labels_path.empty()) {
    e.labels = io::read_labels(labels_path);
    inputs[role + "_labels"] = io::labels_digest(*e.labels);
    if (e.labels->size() != e.n())
      fail(Errc::contract, "label count " + std::to_string(e.labels->size()) + " does not match row count " +
                               std::to_string(e.n()));
  }
  validate(e);
  return e;
}

void emit(const json& j, const std::string& path, std::ostream& out) {
  const std::string text = j.dump(2) + "\n";
  if (path.empty())
    out << text;
  else
    io::write_text(path, text);
}

int worker_count() {
  int workers = std::max(1, omp_get_max_threads());
  if (const char* env = std::getenv("SPECTRAL_LAB_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || cap < 1)
      fail(Errc::config, std::string("SPECTRAL_LAB_THREADS must be a positive integer, got '") + env + "'");
    workers = static_cast<int>(std::min<long>(cap, 1024));
  }
  return workers;
}

bool looks_like_json(const std::string& text) {
  const auto p = text.find_first_not_of(" \t\r\n");
  return p != std::string::npos && text[p] == '{';
}

// ---- subcommands ---------------------------------------------------------

struct SpectrumArgs {
  std::string input, output, format = "json";
  bool eigenvectors = false, unbiased = false;
};

int cmd_spectrum(const SpectrumArgs& a, std::ostream& out) {
  EmbeddingSet e;
  e.data = io::read_matrix(a.input);
  validate(e);
  const Spectrum s =
      eig_sym(covariance(center(e), a.unbiased ? Divisor::unbiased : Divisor::population));
  if (a.format == "csv") {
    std::ostringstream ss;
    ss << "index,eigenvalue\n";
    for (std::size_t i = 0; i < s.d(); ++i) ss << i + 1 << ',' << io::format_double(s.eigenvalues[i]) << '\n';
    if (a.output.empty())
      out << ss.str();
    else
      io::write_text(a.output, ss.str());
    return 0;
  }
  json j = report::envelope("spectrum");
  j["config"] = {{"divisor", a.unbiased ? "N-1" : "N"}, {"centering", "global"},
                 {"eigenvectors", a.eigenvectors}};
  j["inputs"] = {{"matrix", {{"digest", io::matrix_digest(e.data)}, {"N", e.n()}, {"D", e.d()}}}};
  j["spectrum"] = report::to_json(s, a.eigenvectors);
  emit(j, a.output, out);
  return 0;
}

struct DiagnoseArgs {
  AnalysisFlags flags;
  std::string input, labels, output;
};

int cmd_diagnose(const DiagnoseArgs& a, std::ostream& out) {
  RunConfig rc = resolve_config(a.flags);
  json inputs = json::object();
  const std::string labels = a.labels.empty() ? rc.labels.value_or("") : a.labels;
  const EmbeddingSet e = load_set(need_path(a.input, rc.input, "--input"), labels, inputs, "matrix");
  const DiagnosticsReport rep = diagnose(e, rc.diagnostics);
  json j = report::envelope("diagnose");
  j["config"] = to_json(rc);
  j["inputs"] = inputs;
  j["report"] = report::to_json(rep);
  emit(j, a.output, out);
  return 0;
}

struct StabilityArgs {
  std::string ref, test, output;
  std::vector<std::size_t> k_list;
  std::uint64_t seed = kDefaultSeed;
};

int cmd_stability(const StabilityArgs& a, std::ostream& out) {
  json inputs = json::object();
  const EmbeddingSet ref = load_set(a.ref, "", inputs, "reference");
  const EmbeddingSet test = load_set(a.test, "", inputs, "test");
  if (ref.d() != test.d())
    fail(Errc::contract, "dimension mismatch: reference D = " + std::to_string(ref.d()) + ", test D = " +
                             std::to_string(test.d()));
  const std::size_t d = ref.d();
  std::vector<std::size_t> ks = a.k_list;
  if (ks.empty())
    for (std::size_t k = 1; k <= std::min<std::size_t>(5, d - 1); ++k) ks.push_back(k);
  for (std::size_t k : ks)
    require(k >= 1 && k < d, "k = " + std::to_string(k) + " out of range 1..D-1 (D = " + std::to_string(d) + ")");

  const Spectrum s_ref = embedding_spectrum(ref, Centering::global);
  const Spectrum s_test = embedding_spectrum(test, Centering::global);
  const NoiseFloor floor = noise_floor_split_half(test, a.seed);
  json rows = json::array();
  std::size_t flagged = 0;
  for (std::size_t k : ks) {
    const double sin_theta = principal_angles(s_ref, s_test, k).max_sine();
    const double bound = davis_kahan_bound(floor.value, s_ref, k);
    const bool violated = bound < sin_theta;
    flagged += violated ? 1 : 0;
    rows.push_back({{"k", k},
                    {"sin_theta", sin_theta},
                    {"eigengap", eigengap(s_ref.eigenvalues, k)},
                    {"dk_bound", bound},
                    {"bound_below_measured", violated}});
  }
  json j = report::envelope("stability");
  j["config"] = {{"k_list", ks}, {"seed", a.seed}, {"centering", "global"}};
  j["inputs"] = inputs;
  j["noise_floor"] = report::to_json(floor);
  j["rows"] = std::move(rows);
  j["flagged_rows"] = flagged;
  emit(j, a.output, out);
  return 0;
}

struct ZetaArgs {
  AnalysisFlags flags;
  std::string input, output;
  bool dry_run = false, eigenvectors = false;
};

int cmd_zeta_filter(const ZetaArgs& a, std::ostream& out) {
  RunConfig rc = resolve_config(a.flags);
  const DiagnosticsConfig& cfg = rc.diagnostics;
  const std::string path = need_path(a.input, rc.input, "--input");
  const std::string text = io::read_text(path);
  json inputs = json::object();
  Spectrum s;
  std::optional<EmbeddingSet> data;
  if (looks_like_json(text)) {
    json sj;
    try {
      sj = json::parse(text);
    } catch (const json::parse_error& e) {
      fail(Errc::io, path + ": invalid JSON: " + e.what());
    }
    s = report::spectrum_from_json(sj.contains("spectrum") ? sj.at("spectrum") : sj);
    inputs["spectrum"] = {{"digest", io::text_digest(text)}, {"D", s.d()}};
  } else {
    data.emplace();
    data->data = io::read_matrix(path);
    validate(*data);
    inputs["matrix"] = {{"digest", io::matrix_digest(data->data)}, {"N", data->n()}, {"D", data->d()}};
    s = embedding_spectrum(*data, Centering::global);
  }

  CalibratedSpectrum cs;
  if (cfg.zeta_K && cfg.zeta_beta) {
    cs = calibrate(s, *cfg.zeta_K, *cfg.zeta_beta);
  } else {
    NoiseFloor floor;
    if (data) {
      DiagnosticsConfig global = cfg;
      global.centering = Centering::global;
      floor = estimate_noise_floor(s, *data, global);
    } else {
      if (cfg.floor_method == FloorMethod::split_half)
        fail(Errc::contract, "split_half floor needs the data matrix, not a spectrum file");
      if (s.source_n == 0 && !cfg.zeta_K)
        fail(Errc::contract, "spectrum file has no N; automatic K needs it for the noise floor");
      if (s.source_n > 0) floor = noise_floor_theory(s, cfg.c0);
    }
    cs = calibrate(s, cfg.zeta_K, cfg.zeta_beta, floor);
  }

  if (a.dry_run) {
    json j{{"K", cs.K}, {"beta", cs.beta}, {"c", cs.c}, {"warnings", cs.warnings}};
    out << j.dump(2) << "\n";
    return 0;
  }
  json j = report::envelope("zeta-filter");
  json echo = to_json(rc);
  j["config"] = std::move(echo);
  j["inputs"] = inputs;
  j["spectrum"] = report::to_json(cs, a.eigenvectors);
  emit(j, a.output, out);
  return 0;
}

struct ClassifyArgs {
  AnalysisFlags flags;
  std::string input, labels, test, test_labels, output;
  bool calibrated = false;
};

int cmd_classify(const ClassifyArgs& a, std::ostream& out) {
  RunConfig rc = resolve_config(a.flags);
  json inputs = json::object();
  const std::string labels = a.labels.empty() ? rc.labels.value_or("") : a.labels;
  if (labels.empty()) fail(Errc::config, "--labels is required for classify");
  if (a.test_labels.empty()) fail(Errc::config, "--test-labels is required for classify");
  const EmbeddingSet train = load_set(need_path(a.input, rc.input, "--input"), labels, inputs, "train");
  EmbeddingSet test;
  test.data = io::read_matrix(a.test);
  test.labels = io::read_labels(a.test_labels);
  inputs["test"] = {{"digest", io::matrix_digest(test.data)}, {"N", test.n()}, {"D", test.d()}};
  inputs["test_labels"] = io::labels_digest(*test.labels);
  const ClassifyResult res = classify(train, test, rc.diagnostics, a.calibrated);
  json j = report::envelope("classify");
  j["config"] = to_json(rc);
  j["config"]["calibrated"] = a.calibrated;
  j["inputs"] = inputs;
  j["result"] = report::to_json(res);
  emit(j, a.output, out);
  return 0;
}

struct SimulateArgs {
  AnalysisFlags flags;
  std::string output;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  if (a.flags.config.empty()) fail(Errc::config, "simulate needs --config with a sweep block");
  RunConfig rc = resolve_config(a.flags);
  SweepBlock b = effective_sweep(rc);
  b.config.workers = worker_count();
  const std::string dir = !a.output.empty() ? a.output : rc.output_dir.value_or(".");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(Errc::io, "cannot create output directory '" + dir + "': " + ec.message());

  const SweepResult sr = run_sweep(b.spec, b.config);
  const json echo = to_json(rc);
  const json inputs = {{"config", io::text_digest(echo.dump())}};
  const std::filesystem::path base(dir);

  auto write_csv = [&](const std::string& name, auto writer) {
    std::ostringstream ss;
    writer(ss, sr);
    io::write_text((base / name).string(), ss.str());
  };
  write_csv("sweep.csv", report::write_sweep_csv);
  write_csv("modes.csv", report::write_modes_csv);
  write_csv("stability.csv", report::write_stability_csv);

  json sweep = report::envelope("simulate");
  sweep["config"] = echo;
  sweep["inputs"] = inputs;
  sweep["result"] = report::to_json(sr);
  io::write_text((base / "sweep.json").string(), sweep.dump(2) + "\n");

  json scaling = report::envelope("simulate");
  scaling["config"] = echo;
  scaling["inputs"] = inputs;
  scaling["scaling"] = report::scaling_summary(sr);
  io::write_text((base / "scaling.json").string(), scaling.dump(2) + "\n");

  std::size_t failed = 0;
  for (const auto& r : sr.rows) failed += r.ok() ? 0 : 1;
  json summary = report::envelope("simulate");
  summary["outputs"] = {"sweep.csv", "sweep.json", "modes.csv", "stability.csv", "scaling.json"};
  summary["rows"] = sr.rows.size();
  summary["failed_rows"] = failed;
  out << summary.dump(2) << "\n";
  return 0;
}

struct ConvertArgs {
  std::string input, output, format;
};

int cmd_convert(const ConvertArgs& a) {
  const Matrix m = io::read_matrix(a.input);
  io::write_matrix(a.output, m, a.format == "bin" ? io::MatrixFormat::bin : io::MatrixFormat::csv);
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"spectral_lab: finite-sample spectral diagnostics of embedding matrices"};
  app.footer(kExitCodes);
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(report::kToolVersion));

  SpectrumArgs spectrum;
  auto* s_spec = app.add_subcommand("spectrum", "Eigenvalues (and optionally eigenvectors) of the covariance");
  s_spec->add_option("--input", spectrum.input, "Matrix file (CSV or SPL1 binary)")->required();
  s_spec->add_option("--output", spectrum.output, "Output file (default: stdout)");
  s_spec->add_option("--format", spectrum.format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
  s_spec->add_flag("--eigenvectors", spectrum.eigenvectors, "Include sign-fixed eigenvectors");
  s_spec->add_flag("--unbiased", spectrum.unbiased, "Divide by N-1 instead of N");

  DiagnoseArgs diag;
  auto* s_diag = app.add_subcommand("diagnose", "Full diagnostics report");
  s_diag->add_option("--input", diag.input, "Matrix file");
  s_diag->add_option("--labels", diag.labels, "Integer labels, one per row");
  s_diag->add_option("--output", diag.output, "Output file (default: stdout)");
  add_analysis_flags(s_diag, diag.flags, true, true);

  StabilityArgs stab;
  auto* s_stab = app.add_subcommand("stability", "Principal-angle rotation of a test sample against a reference");
  s_stab->add_option("--ref", stab.ref, "Reference matrix file")->required();
  s_stab->add_option("--test", stab.test, "Test matrix file")->required();
  s_stab->add_option("--k", stab.k_list, "Comma-separated subspace sizes")->delimiter(',');
  s_stab->add_option("--seed", stab.seed, "Seed of the split-half floor");
  s_stab->add_option("--output", stab.output, "Output file (default: stdout)");

  ZetaArgs zeta;
  auto* s_zeta = app.add_subcommand("zeta-filter", "Replace the spectral tail by a power law");
  s_zeta->add_option("--input", zeta.input, "Matrix file or spectrum JSON");
  s_zeta->add_option("--output", zeta.output, "Output file (default: stdout)");
  s_zeta->add_flag("--dry-run", zeta.dry_run, "Print K, beta and c only");
  s_zeta->add_flag("--eigenvectors", zeta.eigenvectors, "Include eigenvectors in the output");
  add_analysis_flags(s_zeta, zeta.flags, true, false);

  ClassifyArgs cls;
  auto* s_cls = app.add_subcommand("classify", "One-vs-rest Fisher ROC-AUC on a held-out set");
  s_cls->add_option("--input", cls.input, "Training matrix file");
  s_cls->add_option("--labels", cls.labels, "Training labels");
  s_cls->add_option("--test", cls.test, "Test matrix file")->required();
  s_cls->add_option("--test-labels", cls.test_labels, "Test labels");
  s_cls->add_option("--output", cls.output, "Output file (default: stdout)");
  s_cls->add_flag("--calibrated", cls.calibrated, "Also score with the zeta-filtered spectrum");
  add_analysis_flags(s_cls, cls.flags, true, false);

  SimulateArgs sim;
  auto* s_sim = app.add_subcommand("simulate", "Seeded synthetic sweep over sample sizes");
  s_sim->add_option("--output", sim.output, "Output directory (default: output_dir or .)");
  add_analysis_flags(s_sim, sim.flags, true, false);

  ConvertArgs conv;
  auto* s_conv = app.add_subcommand("convert", "Convert a matrix between CSV and SPL1 binary");
  s_conv->add_option("--input", conv.input, "Matrix file")->required();
  s_conv->add_option("--output", conv.output, "Destination file")->required();
  s_conv->add_option("--format", conv.format, "csv | bin")->required()->check(CLI::IsMember({"csv", "bin"}));

  std::vector<std::string> argv_storage{"spectral_lab"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_storage) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    if (app.get_subcommands().empty()) err << "run with --help for usage\n";
    return static_cast<int>(Errc::config);
  }

  try {
    if (s_spec->parsed()) return cmd_spectrum(spectrum, out);
    if (s_diag->parsed()) return cmd_diagnose(diag, out);
    if (s_stab->parsed()) return cmd_stability(stab, out);
    if (s_zeta->parsed()) return cmd_zeta_filter(zeta, out);
    if (s_cls->parsed()) return cmd_classify(cls, out);
    if (s_sim->parsed()) return cmd_simulate(sim, out);
    if (s_conv->parsed()) return cmd_convert(conv);
  } catch (const Error& e) {
    err << "error (" << errc_name(e.code()) << "): " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::bad_alloc&) {
    err << "error: out of memory\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace spectral
