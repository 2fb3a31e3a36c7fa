#include "spectral/report_json.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "spectral/error.hpp"
#include "spectral/io.hpp"

namespace spectral::report {

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string csv_cell(double v) { return std::isfinite(v) ? io::format_double(v) : std::string(); }

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

double quantile(Vector v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * double(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - double(lo)) * (v[hi] - v[lo]);
}

}  // namespace

json envelope(const std::string& command) {
  return json{{"tool", kToolName}, {"version", kToolVersion}, {"schema_version", kSchemaVersion},
              {"command", command}};
}

json to_json(const NoiseFloor& nf) {
  json j{{"value", nf.value}, {"method", to_string(nf.method)}};
  if (nf.method == FloorMethod::theory) {
    j["c0"] = nf.c0;
    j["formula"] = "c0 * lambda_1 * sqrt(D / N)";
  } else {
    j["seed"] = nf.seed;
    j["formula"] = "||S_a - S_b||_op / 2 over a seeded half split";
  }
  return j;
}

json to_json(const SlopeFit& fit) {
  return json{{"beta", fit.beta},
              {"r_squared", optional_number(fit.r_squared)},
              {"fit_range", json::array({fit.first, fit.last})},
              {"modes_used", fit.used}};
}

json to_json(const FitResult& fit) {
  return json{{"slope", fit.slope},
              {"intercept", fit.intercept},
              {"r_squared", optional_number(fit.r_squared)},
              {"r_squared_defined", fit.r_squared.has_value()},
              {"points", fit.points}};
}

json to_json(const OvrAuc& auc) { return json{{"macro", auc.macro}, {"per_class", auc.per_class}}; }

json to_json(const MahalanobisResult& me) {
  return json{{"d_M2_full", me.full_energy},
              {"d_M_full", std::sqrt(me.full_energy)},
              {"d_M2_truncated", me.truncated_energy},
              {"d_M_truncated", std::sqrt(me.truncated_energy)},
              {"K_used", me.K_used},
              {"valid_modes", me.valid_modes},
              {"gaussian_auc_full", gaussian_auc(me.full_energy)},
              {"gaussian_auc_truncated", gaussian_auc(me.truncated_energy)},
              {"binormal_auc_full", binormal_auc(me.full_energy)},
              {"binormal_auc_truncated", binormal_auc(me.truncated_energy)}};
}

json to_json(const Spectrum& s, bool with_vectors) {
  double trace = 0.0;
  for (double l : s.eigenvalues) trace += l;
  json j{{"N", s.source_n},
         {"D", s.d()},
         {"eigenvalues", s.eigenvalues},
         {"raw_eigenvalues", s.raw_eigenvalues},
         {"trace", trace}};
  if (with_vectors && !s.eigenvectors.empty()) {
    json vecs = json::array();
    for (std::size_t i = 0; i < s.d(); ++i) vecs.push_back(s.vector(i));
    j["eigenvectors"] = std::move(vecs);
  }
  return j;
}

json to_json(const CalibratedSpectrum& cs, bool with_vectors) {
  json j = to_json(cs.as_spectrum(), with_vectors);
  j.erase("raw_eigenvalues");
  j["provenance"] = json{{"method", "zeta_filter"},
                         {"K", cs.K},
                         {"beta", cs.beta},
                         {"c", cs.c},
                         {"K_source", cs.k_auto ? "auto" : "explicit"},
                         {"beta_source", cs.beta_auto ? "auto" : "explicit"},
                         {"beta_floored", cs.beta_floored},
                         {"beta_fit", cs.beta_fit ? to_json(*cs.beta_fit) : json(nullptr)},
                         {"trace_raw", cs.trace_raw},
                         {"trace_calibrated", cs.trace_calibrated},
                         {"warnings", cs.warnings}};
  return j;
}

json to_json(const DiagnosticsConfig& cfg) {
  json j{{"variance_fraction", cfg.variance_fraction},
         {"tau", cfg.tau},
         {"noise_floor", {{"method", to_string(cfg.floor_method)}, {"c0", cfg.c0}}},
         {"seed", cfg.seed},
         {"centering", to_string(cfg.centering)},
         {"k_list", cfg.k_list},
         {"zeta",
          {{"K", cfg.zeta_K ? json(*cfg.zeta_K) : json("auto")},
           {"beta", cfg.zeta_beta ? json(*cfg.zeta_beta) : json("auto")}}}};
  if (cfg.fit_range) j["fit_range"] = json::array({cfg.fit_range->first, cfg.fit_range->second});
  return j;
}

json to_json(const DiagnosticsReport& rep) {
  json j{{"N", rep.n}, {"D", rep.d}, {"classes", rep.num_classes}};
  j["thresholds"] = {{"variance_fraction", rep.config.variance_fraction}, {"tau", rep.config.tau}};
  j["centering"] = to_string(rep.config.centering);
  j["spectrum"] = to_json(rep.spectrum, false);
  j["effective_rank"] = rep.effective_rank;
  j["K_of_N"] = rep.K_of_N;
  j["noise_floor"] = to_json(rep.noise_floor);
  j["beta"] = rep.beta_fit ? to_json(*rep.beta_fit) : json(nullptr);
  if (rep.beta_fit) {
    j["zeta"] = {{"beta", rep.beta_fit->beta},
                 {"K", std::max<std::size_t>(1, rep.K_of_N)},
                 {"truncated", optional_number(rep.truncated_zeta)},
                 {"full", optional_number(rep.zeta)},
                 {"divergent", !zeta_converges(rep.beta_fit->beta)}};
  } else {
    j["zeta"] = nullptr;
  }
  json rows = json::array();
  for (const auto& r : rep.stability)
    rows.push_back({{"k", r.k}, {"eigengap", r.eigengap}, {"dk_bound", r.bound}});
  j["stability"] = {{"gap_source", rep.gap_source},
                    {"op_err_source", "noise_floor"},
                    {"rows", std::move(rows)}};
  if (rep.calibration)
    j["calibration"] = to_json(*rep.calibration, false)["provenance"];
  else
    j["calibration"] = {{"refused", rep.calibration_refused.value_or("")}};

  if (!rep.classes.empty()) {
    json classes = json::array();
    for (const auto& c : rep.classes) {
      json m = to_json(c.energy);
      m["d_M2_calibrated"] = optional_number(c.calibrated_energy);
      classes.push_back({{"class_id", c.class_id},
                         {"contrast", "one_vs_rest"},
                         {"n_pos", c.n_pos},
                         {"n_neg", c.n_neg},
                         {"k_of_N", c.k_of_N},
                         {"mahalanobis", std::move(m)},
                         {"alphas_sq", c.alphas_sq}});
    }
    j["per_class"] = std::move(classes);
    j["k_of_N_mean"] = optional_number(rep.k_of_N_mean);
  }
  j["table_row"] = {{"Eff. Rank", rep.effective_rank},
                    {"K(N)", rep.K_of_N},
                    {"k(N)", optional_number(rep.k_of_N_mean)},
                    {"M-E", optional_number(rep.energy_mean)},
                    {"M-E definition", "mean over one-vs-rest classes of truncated d_M^2 (modes 1..K(N))"},
                    {"Test AUC", nullptr}};
  j["warnings"] = rep.warnings;
  return j;
}

json to_json(const ClassifyResult& res) {
  json j{{"N_train", res.n_train}, {"N_test", res.n_test}, {"D", res.d}, {"classes", res.num_classes}};
  j["noise_floor"] = to_json(res.noise_floor);
  j["raw"] = to_json(res.raw);
  if (res.calibrated) j["calibrated"] = to_json(*res.calibrated);
  if (res.calibration) j["calibration"] = to_json(*res.calibration, false)["provenance"];
  if (res.calibration_refused) j["calibration"] = {{"refused", *res.calibration_refused}};
  j["table_row"] = {{"Test AUC", res.raw.macro},
                    {"Test AUC (calibrated)", res.calibrated ? json(res.calibrated->macro) : json(nullptr)}};
  return j;
}

json to_json(const SyntheticSpec& spec) {
  return json{{"dim", spec.dim},           {"beta", spec.beta},
              {"signal", spec.signal},     {"n_per_class", spec.n_per_class},
              {"rotation_seed", spec.rotation_seed}, {"noise_seed", spec.noise_seed}};
}

json to_json(const SweepConfig& cfg) {
  return json{{"n_grid", cfg.n_grid},
              {"trials", cfg.trials},
              {"k_list", cfg.k_list},
              {"variance_fraction", cfg.variance_fraction},
              {"tau", cfg.tau},
              {"noise_floor", {{"method", to_string(cfg.floor_method)}, {"c0", cfg.c0}}},
              {"zeta",
               {{"K", cfg.zeta_K ? json(*cfg.zeta_K) : json("auto")},
                {"beta", cfg.zeta_beta ? json(*cfg.zeta_beta) : json("auto")}}},
              {"reference_n", cfg.reference_n ? json(*cfg.reference_n) : json(nullptr)}};
}

json to_json(const SweepResult& sr) {
  json rows = json::array();
  for (const SweepRow& r : sr.rows) {
    json row{{"N", r.n}, {"trial", r.trial}, {"seed", r.seed}, {"status", r.status}};
    if (r.ok()) {
      for (const auto& name : sweep_field_names(sr.config)) {
        if (name.rfind("sin_theta_k", 0) == 0 || name.rfind("eigengap_k", 0) == 0 ||
            name.rfind("dk_bound_k", 0) == 0)
          continue;  // per-k values are nested below
        const auto v = sweep_field(r, name);
        row[name] = v ? json(*v) : json(nullptr);
      }
      row["calibration"] = r.calibration;
      json ks = json::array();
      for (const auto& k : r.ks)
        ks.push_back({{"k", k.k},
                      {"sin_theta", k.sin_theta},
                      {"eigengap", k.eigengap},
                      {"dk_bound", k.dk_bound},
                      {"dk_applicable", k.applicable}});
      row["stability"] = std::move(ks);
    }
    rows.push_back(std::move(row));
  }
  return json{{"master_seed", sr.master_seed},
              {"spec", to_json(sr.spec)},
              {"config", to_json(sr.config)},
              {"reference", sr.reference},
              {"population",
               {{"d_M2", sr.population_dm2},
                {"gaussian_auc", sr.population_auc},
                {"binormal_auc", binormal_auc(sr.population_dm2)}}},
              {"rows", std::move(rows)}};
}

Spectrum spectrum_from_json(const json& j) {
  Spectrum s;
  try {
    s.eigenvalues = j.at("eigenvalues").get<Vector>();
    s.raw_eigenvalues = j.contains("raw_eigenvalues") ? j.at("raw_eigenvalues").get<Vector>()
                                                      : s.eigenvalues;
    s.source_n = j.contains("N") && !j.at("N").is_null() ? j.at("N").get<std::size_t>() : 0;
    const std::size_t d = s.eigenvalues.size();
    if (j.contains("eigenvectors")) {
      const auto vecs = j.at("eigenvectors").get<std::vector<Vector>>();
      if (vecs.size() != d) fail(Errc::io, "spectrum JSON: eigenvector count differs from D");
      s.eigenvectors = Matrix(d, d);
      for (std::size_t i = 0; i < d; ++i) {
        if (vecs[i].size() != d) fail(Errc::io, "spectrum JSON: eigenvector length differs from D");
        s.eigenvectors.set_column(i, vecs[i]);
      }
    } else {
      s.eigenvectors = Matrix::identity(d);
    }
  } catch (const json::exception& e) {
    fail(Errc::io, std::string("malformed spectrum JSON: ") + e.what());
  }
  if (s.eigenvalues.empty()) fail(Errc::io, "spectrum JSON has no eigenvalues");
  for (double l : s.eigenvalues)
    if (!std::isfinite(l)) fail(Errc::data_quality, "non-finite eigenvalue in spectrum JSON");
  for (std::size_t i = 1; i < s.eigenvalues.size(); ++i)
    if (s.eigenvalues[i] > s.eigenvalues[i - 1])
      fail(Errc::contract, "spectrum JSON eigenvalues must be non-increasing");
  return s;
}

void write_sweep_csv(std::ostream& out, const SweepResult& sr) {
  const std::vector<std::string> scalars = {
      "effective_rank", "K_of_N", "k_of_N_class0", "k_of_N_class1", "beta", "beta_r2",
      "me_full", "me_truncated", "me_calibrated", "noise_floor", "op_err", "lambda1",
      "auc_raw", "auc_calibrated"};
  out << "N,trial,seed,status";
  for (const auto& s : scalars) out << ',' << s;
  out << ",calibration,zeta_K,zeta_beta,zeta_c";
  for (std::size_t k : sr.config.k_list)
    out << ",sin_theta_k" << k << ",eigengap_k" << k << ",dk_bound_k" << k << ",dk_applicable_k" << k;
  out << '\n';
  for (const SweepRow& r : sr.rows) {
    out << r.n << ',' << r.trial << ',' << r.seed << ',' << csv_quote(r.status);
    if (!r.ok()) {
      const std::size_t blanks = scalars.size() + 4 + 4 * sr.config.k_list.size();
      for (std::size_t i = 0; i < blanks; ++i) out << ',';
      out << '\n';
      continue;
    }
    for (const auto& s : scalars) out << ',' << csv_cell(sweep_field(r, s).value_or(NAN));
    out << ',' << r.calibration << ',' << csv_cell(r.zeta_K) << ',' << csv_cell(r.zeta_beta) << ','
        << csv_cell(r.zeta_c);
    for (const auto& k : r.ks)
      out << ',' << csv_cell(k.sin_theta) << ',' << csv_cell(k.eigengap) << ',' << csv_cell(k.dk_bound)
          << ',' << (k.applicable ? 1 : 0);
    out << '\n';
  }
}

void write_modes_csv(std::ostream& out, const SweepResult& sr) {
  out << "N,trial,mode,log_mode,lambda,log_lambda,alpha_sq,log_alpha_sq,ratio\n";
  for (const SweepRow& r : sr.rows) {
    if (r.trial != 0 || !r.ok()) continue;
    for (std::size_t i = 0; i < r.modes.size(); ++i) {
      const auto& m = r.modes[i];
      const double li = double(i + 1);
      const double ll = m.lambda > 0.0 ? std::log(m.lambda) : NAN;
      const double la = m.alpha_sq > 0.0 ? std::log(m.alpha_sq) : NAN;
      const double ratio = m.lambda > 0.0 ? m.alpha_sq / m.lambda : NAN;
      out << r.n << ',' << r.trial << ',' << i + 1 << ',' << csv_cell(std::log(li)) << ','
          << csv_cell(m.lambda) << ',' << csv_cell(ll) << ',' << csv_cell(m.alpha_sq) << ','
          << csv_cell(la) << ',' << csv_cell(ratio) << '\n';
    }
  }
}

void write_stability_csv(std::ostream& out, const SweepResult& sr) {
  out << "N,k,trials,sin_theta_median,sin_theta_q25,sin_theta_q75,dk_bound_median,eigengap\n";
  for (std::size_t n : sr.config.n_grid)
    for (std::size_t ki = 0; ki < sr.config.k_list.size(); ++ki) {
      Vector sines, bounds;
      double gap = NAN;
      for (const SweepRow& r : sr.rows)
        if (r.n == n && r.ok() && ki < r.ks.size()) {
          sines.push_back(r.ks[ki].sin_theta);
          bounds.push_back(r.ks[ki].dk_bound);
          gap = r.ks[ki].eigengap;
        }
      if (sines.empty()) continue;
      out << n << ',' << sr.config.k_list[ki] << ',' << sines.size() << ','
          << csv_cell(quantile(sines, 0.5)) << ',' << csv_cell(quantile(sines, 0.25)) << ','
          << csv_cell(quantile(sines, 0.75)) << ',' << csv_cell(quantile(bounds, 0.5)) << ','
          << csv_cell(gap) << '\n';
    }
}

json scaling_summary(const SweepResult& sr) {
  json fits = json::object();
  std::vector<std::string> fields = {"op_err", "K_of_N", "noise_floor", "effective_rank", "me_truncated"};
  for (std::size_t k : sr.config.k_list) fields.push_back("sin_theta_k" + std::to_string(k));
  for (const auto& f : fields) {
    json entry;
    json med = json::array();
    for (const auto& p : medians_by_n(sr, f)) med.push_back({{"N", p.n}, {"median", p.median}, {"count", p.count}});
    entry["medians"] = std::move(med);
    try {
      entry["fit"] = to_json(scaling_fit(sr, f));
    } catch (const Error& e) {
      entry["fit"] = nullptr;
      entry["error"] = e.what();
    }
    fits[f] = std::move(entry);
  }
  std::size_t applicable = 0, satisfied = 0;
  for (const SweepRow& r : sr.rows)
    for (const auto& k : r.ks)
      if (r.ok() && k.applicable) {
        ++applicable;
        if (k.sin_theta <= k.dk_bound) ++satisfied;
      }
  return json{{"master_seed", sr.master_seed},
              {"fits", std::move(fits)},
              {"davis_kahan", {{"applicable_rows", applicable}, {"satisfied_rows", satisfied}}}};
}

}  // namespace spectral::report
