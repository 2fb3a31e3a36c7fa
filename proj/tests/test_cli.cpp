#include <cmath>
#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "spectral/cli.hpp"
#include "spectral/io.hpp"
#include "spectral/pipeline.hpp"
#include "spectral/report_json.hpp"
#include "spectral/separation.hpp"
#include "spectral/synthlab.hpp"
#include "test_util.hpp"

using namespace spectral;
using namespace testutil;
namespace fs = std::filesystem;
using report::json;

namespace {

struct Run {
  int code = 0;
  std::string out, err;
  json j() const { return json::parse(out); }
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

class Workdir {
 public:
  Workdir() : dir_(fs::temp_directory_path() / "spectral_test_cli") {
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  ~Workdir() { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::string matrix(const std::string& name, const Matrix& m) const {
    const std::string p = path(name);
    io::write_matrix(p, m, name.ends_with(".bin") ? io::MatrixFormat::bin : io::MatrixFormat::csv);
    return p;
  }
  std::string labels(const std::string& name, const std::vector<int>& y) const {
    const std::string p = path(name);
    io::write_labels(p, y);
    return p;
  }
  std::string text(const std::string& name, const std::string& body) const {
    const std::string p = path(name);
    io::write_text(p, body);
    return p;
  }

 private:
  fs::path dir_;
};

// Two well-separated blobs along the first axis.
EmbeddingSet separable(std::size_t per_class, std::uint64_t seed) {
  EmbeddingSet e{random_matrix(2 * per_class, 3, seed), std::vector<int>(2 * per_class, 0)};
  for (std::size_t r = per_class; r < 2 * per_class; ++r) {
    (*e.labels)[r] = 1;
    e.data(r, 0) += 20.0;
  }
  return e;
}

const char* kSmokeConfig = R"({
  "seed": 7,
  "k_list": [1, 2],
  "sweep": {"dim": 8, "beta": 1.5, "signal": [0, 0.8, 0.4], "n_per_class": 100,
            "n_grid": [64], "trials": 1}
})";

}  // namespace

TEST_CASE("help and argument errors") {
  const Run help = run({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("SPECTRAL_LAB_THREADS") != std::string::npos);
  CHECK(help.out.find("calibration") != std::string::npos);
  CHECK(run({}).code == 6);
  CHECK(run({"spectrum"}).code == 6);
  CHECK(run({"spectrum", "--input", "x.csv", "--bogus"}).code == 6);
  CHECK(run({"spectrum", "--input", "x.csv", "--format", "xml"}).code == 6);
}

TEST_CASE("spectrum") {
  Workdir w;
  const Matrix m(4, 2, {1, -1, -1, 1, 1, -1, -1, 1});
  const Run r = run({"spectrum", "--input", w.matrix("m.csv", m)});
  REQUIRE(r.code == 0);
  const json j = r.j();
  CHECK(j["tool"] == "spectral_lab");
  CHECK(j["command"] == "spectrum");
  CHECK(j["spectrum"]["eigenvalues"][0].get<double>() == doctest::Approx(2.0));
  CHECK(std::abs(j["spectrum"]["eigenvalues"][1].get<double>()) <= 1e-15);
  CHECK(j["spectrum"]["N"] == 4);
  CHECK(j["inputs"]["matrix"]["D"] == 2);
  CHECK_FALSE(j["spectrum"].contains("eigenvectors"));

  const Matrix x = random_matrix(30, 5, 3);
  const Run csv = run({"spectrum", "--input", w.matrix("x.csv", x), "--eigenvectors"});
  const Run bin = run({"spectrum", "--input", w.matrix("x.bin", x), "--eigenvectors"});
  CHECK(csv.code == 0);
  CHECK(csv.out == bin.out);
  CHECK(csv.j()["spectrum"]["eigenvectors"].size() == 5);

  const Run table = run({"spectrum", "--input", w.path("x.csv"), "--format", "csv"});
  CHECK(table.out.starts_with("index,eigenvalue\n1,"));

  const Run out_file = run({"spectrum", "--input", w.path("x.csv"), "--output", w.path("s.json")});
  CHECK(out_file.out.empty());
  CHECK(io::read_text(w.path("s.json")) == run({"spectrum", "--input", w.path("x.csv")}).out);

  CHECK(run({"spectrum", "--input", w.path("absent.csv")}).code == 2);
  CHECK(run({"spectrum", "--input", w.text("nan.csv", "1,2\nnan,3\n4,5\n")}).code == 3);
  CHECK(run({"spectrum", "--input", w.text("ragged.csv", "1,2\n3\n")}).code == 2);
  const Run one_row = run({"spectrum", "--input", w.text("one.csv", "1,2\n")});
  CHECK(one_row.code == 4);
  CHECK(one_row.err.find("error (contract)") != std::string::npos);
}

TEST_CASE("diagnose") {
  Workdir w;
  const SyntheticSpec spec = [] {
    SyntheticSpec s;
    s.dim = 10;
    s.beta = 1.5;
    s.signal = {0, 1, 0.5};
    return s;
  }();
  const EmbeddingSet e = sample(spec, 400, 0);
  const std::string x = w.matrix("x.csv", e.data);

  const Run plain = run({"diagnose", "--input", x});
  REQUIRE(plain.code == 0);
  const json p = plain.j();
  CHECK_FALSE(p["report"].contains("per_class"));
  CHECK(p["report"]["N"] == 400);
  const Spectrum s = embedding_spectrum(EmbeddingSet{e.data, std::nullopt}, Centering::global);
  CHECK(p["report"]["K_of_N"] == recoverable_dimension(s, noise_floor_theory(s)));
  CHECK(run({"diagnose", "--input", x}).out == plain.out);

  const std::string y = w.labels("y.txt", *e.labels);
  const Run labeled = run({"diagnose", "--input", x, "--labels", y, "--tau", "0.05"});
  REQUIRE(labeled.code == 0);
  const json l = labeled.j();
  CHECK(l["config"]["tau"] == 0.05);
  CHECK(l["report"]["thresholds"]["tau"] == 0.05);
  CHECK(l["report"]["per_class"].size() == 2);
  for (const char* key : {"Eff. Rank", "K(N)", "k(N)", "M-E", "Test AUC"})
    CHECK(l["report"]["table_row"].contains(key));

  std::vector<int> short_y(*e.labels);
  short_y.pop_back();
  CHECK(run({"diagnose", "--input", x, "--labels", w.labels("short.txt", short_y)}).code == 4);

  const std::string bad = w.text("bad.json", R"({"tau": 0.2, "colour": 1, "zeta": {"K": 2, "gamma": 1}})");
  const Run cfg = run({"diagnose", "--input", x, "--config", bad});
  CHECK(cfg.code == 6);
  CHECK(cfg.err.find("colour") != std::string::npos);
  CHECK(cfg.err.find("zeta.gamma") != std::string::npos);

  const std::string good = w.text("good.json", R"({"tau": 0.2, "variance_fraction": 0.9})");
  const json c = run({"diagnose", "--input", x, "--config", good, "--tau", "0.3"}).j();
  CHECK(c["config"]["tau"] == 0.3);
  CHECK(c["config"]["variance_fraction"] == 0.9);
  CHECK(run({"diagnose", "--input", x, "--tau", "-1"}).code == 6);
}

TEST_CASE("stability") {
  Workdir w;
  const std::string a = w.matrix("a.csv", random_matrix(200, 6, 1));
  const Run self = run({"stability", "--ref", a, "--test", a, "--k", "1,2,3"});
  REQUIRE(self.code == 0);
  const json j = self.j();
  REQUIRE(j["rows"].size() == 3);
  for (const auto& row : j["rows"]) CHECK(row["sin_theta"].get<double>() <= 1e-12);

  CHECK(run({"stability", "--ref", a, "--test", a, "--k", "6"}).code == 4);
  const std::string b = w.matrix("b.csv", random_matrix(200, 5, 2));
  CHECK(run({"stability", "--ref", a, "--test", b}).code == 4);
}

TEST_CASE("stability: rotation shrinks as the test sample grows") {
  Workdir w;
  SyntheticSpec spec;
  spec.dim = 12;
  spec.beta = 1.0;
  const Population pop = gen_population(spec);
  const std::string ref = w.matrix("ref.bin", sample_seeded(spec, pop, 20000, 1).data);
  Vector small, large;
  for (std::uint64_t seed = 10; seed < 15; ++seed) {
    const std::string s = w.matrix("s.bin", sample_seeded(spec, pop, 100, seed).data);
    const std::string l = w.matrix("l.bin", sample_seeded(spec, pop, 5000, seed).data);
    small.push_back(run({"stability", "--ref", ref, "--test", s, "--k", "3"}).j()["rows"][0]["sin_theta"]);
    large.push_back(run({"stability", "--ref", ref, "--test", l, "--k", "3"}).j()["rows"][0]["sin_theta"]);
  }
  CHECK(median(large) < median(small));
}

TEST_CASE("zeta-filter") {
  Workdir w;
  const std::string worked = w.text("spec.json", R"({"eigenvalues": [4, 1, 0.01, 0.001], "N": 100})");
  const Run r = run({"zeta-filter", "--input", worked, "--k", "2", "--beta", "1"});
  REQUIRE(r.code == 0);
  const json ev = r.j()["spectrum"]["eigenvalues"];
  CHECK(ev[2].get<double>() == doctest::Approx(2.0 / 3.0));
  CHECK(ev[3].get<double>() == 0.5);
  CHECK(r.j()["spectrum"]["provenance"]["c"] == 2.0);

  const Run dry = run({"zeta-filter", "--input", worked, "--k", "2", "--beta", "1", "--dry-run",
                       "--output", w.path("never.json")});
  CHECK(dry.code == 0);
  CHECK(dry.j()["K"] == 2);
  CHECK_FALSE(fs::exists(w.path("never.json")));

  const std::string exact = w.text("pl.json", R"({"eigenvalues": [1, 0.25, 0.1111111111111111, 0.0625], "N": 10})");
  const json pl = run({"zeta-filter", "--input", exact, "--k", "2", "--beta", "2"}).j();
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(pl["spectrum"]["eigenvalues"][i].get<double>() ==
          doctest::Approx(1.0 / double((i + 1) * (i + 1))).epsilon(1e-12));

  const std::string flat = w.text("flat.json", R"({"eigenvalues": [1, 1, 1, 1, 1e-9], "N": 400})");
  const json f = run({"zeta-filter", "--input", flat, "--dry-run"}).j();
  CHECK(f["beta"] == 0.0);
  CHECK_FALSE(f["warnings"].empty());

  const std::string tiny = w.text("tiny.json", R"({"eigenvalues": [1, 0.5, 0.2, 0.1, 0.05], "N": 2})");
  CHECK(run({"zeta-filter", "--input", tiny}).code == 5);
  CHECK(run({"zeta-filter", "--input", worked, "--k", "4", "--beta", "1"}).code == 4);
  CHECK(run({"zeta-filter", "--input", w.text("up.json", R"({"eigenvalues": [1, 2]})"), "--k", "1", "--beta", "1"})
            .code == 4);
  CHECK(run({"zeta-filter", "--input", worked, "--k", "two"}).code == 6);

  const std::string m = w.matrix("m.csv", random_matrix(500, 6, 4));
  CHECK(run({"zeta-filter", "--input", m, "--noise-floor", "split_half"}).code != 6);
}

TEST_CASE("classify") {
  Workdir w;
  const EmbeddingSet train = separable(50, 1), test = separable(50, 2);
  const std::string x = w.matrix("train.csv", train.data), y = w.labels("y.txt", *train.labels);
  const std::string tx = w.matrix("test.bin", test.data), ty = w.labels("ty.txt", *test.labels);
  const Run r = run({"classify", "--input", x, "--labels", y, "--test", tx, "--test-labels", ty, "--calibrated"});
  REQUIRE(r.code == 0);
  const json j = r.j();
  CHECK(j["result"]["raw"]["macro"] == 1.0);
  CHECK(j["result"]["table_row"].contains("Test AUC (calibrated)"));
  CHECK(j["config"]["calibrated"] == true);

  std::vector<int> extra = *test.labels;
  extra.back() = 2;
  CHECK(run({"classify", "--input", x, "--labels", y, "--test", tx, "--test-labels", w.labels("e.txt", extra)})
            .code == 4);
  CHECK(run({"classify", "--input", x, "--labels", y, "--test", tx}).code == 6);
  CHECK(run({"classify", "--input", x, "--labels", y, "--test", w.matrix("narrow.csv", random_matrix(10, 2, 3)),
             "--test-labels", w.labels("n.txt", std::vector<int>(10, 0))})
            .code == 4);
}

TEST_CASE("classify: shuffled labels give chance-level AUC") {
  DiagnosticsConfig cfg;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    EmbeddingSet train = separable(1000, 100 + seed), test = separable(1000, 200 + seed);
    Rng rng(seed);
    const auto perm = permutation(test.n(), rng);
    std::vector<int> shuffled(test.n());
    for (std::size_t i = 0; i < test.n(); ++i) shuffled[i] = (*test.labels)[perm[i]];
    test.labels = shuffled;
    const double macro = classify(train, test, cfg, false).raw.macro;
    CHECK(std::abs(macro - 0.5) <= 0.05);
  }
}

TEST_CASE("classify at scale tracks Phi(d_M / sqrt 2)") {
  SyntheticSpec spec;
  spec.dim = 16;
  spec.signal = {2.0};
  const Population pop = gen_population(spec);
  const EmbeddingSet train = sample_seeded(spec, pop, 40000, 1);
  const EmbeddingSet test = sample_seeded(spec, pop, 40000, 2);
  DiagnosticsConfig cfg;
  cfg.centering = Centering::per_class;
  const double macro = classify(train, test, cfg, false).raw.macro;
  CHECK(std::abs(macro - binormal_auc(pop.dm2)) <= 0.01);
}

// Stated oracle Φ(d_M/2); it is the midpoint-threshold accuracy, not the AUC.
TEST_CASE("classify at scale as stated: within 0.01 of Phi(d_M/2)" * doctest::should_fail()) {
  SyntheticSpec spec;
  spec.dim = 16;
  spec.signal = {2.0};
  const Population pop = gen_population(spec);
  const EmbeddingSet train = sample_seeded(spec, pop, 40000, 1);
  const EmbeddingSet test = sample_seeded(spec, pop, 40000, 2);
  DiagnosticsConfig cfg;
  cfg.centering = Centering::per_class;
  CHECK(std::abs(classify(train, test, cfg, false).raw.macro - gaussian_auc(pop.dm2)) <= 0.01);
}

TEST_CASE("simulate") {
  Workdir w;
  const std::string cfg = w.text("sim.json", kSmokeConfig);
  const Run r = run({"simulate", "--config", cfg, "--output", w.path("a")});
  REQUIRE(r.code == 0);
  CHECK(r.j()["rows"] == 1);
  CHECK(r.j()["failed_rows"] == 0);
  const std::string csv = io::read_text(w.path("a/sweep.csv"));
  std::size_t lines = 0;
  for (char ch : csv) lines += ch == '\n';
  CHECK(lines == 2);
  for (const char* f : {"modes.csv", "stability.csv", "sweep.json", "scaling.json"})
    CHECK(fs::exists(w.path(std::string("a/") + f)));

  REQUIRE(run({"simulate", "--config", cfg, "--output", w.path("b")}).code == 0);
  for (const char* f : {"sweep.csv", "modes.csv", "stability.csv", "sweep.json", "scaling.json"})
    CHECK(io::read_text(w.path(std::string("a/") + f)) == io::read_text(w.path(std::string("b/") + f)));

  CHECK(run({"simulate", "--output", w.path("c")}).code == 6);
  const std::string bad = w.text("bad.json", R"({"sweep": {"dim": 8, "n_grid": [64], "trails": 3}})");
  const Run b = run({"simulate", "--config", bad});
  CHECK(b.code == 6);
  CHECK(b.err.find("sweep.trails") != std::string::npos);
  const std::string no_grid = w.text("nogrid.json", R"({"sweep": {"dim": 8}})");
  CHECK(run({"simulate", "--config", no_grid}).code == 6);
  CHECK(run({"simulate", "--config", w.text("broken.json", "{")}).code == 6);
}

TEST_CASE("convert") {
  Workdir w;
  const Matrix m = random_matrix(9, 4, 5);
  const std::string csv = w.matrix("m.csv", m);
  REQUIRE(run({"convert", "--input", csv, "--output", w.path("m.bin"), "--format", "bin"}).code == 0);
  CHECK(io::read_matrix(w.path("m.bin")) == m);
  REQUIRE(run({"convert", "--input", w.path("m.bin"), "--output", w.path("back.csv"), "--format", "csv"}).code == 0);
  CHECK(io::read_text(w.path("back.csv")) == io::read_text(csv));
}
