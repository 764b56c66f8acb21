#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

#include "latentdyn/cli.hpp"
#include "latentdyn/dynamics.hpp"
#include "latentdyn/linalg.hpp"
#include "latentdyn/postsym.hpp"
#include "latentdyn/spectral.hpp"
#include "oracles.hpp"

using namespace latentdyn;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(const std::string& name, const std::function<Outcome()>& check) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("threw ") + e.what()};
  }
  std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string drop_timestamp(const std::string& svg) {
  const auto start = svg.find("<!-- generated ");
  if (start == std::string::npos) return svg;
  return svg.substr(0, start) + svg.substr(svg.find("-->", start));
}

int run_quiet(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int status = cli::run(args, out, err);
  if (status != 0) std::fprintf(stderr, "%s", err.str().c_str());
  return status;
}

const fs::path kWork = fs::temp_directory_path() / "latentdyn_acceptance";

SimulationSpec pipeline_spec(double lambda) {
  // Start far from the fixed point so the run enters the basin.
  return {UpdateOperator::affine(std::vector<double>(8, 6.0), lambda, 0.05), std::vector<double>(8, 0.0), 4096, 7};
}

Outcome synthetic_pipeline() {
  const auto t0 = std::chrono::steady_clock::now();
  cli::cmd_simulate(pipeline_spec(0.9), kWork / "contraction.lst");
  cli::AnalyzeConfig cfg;
  cfg.input = (kWork / "contraction.lst").string();
  const auto attractor = cli::cmd_analyze(cfg, kWork / "contraction");

  cli::cmd_simulate(pipeline_spec(0.0), kWork / "white.lst");
  cfg.input = (kWork / "white.lst").string();
  const auto control = cli::cmd_analyze(cfg, kWork / "white");
  const double elapsed = seconds_since(t0);

  const double ratio = attractor.spectrum.band_ratio;
  const double occ = attractor.basins.basins.front().occupancy;
  const double c_ratio = control.spectrum.band_ratio;
  const double c_occ = control.basins.basins.front().occupancy;
  const bool pass = ratio > 6 && occ >= 0.5 && c_ratio < 2 && c_occ <= 0.1 && elapsed < 10.0;
  return {pass, "lambda=0.9 band_ratio=" + num(ratio) + " (>6) occupancy=" + num(occ) +
                    " (>=0.5); lambda=0 band_ratio=" + num(c_ratio) + " (<2) occupancy=" + num(c_occ) +
                    " (<=0.1); " + num(elapsed) + " s (<10)"};
}

Outcome spectral_correctness() {
  std::vector<double> x(1024);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(2.0 * std::numbers::pi * 0.125 * static_cast<double>(i));
  const auto r = analyze_spectrum(x);
  const double freq_err = std::abs(r.dominant_freq - 0.125);

  std::vector<double> single(129, 0.0), uniform(129, 1.0);
  single[17] = 1.0;
  const double h0 = spectral_entropy(single), h1 = spectral_entropy(uniform);

  Rng rng(1);
  double dft_err = 0.0;
  for (std::size_t n = 1; n <= 1024; n *= 2) {
    std::vector<std::complex<double>> v(n);
    for (auto& c : v) c = {rng.normal(), rng.normal()};
    const auto ref = oracle::naive_dft(v);
    fft_inplace(v);
    for (std::size_t k = 0; k < n; ++k) dft_err = std::max(dft_err, std::abs(v[k] - ref[k]));
  }
  const bool pass = freq_err <= 1.0 / 256 && std::abs(h0) <= 1e-12 && std::abs(h1 - 1.0) <= 1e-12 && dft_err <= 1e-9;
  return {pass, "sine peak " + num(r.dominant_freq) + " (|err| " + num(freq_err) + " <= 1/256); entropy " + num(h0) +
                    " / " + num(h1) + "; max |FFT - DFT| " + num(dft_err) + " (<=1e-9)"};
}

Outcome pca_oracle() {
  double eig_err = 0.0, mean_err = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const std::size_t n = 3 + rng.below(48);
    const std::size_t d = 2 + rng.below(7);
    std::vector<double> data(n * d);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) data[i * d + j] = rng.normal() * (0.5 + rng.uniform()) + rng.uniform(-3, 3);
    const Trajectory t(n, d, data);
    const std::size_t k = std::min(n - 1, d);
    const auto m = fit_pca(t, k);
    const auto cov = covariance(t, column_mean(t));
    oracle::Dense dense(d, std::vector<double>(d));
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) dense[i][j] = cov(i, j);
    const auto ref = oracle::jacobi_eigenvalues(dense);
    for (std::size_t i = 0; i < k; ++i) eig_err = std::max(eig_err, std::abs(m.eigenvalues[i] - std::max(ref[i], 0.0)));
    const auto z = project_onto(m, t, k);
    for (std::size_t j = 0; j < k; ++j) {
      double mean = 0.0;
      for (std::size_t s = 0; s < n; ++s) mean += z(s, j);
      mean_err = std::max(mean_err, std::abs(mean / static_cast<double>(n)));
    }
  }
  return {eig_err <= 1e-9 && mean_err <= 1e-9,
          "100 matrices, max eigenvalue error " + num(eig_err) + " (<=1e-9), max projected mean " + num(mean_err) +
              " (<=1e-9)"};
}

Outcome dynamics() {
  const double lambda = 0.5;
  const std::vector<double> c = {3.0, -1.0, 0.5, 2.0};
  const std::vector<double> a0 = {0.0, 0.0, 0.0, 0.0};
  const auto op = UpdateOperator::affine(c, lambda);
  const auto fixed = iterate(op, a0, 1000, 1e-10);
  const double fp_err = distance(fixed.point, c);

  const auto orbit = iterate(op, a0, 40, 1e-300, true).orbit;
  const double d0 = distance(a0, c);
  double decay_err = 0.0;
  for (std::size_t n = 0; n < orbit.steps(); ++n)
    decay_err = std::max(decay_err, std::abs(distance(orbit.row(n), c) - std::pow(lambda, static_cast<double>(n)) * d0));

  const double lip = estimate_lipschitz(op, c, 1.0, 64, 7);
  const bool pass = fixed.converged && fp_err <= 1e-9 && decay_err <= 1e-9 && lip >= lambda - 0.05 && lip <= lambda + 1e-9;
  return {pass, "fixed point error " + num(fp_err) + " (<=1e-9); decay error " + num(decay_err) +
                    " (<=1e-9); Lipschitz estimate " + num(lip) + " in [0.45, 0.5+1e-9]"};
}

Outcome decision() {
  std::size_t models = 0, violations = 0, table_changes = 0;
  double worst_gap = -INFINITY;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    Rng rng(seed);
    const std::size_t nx = 1 + rng.below(3), ne = 1 + rng.below(2), na = 2 + rng.below(2), ny = 1 + rng.below(3);
    auto m = oracle::random_model(rng, nx, ne, na, ny);
    for (auto agg : {Aggregate::Max, Aggregate::Mean}) {
      const auto t = solve_bayes(m, agg);
      const auto best = oracle::brute_best_deterministic(m, agg == Aggregate::Max);
      worst_gap = std::max(worst_gap, t.risk - best.risk);
      if (t.risk > best.risk + 1e-12) ++violations;
      for (int k = 0; k < 1000; ++k) {
        const double r = policy_risk(m, oracle::random_policy(rng, nx, ne, na), agg);
        worst_gap = std::max(worst_gap, t.risk - r);
        if (t.risk > r + 1e-12) ++violations;
      }
    }
    const auto before = solve_bayes(m);
    const double scale = rng.uniform(0.1, 10.0);
    for (std::size_t a = 0; a < na; ++a)
      for (std::size_t x = 0; x < nx; ++x)
        for (std::size_t y = 0; y < ny; ++y) m.utility(a, x, y) *= scale;
    if (solve_bayes(m).action != before.action) ++table_changes;
    ++models;
  }
  return {violations == 0 && table_changes == 0 && models >= 50,
          std::to_string(models) + " models, " + std::to_string(violations) +
              " risk violations (max risk - competitor " + num(worst_gap) + "), " + std::to_string(table_changes) +
              " tables changed under utility scaling"};
}

Outcome postsymbolic() {
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t cases = 0, mismatches = 0;
  std::set<BigInt> codes;
  std::vector<Glyph> symbols;
  for (std::size_t len = 1; len <= 6; ++len) {
    std::size_t total = 1;
    for (std::size_t i = 0; i < len; ++i) total *= 7;
    symbols.assign(len, Glyph::Not);
    for (std::size_t idx = 0; idx < total; ++idx) {
      std::size_t rest = idx;
      for (std::size_t i = 0; i < len; ++i) {
        symbols[i] = static_cast<Glyph>(rest % 7);
        rest /= 7;
      }
      const Formula f(symbols);
      const auto code = encode(f);
      if (!(decode(code) == f) || !codes.insert(code.value).second) ++mismatches;
      ++cases;
    }
  }
  const double elapsed = seconds_since(t0);

  RepairConfig cfg;
  cfg.rate = 0.5;
  cfg.center = {0.5, -0.25, 1.0, 0.0, 2.0, -1.0, 0.0, 0.75};
  const auto a = repair(Formula::parse("∅"), cfg);
  const auto b = repair(Formula::parse("∅"), cfg);
  const double fp_err = distance(a.fixed_point, cfg.center);
  const bool same = a.iterates == b.iterates && to_json(a).dump() == to_json(b).dump();
  const bool pass = mismatches == 0 && elapsed < 5.0 && a.converged && fp_err <= 1e-9 && same;
  return {pass, std::to_string(cases) + " classical formulas (length 6 alone: 117649), " + std::to_string(mismatches) +
                    " roundtrip/injectivity failures in " + num(elapsed) + " s (<5); repair fixed point error " +
                    num(fp_err) + " (<=1e-9); traces identical: " + (same ? "yes" : "no")};
}

Outcome reproducibility() {
  const fs::path w = kWork / "repro";
  fs::create_directories(w);
  std::vector<std::string> diffs;
  auto compare = [&](const fs::path& a, const fs::path& b, bool svg = false) {
    auto x = slurp(a), y = slurp(b);
    if (svg) {
      x = drop_timestamp(x);
      y = drop_timestamp(y);
    }
    if (x.empty() || x != y) diffs.push_back(a.filename().string());
  };

  // simulate -> embedded config -> simulate
  if (run_quiet({"simulate", "--lambda", "0.9", "--sigma", "0.05", "--dim", "8", "--steps", "4096", "--seed", "7",
                 "--center", "6", "-o", (w / "sim1.lst").string()}) != 0 ||
      run_quiet({"simulate", "--config", (w / "sim1.lst").string(), "-o", (w / "sim2.lst").string()}) != 0)
    return {false, "simulate failed"};
  compare(w / "sim1.lst", w / "sim2.lst");

  // analyze -> run.json -> analyze
  if (run_quiet({"analyze", (w / "sim1.lst").string(), "--out-dir", (w / "a1").string()}) != 0 ||
      run_quiet({"analyze", "--config", (w / "a1" / "run.json").string(), "--out-dir", (w / "a2").string()}) != 0)
    return {false, "analyze failed"};
  for (const char* f : {"pca.csv", "spectrum.csv", "grid.csv", "basins.json", "run.json"}) compare(w / "a1" / f, w / "a2" / f);
  compare(w / "a1" / "scatter.svg", w / "a2" / "scatter.svg", true);

  // repair -> trace.json -> repair
  if (run_quiet({"repair", "Ξ∅", "--restarts", "3", "--seed", "5", "--out-dir", (w / "r1").string()}) != 0 ||
      run_quiet({"repair", "--config", (w / "r1" / "trace.json").string(), "--out-dir", (w / "r2").string()}) != 0)
    return {false, "repair failed"};
  compare(w / "r1" / "trace.json", w / "r2" / "trace.json");
  compare(w / "r1" / "trace.lst", w / "r2" / "trace.lst");

  // decide -> "# config" line -> decide
  const std::string model = std::string(LATENTDYN_TEST_DATA) + "/hand_model.txt";
  std::ostringstream out1, out2, err;
  if (cli::run({"decide", model, "--aggregate", "mean"}, out1, err) != 0) return {false, "decide failed"};
  const auto first = out1.str();
  std::ofstream(w / "decide.json") << first.substr(9, first.find('\n') - 9);
  if (cli::run({"decide", "--config", (w / "decide.json").string()}, out2, err) != 0) return {false, "decide rerun failed"};
  if (first != out2.str()) diffs.push_back("decide output");

  std::string detail = "simulate, analyze (6 files), repair (2 files), decide re-run from embedded config: ";
  if (diffs.empty()) return {true, detail + "all byte-identical"};
  for (const auto& d : diffs) detail += d + " ";
  return {false, detail + "differ"};
}

}  // namespace

int main() {
  fs::remove_all(kWork);
  fs::create_directories(kWork);
  report("synthetic attractor pipeline", synthetic_pipeline);
  report("spectral correctness", spectral_correctness);
  report("PCA oracle equivalence", pca_oracle);
  report("dynamics", dynamics);
  report("decision vertex optimality", decision);
  report("post-symbolic coding and repair", postsymbolic);
  report("CLI reproducibility", reproducibility);
  fs::remove_all(kWork);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
