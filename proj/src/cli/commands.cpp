#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

#include "latentdyn/cli.hpp"
#include "latentdyn/error.hpp"
#include "latentdyn/linalg.hpp"
#include "svg.hpp"

namespace latentdyn::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) fail(ErrorCode::IoFailure, "write to " + path.string() + " failed");
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::IoFailure, "cannot create directory " + dir.string() + ": " + ec.message());
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

template <typename T>
void take(const json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

json band_ratio_json(const SpectralReport& r) {
  return r.band_ratio_infinite ? json(nullptr) : json(r.band_ratio);
}

}  // namespace

json AnalyzeConfig::to_json() const {
  return {{"input", input},   {"component", component}, {"segment_len", segment_len}, {"overlap", overlap},
          {"window", window}, {"cutoff", cutoff},       {"grid_size", grid_size},     {"quantile", quantile},
          {"seed", seed}};
}

void AnalyzeConfig::merge(const json& j) {
  try {
    take(j, "input", input);
    take(j, "component", component);
    take(j, "segment_len", segment_len);
    take(j, "overlap", overlap);
    take(j, "window", window);
    take(j, "cutoff", cutoff);
    take(j, "grid_size", grid_size);
    take(j, "quantile", quantile);
    take(j, "seed", seed);
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseFailure, std::string("analyze config: ") + e.what());
  }
}

json DecideConfig::to_json() const { return {{"model", model}, {"aggregate", aggregate}}; }

void DecideConfig::merge(const json& j) {
  try {
    take(j, "model", model);
    take(j, "aggregate", aggregate);
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseFailure, std::string("decide config: ") + e.what());
  }
}

json RepairCommandConfig::to_json() const {
  json j = latentdyn::to_json(repair);
  j["formula"] = formula;
  return j;
}

void RepairCommandConfig::merge(const json& j) {
  try {
    take(j, "formula", formula);
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseFailure, std::string("repair config: ") + e.what());
  }
  // Start from the current values so absent keys keep them.
  json base = latentdyn::to_json(repair);
  if (repair.center.empty()) base.erase("center");
  if (repair.salience.empty()) base.erase("salience");
  base.merge_patch(j);
  base.erase("formula");
  repair = repair_config_from_json(base);
}

json load_config_file(const fs::path& path) {
  if (path.extension() == ".lst") {
    const auto traj = load_trajectory(path);
    const auto it = traj.meta().find("config");
    if (it == traj.meta().end()) fail(ErrorCode::ParseFailure, path.string() + ": no embedded config");
    try {
      return json::parse(it->second);
    } catch (const json::parse_error& e) {
      fail(ErrorCode::ParseFailure, path.string() + ": " + e.what());
    }
  }
  std::ifstream in(path);
  if (!in) fail(ErrorCode::FileNotFound, path.string() + " not found");
  std::stringstream ss;
  ss << in.rdbuf();
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ParseFailure, path.string() + ": " + e.what());
  }
  if (!j.is_object()) fail(ErrorCode::ParseFailure, path.string() + ": config must be a JSON object");
  if (j.contains("config") && j.at("config").is_object()) return j.at("config");
  return j;
}

AnalyzeResult cmd_analyze(const AnalyzeConfig& cfg, const fs::path& out_dir) {
  if (cfg.input.empty()) fail(ErrorCode::ParseFailure, "analyze needs an input trajectory");
  if (cfg.component != 1 && cfg.component != 2) fail(ErrorCode::Precondition, "component must be 1 or 2");
  const WelchOptions welch{cfg.segment_len, cfg.overlap, parse_window(cfg.window)};

  const auto traj = load_any(cfg.input);
  const auto pca = fit_pca(traj, 2);
  const auto z = project(pca, traj);
  std::vector<double> series(z.size());
  for (std::size_t n = 0; n < z.size(); ++n) series[n] = cfg.component == 1 ? z[n].x : z[n].y;

  AnalyzeResult result;
  result.spectrum = analyze_spectrum(series, cfg.cutoff, welch);
  result.basins = detect_basins(z, cfg.grid_size, cfg.quantile);
  result.convergence = convergence_index(result.basins);
  result.eigenvalues = pca.eigenvalues;

  ensure_dir(out_dir);
  const json config = cfg.to_json();
  const std::string config_line = "# config " + config.dump() + "\n";
  const auto& spec = result.spectrum;
  const auto& basins = result.basins;

  std::string pca_csv = config_line + "z1,z2\n";
  for (const auto& p : z) pca_csv += fmt(p.x) + "," + fmt(p.y) + "\n";
  write_text(out_dir / "pca.csv", pca_csv);

  std::string spectrum_csv = config_line + "freq,psd\n";
  for (std::size_t i = 0; i < spec.freqs.size(); ++i) spectrum_csv += fmt(spec.freqs[i]) + "," + fmt(spec.psd[i]) + "\n";
  spectrum_csv += "# metrics dominant_freq=" + fmt(spec.dominant_freq) + " spectral_entropy=" +
                  fmt(spec.spectral_entropy) + " band_ratio=" + (spec.band_ratio_infinite ? "inf" : fmt(spec.band_ratio)) +
                  " cutoff=" + fmt(spec.cutoff) + " component=PC" + std::to_string(cfg.component) + "\n";
  write_text(out_dir / "spectrum.csv", spectrum_csv);

  std::string grid_csv = config_line;
  for (std::size_t iy = 0; iy < basins.grid_size; ++iy) {
    for (std::size_t ix = 0; ix < basins.grid_size; ++ix) {
      if (ix) grid_csv += ",";
      grid_csv += std::to_string(basins.count(ix, iy));
    }
    grid_csv += "\n";
  }
  write_text(out_dir / "grid.csv", grid_csv);

  json header = {{"config", config},
                 {"grid_size", basins.grid_size},
                 {"quantile", basins.quantile},
                 {"threshold", basins.threshold},
                 {"extent", {basins.extent.xmin, basins.extent.xmax, basins.extent.ymin, basins.extent.ymax}},
                 {"basin_count", basins.basins.size()},
                 {"convergence_index", result.convergence}};
  std::string basins_jsonl = header.dump() + "\n";
  for (std::size_t i = 0; i < basins.basins.size(); ++i) {
    const auto& b = basins.basins[i];
    json cells = json::array();
    for (const auto& c : b.cells) cells.push_back({c.ix, c.iy});
    json line = {{"rank", i},
                 {"occupancy", b.occupancy},
                 {"members", b.members},
                 {"centroid", {b.centroid.x, b.centroid.y}},
                 {"dwell_curve", b.dwell_curve},
                 {"cells", cells}};
    basins_jsonl += line.dump() + "\n";
  }
  write_text(out_dir / "basins.json", basins_jsonl);

  write_text(out_dir / "scatter.svg", render_scatter_svg(z, basins, utc_timestamp()));

  json run = {{"config", config},
              {"steps", traj.steps()},
              {"dim", traj.dim()},
              {"pca_eigenvalues", pca.eigenvalues},
              {"metrics",
               {{"dominant_freq", spec.dominant_freq},
                {"spectral_entropy", spec.spectral_entropy},
                {"band_ratio", band_ratio_json(spec)},
                {"band_ratio_infinite", spec.band_ratio_infinite},
                {"cutoff", spec.cutoff},
                {"largest_basin_occupancy", basins.basins.front().occupancy},
                {"basin_count", basins.basins.size()},
                {"convergence_index", result.convergence}}}};
  write_text(out_dir / "run.json", run.dump(2) + "\n");
  return result;
}

Trajectory cmd_simulate(const SimulationSpec& spec, const fs::path& output) {
  auto traj = simulate_noisy(spec.op, spec.initial_state, spec.steps, spec.seed);
  traj.meta()["config"] = to_json(spec).dump();
  traj.meta()["generator"] = "latentdyn simulate";
  traj.meta()["capture"] = "simulated";
  if (output.has_parent_path()) ensure_dir(output.parent_path());
  save_trajectory(traj, output);
  return traj;
}

std::string cmd_decide(const DecideConfig& cfg) {
  if (cfg.model.empty()) fail(ErrorCode::ParseFailure, "decide needs a model file");
  const auto aggregate = parse_aggregate(cfg.aggregate);
  const auto model = load_environment_model(cfg.model);
  const auto table = solve_bayes(model, aggregate);
  return "# config " + cfg.to_json().dump() + "\n" + format_decision_table(model, table);
}

PostSymbolicTrace cmd_repair(const RepairCommandConfig& cfg, const fs::path& out_dir) {
  if (cfg.formula.empty()) fail(ErrorCode::ParseFailure, "repair needs a formula");
  const auto formula = Formula::parse(cfg.formula);
  auto trace = repair(formula, cfg.repair);

  ensure_dir(out_dir);
  json j = to_json(trace);
  j["config"] = cfg.to_json();
  write_text(out_dir / "trace.json", j.dump(2) + "\n");
  trace.iterates.meta()["config"] = cfg.to_json().dump();
  save_trajectory(trace.iterates, out_dir / "trace.lst");
  return trace;
}

}  // namespace latentdyn::cli
