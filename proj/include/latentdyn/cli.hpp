#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "latentdyn/attractor.hpp"
#include "latentdyn/decision.hpp"
#include "latentdyn/operator_spec.hpp"
#include "latentdyn/postsym.hpp"
#include "latentdyn/spectral.hpp"

namespace latentdyn::cli {

/// Environment variable that replaces the output directory of any command.
inline constexpr const char* kOutDirEnv = "LATENTDYN_OUT_DIR";

struct AnalyzeConfig {
  std::string input;
  std::size_t component = 1;  // 1 = PC1, 2 = PC2
  std::size_t segment_len = 256;
  double overlap = 0.5;
  std::string window = "hann";
  double cutoff = 0.1;
  std::size_t grid_size = 64;
  double quantile = 0.95;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  /// Overwrites the fields present in `j`.
  void merge(const nlohmann::json& j);
};

struct AnalyzeResult {
  SpectralReport spectrum;
  BasinSet basins;
  double convergence = 0.0;
  std::vector<double> eigenvalues;
};

/// Writes pca.csv, spectrum.csv, grid.csv, basins.json, scatter.svg and
/// run.json into `out_dir`.
AnalyzeResult cmd_analyze(const AnalyzeConfig& cfg, const std::filesystem::path& out_dir);

/// Runs the simulation and writes an LST1 file whose meta embeds the simulation settings.
Trajectory cmd_simulate(const SimulationSpec& spec, const std::filesystem::path& output);

struct DecideConfig {
  std::string model;
  std::string aggregate = "max";

  nlohmann::json to_json() const;
  void merge(const nlohmann::json& j);
};

/// Decision table text, prefixed with a "# config" line.
std::string cmd_decide(const DecideConfig& cfg);

struct RepairCommandConfig {
  std::string formula;
  RepairConfig repair;

  nlohmann::json to_json() const;
  void merge(const nlohmann::json& j);
};

/// Writes trace.json and trace.lst into `out_dir`.
PostSymbolicTrace cmd_repair(const RepairCommandConfig& cfg, const std::filesystem::path& out_dir);

/// Full command line without the program name. Returns the exit status:
/// 0 success, 2 input error, 3 precondition, 4 numeric non-convergence.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Reads a JSON config; a report with a top-level "config" object yields that
/// object, and an LST1 file yields its embedded "config" meta entry.
nlohmann::json load_config_file(const std::filesystem::path& path);

}  // namespace latentdyn::cli
