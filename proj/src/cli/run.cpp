#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <ostream>

#include "CLI11.hpp"
#include "latentdyn/cli.hpp"
#include "latentdyn/error.hpp"

namespace latentdyn::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "latentdyn 0.1.0";

fs::path resolve_out_dir(const std::string& flag) {
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return flag;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json simulate_flags_json(double lambda, double sigma, std::size_t dim, std::size_t steps, std::uint64_t seed,
                         double center, double start, bool with_states) {
  json j = {{"kind", "affine_contraction"}, {"rate", lambda}, {"noise_sigma", sigma}, {"steps", steps}, {"seed", seed}};
  if (with_states) {
    j["center"] = std::vector<double>(dim, center);
    j["initial_state"] = std::vector<double>(dim, start);
  }
  return j;
}

void print_info(const std::string& file, std::ostream& out) {
  if (file.empty()) {
    out << kVersion << "\n"
        << "subcommands: analyze simulate decide repair info\n"
        << "output directory override: " << kOutDirEnv << "\n";
    return;
  }
  const fs::path path(file);
  const auto traj = load_any(path);
  std::string format = "csv";
  if (path.extension() != ".csv") {
    std::ifstream in(path, std::ios::binary);
    char header[kLstHeaderSize] = {};
    in.read(header, sizeof header);
    format = header[12] == 0 ? "lst1/f32" : "lst1/f64";
  }
  out << "format " << format << "\n"
      << "steps " << traj.steps() << "\n"
      << "dim " << traj.dim() << "\n";
  for (const auto& [k, v] : traj.meta()) out << "meta " << k << "=" << v << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Trajectory analysis, contraction dynamics, glyph repair and Bayes decisions"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string out_dir_flag = "latentdyn-out";
  std::string config_path;

  AnalyzeConfig acfg;
  auto* analyze = app.add_subcommand("analyze", "PCA, spectrum and basin analysis of a trajectory");
  analyze->add_option("input", acfg.input, "trajectory file (.lst or .csv)");
  analyze->add_option("--component", acfg.component, "principal component fed to the spectrum (1 or 2)")
      ->capture_default_str();
  analyze->add_option("--segment-len", acfg.segment_len, "Welch segment length (power of two)")->capture_default_str();
  analyze->add_option("--overlap", acfg.overlap, "Welch segment overlap fraction")->capture_default_str();
  analyze->add_option("--window", acfg.window, "hann or rect")->capture_default_str();
  analyze->add_option("--cutoff", acfg.cutoff, "band ratio cutoff in cycles per step")->capture_default_str();
  analyze->add_option("--grid", acfg.grid_size, "occupancy grid size")->capture_default_str();
  analyze->add_option("--quantile", acfg.quantile, "density threshold quantile")->capture_default_str();
  analyze->add_option("--seed", acfg.seed, "seed")->capture_default_str();
  analyze->add_option("--config", config_path, "JSON config or run.json");
  analyze->add_option("--out-dir", out_dir_flag, "report directory")->capture_default_str();

  double lambda = 0.9, sigma = 0.05, center = 0.0, start = 0.0;
  std::size_t dim = 8, steps = 4096;
  std::uint64_t sim_seed = 0;
  std::string output = "trajectory.lst";
  auto* simulate = app.add_subcommand("simulate", "simulate a noisy contraction and write LST1");
  simulate->add_option("--lambda", lambda, "contraction rate")->capture_default_str();
  simulate->add_option("--sigma", sigma, "noise standard deviation")->capture_default_str();
  simulate->add_option("--dim", dim, "state dimension")->capture_default_str();
  simulate->add_option("--steps", steps, "number of emitted steps")->capture_default_str();
  simulate->add_option("--seed", sim_seed, "noise seed")->capture_default_str();
  auto* center_opt = simulate->add_option("--center", center, "fixed point, same value in every coordinate")
                         ->capture_default_str();
  auto* start_opt =
      simulate->add_option("--start", start, "initial state, same value in every coordinate")->capture_default_str();
  simulate->add_option("--config,--opspec", config_path, "operator specification JSON");
  simulate->add_option("-o,--output", output, "output LST1 path")->capture_default_str();

  DecideConfig dcfg;
  auto* decide = app.add_subcommand("decide", "solve the Bayes decision rule of an environment model");
  decide->add_option("model", dcfg.model, "environment model file");
  decide->add_option("--aggregate", dcfg.aggregate, "max or mean over alternative actions")->capture_default_str();
  decide->add_option("--config", config_path, "JSON config");

  RepairCommandConfig rcfg;
  auto* repair_cmd = app.add_subcommand("repair", "post-symbolic repair of a failing formula");
  repair_cmd->add_option("formula", rcfg.formula, "UTF-8 glyph string");
  repair_cmd->add_option("--dim", rcfg.repair.dim, "latent dimension")->capture_default_str();
  repair_cmd->add_option("--rate", rcfg.repair.rate, "recursion contraction rate")->capture_default_str();
  repair_cmd->add_option("--max-iters", rcfg.repair.max_iters, "iteration cap per chain")->capture_default_str();
  repair_cmd->add_option("--tol", rcfg.repair.tol, "step norm tolerance")->capture_default_str();
  repair_cmd->add_option("--restarts", rcfg.repair.restarts, "parallel chains combined by ⊕")->capture_default_str();
  repair_cmd->add_option("--seed", rcfg.repair.seed, "shift seed")->capture_default_str();
  repair_cmd->add_option("--config", config_path, "JSON config or trace.json");
  repair_cmd->add_option("--out-dir", out_dir_flag, "report directory")->capture_default_str();

  std::string info_file;
  auto* info = app.add_subcommand("info", "describe a trajectory file or the tool");
  info->add_option("file", info_file, "trajectory file");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    const json file_cfg = config_path.empty() ? json::object() : load_config_file(config_path);

    if (analyze->parsed()) {
      acfg.merge(file_cfg);
      const auto r = cmd_analyze(acfg, resolve_out_dir(out_dir_flag));
      out << "band_ratio " << (r.spectrum.band_ratio_infinite ? "inf" : fmt(r.spectrum.band_ratio)) << "\n"
          << "spectral_entropy " << fmt(r.spectrum.spectral_entropy) << "\n"
          << "dominant_freq " << fmt(r.spectrum.dominant_freq) << "\n"
          << "largest_basin_occupancy " << fmt(r.basins.basins.front().occupancy) << "\n"
          << "convergence_index " << fmt(r.convergence) << "\n";
    } else if (simulate->parsed()) {
      const bool with_states = config_path.empty() || center_opt->count() > 0 || start_opt->count() > 0;
      json j = simulate_flags_json(lambda, sigma, dim, steps, sim_seed, center, start, with_states);
      for (const auto& [k, v] : file_cfg.items()) j[k] = v;
      const auto spec = simulation_spec_from_json(j);
      fs::path path = output;
      if (const char* env = std::getenv(kOutDirEnv); env && *env) path = fs::path(env) / path.filename();
      const auto traj = cmd_simulate(spec, path);
      out << "wrote " << path.string() << " steps " << traj.steps() << " dim " << traj.dim() << "\n";
    } else if (decide->parsed()) {
      dcfg.merge(file_cfg);
      out << cmd_decide(dcfg);
    } else if (repair_cmd->parsed()) {
      rcfg.merge(file_cfg);
      const auto trace = cmd_repair(rcfg, resolve_out_dir(out_dir_flag));
      out << "emission " << trace.emission << "\n"
          << "iterations " << trace.iterates.steps() << "\n"
          << "final_step_norm " << fmt(trace.final_step_norm) << "\n";
    } else if (info->parsed()) {
      print_info(info_file, out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_status(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace latentdyn::cli
