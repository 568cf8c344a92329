#pragma once

#include <string>
#include <vector>

#include "fom/certify.hpp"
#include "fom/methods.hpp"

namespace fom {

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ExperimentRun {
  std::string name;
  RunConfig config;
};

struct Experiment {
  Problem problem;
  ProxSetup setup;
  std::vector<ExperimentRun> runs;
  OptimumInfo optimum;  // resolved reference optimum (may be empty)
  Tolerances tols;
};

// Parse the experiment configuration:
// {
//   "problem": {"variant": "...", "dim": n, "seed": s, ...generator params...}
//              or an explicit instance with "A"/"b" payloads,
//   "setup":   {"dim": n, "geometry": "euclidean"|"entropy", "set": {...}},
//   "runs":    [{"name": "...", "preset": "..." | "method": "...",
//                "mix": {...}, "schedule": {...}, "max_iters": N,
//                "target_gap": g}],
//   "optimum": {"f_star": ..., "x_star": [...], "d_upper": ...}   (optional)
// }
// Throws ConfigError on any inconsistency.
Experiment load_experiment(const nlohmann::json& config);

Experiment load_experiment_file(const std::string& path);

}  // namespace fom
