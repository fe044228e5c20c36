#pragma once

#include "tqreg/model.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace tqreg {

inline constexpr const char* kVersion = "0.1.0";

// Exit codes shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;   // invalid configuration
inline constexpr int kExitDataset = 2;  // dataset missing or invalid
inline constexpr int kExitSampler = 3;  // sampler or output failure

struct FitOptions {
  std::string model = "al";
  std::vector<double> ps = {0.5};
  std::size_t iters = 20000;
  std::size_t burnin = 5000;
  std::size_t thin = 1;
  std::size_t chains = 1;
  std::uint64_t seed = 1;
  std::string data;
  std::string out = ".";
  std::string prior_preset = "default";
  bool save_latents = false;
  PriorConfig priors;
};

// Flat key-value configuration. Precedence: command-line overrides config
// file overrides built-in defaults. `cli` holds only the keys given
// explicitly on the command line; the config file may be a previous run's
// manifest (its "config" object is unwrapped).
FitOptions resolve_fit_options(const nlohmann::json& cli,
                               const std::string& config_path);

// The fully-resolved flat config, as embedded in the manifest.
nlohmann::json fit_options_to_flat(const FitOptions& o);

int cmd_fit(const FitOptions& o);

struct SimulateOptions {
  std::string setting = "1";  // 1..5, motivating, weak
  std::size_t n = 300;
  std::uint64_t seed = 1;
  double rho = 0.6;       // motivating
  double gamma_w = 0.1;   // weak
  std::string out = ".";
};

int cmd_simulate(const SimulateOptions& o);

struct ReplicateOptions {
  std::string setting = "1";
  std::vector<std::string> models = {"al"};
  std::vector<double> ps = {0.5};
  std::size_t reps = 20;
  std::size_t n = 300;
  std::size_t iters = 6000;
  std::size_t burnin = 2000;
  std::size_t thin = 1;
  std::uint64_t seed = 1;
  std::string prior_preset = "default";
  std::string out = ".";
};

int cmd_replicate(const ReplicateOptions& o);

struct DiagnoseOptions {
  std::vector<std::string> draws_files;
  std::string out = ".";
};

int cmd_diagnose(const DiagnoseOptions& o);

}  // namespace tqreg
