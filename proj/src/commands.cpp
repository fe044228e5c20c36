#include "tqreg/commands.hpp"

#include "tqreg/diagnostics.hpp"
#include "tqreg/io.hpp"
#include "tqreg/samplers.hpp"
#include "tqreg/simstudy.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <stdexcept>

namespace tqreg {

using nlohmann::json;

namespace {

std::string iso_now() {
  std::time_t t = std::chrono::system_clock::to_time_t(
      std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

std::string p_label(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", p);
  return buf;
}

void write_json_atomic(const json& j, const std::string& path) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw std::runtime_error("cannot move " + tmp + " into place");
  }
}

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  json j;
  in >> j;
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  if (j.contains("config") && j["config"].is_object()) j = j["config"];  // manifest
  return j;
}

void apply_prior_keys(const json& j, PriorConfig& p) {
  auto get = [&](const char* key, double& field) {
    if (j.contains(key)) field = j.at(key).get<double>();
  };
  get("beta_mean", p.beta_mean);
  get("beta_var", p.beta_var);
  get("eta_mean", p.eta_mean);
  get("eta_var", p.eta_var);
  get("gamma_mean", p.gamma_mean);
  get("gamma_var", p.gamma_var);
  get("sigma_shape", p.sigma_shape);
  get("sigma_scale", p.sigma_scale);
  get("phi_shape", p.phi_shape);
  get("phi_scale", p.phi_scale);
  get("base_shape", p.base_shape);
  get("base_scale", p.base_scale);
  get("a_shape", p.a_shape);
  get("a_rate", p.a_rate);
  get("zeta_mean", p.zeta_mean);
  get("zeta_var", p.zeta_var);
}

}  // namespace

FitOptions resolve_fit_options(const json& cli, const std::string& config_path) {
  json merged = json::object();
  if (!config_path.empty()) {
    json file = load_config_file(config_path);
    merged.update(file);
  }
  merged.update(cli);  // flags win over config-file keys

  FitOptions o;
  if (merged.contains("prior_preset")) {
    o.prior_preset = merged.at("prior_preset").get<std::string>();
  }
  o.priors = prior_preset(o.prior_preset);
  apply_prior_keys(merged, o.priors);

  if (merged.contains("model")) o.model = merged.at("model").get<std::string>();
  if (merged.contains("p")) {
    o.ps.clear();
    for (const auto& v : merged.at("p")) o.ps.push_back(v.get<double>());
  }
  if (merged.contains("iters")) o.iters = merged.at("iters").get<std::size_t>();
  if (merged.contains("burnin")) o.burnin = merged.at("burnin").get<std::size_t>();
  if (merged.contains("thin")) o.thin = merged.at("thin").get<std::size_t>();
  if (merged.contains("chains")) o.chains = merged.at("chains").get<std::size_t>();
  if (merged.contains("seed")) o.seed = merged.at("seed").get<std::uint64_t>();
  if (merged.contains("data")) o.data = merged.at("data").get<std::string>();
  if (merged.contains("out")) o.out = merged.at("out").get<std::string>();
  if (merged.contains("save_latents")) {
    o.save_latents = merged.at("save_latents").get<bool>();
  }
  return o;
}

json fit_options_to_flat(const FitOptions& o) {
  const PriorConfig& p = o.priors;
  return json{{"model", o.model},
              {"p", o.ps},
              {"iters", o.iters},
              {"burnin", o.burnin},
              {"thin", o.thin},
              {"chains", o.chains},
              {"seed", o.seed},
              {"data", o.data},
              {"out", o.out},
              {"prior_preset", o.prior_preset},
              {"save_latents", o.save_latents},
              {"beta_mean", p.beta_mean},
              {"beta_var", p.beta_var},
              {"eta_mean", p.eta_mean},
              {"eta_var", p.eta_var},
              {"gamma_mean", p.gamma_mean},
              {"gamma_var", p.gamma_var},
              {"sigma_shape", p.sigma_shape},
              {"sigma_scale", p.sigma_scale},
              {"phi_shape", p.phi_shape},
              {"phi_scale", p.phi_scale},
              {"base_shape", p.base_shape},
              {"base_scale", p.base_scale},
              {"a_shape", p.a_shape},
              {"a_rate", p.a_rate},
              {"zeta_mean", p.zeta_mean},
              {"zeta_var", p.zeta_var}};
}

int cmd_fit(const FitOptions& o) {
  Family family;
  ModelSpec spec;
  ChainConfig cfg;
  try {
    family = family_from_name(o.model);
    spec.family = family;
    spec.priors = o.priors;
    resolve_base_measure(spec.priors, family);
    cfg.iterations = o.iters;
    cfg.burn_in = o.burnin;
    cfg.thin = o.thin;
    cfg.chains = o.chains;
    cfg.seed = o.seed;
    cfg.save_latents = o.save_latents;
    cfg.validate();
    if (o.ps.empty()) throw std::invalid_argument("no quantile levels requested");
    for (double p : o.ps) {
      spec.p = p;
      spec.validate();
    }
    if (o.data.empty()) throw std::invalid_argument("--data is required");
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  CensoredDataset ds;
  try {
    ds = load_dataset_csv(o.data, family_is_endogenous(family));
    std::vector<std::string> problems = validate_dataset(ds);
    if (!problems.empty()) {
      std::string msg = "invalid dataset:";
      for (const std::string& p : problems) msg += "\n  " + p;
      throw std::runtime_error(msg);
    }
  } catch (const std::exception& e) {
    std::cerr << "dataset error: " << e.what() << "\n";
    return kExitDataset;
  }

  std::string started = iso_now();
  json accept_all = json::object();
  std::vector<std::string> outputs;
  std::vector<std::pair<std::string, SummaryReport>> blocks;
  try {
    for (double p : o.ps) {
      spec.p = p;
      std::vector<Chain> chains = run_chains(spec, ds, cfg);
      json accept_p = json::object();
      for (const Chain& chain : chains) {
        std::string path = o.out + "/draws_" + o.model + "_p" + p_label(p) +
                           "_chain" + std::to_string(chain.chain_index) + ".csv";
        save_draws_csv(chain, path);
        outputs.push_back(path);
        json rates = json::object();
        for (const auto& [k, v] : chain.acceptance) rates[k] = v;
        accept_p["chain_" + std::to_string(chain.chain_index)] = rates;
      }
      accept_all["p=" + p_label(p)] = accept_p;
      blocks.emplace_back(o.model + " p=" + p_label(p), summarize(chains));
    }
    std::string summary_path = o.out + "/summary.json";
    save_summary_json(blocks, summary_path);
    outputs.push_back(summary_path);

    json manifest = {{"command", "fit"},
                     {"version", kVersion},
                     {"seed", o.seed},
                     {"started", started},
                     {"finished", iso_now()},
                     {"config", fit_options_to_flat(o)},
                     {"acceptance_rates", accept_all},
                     {"outputs", outputs}};
    write_json_atomic(manifest, o.out + "/manifest.json");
  } catch (const std::exception& e) {
    std::cerr << "sampler error: " << e.what() << "\n";
    return kExitSampler;
  }

  for (const auto& [label, report] : blocks) {
    std::cout << label << ": " << report.parameters.size() << " parameters";
    for (const ParameterSummary& ps : report.parameters) {
      if (ps.name == "eta") {
        std::cout << "; eta mean " << ps.mean << " [" << ps.lower << ", "
                  << ps.upper << "]";
      }
    }
    std::cout << "\n";
  }
  return kExitOk;
}

int cmd_simulate(const SimulateOptions& o) {
  GeneratedData gen;
  try {
    Rng rng(o.seed, 0);
    if (o.setting == "motivating") {
      gen = gen_motivating(o.rho, o.n, rng);
    } else if (o.setting == "weak") {
      gen = gen_weak(o.gamma_w, o.n, rng);
    } else {
      gen = gen_setting(std::stoi(o.setting), o.n, rng);
    }
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  try {
    save_dataset_csv(gen.data, o.out + "/dataset.csv");
    save_truths_json(gen.truths, o.out + "/truths.json");
  } catch (const std::exception& e) {
    std::cerr << "output error: " << e.what() << "\n";
    return kExitSampler;
  }
  std::size_t censored = 0;
  for (bool c : gen.data.censored) censored += c;
  std::cout << "wrote " << gen.data.n() << " rows ("
            << static_cast<double>(censored) / gen.data.n()
            << " censored) to " << o.out << "/dataset.csv\n";
  return kExitOk;
}

int cmd_replicate(const ReplicateOptions& o) {
  ReplicationReport report;
  try {
    int setting = std::stoi(o.setting);
    std::vector<Family> models;
    for (const std::string& m : o.models) models.push_back(family_from_name(m));
    ChainConfig cfg;
    cfg.iterations = o.iters;
    cfg.burn_in = o.burnin;
    cfg.thin = o.thin;
    cfg.seed = o.seed;
    cfg.validate();
    PriorConfig priors = prior_preset(o.prior_preset);
    report = replicate(setting, models, o.ps, o.reps, cfg, priors, o.n);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "replication error: " << e.what() << "\n";
    return kExitSampler;
  }
  try {
    save_report_csv(report, o.out + "/report.csv");
    save_report_json(report, o.out + "/report.json");
  } catch (const std::exception& e) {
    std::cerr << "output error: " << e.what() << "\n";
    return kExitSampler;
  }
  std::cout << "replications: " << report.reps - report.failures.size() << "/"
            << report.reps << " ok; mean censoring rate "
            << report.mean_censoring_rate << "\n";
  for (const std::string& f : report.failures) std::cerr << "failed: " << f << "\n";
  return report.failures.empty() ? kExitOk : kExitSampler;
}

int cmd_diagnose(const DiagnoseOptions& o) {
  if (o.draws_files.empty()) {
    std::cerr << "config error: need at least one draws file\n";
    return kExitConfig;
  }
  std::vector<DrawsFile> files;
  try {
    for (const std::string& path : o.draws_files) {
      files.push_back(load_draws_csv(path));
      if (files.back().names != files[0].names) {
        throw std::runtime_error(path + ": columns differ from first file");
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "draws error: " << e.what() << "\n";
    return kExitDataset;
  }

  try {
    std::ofstream table(o.out + "/diagnostics.csv");
    if (!table) throw std::runtime_error("cannot write diagnostics.csv");
    table << "parameter,inefficiency" << (files.size() >= 2 ? ",psrf,psrf_upper" : "")
          << "\n";
    for (std::size_t j = 0; j < files[0].names.size(); ++j) {
      double if_sum = 0.0;
      std::size_t if_n = 0;
      for (const DrawsFile& f : files) {
        try {
          if_sum += inefficiency_factor(f.draws.col(j));
          ++if_n;
        } catch (const std::invalid_argument&) {
        }
      }
      table << files[0].names[j] << ",";
      if (if_n) table << format_double(if_sum / if_n);
      if (files.size() >= 2) {
        arma::uword min_len = files[0].draws.n_rows;
        for (const DrawsFile& f : files) min_len = std::min(min_len, f.draws.n_rows);
        std::vector<arma::vec> cols;
        for (const DrawsFile& f : files) {
          cols.emplace_back(f.draws.col(j).head(min_len));
        }
        try {
          GelmanRubinResult gr = gelman_rubin(cols);
          table << "," << format_double(gr.psrf) << "," << format_double(gr.upper);
        } catch (const std::invalid_argument&) {
          table << ",,";
        }
      }
      table << "\n";
    }

    std::ofstream trace(o.out + "/trace.csv");
    if (!trace) throw std::runtime_error("cannot write trace.csv");
    trace << "chain,iteration,parameter,value\n";
    for (std::size_t c = 0; c < files.size(); ++c) {
      const DrawsFile& f = files[c];
      for (std::size_t j = 0; j < f.names.size(); ++j) {
        for (arma::uword r = 0; r < f.draws.n_rows; ++r) {
          trace << c << "," << r << "," << f.names[j] << ","
                << format_double(f.draws(r, j)) << "\n";
        }
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "output error: " << e.what() << "\n";
    return kExitSampler;
  }
  return kExitOk;
}

}  // namespace tqreg
