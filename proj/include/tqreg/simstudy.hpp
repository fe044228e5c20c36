#pragma once

#include "tqreg/diagnostics.hpp"
#include "tqreg/model.hpp"
#include "tqreg/rng.hpp"
#include "tqreg/samplers.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace tqreg {

// Generating values behind a synthetic dataset. setting 0 is the bivariate-
// normal endogeneity example (eta equals its correlation), 1..5 the main
// designs, 6 the weak-instrument design with first-stage slope gamma_w.
struct Truths {
  int setting = 1;
  double beta0 = 0.0;
  double beta1 = 1.0;
  double delta = 1.0;
  double eta = 0.6;
  arma::vec gamma;
  double rho = 0.0;      // setting 0 only
  double gamma_w = 0.0;  // setting 6 only
};

struct GeneratedData {
  CensoredDataset data;
  Truths truths;
  arma::vec ystar;  // latent responses before censoring (for checks)
};

// y* = 1 + x + d + u, d = 1 + x + w + v, (u,v) bivariate normal with unit
// variances and correlation rho.
GeneratedData gen_motivating(double rho, std::size_t n, Rng& rng);

// The five main designs: gamma = (0,1,1.5), (beta0,beta1,delta,eta) =
// (0,1,1,0.6), x ~ N(0,1), w ~ TN_(0,inf)(1,1), first/second stage errors per
// setting.
GeneratedData gen_setting(int setting, std::size_t n, Rng& rng);

// y* = d + 0.6 v + e, d = gamma_w w + v, standard-normal w and v,
// e ~ N(0, 0.64); no exogenous regressor beyond the intercept.
GeneratedData gen_weak(double gamma_w, std::size_t n, Rng& rng);

// True second-stage quantile coefficients (beta_p0, beta1, delta, eta,
// gamma0, gamma1, gamma2) for settings 1..5: the intercept absorbs the
// second-stage error quantile.
std::map<std::string, double> true_quantile_coeffs(int setting, double p);

// Student t draw (helper shared by the generators).
double student_t_sample(double df, Rng& rng);

struct ReplicationRow {
  std::string model;
  double p = 0.5;
  std::string parameter;
  double bias = 0.0;
  double rmse = 0.0;
  double median_if = 0.0;
};

struct ReplicationReport {
  int setting = 1;
  std::size_t reps = 0;
  std::size_t n = 0;
  double mean_censoring_rate = 0.0;
  std::vector<ReplicationRow> rows;
  std::vector<std::string> failures;  // "rep <i>: <what>" for aborted fits
};

// Point estimates (posterior means) and inefficiency factors by parameter
// name for one fitted model.
struct FitResult {
  std::map<std::string, double> estimate;
  std::map<std::string, double> ineff;
};

using ModelFitter = std::function<FitResult(
    const ModelSpec& spec, const CensoredDataset& ds, const ChainConfig& cfg)>;

// Runs run_chain and summarises it.
ModelFitter default_fitter();

// R-fold replication harness: generates setting data, fits every model at
// every requested quantile, and reduces to bias / RMSE / median inefficiency
// per (model, p, parameter). Replications run concurrently on derived seeds.
ReplicationReport replicate(int setting, const std::vector<Family>& models,
                            const std::vector<double>& ps, std::size_t R,
                            const ChainConfig& cfg, const PriorConfig& priors,
                            std::size_t n = 300,
                            ModelFitter fitter = default_fitter());

}  // namespace tqreg
