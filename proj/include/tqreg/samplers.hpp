#pragma once

#include "tqreg/distributions.hpp"
#include "tqreg/dp_mixture.hpp"
#include "tqreg/model.hpp"
#include "tqreg/rng.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace tqreg {

// Latent scales are floored before any division; GIG draws can underflow for
// extreme residuals.
inline constexpr double kLatentFloor = 1e-12;

// Robbins-Monro step tuner for random-walk MH kernels. The log step moves
// toward the target acceptance rate in batches of `window` proposals during
// burn-in and is frozen afterward, preserving the Markov property of the
// retained sample.
class MHTuner {
 public:
  explicit MHTuner(double initial_step = 0.5, double target = 0.44,
                   std::size_t window = 50);

  double step() const;
  void set_step(double step);
  void record(bool accepted);
  void freeze();
  bool frozen() const { return frozen_; }
  double acceptance_rate() const;

 private:
  double log_step_;
  double target_;
  std::size_t window_;
  bool frozen_ = false;
  std::size_t batch_ = 0;
  std::size_t attempts_ = 0, accepts_ = 0;
  std::size_t window_attempts_ = 0, window_accepts_ = 0;
};

struct ChainConfig {
  std::size_t iterations = 20000;
  std::size_t burn_in = 5000;
  std::size_t thin = 1;
  std::uint64_t seed = 1;
  std::size_t chains = 1;
  bool save_latents = false;

  void validate() const;
};

// Retained post-burn-in draws of one chain plus run metadata.
struct Chain {
  std::vector<std::string> names;
  arma::mat draws;  // retained iterations x names.size()
  std::uint64_t seed = 0;
  std::size_t chain_index = 0;
  std::size_t iterations = 0, burn_in = 0, thin = 1;
  std::map<std::string, double> acceptance;
  // populated only when ChainConfig::save_latents is set
  arma::mat g_draws, h_draws, ystar_draws;
};

std::vector<std::string> parameter_names(Family family, arma::uword k);

struct MVNMoments {
  arma::vec mean;
  arma::mat cov;
};

// --- shared second-stage kernels (asymmetric-Laplace pseudo likelihood) ---

// Censored entries redrawn from the normal mixture component truncated to
// (-inf, 0); uncensored entries keep y_i.
arma::vec draw_ystar(const CensoredDataset& ds, const arma::mat& Xt,
                     const arma::vec& beta_tilde, const arma::vec& g,
                     double sigma, const ThetaTau& ttp, Rng& rng);

// Exact multivariate-normal block draw for (beta', delta [, eta])'.
arma::vec draw_beta_tilde(const arma::mat& Xt, const arma::vec& ystar,
                          const arma::vec& g, double sigma, const ThetaTau& ttp,
                          const arma::vec& prior_mean,
                          const arma::mat& prior_prec, Rng& rng);

// Posterior moments behind draw_beta_tilde, exposed for oracle tests.
MVNMoments beta_tilde_moments(const arma::mat& Xt, const arma::vec& ystar,
                              const arma::vec& g, double sigma,
                              const ThetaTau& ttp, const arma::vec& prior_mean,
                              const arma::mat& prior_prec);

// (shape, rate) of the sigma full conditional.
std::pair<double, double> sigma_posterior_params(const arma::mat& Xt,
                                                 const arma::vec& ystar,
                                                 const arma::vec& beta_tilde,
                                                 const arma::vec& g,
                                                 const ThetaTau& ttp, double m0,
                                                 double s0);

// GIG(1/2, ., .) parameters of one latent-scale conditional.
std::pair<double, double> gig_params_for_g(double resid, double sigma,
                                           const ThetaTau& ttp);
std::pair<double, double> gig_params_for_h(double v, double phi,
                                           const ThetaTau& tta);

double draw_sigma(const arma::mat& Xt, const arma::vec& ystar,
                  const arma::vec& beta_tilde, const arma::vec& g,
                  const ThetaTau& ttp, double m0, double s0, Rng& rng);

arma::vec draw_g(const arma::mat& Xt, const arma::vec& ystar,
                 const arma::vec& beta_tilde, double sigma, const ThetaTau& ttp,
                 Rng& rng);

// --- first-stage kernels ---

arma::vec draw_h(const arma::vec& v, const arma::vec& phi_per_obs,
                 const ThetaTau& tta, Rng& rng);

// Posterior moments of the gamma block under the AL-mixture first stage;
// both regression stages contribute. Exposed for the dense-formula oracle
// tests; draw_gamma_gibbs draws from exactly these moments.
void gamma_gibbs_system(const CensoredDataset& ds, const arma::mat& Z,
                        const arma::vec& beta_tilde, const arma::vec& ystar,
                        const arma::vec& g, double sigma,
                        const arma::vec& phi_per_obs, const arma::vec& h,
                        const ThetaTau& ttp, const ThetaTau& tta,
                        const arma::vec& prior_mean, const arma::mat& prior_prec,
                        arma::mat& precision_out, arma::vec& rhs_out);

MVNMoments gamma_gibbs_moments(const CensoredDataset& ds, const arma::mat& Z,
                               const arma::vec& beta_tilde, const arma::vec& ystar,
                               const arma::vec& g, double sigma,
                               const arma::vec& phi_per_obs, const arma::vec& h,
                               const ThetaTau& ttp, const ThetaTau& tta,
                               const arma::vec& prior_mean,
                               const arma::mat& prior_prec);

arma::vec draw_gamma_gibbs(const CensoredDataset& ds, const arma::mat& Z,
                           const arma::vec& beta_tilde, const arma::vec& ystar,
                           const arma::vec& g, double sigma,
                           const arma::vec& phi_per_obs, const arma::vec& h,
                           const ThetaTau& ttp, const ThetaTau& tta,
                           const arma::vec& prior_mean,
                           const arma::mat& prior_prec, Rng& rng);

// Proposal moments and exact log target for the SN-family gamma MH kernel.
// The proposal linearises the two-piece normal likelihood at the current
// indicator configuration; the acceptance ratio uses the exact likelihood.
MVNMoments sn_gamma_proposal_moments(const CensoredDataset& ds, const arma::mat& Z,
                                     const arma::vec& gamma,
                                     const arma::vec& beta_tilde,
                                     const arma::vec& ystar, const arma::vec& g,
                                     double sigma, const arma::vec& phi_per_obs,
                                     double alpha, const ThetaTau& ttp,
                                     const arma::vec& prior_mean,
                                     const arma::mat& prior_prec);

double sn_gamma_log_target(const CensoredDataset& ds, const arma::mat& Z,
                           const arma::vec& gamma, const arma::vec& beta_tilde,
                           const arma::vec& ystar, const arma::vec& g,
                           double sigma, const arma::vec& phi_per_obs,
                           double alpha, const ThetaTau& ttp,
                           const arma::vec& prior_mean,
                           const arma::mat& prior_prec);

struct GammaMHResult {
  arma::vec gamma;
  bool accepted;
};

GammaMHResult draw_gamma_mh_sn(const CensoredDataset& ds, const arma::mat& Z,
                               const arma::vec& gamma, const arma::vec& beta_tilde,
                               const arma::vec& ystar, const arma::vec& g,
                               double sigma, const arma::vec& phi_per_obs,
                               double alpha, const ThetaTau& ttp,
                               const arma::vec& prior_mean,
                               const arma::mat& prior_prec, Rng& rng);

// Random walk on logit(alpha) with Jacobian correction; flat prior on (0,1).
// family selects the AL or SN first-stage density.
struct AlphaMHResult {
  double alpha;
  bool accepted;
};

AlphaMHResult draw_alpha_mh(double alpha, const arma::vec& v,
                            const arma::vec& phi_per_obs, Family family,
                            double step, Rng& rng);

// --- multivariate-normal helpers ---

// Draw from N(P^{-1} r, P^{-1}); throws on a non-SPD precision.
arma::vec mvn_from_precision(const arma::mat& P, const arma::vec& r, Rng& rng);

double mvn_logpdf_precision(const arma::vec& x, const arma::vec& mean,
                            const arma::mat& P);

// --- chain orchestration ---

// Full-family Gibbs/MH sampler. One instance owns the MH tuners of a single
// chain; sweep() performs one complete scan in a fixed order chosen so the
// collapsed kernels (allocations and alpha integrate out the AL-mixture
// latents, stick refreshes integrate out the slice variables) are always
// followed by the refresh of the variable they collapse before anything else
// conditions on it.
class FamilySampler {
 public:
  FamilySampler(const ModelSpec& spec, const CensoredDataset& ds);

  ChainState initial_state(const CensoredDataset& ds,
                           std::size_t chain_index) const;
  void sweep(ChainState& s, const CensoredDataset& ds, Rng& rng);

  void freeze_tuners();
  void set_all_steps(double step);  // fixed-kernel runs (correctness tests)
  double alpha_step() const { return alpha_tuner_.step(); }
  std::map<std::string, double> acceptance_rates() const;

  const ModelSpec& spec() const { return spec_; }
  const ThetaTau& tt_p() const { return tt_p_; }

  // Per-observation first-stage scale: phi_{k_i} for the DP families, the
  // scalar phi otherwise.
  arma::vec phi_per_obs(const ChainState& s, arma::uword n) const;

  arma::vec prior_mean_beta() const { return btilde_mean_; }
  arma::mat prior_prec_beta() const { return btilde_prec_; }
  arma::vec prior_mean_gamma() const { return gamma_mean_; }
  arma::mat prior_prec_gamma() const { return gamma_prec_; }

 private:
  void sweep_first_stage(ChainState& s, const CensoredDataset& ds, Rng& rng);
  void sweep_second_stage(ChainState& s, const CensoredDataset& ds, Rng& rng);
  void aep_block(ChainState& s, const CensoredDataset& ds, Rng& rng);
  arma::mat design_matrix(const ChainState& s, const CensoredDataset& ds) const;

  ModelSpec spec_;
  ThetaTau tt_p_;
  arma::mat Z_;  // (x', w) rows, endogenous families only
  arma::vec btilde_mean_;
  arma::mat btilde_prec_;
  arma::vec gamma_mean_;
  arma::mat gamma_prec_;
  MHTuner alpha_tuner_;
  std::vector<MHTuner> aep_tuners_;  // gamma coords, phi, alpha, zeta1, zeta2
  std::size_t gamma_attempts_ = 0, gamma_accepts_ = 0;
};

// Runs one chain: family-appropriate sweeps, burn-in, thinning. Numerical
// failures abort with the failing iteration index in the message.
Chain run_chain(const ModelSpec& spec, const CensoredDataset& ds,
                const ChainConfig& cfg, std::size_t chain_index = 0);

// All requested chains, run concurrently with per-chain derived streams.
std::vector<Chain> run_chains(const ModelSpec& spec, const CensoredDataset& ds,
                              const ChainConfig& cfg);

// Standard Tobit quantile regression (no first stage).
Chain run_tqr(const ModelSpec& spec, const CensoredDataset& ds,
              const ChainConfig& cfg, std::size_t chain_index = 0);

}  // namespace tqreg
