#pragma once

#include <armadillo>

#include <string>
#include <vector>

namespace tqreg {

// Left-censored regression data with one endogenous regressor and one
// instrument. The censoring point is fixed at zero; shift the responses
// before loading if the data are censored elsewhere. No rescaling is applied
// internally: the default scale priors assume the caller has put the data on
// a sensible scale.
struct CensoredDataset {
  arma::vec y;              // observed responses, y_i = max(0, y*_i)
  std::vector<bool> censored;  // true iff y_i == 0 observed as censored
  arma::mat X;              // exogenous regressors, first column all ones
  arma::vec d;              // endogenous regressor
  arma::vec w;              // instrument (may be empty for TQR-only use)
  std::vector<std::string> x_names;  // names of non-intercept X columns

  arma::uword n() const { return y.n_elem; }
  arma::uword k() const { return X.n_cols; }
  bool has_instrument() const { return w.n_elem == y.n_elem; }

  // z_i = (x_i', w_i)'
  arma::vec z_row(arma::uword i) const;
};

enum class Family { TQR, AL, SN, AEP, ALDP, SNDP };

std::string family_name(Family f);
Family family_from_name(const std::string& name);
bool family_is_dp(Family f);
bool family_is_endogenous(Family f);

// Prior settings, stored as the scalar hyperparameters that expand to the
// full mean vectors / diagonal covariance blocks at fit time. Defaults are
// deliberately diffuse; base-measure defaults differ between the two
// Dirichlet-process families (set by resolve_base_measure).
struct PriorConfig {
  double beta_mean = 0.0;    // (beta', delta)' ~ N(beta_mean, beta_var I)
  double beta_var = 100.0;
  double eta_mean = 0.0;     // eta ~ N(eta_mean, eta_var)
  double eta_var = 5.0;
  double gamma_mean = 0.0;   // gamma ~ N(gamma_mean, gamma_var I)
  double gamma_var = 100.0;
  double sigma_shape = 0.1;  // sigma ~ IG(sigma_shape, sigma_scale)
  double sigma_scale = 0.1;
  double phi_shape = 0.1;    // phi ~ IG(phi_shape, phi_scale), parametric
  double phi_scale = 0.1;
  double base_shape = -1.0;  // G0 = IG(base_shape, base_scale); negative =
  double base_scale = -1.0;  // family default (ALDP 2/0.5, SNDP 1.5/1.5)
  double a_shape = 2.0;      // DP precision a ~ Gamma(a_shape, rate a_rate)
  double a_rate = 2.0;
  double zeta_mean = 1.0;    // zeta_j ~ TN_(0,inf)(zeta_mean, zeta_var)
  double zeta_var = 1.0;

  void validate() const;
};

// Fills in the family-specific base-measure defaults when unset.
void resolve_base_measure(PriorConfig& priors, Family family);

// Named preset: "default", "alt1" (eta N(0,25), phi IG(0.01,0.01)), "alt2"
// (eta N(0,100), sigma/phi IG(0.001,0.001)).
PriorConfig prior_preset(const std::string& name);

struct ModelSpec {
  double p = 0.5;  // target quantile, in (0,1)
  Family family = Family::AL;
  PriorConfig priors;

  void validate() const;
};

// Constants of the normal-exponential mixture representation at quantile
// level q: theta = (1-2q)/(q(1-q)), tau2 = 2/(q(1-q)).
struct ThetaTau {
  double theta;
  double tau2;
};

ThetaTau theta_tau(double q);

// All parameters and latent variables of one chain at one iteration. Only
// the blocks used by the active family are meaningful.
struct ChainState {
  arma::vec beta_tilde;  // (beta', delta [, eta])'
  arma::vec gamma;       // first-stage coefficients, length k+1
  double sigma = 1.0;
  double alpha = 0.5;
  arma::vec g;      // second-stage latent scales
  arma::vec ystar;  // latent responses
  // parametric first stage
  double phi = 1.0;
  double zeta1 = 1.0;
  double zeta2 = 1.0;
  arma::vec h;  // AL-mixture latents (AL, ALDP)
  // Dirichlet-process block
  arma::vec u;                    // slice variables
  std::vector<arma::uword> k_alloc;  // cluster labels, 1-based
  std::vector<double> omega;      // stick fractions
  std::vector<double> phi_clusters;
  std::size_t k_star = 1;  // active truncation
  double a = 1.0;          // DP precision
};

// x~_i = (x_i', d_i, v_i)' with control variable v_i = d_i - z_i' gamma.
arma::vec assemble_design(const arma::vec& x_i, double d_i, const arma::vec& z_i,
                          const arma::vec& gamma);

// Conditional quantile of the censored response: max(0, x~' beta~).
double predict_quantile(const arma::vec& x_tilde, const arma::vec& beta_tilde);

// Returns every invariant violation found; empty means the dataset is valid.
std::vector<std::string> validate_dataset(const CensoredDataset& ds);

// CSV I/O. Header row with columns y, d, w, then one per non-intercept
// exogenous regressor; the intercept column is synthesized on load and the
// censoring indicator is inferred as y == 0.
CensoredDataset load_dataset_csv(const std::string& path, bool require_instrument);
void save_dataset_csv(const CensoredDataset& ds, const std::string& path);

}  // namespace tqreg
