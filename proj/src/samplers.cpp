#include "tqreg/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <set>
#include <stdexcept>

namespace tqreg {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double logit(double x) { return std::log(x / (1.0 - x)); }
double inv_logit(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}  // namespace

// --- MHTuner ---

MHTuner::MHTuner(double initial_step, double target, std::size_t window)
    : log_step_(std::log(initial_step)), target_(target), window_(window) {}

double MHTuner::step() const { return std::exp(log_step_); }

void MHTuner::set_step(double step) { log_step_ = std::log(step); }

void MHTuner::record(bool accepted) {
  ++attempts_;
  ++window_attempts_;
  if (accepted) {
    ++accepts_;
    ++window_accepts_;
  }
  if (!frozen_ && window_attempts_ >= window_) {
    ++batch_;
    double rate = static_cast<double>(window_accepts_) / window_attempts_;
    log_step_ += (rate - target_) / std::sqrt(static_cast<double>(batch_));
    log_step_ = std::clamp(log_step_, std::log(1e-6), std::log(1e3));
    window_attempts_ = window_accepts_ = 0;
  }
}

void MHTuner::freeze() { frozen_ = true; }

double MHTuner::acceptance_rate() const {
  return attempts_ == 0 ? 0.0 : static_cast<double>(accepts_) / attempts_;
}

void ChainConfig::validate() const {
  if (burn_in > iterations) {
    throw std::invalid_argument("chain config: burn_in exceeds iterations");
  }
  if (thin < 1) throw std::invalid_argument("chain config: thin must be >= 1");
  if (chains < 1) throw std::invalid_argument("chain config: chains must be >= 1");
}

std::vector<std::string> parameter_names(Family family, arma::uword k) {
  std::vector<std::string> names;
  for (arma::uword j = 0; j < k; ++j) names.push_back("beta_" + std::to_string(j));
  names.push_back("delta");
  if (family == Family::TQR) {
    names.push_back("sigma");
    return names;
  }
  names.push_back("eta");
  for (arma::uword j = 0; j <= k; ++j) names.push_back("gamma_" + std::to_string(j));
  names.push_back("sigma");
  names.push_back("alpha");
  if (family_is_dp(family)) {
    names.push_back("a");
  } else {
    names.push_back("phi");
    if (family == Family::AEP) {
      names.push_back("zeta1");
      names.push_back("zeta2");
    }
  }
  return names;
}

// --- multivariate normal helpers ---

arma::vec mvn_from_precision(const arma::mat& P, const arma::vec& r, Rng& rng) {
  arma::mat L;
  if (!arma::chol(L, P, "lower")) {
    throw std::runtime_error("non-SPD precision matrix in a Gibbs kernel");
  }
  arma::vec mean = arma::solve(arma::trimatu(L.t()),
                               arma::solve(arma::trimatl(L), r));
  arma::vec z(P.n_rows);
  for (arma::uword i = 0; i < z.n_elem; ++i) z(i) = rng.normal();
  return mean + arma::solve(arma::trimatu(L.t()), z);
}

double mvn_logpdf_precision(const arma::vec& x, const arma::vec& mean,
                            const arma::mat& P) {
  double ld, sign;
  arma::log_det(ld, sign, P);
  arma::vec d = x - mean;
  return 0.5 * ld - 0.5 * arma::dot(d, P * d) -
         0.5 * static_cast<double>(x.n_elem) * std::log(2.0 * M_PI);
}

// --- second-stage kernels ---

arma::vec draw_ystar(const CensoredDataset& ds, const arma::mat& Xt,
                     const arma::vec& beta_tilde, const arma::vec& g,
                     double sigma, const ThetaTau& ttp, Rng& rng) {
  arma::vec fitted = Xt * beta_tilde;
  arma::vec out = ds.y;
  for (arma::uword i = 0; i < ds.n(); ++i) {
    if (!ds.censored[i]) continue;
    double mean = fitted(i) + ttp.theta * g(i);
    double var = ttp.tau2 * sigma * g(i);
    out(i) = tn_sample(mean, var, -kInf, 0.0, rng);
  }
  return out;
}

arma::vec draw_beta_tilde(const arma::mat& Xt, const arma::vec& ystar,
                          const arma::vec& g, double sigma, const ThetaTau& ttp,
                          const arma::vec& prior_mean,
                          const arma::mat& prior_prec, Rng& rng) {
  arma::vec w = 1.0 / (ttp.tau2 * sigma * g);
  arma::mat Xw = Xt;
  Xw.each_col() %= w;
  arma::mat P = prior_prec + Xw.t() * Xt;
  arma::vec r = prior_prec * prior_mean + Xw.t() * (ystar - ttp.theta * g);
  return mvn_from_precision(P, r, rng);
}

MVNMoments beta_tilde_moments(const arma::mat& Xt, const arma::vec& ystar,
                              const arma::vec& g, double sigma,
                              const ThetaTau& ttp, const arma::vec& prior_mean,
                              const arma::mat& prior_prec) {
  arma::vec w = 1.0 / (ttp.tau2 * sigma * g);
  arma::mat Xw = Xt;
  Xw.each_col() %= w;
  arma::mat P = prior_prec + Xw.t() * Xt;
  arma::vec r = prior_prec * prior_mean + Xw.t() * (ystar - ttp.theta * g);
  arma::mat cov = arma::inv_sympd(P);
  return {cov * r, cov};
}

std::pair<double, double> sigma_posterior_params(const arma::mat& Xt,
                                                 const arma::vec& ystar,
                                                 const arma::vec& beta_tilde,
                                                 const arma::vec& g,
                                                 const ThetaTau& ttp, double m0,
                                                 double s0) {
  arma::vec resid = ystar - Xt * beta_tilde - ttp.theta * g;
  double n = static_cast<double>(ystar.n_elem);
  double s1 = arma::accu(g) + arma::accu(arma::square(resid) / (2.0 * ttp.tau2 * g)) + s0;
  return {1.5 * n + m0, s1};
}

std::pair<double, double> gig_params_for_g(double resid, double sigma,
                                           const ThetaTau& ttp) {
  double lambda = std::abs(resid) / std::sqrt(ttp.tau2 * sigma);
  double psi = std::sqrt(ttp.theta * ttp.theta / (ttp.tau2 * sigma) + 2.0 / sigma);
  return {lambda, psi};
}

std::pair<double, double> gig_params_for_h(double v, double phi,
                                           const ThetaTau& tta) {
  double xi = std::abs(v) / std::sqrt(tta.tau2 * phi);
  double chi = std::sqrt(tta.theta * tta.theta / (tta.tau2 * phi) + 2.0 / phi);
  return {xi, chi};
}

double draw_sigma(const arma::mat& Xt, const arma::vec& ystar,
                  const arma::vec& beta_tilde, const arma::vec& g,
                  const ThetaTau& ttp, double m0, double s0, Rng& rng) {
  auto [shape, rate] = sigma_posterior_params(Xt, ystar, beta_tilde, g, ttp, m0, s0);
  return rng.inv_gamma(shape, rate);
}

arma::vec draw_g(const arma::mat& Xt, const arma::vec& ystar,
                 const arma::vec& beta_tilde, double sigma, const ThetaTau& ttp,
                 Rng& rng) {
  arma::vec resid = ystar - Xt * beta_tilde;
  arma::vec g(resid.n_elem);
  for (arma::uword i = 0; i < resid.n_elem; ++i) {
    auto [lambda, psi] = gig_params_for_g(resid(i), sigma, ttp);
    g(i) = std::max(gig_half_sample(lambda, psi, rng), kLatentFloor);
  }
  return g;
}

// --- first-stage kernels ---

arma::vec draw_h(const arma::vec& v, const arma::vec& phi_per_obs,
                 const ThetaTau& tta, Rng& rng) {
  arma::vec h(v.n_elem);
  for (arma::uword i = 0; i < v.n_elem; ++i) {
    auto [xi, chi] = gig_params_for_h(v(i), phi_per_obs(i), tta);
    h(i) = std::max(gig_half_sample(xi, chi, rng), kLatentFloor);
  }
  return h;
}

void gamma_gibbs_system(const CensoredDataset& ds, const arma::mat& Z,
                        const arma::vec& beta_tilde, const arma::vec& ystar,
                        const arma::vec& g, double sigma,
                        const arma::vec& phi_per_obs, const arma::vec& h,
                        const ThetaTau& ttp, const ThetaTau& tta,
                        const arma::vec& prior_mean, const arma::mat& prior_prec,
                        arma::mat& precision_out, arma::vec& rhs_out) {
  arma::uword k = ds.k();
  arma::vec beta = beta_tilde.head(k);
  double delta = beta_tilde(k);
  double eta = beta_tilde(k + 1);

  // second stage: the residual with the control variable expanded is
  // m_i + eta z_i'gamma, m_i = y*_i - x_i'beta - (delta+eta) d_i - theta_p g_i
  arma::vec denom2 = ttp.tau2 * sigma * g;
  arma::vec m = ystar - ds.X * beta - (delta + eta) * ds.d - ttp.theta * g;
  // first stage: (d_i - z_i'gamma - theta_a h_i)^2 / (2 tau_a^2 phi_i h_i)
  arma::vec denom1 = tta.tau2 * (phi_per_obs % h);

  arma::vec wq = eta * eta / denom2 + 1.0 / denom1;
  arma::vec lv = -eta * m / denom2 + (ds.d - tta.theta * h) / denom1;

  arma::mat Zw = Z;
  Zw.each_col() %= wq;
  precision_out = prior_prec + Zw.t() * Z;
  rhs_out = prior_prec * prior_mean + Z.t() * lv;
}

MVNMoments gamma_gibbs_moments(const CensoredDataset& ds, const arma::mat& Z,
                               const arma::vec& beta_tilde, const arma::vec& ystar,
                               const arma::vec& g, double sigma,
                               const arma::vec& phi_per_obs, const arma::vec& h,
                               const ThetaTau& ttp, const ThetaTau& tta,
                               const arma::vec& prior_mean,
                               const arma::mat& prior_prec) {
  arma::mat P;
  arma::vec r;
  gamma_gibbs_system(ds, Z, beta_tilde, ystar, g, sigma, phi_per_obs, h, ttp, tta,
                     prior_mean, prior_prec, P, r);
  arma::mat cov = arma::inv_sympd(P);
  return {cov * r, cov};
}

arma::vec draw_gamma_gibbs(const CensoredDataset& ds, const arma::mat& Z,
                           const arma::vec& beta_tilde, const arma::vec& ystar,
                           const arma::vec& g, double sigma,
                           const arma::vec& phi_per_obs, const arma::vec& h,
                           const ThetaTau& ttp, const ThetaTau& tta,
                           const arma::vec& prior_mean,
                           const arma::mat& prior_prec, Rng& rng) {
  arma::mat P;
  arma::vec r;
  gamma_gibbs_system(ds, Z, beta_tilde, ystar, g, sigma, phi_per_obs, h, ttp, tta,
                     prior_mean, prior_prec, P, r);
  return mvn_from_precision(P, r, rng);
}

namespace {

void sn_gamma_system(const CensoredDataset& ds, const arma::mat& Z,
                     const arma::vec& gamma, const arma::vec& beta_tilde,
                     const arma::vec& ystar, const arma::vec& g, double sigma,
                     const arma::vec& phi_per_obs, double alpha,
                     const ThetaTau& ttp, const arma::vec& prior_mean,
                     const arma::mat& prior_prec, arma::mat& P, arma::vec& r) {
  arma::uword k = ds.k();
  arma::vec beta = beta_tilde.head(k);
  double delta = beta_tilde(k);
  double eta = beta_tilde(k + 1);

  arma::vec denom2 = ttp.tau2 * sigma * g;
  arma::vec m = ystar - ds.X * beta - (delta + eta) * ds.d - ttp.theta * g;
  arma::vec v = ds.d - Z * gamma;

  arma::vec wq(ds.n()), lv(ds.n());
  for (arma::uword i = 0; i < ds.n(); ++i) {
    double a = alpha - (v(i) <= 0.0 ? 1.0 : 0.0);
    double c1 = 4.0 * a * a / phi_per_obs(i);
    wq(i) = eta * eta / denom2(i) + c1;
    lv(i) = -eta * m(i) / denom2(i) + c1 * ds.d(i);
  }
  arma::mat Zw = Z;
  Zw.each_col() %= wq;
  P = prior_prec + Zw.t() * Z;
  r = prior_prec * prior_mean + Z.t() * lv;
}

}  // namespace

MVNMoments sn_gamma_proposal_moments(const CensoredDataset& ds, const arma::mat& Z,
                                     const arma::vec& gamma,
                                     const arma::vec& beta_tilde,
                                     const arma::vec& ystar, const arma::vec& g,
                                     double sigma, const arma::vec& phi_per_obs,
                                     double alpha, const ThetaTau& ttp,
                                     const arma::vec& prior_mean,
                                     const arma::mat& prior_prec) {
  arma::mat P;
  arma::vec r;
  sn_gamma_system(ds, Z, gamma, beta_tilde, ystar, g, sigma, phi_per_obs, alpha,
                  ttp, prior_mean, prior_prec, P, r);
  arma::mat cov = arma::inv_sympd(P);
  return {cov * r, cov};
}

double sn_gamma_log_target(const CensoredDataset& ds, const arma::mat& Z,
                           const arma::vec& gamma, const arma::vec& beta_tilde,
                           const arma::vec& ystar, const arma::vec& g,
                           double sigma, const arma::vec& phi_per_obs,
                           double alpha, const ThetaTau& ttp,
                           const arma::vec& prior_mean,
                           const arma::mat& prior_prec) {
  arma::uword k = ds.k();
  arma::vec beta = beta_tilde.head(k);
  double delta = beta_tilde(k);
  double eta = beta_tilde(k + 1);

  arma::vec v = ds.d - Z * gamma;
  arma::vec r2 = ystar - ds.X * beta - delta * ds.d - eta * v - ttp.theta * g;
  double lt = -arma::accu(arma::square(r2) / (2.0 * ttp.tau2 * sigma * g));
  for (arma::uword i = 0; i < ds.n(); ++i) {
    lt += sn_logpdf(v(i), {phi_per_obs(i), alpha});
  }
  arma::vec d0 = gamma - prior_mean;
  lt -= 0.5 * arma::dot(d0, prior_prec * d0);
  return lt;  // up to an additive constant free of gamma
}

GammaMHResult draw_gamma_mh_sn(const CensoredDataset& ds, const arma::mat& Z,
                               const arma::vec& gamma, const arma::vec& beta_tilde,
                               const arma::vec& ystar, const arma::vec& g,
                               double sigma, const arma::vec& phi_per_obs,
                               double alpha, const ThetaTau& ttp,
                               const arma::vec& prior_mean,
                               const arma::mat& prior_prec, Rng& rng) {
  arma::mat P1;
  arma::vec r1;
  sn_gamma_system(ds, Z, gamma, beta_tilde, ystar, g, sigma, phi_per_obs, alpha,
                  ttp, prior_mean, prior_prec, P1, r1);
  arma::vec proposal = mvn_from_precision(P1, r1, rng);
  arma::vec mean1 = arma::solve(P1, r1);

  arma::mat P2;
  arma::vec r2;
  sn_gamma_system(ds, Z, proposal, beta_tilde, ystar, g, sigma, phi_per_obs,
                  alpha, ttp, prior_mean, prior_prec, P2, r2);
  arma::vec mean2 = arma::solve(P2, r2);

  double log_ratio =
      sn_gamma_log_target(ds, Z, proposal, beta_tilde, ystar, g, sigma,
                          phi_per_obs, alpha, ttp, prior_mean, prior_prec) -
      sn_gamma_log_target(ds, Z, gamma, beta_tilde, ystar, g, sigma,
                          phi_per_obs, alpha, ttp, prior_mean, prior_prec) +
      mvn_logpdf_precision(gamma, mean2, P2) -
      mvn_logpdf_precision(proposal, mean1, P1);

  if (std::log(rng.uniform()) < log_ratio) return {proposal, true};
  return {gamma, false};
}

AlphaMHResult draw_alpha_mh(double alpha, const arma::vec& v,
                            const arma::vec& phi_per_obs, Family family,
                            double step, Rng& rng) {
  auto loglik = [&](double a) {
    double lt = 0.0;
    for (arma::uword i = 0; i < v.n_elem; ++i) {
      lt += (family == Family::SN || family == Family::SNDP)
                ? sn_logpdf(v(i), {phi_per_obs(i), a})
                : al_logpdf(v(i), {phi_per_obs(i), a});
    }
    return lt;
  };
  double proposal = inv_logit(logit(alpha) + step * rng.normal());
  if (proposal <= kUnitIntervalEdge || proposal >= 1.0 - kUnitIntervalEdge) {
    return {alpha, false};
  }
  double log_ratio = loglik(proposal) - loglik(alpha) +
                     std::log(proposal * (1.0 - proposal)) -
                     std::log(alpha * (1.0 - alpha));
  if (std::log(rng.uniform()) < log_ratio) return {proposal, true};
  return {alpha, false};
}

// --- FamilySampler ---

FamilySampler::FamilySampler(const ModelSpec& spec, const CensoredDataset& ds)
    : spec_(spec), tt_p_(theta_tau(spec.p)), alpha_tuner_(0.5, 0.44, 50) {
  spec_.validate();
  resolve_base_measure(spec_.priors, spec_.family);
  arma::uword k = ds.k();
  bool endo = family_is_endogenous(spec_.family);

  if (endo) {
    if (!ds.has_instrument()) {
      throw std::runtime_error("endogenous families require an instrument column");
    }
    Z_ = arma::join_rows(ds.X, ds.w);
    gamma_mean_ = arma::vec(k + 1, arma::fill::value(spec_.priors.gamma_mean));
    gamma_prec_ = arma::eye(k + 1, k + 1) / spec_.priors.gamma_var;
  }

  arma::uword m = endo ? k + 2 : k + 1;
  btilde_mean_ = arma::vec(m, arma::fill::value(spec_.priors.beta_mean));
  arma::vec prior_var(m, arma::fill::value(spec_.priors.beta_var));
  if (endo) {
    btilde_mean_(m - 1) = spec_.priors.eta_mean;
    prior_var(m - 1) = spec_.priors.eta_var;
  }
  btilde_prec_ = arma::diagmat(1.0 / prior_var);

  if (spec_.family == Family::AEP) {
    aep_tuners_.assign(k + 1 + 4, MHTuner(0.2, 0.44, 50));
  }
}

arma::vec FamilySampler::phi_per_obs(const ChainState& s, arma::uword n) const {
  arma::vec phi(n);
  if (family_is_dp(spec_.family)) {
    for (arma::uword i = 0; i < n; ++i) phi(i) = s.phi_clusters[s.k_alloc[i] - 1];
  } else {
    phi.fill(s.phi);
  }
  return phi;
}

arma::mat FamilySampler::design_matrix(const ChainState& s,
                                       const CensoredDataset& ds) const {
  if (!family_is_endogenous(spec_.family)) return arma::join_rows(ds.X, ds.d);
  arma::vec v = ds.d - Z_ * s.gamma;
  return arma::join_rows(ds.X, ds.d, v);
}

ChainState FamilySampler::initial_state(const CensoredDataset& ds,
                                        std::size_t chain_index) const {
  ChainState s;
  arma::uword n = ds.n();
  bool endo = family_is_endogenous(spec_.family);

  if (endo) {
    s.gamma = arma::solve(Z_.t() * Z_ + 1e-8 * arma::eye(Z_.n_cols, Z_.n_cols),
                          Z_.t() * ds.d);
  }
  arma::mat Xt = design_matrix(s, ds);
  s.beta_tilde = arma::solve(Xt.t() * Xt + 1e-8 * arma::eye(Xt.n_cols, Xt.n_cols),
                             Xt.t() * ds.y);
  s.sigma = 1.0;
  s.alpha = 0.5;
  s.phi = 1.0;
  s.zeta1 = s.zeta2 = 1.0;
  s.g = arma::vec(n, arma::fill::ones);
  s.h = arma::vec(n, arma::fill::ones);
  s.ystar = ds.y;
  for (arma::uword i = 0; i < n; ++i) {
    if (ds.censored[i]) s.ystar(i) = -0.1;
  }
  if (family_is_dp(spec_.family)) {
    s.k_alloc.assign(n, 1);
    s.omega = {0.5};
    s.phi_clusters = {1.0};
    s.k_star = 1;
    s.u = arma::vec(n, arma::fill::value(0.25));
    s.a = 1.0;
  }

  // widespread starting values for multi-chain convergence monitoring
  if (chain_index > 0) {
    double sign = (chain_index % 2 == 0) ? 1.0 : -1.0;
    double shift = 2.0 * static_cast<double>((chain_index + 1) / 2) * sign;
    s.beta_tilde += shift;
    if (endo) s.gamma += 0.5 * shift;
    s.sigma = std::pow(4.0, static_cast<double>(std::min<std::size_t>(chain_index, 3)));
    s.alpha = (chain_index % 3 == 1) ? 0.25 : (chain_index % 3 == 2 ? 0.75 : 0.5);
  }
  return s;
}

void FamilySampler::freeze_tuners() {
  alpha_tuner_.freeze();
  for (auto& t : aep_tuners_) t.freeze();
}

void FamilySampler::set_all_steps(double step) {
  alpha_tuner_.set_step(step);
  for (auto& t : aep_tuners_) t.set_step(step);
}

std::map<std::string, double> FamilySampler::acceptance_rates() const {
  std::map<std::string, double> rates;
  if (!family_is_endogenous(spec_.family)) return rates;
  if (spec_.family == Family::AEP) {
    arma::uword k1 = aep_tuners_.size() - 4;
    for (arma::uword j = 0; j < k1; ++j) {
      rates["aep_gamma_" + std::to_string(j)] = aep_tuners_[j].acceptance_rate();
    }
    rates["aep_phi"] = aep_tuners_[k1].acceptance_rate();
    rates["aep_alpha"] = aep_tuners_[k1 + 1].acceptance_rate();
    rates["aep_zeta1"] = aep_tuners_[k1 + 2].acceptance_rate();
    rates["aep_zeta2"] = aep_tuners_[k1 + 3].acceptance_rate();
    return rates;
  }
  rates["alpha_mh"] = alpha_tuner_.acceptance_rate();
  if (spec_.family == Family::SN || spec_.family == Family::SNDP) {
    rates["gamma_mh"] = gamma_attempts_ == 0
                            ? 0.0
                            : static_cast<double>(gamma_accepts_) / gamma_attempts_;
  }
  return rates;
}

void FamilySampler::aep_block(ChainState& s, const CensoredDataset& ds, Rng& rng) {
  arma::uword k1 = Z_.n_cols;
  const PriorConfig& pr = spec_.priors;

  arma::vec beta = s.beta_tilde.head(ds.k());
  double delta = s.beta_tilde(ds.k());
  double eta = s.beta_tilde(ds.k() + 1);
  arma::vec r0 = s.ystar - ds.X * beta - delta * ds.d - tt_p_.theta * s.g;
  arma::vec denom2 = 2.0 * tt_p_.tau2 * s.sigma * s.g;

  auto first_stage_ll = [&](const arma::vec& v, double phi, double alpha,
                            double z1, double z2) {
    AEPParams p{phi, alpha, z1, z2};
    double lt = 0.0;
    for (arma::uword i = 0; i < v.n_elem; ++i) lt += aep_logpdf(v(i), p);
    return lt;
  };
  auto second_stage_ll = [&](const arma::vec& v) {
    return -arma::accu(arma::square(r0 - eta * v) / denom2);
  };

  arma::vec v = ds.d - Z_ * s.gamma;
  double fs_ll = first_stage_ll(v, s.phi, s.alpha, s.zeta1, s.zeta2);
  double ss_ll = second_stage_ll(v);

  // gamma coordinates, natural scale
  for (arma::uword j = 0; j < k1; ++j) {
    MHTuner& tuner = aep_tuners_[j];
    arma::vec gamma_prop = s.gamma;
    gamma_prop(j) += tuner.step() * rng.normal();
    arma::vec v_prop = ds.d - Z_ * gamma_prop;
    double fs_prop = first_stage_ll(v_prop, s.phi, s.alpha, s.zeta1, s.zeta2);
    double ss_prop = second_stage_ll(v_prop);
    arma::vec d_cur = s.gamma - gamma_mean_, d_prop = gamma_prop - gamma_mean_;
    double log_ratio = fs_prop + ss_prop - fs_ll - ss_ll -
                       0.5 * arma::dot(d_prop, gamma_prec_ * d_prop) +
                       0.5 * arma::dot(d_cur, gamma_prec_ * d_cur);
    bool accept = std::log(rng.uniform()) < log_ratio;
    if (accept) {
      s.gamma = gamma_prop;
      v = v_prop;
      fs_ll = fs_prop;
      ss_ll = ss_prop;
    }
    tuner.record(accept);
  }

  // phi, log scale, inverse-gamma prior
  {
    MHTuner& tuner = aep_tuners_[k1];
    double prop = s.phi * std::exp(tuner.step() * rng.normal());
    double fs_prop = first_stage_ll(v, prop, s.alpha, s.zeta1, s.zeta2);
    double log_ratio = fs_prop - fs_ll +
                       (-(pr.phi_shape + 1.0) * std::log(prop) - pr.phi_scale / prop) -
                       (-(pr.phi_shape + 1.0) * std::log(s.phi) - pr.phi_scale / s.phi) +
                       std::log(prop) - std::log(s.phi);
    bool accept = std::log(rng.uniform()) < log_ratio;
    if (accept) {
      s.phi = prop;
      fs_ll = fs_prop;
    }
    tuner.record(accept);
  }

  // alpha, logit scale, flat prior
  {
    MHTuner& tuner = aep_tuners_[k1 + 1];
    double prop = inv_logit(logit(s.alpha) + tuner.step() * rng.normal());
    bool accept = false;
    if (prop > kUnitIntervalEdge && prop < 1.0 - kUnitIntervalEdge) {
      double fs_prop = first_stage_ll(v, s.phi, prop, s.zeta1, s.zeta2);
      double log_ratio = fs_prop - fs_ll + std::log(prop * (1.0 - prop)) -
                         std::log(s.alpha * (1.0 - s.alpha));
      accept = std::log(rng.uniform()) < log_ratio;
      if (accept) {
        s.alpha = prop;
        fs_ll = fs_prop;
      }
    }
    tuner.record(accept);
  }

  // tail shapes, log scale, half-normal-style prior TN_(0,inf)(mean, var)
  for (int which = 0; which < 2; ++which) {
    MHTuner& tuner = aep_tuners_[k1 + 2 + which];
    double cur = which == 0 ? s.zeta1 : s.zeta2;
    double prop = cur * std::exp(tuner.step() * rng.normal());
    double z1 = which == 0 ? prop : s.zeta1;
    double z2 = which == 0 ? s.zeta2 : prop;
    double fs_prop = first_stage_ll(v, s.phi, s.alpha, z1, z2);
    auto log_prior = [&](double z) {
      double d = z - pr.zeta_mean;
      return -0.5 * d * d / pr.zeta_var;
    };
    double log_ratio = fs_prop - fs_ll + log_prior(prop) - log_prior(cur) +
                       std::log(prop) - std::log(cur);
    bool accept = std::log(rng.uniform()) < log_ratio;
    if (accept) {
      (which == 0 ? s.zeta1 : s.zeta2) = prop;
      fs_ll = fs_prop;
    }
    tuner.record(accept);
  }
}

void FamilySampler::sweep_first_stage(ChainState& s, const CensoredDataset& ds,
                                      Rng& rng) {
  const PriorConfig& pr = spec_.priors;
  arma::uword n = ds.n();

  if (spec_.family == Family::AEP) {
    aep_block(s, ds, rng);
    return;
  }

  ThetaTau tta = theta_tau(s.alpha);
  arma::vec phi_obs = phi_per_obs(s, n);

  // gamma: exact normal draw under the AL-mixture representation, MH with a
  // linearised proposal under the two-piece normal
  if (spec_.family == Family::AL || spec_.family == Family::ALDP) {
    s.gamma = draw_gamma_gibbs(ds, Z_, s.beta_tilde, s.ystar, s.g, s.sigma,
                               phi_obs, s.h, tt_p_, tta, gamma_mean_,
                               gamma_prec_, rng);
  } else {
    GammaMHResult res = draw_gamma_mh_sn(ds, Z_, s.gamma, s.beta_tilde, s.ystar,
                                         s.g, s.sigma, phi_obs, s.alpha, tt_p_,
                                         gamma_mean_, gamma_prec_, rng);
    s.gamma = res.gamma;
    ++gamma_attempts_;
    if (res.accepted) ++gamma_accepts_;
  }
  arma::vec v = ds.d - Z_ * s.gamma;

  // first-stage scales
  if (spec_.family == Family::AL) {
    double shape = 1.5 * static_cast<double>(n) + pr.phi_shape;
    arma::vec r = v - tta.theta * s.h;
    double rate = arma::accu(s.h + arma::square(r) / (2.0 * tta.tau2 * s.h)) +
                  pr.phi_scale;
    s.phi = rng.inv_gamma(shape, rate);
  } else if (spec_.family == Family::SN) {
    double shape = 0.5 * static_cast<double>(n) + pr.phi_shape;
    double rate = pr.phi_scale;
    for (arma::uword i = 0; i < n; ++i) {
      double a = s.alpha - (v(i) <= 0.0 ? 1.0 : 0.0);
      rate += 2.0 * v(i) * v(i) * a * a;
    }
    s.phi = rng.inv_gamma(shape, rate);
  } else {
    // Dirichlet-process block. Cluster scales and sticks are refreshed from
    // their conditionals given the allocations, the slice variables given the
    // new sticks, then allocations over the slice-admissible set.
    bool aldp = (spec_.family == Family::ALDP);
    if (aldp) {
      s.phi_clusters = update_cluster_scales_aldp(v, s.h, s.k_alloc, s.alpha,
                                                  s.k_star, pr.base_shape,
                                                  pr.base_scale, rng);
    } else {
      s.phi_clusters = update_cluster_scales_sndp(v, s.k_alloc, s.alpha, s.k_star,
                                                  pr.base_shape, pr.base_scale,
                                                  rng);
    }
    s.omega = update_sticks(s.k_alloc, n, s.a, s.k_star, rng);
    s.u = update_slice_u(s.k_alloc, stick_weights(s.omega), rng);

    StickState stick{s.omega, s.phi_clusters, s.k_star};
    extend_sticks(stick, s.u.min(), s.a, pr.base_shape, pr.base_scale, rng);
    s.k_alloc = update_alloc(v, stick, s.u, s.alpha,
                             aldp ? Family::AL : Family::SN, rng);

    // drop sticks beyond the last occupied cluster; they are regenerated
    // from the same conditional law at the next refresh
    std::size_t max_occ = 1;
    for (arma::uword ki : s.k_alloc) max_occ = std::max<std::size_t>(max_occ, ki);
    stick.omega.resize(max_occ);
    stick.phi.resize(max_occ);
    s.omega = std::move(stick.omega);
    s.phi_clusters = std::move(stick.phi);
    s.k_star = max_occ;

    std::size_t n_star = 0;
    for (std::size_t c : cluster_counts(s.k_alloc, s.k_star)) {
      if (c > 0) ++n_star;
    }
    s.a = update_precision_a(n_star, n, pr.a_shape, pr.a_rate, s.a, rng);
    phi_obs = phi_per_obs(s, n);
  }

  // alpha by random walk MH; for the AL-mixture families the target
  // integrates out h, so h is refreshed immediately afterwards
  AlphaMHResult ar = draw_alpha_mh(s.alpha, v, phi_obs, spec_.family,
                                   alpha_tuner_.step(), rng);
  s.alpha = ar.alpha;
  alpha_tuner_.record(ar.accepted);

  if (spec_.family == Family::AL || spec_.family == Family::ALDP) {
    s.h = draw_h(v, phi_obs, theta_tau(s.alpha), rng);
  }
}

void FamilySampler::sweep_second_stage(ChainState& s, const CensoredDataset& ds,
                                       Rng& rng) {
  arma::mat Xt = design_matrix(s, ds);
  s.ystar = draw_ystar(ds, Xt, s.beta_tilde, s.g, s.sigma, tt_p_, rng);
  s.beta_tilde = draw_beta_tilde(Xt, s.ystar, s.g, s.sigma, tt_p_, btilde_mean_,
                                 btilde_prec_, rng);
  s.sigma = draw_sigma(Xt, s.ystar, s.beta_tilde, s.g, tt_p_,
                       spec_.priors.sigma_shape, spec_.priors.sigma_scale, rng);
  s.g = draw_g(Xt, s.ystar, s.beta_tilde, s.sigma, tt_p_, rng);
}

void FamilySampler::sweep(ChainState& s, const CensoredDataset& ds, Rng& rng) {
  if (family_is_endogenous(spec_.family)) sweep_first_stage(s, ds, rng);
  sweep_second_stage(s, ds, rng);
}

// --- chain runner ---

namespace {

arma::rowvec state_row(const ChainState& s, Family family, arma::uword k) {
  std::size_t m = s.beta_tilde.n_elem;
  std::vector<double> vals;
  for (arma::uword j = 0; j < m; ++j) vals.push_back(s.beta_tilde(j));
  if (family != Family::TQR) {
    for (arma::uword j = 0; j <= k; ++j) vals.push_back(s.gamma(j));
  }
  vals.push_back(s.sigma);
  if (family != Family::TQR) {
    vals.push_back(s.alpha);
    if (family_is_dp(family)) {
      vals.push_back(s.a);
    } else {
      vals.push_back(s.phi);
      if (family == Family::AEP) {
        vals.push_back(s.zeta1);
        vals.push_back(s.zeta2);
      }
    }
  }
  return arma::rowvec(vals);
}

}  // namespace

Chain run_chain(const ModelSpec& spec, const CensoredDataset& ds,
                const ChainConfig& cfg, std::size_t chain_index) {
  cfg.validate();
  std::vector<std::string> problems = validate_dataset(ds);
  if (!problems.empty()) {
    std::string msg = "invalid dataset:";
    for (const std::string& p : problems) msg += "\n  " + p;
    throw std::runtime_error(msg);
  }

  Rng rng(cfg.seed, chain_index);
  FamilySampler sampler(spec, ds);
  ChainState state = sampler.initial_state(ds, chain_index);

  Chain chain;
  chain.names = parameter_names(spec.family, ds.k());
  chain.seed = cfg.seed;
  chain.chain_index = chain_index;
  chain.iterations = cfg.iterations;
  chain.burn_in = cfg.burn_in;
  chain.thin = cfg.thin;

  std::size_t retained =
      (cfg.iterations > cfg.burn_in)
          ? (cfg.iterations - cfg.burn_in + cfg.thin - 1) / cfg.thin
          : 0;
  chain.draws.set_size(retained, chain.names.size());
  if (cfg.save_latents) {
    chain.g_draws.set_size(retained, ds.n());
    chain.ystar_draws.set_size(retained, ds.n());
    if (spec.family == Family::AL || spec.family == Family::ALDP) {
      chain.h_draws.set_size(retained, ds.n());
    }
  }

  std::size_t row = 0;
  for (std::size_t iter = 0; iter < cfg.iterations; ++iter) {
    if (iter == cfg.burn_in) sampler.freeze_tuners();
    try {
      sampler.sweep(state, ds, rng);
    } catch (const std::exception& e) {
      throw std::runtime_error("chain " + std::to_string(chain_index) +
                               " aborted at iteration " + std::to_string(iter) +
                               ": " + e.what());
    }
    if (iter >= cfg.burn_in && (iter - cfg.burn_in) % cfg.thin == 0) {
      chain.draws.row(row) = state_row(state, spec.family, ds.k());
      if (cfg.save_latents) {
        chain.g_draws.row(row) = state.g.t();
        chain.ystar_draws.row(row) = state.ystar.t();
        if (chain.h_draws.n_rows > 0) chain.h_draws.row(row) = state.h.t();
      }
      ++row;
    }
  }
  chain.acceptance = sampler.acceptance_rates();
  return chain;
}

std::vector<Chain> run_chains(const ModelSpec& spec, const CensoredDataset& ds,
                              const ChainConfig& cfg) {
  cfg.validate();
  std::vector<Chain> out(cfg.chains);
  if (cfg.chains == 1) {
    out[0] = run_chain(spec, ds, cfg, 0);
    return out;
  }
  std::vector<std::future<Chain>> futures;
  futures.reserve(cfg.chains);
  for (std::size_t c = 0; c < cfg.chains; ++c) {
    futures.push_back(std::async(std::launch::async, [&, c] {
      return run_chain(spec, ds, cfg, c);
    }));
  }
  for (std::size_t c = 0; c < cfg.chains; ++c) out[c] = futures[c].get();
  return out;
}

Chain run_tqr(const ModelSpec& spec, const CensoredDataset& ds,
              const ChainConfig& cfg, std::size_t chain_index) {
  if (spec.family != Family::TQR) {
    throw std::invalid_argument("run_tqr requires family TQR");
  }
  return run_chain(spec, ds, cfg, chain_index);
}

}  // namespace tqreg
