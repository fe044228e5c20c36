#include "tqreg/dp_mixture.hpp"

#include "tqreg/distributions.hpp"

#include <cmath>
#include <stdexcept>

namespace tqreg {

namespace {
constexpr std::size_t kMaxSticks = 1000000;
}

std::vector<double> stick_weights(const std::vector<double>& omega) {
  std::vector<double> pi(omega.size());
  double remaining = 1.0;
  for (std::size_t l = 0; l < omega.size(); ++l) {
    pi[l] = omega[l] * remaining;
    remaining *= (1.0 - omega[l]);
  }
  return pi;
}

std::vector<std::size_t> cluster_counts(const std::vector<arma::uword>& k_alloc,
                                        std::size_t L) {
  std::vector<std::size_t> counts(L, 0);
  for (arma::uword k : k_alloc) {
    if (k < 1 || k > L) throw std::logic_error("cluster label out of range");
    ++counts[k - 1];
  }
  return counts;
}

arma::vec update_slice_u(const std::vector<arma::uword>& k_alloc,
                         const std::vector<double>& pi, Rng& rng) {
  arma::vec u(k_alloc.size());
  for (std::size_t i = 0; i < k_alloc.size(); ++i) {
    double w = pi.at(k_alloc[i] - 1);
    if (!(w > 0.0)) {
      throw std::runtime_error("slice update: zero weight at an allocated cluster");
    }
    u(i) = rng.uniform(0.0, w);
  }
  return u;
}

std::vector<double> update_sticks(const std::vector<arma::uword>& k_alloc,
                                  std::size_t n, double a, std::size_t k_star,
                                  Rng& rng) {
  std::vector<std::size_t> counts = cluster_counts(k_alloc, k_star);
  std::vector<double> omega(k_star);
  std::size_t cum = 0;
  for (std::size_t l = 0; l < k_star; ++l) {
    cum += counts[l];
    omega[l] = rng.beta(1.0 + static_cast<double>(counts[l]),
                        static_cast<double>(n - cum) + a);
  }
  return omega;
}

void extend_sticks(StickState& state, double u_min, double a, double c0,
                   double d0, Rng& rng) {
  if (!(u_min > 0.0 && u_min < 1.0)) {
    throw std::invalid_argument("extend_sticks: u_min must lie in (0,1)");
  }
  if (state.omega.empty()) {
    state.omega.push_back(rng.beta(1.0, a));
    state.phi.push_back(rng.inv_gamma(c0, d0));
  }
  double covered = 0.0;
  double remaining = 1.0;
  std::size_t l = 0;
  for (;;) {
    for (; l < state.omega.size(); ++l) {
      covered += state.omega[l] * remaining;
      remaining *= (1.0 - state.omega[l]);
      if (covered > 1.0 - u_min) {
        state.k_star = l + 1;
        return;
      }
    }
    if (state.omega.size() >= kMaxSticks) {
      throw std::runtime_error("extend_sticks: stick count exceeded 1e6 "
                               "(numerical degeneracy)");
    }
    state.omega.push_back(rng.beta(1.0, a));
    state.phi.push_back(rng.inv_gamma(c0, d0));
  }
}

std::vector<arma::uword> update_alloc(const arma::vec& v, const StickState& state,
                                      const arma::vec& u, double alpha,
                                      Family family, Rng& rng) {
  if (family != Family::AL && family != Family::SN) {
    throw std::invalid_argument("update_alloc: family must be AL or SN");
  }
  std::vector<double> pi = stick_weights(state.omega);
  std::vector<arma::uword> k_alloc(v.n_elem);
  std::vector<double> logw;
  std::vector<std::size_t> labels;
  for (arma::uword i = 0; i < v.n_elem; ++i) {
    logw.clear();
    labels.clear();
    for (std::size_t l = 0; l < state.k_star; ++l) {
      if (u(i) < pi[l]) {
        double lw = (family == Family::AL)
                        ? al_logpdf(v(i), {state.phi[l], alpha})
                        : sn_logpdf(v(i), {state.phi[l], alpha});
        logw.push_back(lw);
        labels.push_back(l + 1);
      }
    }
    if (labels.empty()) {
      throw std::runtime_error("update_alloc: empty admissible set "
                               "(stick extension bug)");
    }
    double mx = logw[0];
    for (double lw : logw) mx = std::max(mx, lw);
    double total = 0.0;
    for (double& lw : logw) {
      lw = std::exp(lw - mx);
      total += lw;
    }
    double t = rng.uniform() * total;
    std::size_t pick = labels.size() - 1;
    double acc = 0.0;
    for (std::size_t j = 0; j < labels.size(); ++j) {
      acc += logw[j];
      if (t <= acc) {
        pick = j;
        break;
      }
    }
    k_alloc[i] = labels[pick];
  }
  return k_alloc;
}

std::vector<double> update_cluster_scales_aldp(
    const arma::vec& v, const arma::vec& h,
    const std::vector<arma::uword>& k_alloc, double alpha, std::size_t L,
    double c0, double d0, Rng& rng) {
  ThetaTau tt = theta_tau(alpha);
  std::vector<double> shape(L, c0), rate(L, d0);
  for (std::size_t i = 0; i < k_alloc.size(); ++i) {
    std::size_t l = k_alloc[i] - 1;
    double r = v(i) - tt.theta * h(i);
    shape[l] += 1.5;
    rate[l] += h(i) + r * r / (2.0 * tt.tau2 * h(i));
  }
  std::vector<double> phi(L);
  for (std::size_t l = 0; l < L; ++l) phi[l] = rng.inv_gamma(shape[l], rate[l]);
  return phi;
}

std::vector<double> update_cluster_scales_sndp(
    const arma::vec& v, const std::vector<arma::uword>& k_alloc, double alpha,
    std::size_t L, double c0, double d0, Rng& rng) {
  std::vector<double> shape(L, c0), rate(L, d0);
  for (std::size_t i = 0; i < k_alloc.size(); ++i) {
    std::size_t l = k_alloc[i] - 1;
    double a = alpha - (v(i) <= 0.0 ? 1.0 : 0.0);
    shape[l] += 0.5;
    rate[l] += 2.0 * v(i) * v(i) * a * a;
  }
  std::vector<double> phi(L);
  for (std::size_t l = 0; l < L; ++l) phi[l] = rng.inv_gamma(shape[l], rate[l]);
  return phi;
}

double update_precision_a(std::size_t n_star, std::size_t n, double a0,
                          double b0, double current_a, Rng& rng) {
  if (n_star < 1 || n_star > n) {
    throw std::invalid_argument("update_precision_a: need 1 <= n_star <= n");
  }
  double c = rng.beta(current_a + 1.0, static_cast<double>(n));
  while (c < 1e-300) c = rng.beta(current_a + 1.0, static_cast<double>(n));
  double rate = b0 - std::log(c);
  double shape_hi = a0 + static_cast<double>(n_star);
  double odds = (shape_hi - 1.0) / (static_cast<double>(n) * rate);
  double prob_hi = (shape_hi - 1.0 > 0.0) ? odds / (1.0 + odds) : 1.0;
  double shape = (rng.uniform() < prob_hi) ? shape_hi : shape_hi - 1.0;
  return rng.gamma_rate(shape, rate);
}

}  // namespace tqreg
