#pragma once

#include "tqreg/model.hpp"
#include "tqreg/rng.hpp"

#include <vector>

namespace tqreg {

// Stick-breaking representation kept just long enough to cover the slice
// set: pi_l = omega_l * prod_{r<l}(1-omega_r) for l = 1..k_star, with
// sum_{l<=k_star} pi_l > 1 - min_i u_i after extension.
struct StickState {
  std::vector<double> omega;
  std::vector<double> phi;  // cluster scales, same length as omega
  std::size_t k_star = 1;
};

// pi_1..pi_L from the stick fractions.
std::vector<double> stick_weights(const std::vector<double>& omega);

// Occupancy counts n_l for l = 1..L from 1-based labels.
std::vector<std::size_t> cluster_counts(const std::vector<arma::uword>& k_alloc,
                                        std::size_t L);

// u_i ~ U(0, pi_{k_i}); throws if an allocated cluster has zero weight.
arma::vec update_slice_u(const std::vector<arma::uword>& k_alloc,
                         const std::vector<double>& pi, Rng& rng);

// omega_l ~ Beta(1 + n_l, n - sum_{r<=l} n_r + a) for l = 1..k_star; sticks
// beyond every occupied cluster reduce to Beta(1, a).
std::vector<double> update_sticks(const std::vector<arma::uword>& k_alloc,
                                  std::size_t n, double a, std::size_t k_star,
                                  Rng& rng);

// Appends omega ~ Beta(1,a) and phi ~ IG(c0,d0) until the slice coverage
// inequality holds; updates k_star. Throws after 10^6 sticks.
void extend_sticks(StickState& state, double u_min, double a, double c0,
                   double d0, Rng& rng);

// k_i drawn over the slice-admissible clusters with weights proportional to
// the family density of the residual under each cluster scale. family must
// be AL or SN.
std::vector<arma::uword> update_alloc(const arma::vec& v, const StickState& state,
                                      const arma::vec& u, double alpha,
                                      Family family, Rng& rng);

// phi_l ~ IG(1.5 n_l + c0, sum_{i: k_i=l}[h_i + (v_i - theta_a h_i)^2 /
// (2 tau_a^2 h_i)] + d0); empty clusters refresh from the base measure.
std::vector<double> update_cluster_scales_aldp(
    const arma::vec& v, const arma::vec& h,
    const std::vector<arma::uword>& k_alloc, double alpha, std::size_t L,
    double c0, double d0, Rng& rng);

// phi_l ~ IG(0.5 n_l + c0, sum_{i: k_i=l} 2 v_i^2 (alpha - I(v_i<=0))^2 + d0).
std::vector<double> update_cluster_scales_sndp(
    const arma::vec& v, const std::vector<arma::uword>& k_alloc, double alpha,
    std::size_t L, double c0, double d0, Rng& rng);

// Escobar-West two-gamma mixture update for the DP precision.
double update_precision_a(std::size_t n_star, std::size_t n, double a0,
                          double b0, double current_a, Rng& rng);

}  // namespace tqreg
