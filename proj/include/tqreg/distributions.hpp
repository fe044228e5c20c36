#pragma once

#include "tqreg/rng.hpp"

namespace tqreg {

// Parameter edge rule: a quantile-type parameter (p or alpha) closer than
// 1e-8 to 0 or 1 is rejected as invalid rather than clamped, so sampler
// pathologies surface instead of being masked.
inline constexpr double kUnitIntervalEdge = 1e-8;

struct MeanVar {
  double mean;
  double variance;
};

// Asymmetric Laplace AL(sigma, p): scale sigma > 0, shape p in (0,1).
// The p-th quantile is zero by construction.
struct ALParams {
  double sigma;
  double p;
};

// Two-piece (skew) normal SN(phi, alpha): scale phi > 0, shape alpha in
// (0,1). Reduces to N(0, phi) at alpha = 0.5; the alpha-th quantile is zero.
struct SNParams {
  double phi;
  double alpha;
};

// Asymmetric exponential power AEP(phi, alpha, zeta1, zeta2): scale phi > 0,
// skewness alpha in (0,1), left/right tail shapes zeta1, zeta2 > 0. The
// alpha-th quantile is zero for every parameter value.
struct AEPParams {
  double phi;
  double alpha;
  double zeta1;
  double zeta2;
};

// Generalised inverse Gaussian with density proportional to
// x^{nu-1} exp{-(xi^2/x + chi^2 x)/2}. Only nu = 1/2 is supported by the
// sampler; that is the only index the Gibbs kernels need.
struct GIGParams {
  double nu;
  double xi;
  double chi;
};

// Skew t with location mu, scale sigma2, skewness alpha (= delta/sqrt(1-
// delta^2) in the usual delta parameterisation) and degrees of freedom nu.
struct SkewTParams {
  double mu;
  double sigma2;
  double alpha;
  double nu;
};

void validate(const ALParams& p);
void validate(const SNParams& p);
void validate(const AEPParams& p);
void validate(const SkewTParams& p);

// --- asymmetric Laplace ---
double al_logpdf(double v, const ALParams& p);
double al_cdf(double v, const ALParams& p);
MeanVar al_moments(const ALParams& p);
double al_sample(const ALParams& p, Rng& rng);

// --- two-piece normal ---
double sn_logpdf(double v, const SNParams& p);
double sn_cdf(double v, const SNParams& p);
MeanVar sn_moments(const SNParams& p);
double sn_sample(const SNParams& p, Rng& rng);

// --- asymmetric exponential power ---
double aep_logpdf(double v, const AEPParams& p);
double aep_cdf(double v, const AEPParams& p);
double aep_sample(const AEPParams& p, Rng& rng);

// --- generalised inverse Gaussian, index 1/2 ---
// Sampled through the inverse-Gaussian reciprocal construction; the xi = 0
// boundary degenerates to Gamma(1/2, rate chi^2/2).
double gig_sample(const GIGParams& p, Rng& rng);
double gig_half_sample(double xi, double chi, Rng& rng);

// Inverse Gaussian with the given mean and shape (helper for gig_sample,
// exposed for tests).
double inverse_gaussian_sample(double mean, double shape, Rng& rng);

// --- truncated normal on (lower, upper) ---
// lower/upper may be +-infinity. Robust far in the tails: truncation regions
// beyond 4 standard deviations use exponential-proposal rejection instead of
// the inverse CDF.
double tn_sample(double mu, double sigma2, double lower, double upper,
                 Rng& rng);

// --- skew t ---
// Skew-normal variate divided by sqrt(chisq_nu / nu), location-scale shifted.
double skewt_sample(const SkewTParams& p, Rng& rng);

// --- inverse gamma CDF ---
// Density proportional to x^{-shape-1} exp(-scale/x).
double invgamma_cdf(double x, double shape, double scale);

// Standard normal CDF and quantile (wrappers used across the samplers).
double norm_cdf(double z);
double norm_quantile(double u);

}  // namespace tqreg
