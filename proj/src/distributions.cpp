#include "tqreg/distributions.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace tqreg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

void require_unit_interval(double x, const char* name) {
  if (!(x > kUnitIntervalEdge && x < 1.0 - kUnitIntervalEdge)) {
    throw std::invalid_argument(std::string(name) +
                                " must lie strictly inside (0,1)");
  }
}

double check_loss(double u, double p) { return u * (p - (u < 0.0 ? 1.0 : 0.0)); }

const boost::math::normal_distribution<double>& std_normal() {
  static const boost::math::normal_distribution<double> dist(0.0, 1.0);
  return dist;
}

}  // namespace

void validate(const ALParams& p) {
  require(std::isfinite(p.sigma) && p.sigma > 0.0, "AL scale must be positive");
  require_unit_interval(p.p, "AL shape p");
}

void validate(const SNParams& p) {
  require(std::isfinite(p.phi) && p.phi > 0.0, "SN scale must be positive");
  require_unit_interval(p.alpha, "SN shape alpha");
}

void validate(const AEPParams& p) {
  require(std::isfinite(p.phi) && p.phi > 0.0, "AEP scale must be positive");
  require_unit_interval(p.alpha, "AEP skewness alpha");
  require(std::isfinite(p.zeta1) && p.zeta1 > 0.0, "AEP zeta1 must be positive");
  require(std::isfinite(p.zeta2) && p.zeta2 > 0.0, "AEP zeta2 must be positive");
}

void validate(const SkewTParams& p) {
  require(std::isfinite(p.mu), "skew-t location must be finite");
  require(std::isfinite(p.sigma2) && p.sigma2 > 0.0,
          "skew-t scale must be positive");
  require(std::isfinite(p.alpha), "skew-t skewness must be finite");
  require(std::isfinite(p.nu) && p.nu > 0.0,
          "skew-t degrees of freedom must be positive");
}

double norm_cdf(double z) { return boost::math::cdf(std_normal(), z); }

double norm_quantile(double u) { return boost::math::quantile(std_normal(), u); }

// --- asymmetric Laplace ---

double al_logpdf(double v, const ALParams& p) {
  validate(p);
  require(std::isfinite(v), "al_logpdf: argument must be finite");
  return std::log(p.p * (1.0 - p.p) / p.sigma) - check_loss(v, p.p) / p.sigma;
}

double al_cdf(double v, const ALParams& p) {
  validate(p);
  if (v <= 0.0) return p.p * std::exp((1.0 - p.p) * v / p.sigma);
  return 1.0 - (1.0 - p.p) * std::exp(-p.p * v / p.sigma);
}

MeanVar al_moments(const ALParams& p) {
  validate(p);
  double q = p.p * (1.0 - p.p);
  return {p.sigma * (1.0 - 2.0 * p.p) / q,
          p.sigma * p.sigma * (1.0 - 2.0 * p.p + 2.0 * p.p * p.p) / (q * q)};
}

double al_sample(const ALParams& p, Rng& rng) {
  validate(p);
  // difference of two exponentials with rates p/sigma and (1-p)/sigma
  return rng.exponential(p.sigma / p.p) - rng.exponential(p.sigma / (1.0 - p.p));
}

// --- two-piece normal ---

double sn_logpdf(double v, const SNParams& p) {
  validate(p);
  require(std::isfinite(v), "sn_logpdf: argument must be finite");
  double a = p.alpha - (v <= 0.0 ? 1.0 : 0.0);
  return std::log(4.0 * p.alpha * (1.0 - p.alpha)) -
         0.5 * std::log(2.0 * M_PI * p.phi) -
         (v * v / (2.0 * p.phi)) * 4.0 * a * a;
}

double sn_cdf(double v, const SNParams& p) {
  validate(p);
  double s = std::sqrt(p.phi);
  if (v <= 0.0) return 2.0 * p.alpha * norm_cdf(2.0 * (1.0 - p.alpha) * v / s);
  return p.alpha +
         (1.0 - p.alpha) * (2.0 * norm_cdf(2.0 * p.alpha * v / s) - 1.0);
}

MeanVar sn_moments(const SNParams& p) {
  validate(p);
  double a = p.alpha, q = a * (1.0 - a);
  double mean = std::sqrt(p.phi / (2.0 * M_PI)) * (1.0 - 2.0 * a) / q;
  double num = M_PI * (1.0 - 3.0 * a + 3.0 * a * a) -
               2.0 * (1.0 - 2.0 * a) * (1.0 - 2.0 * a);
  return {mean, p.phi * num / (4.0 * M_PI * q * q)};
}

double sn_sample(const SNParams& p, Rng& rng) {
  validate(p);
  double s = std::sqrt(p.phi);
  // two half normals, left mass alpha
  if (rng.uniform() < p.alpha) {
    return -std::abs(rng.normal()) * s / (2.0 * (1.0 - p.alpha));
  }
  return std::abs(rng.normal()) * s / (2.0 * p.alpha);
}

// --- asymmetric exponential power ---

namespace {

// Half-line e-scales: left alpha*phi/Gamma(1+1/zeta1), right
// (1-alpha)*phi/Gamma(1+1/zeta2); each branch integrates to alpha and
// 1-alpha respectively.
double aep_left_scale(const AEPParams& p) {
  return p.alpha * p.phi / std::tgamma(1.0 + 1.0 / p.zeta1);
}

double aep_right_scale(const AEPParams& p) {
  return (1.0 - p.alpha) * p.phi / std::tgamma(1.0 + 1.0 / p.zeta2);
}

}  // namespace

double aep_logpdf(double v, const AEPParams& p) {
  validate(p);
  require(std::isfinite(v), "aep_logpdf: argument must be finite");
  if (v <= 0.0) return -std::log(p.phi) - std::pow(-v / aep_left_scale(p), p.zeta1);
  return -std::log(p.phi) - std::pow(v / aep_right_scale(p), p.zeta2);
}

double aep_cdf(double v, const AEPParams& p) {
  validate(p);
  if (v <= 0.0) {
    double t = std::pow(-v / aep_left_scale(p), p.zeta1);
    return p.alpha * boost::math::gamma_q(1.0 / p.zeta1, t);
  }
  double t = std::pow(v / aep_right_scale(p), p.zeta2);
  return p.alpha + (1.0 - p.alpha) * boost::math::gamma_p(1.0 / p.zeta2, t);
}

double aep_sample(const AEPParams& p, Rng& rng) {
  validate(p);
  // |v| = scale * G^{1/zeta} with G ~ Gamma(1/zeta, 1) on each half line
  if (rng.uniform() < p.alpha) {
    double g = rng.gamma(1.0 / p.zeta1, 1.0);
    return -aep_left_scale(p) * std::pow(g, 1.0 / p.zeta1);
  }
  double g = rng.gamma(1.0 / p.zeta2, 1.0);
  return aep_right_scale(p) * std::pow(g, 1.0 / p.zeta2);
}

// --- generalised inverse Gaussian ---

double inverse_gaussian_sample(double mean, double shape, Rng& rng) {
  require(mean > 0.0 && shape > 0.0, "inverse Gaussian parameters must be positive");
  double v = rng.normal();
  double y = v * v;
  double x = mean + mean * mean * y / (2.0 * shape) -
             mean / (2.0 * shape) *
                 std::sqrt(4.0 * mean * shape * y + mean * mean * y * y);
  if (x <= 0.0) x = std::numeric_limits<double>::min();  // roundoff guard
  if (rng.uniform() <= mean / (mean + x)) return x;
  return mean * mean / x;
}

double gig_half_sample(double xi, double chi, Rng& rng) {
  require(std::isfinite(xi) && xi >= 0.0, "GIG xi must be nonnegative");
  require(std::isfinite(chi) && chi > 0.0, "GIG chi must be positive");
  if (xi == 0.0) return rng.gamma_rate(0.5, 0.5 * chi * chi);
  // X ~ GIG(1/2, xi, chi)  <=>  1/X ~ IG(mean chi/xi, shape chi^2)
  double w = inverse_gaussian_sample(chi / xi, chi * chi, rng);
  return 1.0 / w;
}

double gig_sample(const GIGParams& p, Rng& rng) {
  if (p.nu != 0.5) {
    throw std::invalid_argument("gig_sample: only index nu = 1/2 is supported");
  }
  return gig_half_sample(p.xi, p.chi, rng);
}

// --- truncated normal ---

namespace {

// Rejection sampler for the standard normal restricted to [a, b), a >= 0 and
// far in the upper tail. Exponential proposal tilted at the optimal rate
// (Robert, 1995); b may be infinite.
double tn_tail_std(double a, double b, Rng& rng) {
  double lambda = 0.5 * (a + std::sqrt(a * a + 4.0));
  for (;;) {
    double z = a + rng.exponential(1.0 / lambda);
    if (z >= b) continue;
    double d = z - lambda;
    if (rng.uniform() <= std::exp(-0.5 * d * d)) return z;
  }
}

// Uniform-proposal rejection for narrow intervals where the exponential
// proposal rarely lands inside [a, b].
double tn_narrow_std(double a, double b, Rng& rng) {
  double m = (a > 0.0) ? a : ((b < 0.0) ? b : 0.0);  // density mode on [a,b]
  for (;;) {
    double z = rng.uniform(a, b);
    if (rng.uniform() <= std::exp(0.5 * (m * m - z * z))) return z;
  }
}

double tn_std(double a, double b, Rng& rng) {
  if (a == -kInf && b == kInf) return rng.normal();
  if (a == -kInf) return -tn_std(-b, kInf, rng);
  // now a is finite
  if (a >= 4.0) {
    if (b < a + 0.05) return tn_narrow_std(a, b, rng);
    return tn_tail_std(a, b, rng);
  }
  // region overlaps the bulk: inverse CDF is accurate here
  double pa = norm_cdf(a);
  double pb = (b == kInf) ? 1.0 : norm_cdf(b);
  double u = rng.uniform(pa, pb);
  return norm_quantile(u);
}

}  // namespace

double tn_sample(double mu, double sigma2, double lower, double upper,
                 Rng& rng) {
  require(sigma2 > 0.0, "tn_sample: variance must be positive");
  require(lower < upper, "tn_sample: empty truncation interval");
  double s = std::sqrt(sigma2);
  double a = (lower == -kInf) ? -kInf : (lower - mu) / s;
  double b = (upper == kInf) ? kInf : (upper - mu) / s;
  return mu + s * tn_std(a, b, rng);
}

// --- skew t ---

double skewt_sample(const SkewTParams& p, Rng& rng) {
  validate(p);
  double delta = p.alpha / std::sqrt(1.0 + p.alpha * p.alpha);
  double z = delta * std::abs(rng.normal()) +
             std::sqrt(1.0 - delta * delta) * rng.normal();
  double w = rng.chisq(p.nu) / p.nu;
  return p.mu + std::sqrt(p.sigma2) * z / std::sqrt(w);
}

// --- inverse gamma ---

double invgamma_cdf(double x, double shape, double scale) {
  require(shape > 0.0 && scale > 0.0, "invgamma_cdf: parameters must be positive");
  require(x > 0.0, "invgamma_cdf: argument must be positive");
  if (x == kInf) return 1.0;
  return boost::math::gamma_q(shape, scale / x);
}

}  // namespace tqreg
