#pragma once

#include "tqreg/rng.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace test_util {

// Kolmogorov-Smirnov distance between a sample and an analytic CDF.
inline double ks_distance(std::vector<double> draws,
                          const std::function<double(double)>& cdf) {
  std::sort(draws.begin(), draws.end());
  double n = static_cast<double>(draws.size());
  double d = 0.0;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    double f = cdf(draws[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(f - static_cast<double>(i + 1) / n));
  }
  return d;
}

// Adaptive quadrature of a density over the whole real line.
inline double integrate_real_line(const std::function<double(double)>& f) {
  using boost::math::quadrature::gauss_kronrod;
  double lower = gauss_kronrod<double, 61>::integrate(
      f, -std::numeric_limits<double>::infinity(), 0.0, 12, 1e-10);
  double upper = gauss_kronrod<double, 61>::integrate(
      f, 0.0, std::numeric_limits<double>::infinity(), 12, 1e-10);
  return lower + upper;
}

// Quadrature of a density from -inf up to v.
inline double integrate_lower_tail(const std::function<double(double)>& f,
                                   double v) {
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 61>::integrate(
      f, -std::numeric_limits<double>::infinity(), v, 12, 1e-10);
}

// The normal-exponential scale mixture evaluated by quadrature over the
// latent scale: integral over h of N(v; theta h, tau2 phi h) Exp(h; phi) dh.
// Substituting h = t^2 cancels the 1/sqrt(h) factor analytically, so the
// integrand stays finite at the origin.
inline double al_mixture_quadrature(double v, double phi, double theta,
                                    double tau2) {
  boost::math::quadrature::exp_sinh<double> integrator;
  double front = 2.0 / (std::sqrt(2.0 * M_PI * tau2 * phi) * phi);
  auto g = [&](double t) {
    double h = t * t;
    if (h <= 0.0) return (v == 0.0) ? front : 0.0;
    double diff = v - theta * h;
    double expo = -0.5 * diff * diff / (tau2 * phi * h) - h / phi;
    return front * std::exp(expo);
  };
  return integrator.integrate(g, 1e-12);
}

struct MomentStats {
  double mean;
  double variance;
};

inline MomentStats sample_moments(const std::vector<double>& x) {
  double m = 0.0;
  for (double v : x) m += v;
  m /= x.size();
  double s2 = 0.0;
  for (double v : x) s2 += (v - m) * (v - m);
  s2 /= (x.size() - 1);
  return {m, s2};
}

template <typename Sampler>
std::vector<double> draw_many(std::size_t n, Sampler&& sampler) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = sampler();
  return out;
}

}  // namespace test_util
