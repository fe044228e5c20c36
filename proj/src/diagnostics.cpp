#include "tqreg/diagnostics.hpp"

#include <boost/math/distributions/fisher_f.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tqreg {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

double inefficiency_factor(const arma::vec& series) {
  arma::uword n = series.n_elem;
  if (n < 50) {
    throw std::invalid_argument("inefficiency_factor: need at least 50 draws");
  }
  double mean = arma::mean(series);
  arma::vec centered = series - mean;
  double c0 = arma::dot(centered, centered) / n;
  // constant up to roundoff: sd below ~1e-12 of the magnitude
  double floor = std::abs(mean) * 1e-12;
  if (!(c0 > floor * floor)) {
    throw std::invalid_argument("inefficiency_factor: constant series");
  }
  auto rho = [&](arma::uword t) {
    double acc = 0.0;
    for (arma::uword i = 0; i + t < n; ++i) acc += centered(i) * centered(i + t);
    return acc / n / c0;
  };
  // sum paired autocorrelations while the pairs stay positive
  double s = 0.0;
  for (arma::uword m = 0;; ++m) {
    arma::uword t1 = 2 * m, t2 = 2 * m + 1;
    if (t2 >= n) break;
    double pair = rho(t1) + rho(t2);
    if (pair <= 0.0) break;
    s += pair;
  }
  return std::max(-1.0 + 2.0 * s, 0.0);
}

GelmanRubinResult gelman_rubin(const std::vector<arma::vec>& chains) {
  std::size_t m = chains.size();
  if (m < 2) throw std::invalid_argument("gelman_rubin: need at least 2 chains");
  arma::uword n = chains[0].n_elem;
  for (const arma::vec& c : chains) {
    if (c.n_elem != n) {
      throw std::invalid_argument("gelman_rubin: chains must have equal length");
    }
  }
  if (n < 100) throw std::invalid_argument("gelman_rubin: need at least 100 draws");

  arma::vec xbar(m), s2(m);
  for (std::size_t j = 0; j < m; ++j) {
    xbar(j) = arma::mean(chains[j]);
    s2(j) = arma::var(chains[j]);  // divisor n-1
  }
  double W = arma::mean(s2);
  double B = static_cast<double>(n) * arma::var(xbar);
  if (!(W > 0.0)) throw std::invalid_argument("gelman_rubin: degenerate chains");

  double muhat = arma::mean(xbar);
  double dn = static_cast<double>(n), dm = static_cast<double>(m);
  double var_w = arma::var(s2) / dm;
  double var_b = 2.0 * B * B / (dm - 1.0);
  auto cov = [&](const arma::vec& a, const arma::vec& b) {
    return arma::as_scalar(arma::cov(a, b));
  };
  double cov_wb = (dn / dm) * (cov(s2, arma::square(xbar)) -
                               2.0 * muhat * cov(s2, xbar));

  double V = (dn - 1.0) * W / dn + (1.0 + 1.0 / dm) * B / dn;
  double var_V = ((dn - 1.0) * (dn - 1.0) * var_w +
                  std::pow(1.0 + 1.0 / dm, 2) * var_b +
                  2.0 * (dn - 1.0) * (1.0 + 1.0 / dm) * cov_wb) /
                 (dn * dn);
  double df_V = (var_V > 0.0) ? 2.0 * V * V / var_V : 1e9;
  double df_adj = (df_V + 3.0) / (df_V + 1.0);

  double r2_fixed = (dn - 1.0) / dn;
  double r2_random = (1.0 + 1.0 / dm) * (1.0 / dn) * (B / W);
  double psrf = std::sqrt(df_adj * (r2_fixed + r2_random));

  double upper = psrf;
  double w_df = (var_w > 0.0) ? 2.0 * W * W / (dm * var_w) : 1e9;
  if (r2_random > 0.0 && w_df > 2.0) {
    boost::math::fisher_f_distribution<double> f(dm - 1.0, w_df);
    double fq = boost::math::quantile(f, 0.975);
    upper = std::sqrt(df_adj * (r2_fixed + fq * r2_random));
  }
  return {psrf, upper};
}

double quantile_type7(const arma::vec& x, double q) {
  if (x.n_elem == 0) throw std::invalid_argument("quantile of empty vector");
  if (q <= 0.0) return x.min();
  if (q >= 1.0) return x.max();
  arma::vec sorted = arma::sort(x);
  double h = (static_cast<double>(sorted.n_elem) - 1.0) * q;
  arma::uword lo = static_cast<arma::uword>(std::floor(h));
  double frac = h - static_cast<double>(lo);
  if (lo + 1 >= sorted.n_elem) return sorted(sorted.n_elem - 1);
  return sorted(lo) + frac * (sorted(lo + 1) - sorted(lo));
}

SummaryReport summarize(const std::vector<Chain>& chains, double level) {
  if (chains.empty() || chains[0].draws.n_rows == 0) {
    throw std::invalid_argument("summarize: empty retained sample");
  }
  const std::vector<std::string>& names = chains[0].names;
  for (const Chain& c : chains) {
    if (c.names != names) {
      throw std::invalid_argument("summarize: chains disagree on parameters");
    }
  }
  double tail = 0.5 * (1.0 - level);

  SummaryReport report;
  report.level = level;
  for (std::size_t j = 0; j < names.size(); ++j) {
    arma::vec pooled;
    for (const Chain& c : chains) {
      pooled = arma::join_cols(pooled, arma::vec(c.draws.col(j)));
    }
    ParameterSummary ps;
    ps.name = names[j];
    ps.mean = arma::mean(pooled);
    ps.lower = quantile_type7(pooled, tail);
    ps.upper = quantile_type7(pooled, 1.0 - tail);

    double if_sum = 0.0;
    std::size_t if_count = 0;
    for (const Chain& c : chains) {
      try {
        if_sum += inefficiency_factor(c.draws.col(j));
        ++if_count;
      } catch (const std::invalid_argument&) {
      }
    }
    ps.inefficiency = if_count ? if_sum / if_count : kNaN;

    ps.psrf = ps.psrf_upper = kNaN;
    if (chains.size() >= 2) {
      std::vector<arma::vec> cols;
      for (const Chain& c : chains) cols.emplace_back(c.draws.col(j));
      try {
        GelmanRubinResult gr = gelman_rubin(cols);
        ps.psrf = gr.psrf;
        ps.psrf_upper = gr.upper;
      } catch (const std::invalid_argument&) {
      }
    }
    report.parameters.push_back(std::move(ps));
  }
  return report;
}

}  // namespace tqreg
