#pragma once

#include "tqreg/samplers.hpp"

#include <string>
#include <vector>

namespace tqreg {

// Integrated-autocorrelation ratio: how many correlated draws are worth one
// independent draw. Truncation by Geyer's initial-positive-sequence rule on
// paired autocorrelations. Throws for series shorter than 50 or constant.
double inefficiency_factor(const arma::vec& series);

struct GelmanRubinResult {
  double psrf;
  double upper;  // 97.5% confidence bound
};

// Classic potential-scale-reduction factor from between/within variances of
// two or more equal-length chains, with the F-quantile upper confidence
// bound. Throws on degenerate chains.
GelmanRubinResult gelman_rubin(const std::vector<arma::vec>& chains);

// Type-7 interpolated order-statistic quantile.
double quantile_type7(const arma::vec& x, double q);

struct ParameterSummary {
  std::string name;
  double mean = 0.0;
  double lower = 0.0;  // equal-tailed credible bounds
  double upper = 0.0;
  double inefficiency = 0.0;  // NaN when undefined (constant or short series)
  double psrf = 0.0;          // NaN unless >= 2 chains supplied
  double psrf_upper = 0.0;
};

struct SummaryReport {
  std::vector<ParameterSummary> parameters;
  double level = 0.95;
};

// Per-parameter posterior mean, equal-tailed interval, inefficiency factor
// (averaged over chains), and the Gelman-Rubin statistic when two or more
// chains are supplied. Draws are pooled across chains for the mean and
// interval.
SummaryReport summarize(const std::vector<Chain>& chains, double level = 0.95);

}  // namespace tqreg
