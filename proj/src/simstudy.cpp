#include "tqreg/simstudy.hpp"

#include "tqreg/distributions.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>
#include <thread>

namespace tqreg {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

CensoredDataset make_dataset(const arma::vec& ystar, const arma::mat& X,
                             const arma::vec& d, const arma::vec& w,
                             std::vector<std::string> x_names) {
  CensoredDataset ds;
  ds.y = arma::max(ystar, arma::zeros(ystar.n_elem));
  ds.censored.resize(ystar.n_elem);
  for (arma::uword i = 0; i < ystar.n_elem; ++i) ds.censored[i] = ds.y(i) == 0.0;
  ds.X = X;
  ds.d = d;
  ds.w = w;
  ds.x_names = std::move(x_names);
  return ds;
}

}  // namespace

double student_t_sample(double df, Rng& rng) {
  return rng.normal() / std::sqrt(rng.chisq(df) / df);
}

GeneratedData gen_motivating(double rho, std::size_t n, Rng& rng) {
  if (!(rho > -1.0 && rho < 1.0)) {
    throw std::invalid_argument("gen_motivating: rho must lie in (-1,1)");
  }
  arma::mat X(n, 2);
  arma::vec d(n), w(n), ystar(n);
  double resid_sd = std::sqrt(1.0 - rho * rho);
  for (std::size_t i = 0; i < n; ++i) {
    double x = rng.normal();
    double wi = rng.normal();
    double v = rng.normal();
    double u = rho * v + resid_sd * rng.normal();
    X(i, 0) = 1.0;
    X(i, 1) = x;
    w(i) = wi;
    d(i) = 1.0 + x + wi + v;
    ystar(i) = 1.0 + x + d(i) + u;
  }
  GeneratedData out{make_dataset(ystar, X, d, w, {"x1"}), {}, ystar};
  out.truths.setting = 0;
  out.truths.beta0 = 1.0;
  out.truths.beta1 = 1.0;
  out.truths.delta = 1.0;
  out.truths.eta = rho;
  out.truths.gamma = {1.0, 1.0, 1.0};
  out.truths.rho = rho;
  return out;
}

GeneratedData gen_setting(int setting, std::size_t n, Rng& rng) {
  if (setting < 1 || setting > 5) {
    throw std::invalid_argument("gen_setting: setting must be 1..5");
  }
  const double eta = 0.6;
  arma::mat X(n, 2);
  arma::vec d(n), w(n), ystar(n);
  for (std::size_t i = 0; i < n; ++i) {
    double x = rng.normal();
    double wi = tn_sample(1.0, 1.0, 0.0, kInf, rng);
    double scale = 1.0 + 0.5 * wi;  // heteroskedastic settings only
    double v = 0.0, e = 0.0;
    switch (setting) {
      case 1:
        v = rng.normal();
        e = rng.normal(0.0, std::sqrt(1.0 - eta * eta));
        break;
      case 2:
        v = student_t_sample(4.0, rng);
        e = student_t_sample(6.0, rng);
        break;
      case 3:
        v = skewt_sample({-0.430, 1.0, 0.980, 4.0}, rng);
        e = student_t_sample(6.0, rng);
        break;
      case 4:
        v = rng.normal(0.0, scale);
        e = rng.normal(0.0, std::sqrt(1.0 - eta * eta));
        break;
      case 5:
        v = skewt_sample({-0.430, scale * scale, 0.980, 4.0}, rng);
        e = student_t_sample(6.0, rng);
        break;
    }
    X(i, 0) = 1.0;
    X(i, 1) = x;
    w(i) = wi;
    d(i) = x + 1.5 * wi + v;
    ystar(i) = x + d(i) + eta * v + e;
  }
  GeneratedData out{make_dataset(ystar, X, d, w, {"x1"}), {}, ystar};
  out.truths.setting = setting;
  out.truths.beta0 = 0.0;
  out.truths.beta1 = 1.0;
  out.truths.delta = 1.0;
  out.truths.eta = eta;
  out.truths.gamma = {0.0, 1.0, 1.5};
  return out;
}

GeneratedData gen_weak(double gamma_w, std::size_t n, Rng& rng) {
  arma::mat X(n, 1, arma::fill::ones);
  arma::vec d(n), w(n), ystar(n);
  const double eta = 0.6;
  for (std::size_t i = 0; i < n; ++i) {
    double wi = rng.normal();
    double v = rng.normal();
    double e = rng.normal(0.0, std::sqrt(1.0 - eta * eta));
    w(i) = wi;
    d(i) = gamma_w * wi + v;
    ystar(i) = d(i) + eta * v + e;
  }
  GeneratedData out{make_dataset(ystar, X, d, w, {}), {}, ystar};
  out.truths.setting = 6;
  out.truths.beta0 = 0.0;
  out.truths.beta1 = 0.0;
  out.truths.delta = 1.0;
  out.truths.eta = eta;
  out.truths.gamma = {0.0, gamma_w};
  out.truths.gamma_w = gamma_w;
  return out;
}

std::map<std::string, double> true_quantile_coeffs(int setting, double p) {
  if (setting < 1 || setting > 5) {
    throw std::invalid_argument("true_quantile_coeffs: setting must be 1..5");
  }
  double beta_p0;
  if (setting == 1 || setting == 4) {
    beta_p0 = std::sqrt(0.64) * norm_quantile(p);
  } else {
    boost::math::students_t_distribution<double> t6(6.0);
    beta_p0 = boost::math::quantile(t6, p);
  }
  return {{"beta_0", beta_p0}, {"beta_1", 1.0}, {"delta", 1.0}, {"eta", 0.6},
          {"gamma_0", 0.0},    {"gamma_1", 1.0}, {"gamma_2", 1.5}};
}

ModelFitter default_fitter() {
  return [](const ModelSpec& spec, const CensoredDataset& ds,
            const ChainConfig& cfg) {
    Chain chain = run_chain(spec, ds, cfg, 0);
    SummaryReport report = summarize({chain});
    FitResult res;
    for (const ParameterSummary& ps : report.parameters) {
      res.estimate[ps.name] = ps.mean;
      res.ineff[ps.name] = ps.inefficiency;
    }
    return res;
  };
}

ReplicationReport replicate(int setting, const std::vector<Family>& models,
                            const std::vector<double>& ps, std::size_t R,
                            const ChainConfig& cfg, const PriorConfig& priors,
                            std::size_t n, ModelFitter fitter) {
  if (R < 2) throw std::invalid_argument("replicate: need at least 2 replications");
  if (models.empty() || ps.empty()) {
    throw std::invalid_argument("replicate: need at least one model and quantile");
  }

  struct RepOutcome {
    double censoring = 0.0;
    // estimates[model][p][param], ineffs likewise
    std::map<std::string, std::map<double, FitResult>> fits;
    std::string failure;
  };

  auto run_rep = [&](std::size_t rep) {
    RepOutcome out;
    Rng data_rng(cfg.seed, 1000000 + rep);
    GeneratedData gen = gen_setting(setting, n, data_rng);
    std::size_t censored = 0;
    for (bool c : gen.data.censored) censored += c;
    out.censoring = static_cast<double>(censored) / gen.data.n();
    for (Family fam : models) {
      ModelSpec spec;
      spec.family = fam;
      spec.priors = priors;
      for (double p : ps) {
        spec.p = p;
        ChainConfig rep_cfg = cfg;
        rep_cfg.seed = cfg.seed ^ (0x9e3779b97f4a7c15ULL * (rep + 1));
        try {
          out.fits[family_name(fam)][p] = fitter(spec, gen.data, rep_cfg);
        } catch (const std::exception& e) {
          out.failure = "rep " + std::to_string(rep) + ": " +
                        family_name(fam) + " p=" + std::to_string(p) + ": " +
                        e.what();
          return out;
        }
      }
    }
    return out;
  };

  std::vector<RepOutcome> outcomes(R);
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  for (std::size_t start = 0; start < R; start += workers) {
    std::size_t stop = std::min(R, start + workers);
    std::vector<std::future<RepOutcome>> batch;
    for (std::size_t rep = start; rep < stop; ++rep) {
      batch.push_back(std::async(std::launch::async, run_rep, rep));
    }
    for (std::size_t rep = start; rep < stop; ++rep) {
      outcomes[rep] = batch[rep - start].get();
    }
  }

  ReplicationReport report;
  report.setting = setting;
  report.reps = R;
  report.n = n;
  double cens_sum = 0.0;
  std::size_t ok_count = 0;
  for (const RepOutcome& o : outcomes) {
    if (!o.failure.empty()) {
      report.failures.push_back(o.failure);
      continue;
    }
    cens_sum += o.censoring;
    ++ok_count;
  }
  if (ok_count == 0) {
    throw std::runtime_error("replicate: every replication failed");
  }
  report.mean_censoring_rate = cens_sum / ok_count;

  std::vector<std::string> scored = {"beta_0", "beta_1", "delta", "eta",
                                     "gamma_0", "gamma_1", "gamma_2"};
  for (Family fam : models) {
    std::string model = family_name(fam);
    for (double p : ps) {
      std::map<std::string, double> truth = true_quantile_coeffs(setting, p);
      for (const std::string& param : scored) {
        if (fam == Family::TQR && param != "beta_0" && param != "beta_1" &&
            param != "delta") {
          continue;
        }
        std::vector<double> errs, ifs;
        for (const RepOutcome& o : outcomes) {
          if (!o.failure.empty()) continue;
          const FitResult& fit = o.fits.at(model).at(p);
          auto it = fit.estimate.find(param);
          if (it == fit.estimate.end()) continue;
          errs.push_back(it->second - truth.at(param));
          auto fi = fit.ineff.find(param);
          if (fi != fit.ineff.end() && std::isfinite(fi->second)) {
            ifs.push_back(fi->second);
          }
        }
        if (errs.empty()) continue;
        ReplicationRow row;
        row.model = model;
        row.p = p;
        row.parameter = param;
        double bias = 0.0, mse = 0.0;
        for (double e : errs) {
          bias += e;
          mse += e * e;
        }
        row.bias = bias / errs.size();
        row.rmse = std::sqrt(mse / errs.size());
        if (!ifs.empty()) {
          std::nth_element(ifs.begin(), ifs.begin() + ifs.size() / 2, ifs.end());
          row.median_if = ifs[ifs.size() / 2];
        }
        report.rows.push_back(std::move(row));
      }
    }
  }
  return report;
}

}  // namespace tqreg
