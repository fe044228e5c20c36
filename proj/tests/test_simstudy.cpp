#include "tqreg/simstudy.hpp"

#include "tqreg/distributions.hpp"
#include "support/test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace tqreg;

TEST_CASE("motivating-example generator") {
  Rng rng(307);
  std::size_t n = 20000;

  SUBCASE("rho = 0 gives uncorrelated errors") {
    GeneratedData gen = gen_motivating(0.0, n, rng);
    // recover u and v from the latent responses and the known structure
    arma::vec v = gen.data.d - 1.0 - gen.data.X.col(1) - gen.data.w;
    arma::vec u = gen.ystar - 1.0 - gen.data.X.col(1) - gen.data.d;
    double corr = arma::as_scalar(arma::cor(u, v));
    CHECK(std::abs(corr) < 3.0 / std::sqrt(static_cast<double>(n)));
    CHECK(arma::var(v) == doctest::Approx(1.0).epsilon(0.05));
    CHECK(arma::var(u) == doctest::Approx(1.0).epsilon(0.05));
  }

  SUBCASE("rho = 0.6 produces that correlation") {
    GeneratedData gen = gen_motivating(0.6, n, rng);
    CHECK(gen.truths.eta == doctest::Approx(0.6));
    arma::vec v = gen.data.d - 1.0 - gen.data.X.col(1) - gen.data.w;
    arma::vec u = gen.ystar - 1.0 - gen.data.X.col(1) - gen.data.d;
    CHECK(arma::as_scalar(arma::cor(u, v)) ==
          doctest::Approx(0.6).scale(1.0).epsilon(3.0 / (0.6 * std::sqrt(n))));
  }
}

TEST_CASE("setting generators") {
  Rng rng(311);
  std::size_t n = 100000;

  SUBCASE("setting 1 error laws") {
    GeneratedData gen = gen_setting(1, n, rng);
    arma::vec v = gen.data.d - gen.data.X.col(1) - 1.5 * gen.data.w;
    CHECK(arma::mean(v) == doctest::Approx(0.0).scale(1.0).epsilon(0.02));
    CHECK(arma::var(v) == doctest::Approx(1.0).epsilon(0.02));
    CHECK(gen.truths.gamma(2) == doctest::Approx(1.5));
    // instrument is a positive truncated normal
    CHECK(gen.data.w.min() > 0.0);
  }

  SUBCASE("setting 3 first-stage skew t has its mode quantile at 0.435") {
    GeneratedData gen = gen_setting(3, n, rng);
    arma::vec v = gen.data.d - gen.data.X.col(1) - 1.5 * gen.data.w;
    std::size_t below = 0;
    for (double vi : v) below += (vi <= 0.0);
    CHECK(static_cast<double>(below) / n ==
          doctest::Approx(0.435).scale(1.0).epsilon(0.01 / 0.435));
  }

  SUBCASE("setting 4 residual scale follows the instrument") {
    GeneratedData gen = gen_setting(4, 200000, rng);
    arma::vec v = gen.data.d - gen.data.X.col(1) - 1.5 * gen.data.w;
    std::vector<double> near2;
    for (arma::uword i = 0; i < v.n_elem; ++i) {
      if (std::abs(gen.data.w(i) - 2.0) < 0.05) near2.push_back(v(i));
    }
    REQUIRE(near2.size() > 500);
    arma::vec v2(near2);
    CHECK(arma::stddev(v2) == doctest::Approx(2.0).epsilon(0.05));
  }

  SUBCASE("heteroskedastic settings show a positive |residual|-on-w slope") {
    auto abs_resid_slope = [&](int setting) {
      Rng local(313 + setting);
      GeneratedData gen = gen_setting(setting, 50000, local);
      arma::vec v = gen.data.d - gen.data.X.col(1) - 1.5 * gen.data.w;
      arma::mat W(v.n_elem, 2);
      W.col(0).ones();
      W.col(1) = gen.data.w;
      arma::vec coef = arma::solve(W, arma::abs(v));
      return coef(1);
    };
    CHECK(abs_resid_slope(4) > 0.2);
    CHECK(abs_resid_slope(5) > 0.2);
    CHECK(std::abs(abs_resid_slope(1)) < 0.05);
    CHECK(std::abs(abs_resid_slope(2)) < 0.05);
    CHECK(std::abs(abs_resid_slope(3)) < 0.05);
  }

  SUBCASE("censoring rates sit near one quarter") {
    for (int setting = 1; setting <= 5; ++setting) {
      double total = 0.0;
      for (int rep = 0; rep < 20; ++rep) {
        Rng local(1000 * setting + rep);
        GeneratedData gen = gen_setting(setting, 300, local);
        std::size_t censored = 0;
        for (bool c : gen.data.censored) censored += c;
        total += static_cast<double>(censored) / 300.0;
      }
      double rate = total / 20.0;
      CHECK(rate > 0.15);
      CHECK(rate < 0.35);
    }
  }

  SUBCASE("generators are deterministic given the seed") {
    Rng a(999), b(999);
    GeneratedData g1 = gen_setting(2, 50, a);
    GeneratedData g2 = gen_setting(2, 50, b);
    CHECK(arma::approx_equal(g1.data.d, g2.data.d, "absdiff", 0.0));
    CHECK(arma::approx_equal(g1.data.y, g2.data.y, "absdiff", 0.0));
  }

  SUBCASE("invalid setting") {
    Rng local(1);
    CHECK_THROWS_AS(gen_setting(6, 50, local), std::invalid_argument);
  }
}

TEST_CASE("weak-instrument generator") {
  Rng rng(317);
  std::size_t n = 200000;
  GeneratedData gen = gen_weak(0.1, n, rng);
  // first-stage R^2 = gamma_w^2 / (gamma_w^2 + 1)
  arma::vec fitted = 0.1 * gen.data.w;
  arma::vec v = gen.data.d - fitted;
  double r2 = arma::var(fitted) / arma::var(gen.data.d);
  CHECK(r2 == doctest::Approx(0.01 / 1.01).epsilon(0.1));
  CHECK(arma::var(v) == doctest::Approx(1.0).epsilon(0.02));
  CHECK(gen.data.k() == 1);  // intercept only

  // e variance 1 - 0.36 = 0.64, recovered from the latent responses
  arma::vec e = gen.ystar - gen.data.d - 0.6 * v;
  CHECK(arma::var(e) == doctest::Approx(0.64).epsilon(0.02));

  GeneratedData strong = gen_weak(1.5, 1000, rng);
  CHECK(strong.truths.gamma_w == doctest::Approx(1.5));
}

TEST_CASE("true quantile coefficients") {
  auto t1 = true_quantile_coeffs(1, 0.5);
  CHECK(t1.at("beta_0") == doctest::Approx(0.0));
  CHECK(t1.at("delta") == doctest::Approx(1.0));
  CHECK(t1.at("eta") == doctest::Approx(0.6));
  CHECK(t1.at("gamma_2") == doctest::Approx(1.5));

  CHECK(true_quantile_coeffs(1, 0.1).at("beta_0") ==
        doctest::Approx(-1.0252).epsilon(1e-4));
  CHECK(true_quantile_coeffs(2, 0.1).at("beta_0") ==
        doctest::Approx(-1.4398).epsilon(1e-4));
  CHECK(true_quantile_coeffs(4, 0.1).at("beta_0") ==
        doctest::Approx(-1.0252).epsilon(1e-4));
  CHECK_THROWS_AS(true_quantile_coeffs(0, 0.5), std::invalid_argument);
}

TEST_CASE("replication harness") {
  ChainConfig cfg;
  cfg.iterations = 100;
  cfg.burn_in = 50;
  cfg.seed = 5;
  PriorConfig priors;

  SUBCASE("truth-returning stub gives zero bias and RMSE") {
    ModelFitter stub = [](const ModelSpec& spec, const CensoredDataset&,
                          const ChainConfig&) {
      FitResult res;
      auto truths = true_quantile_coeffs(1, spec.p);
      for (const auto& [name, value] : truths) {
        res.estimate[name] = value;
        res.ineff[name] = 1.0;
      }
      return res;
    };
    ReplicationReport rep = replicate(1, {Family::AL}, {0.5}, 3, cfg, priors,
                                      100, stub);
    REQUIRE(!rep.rows.empty());
    for (const ReplicationRow& row : rep.rows) {
      CHECK(row.bias == doctest::Approx(0.0));
      CHECK(row.rmse == doctest::Approx(0.0));
      CHECK(row.median_if == doctest::Approx(1.0));
    }
    CHECK(rep.mean_censoring_rate > 0.1);
    CHECK(rep.mean_censoring_rate < 0.4);
  }

  SUBCASE("RMSE dominates absolute bias") {
    Rng noise_rng(37);
    ModelFitter noisy = [&](const ModelSpec& spec, const CensoredDataset&,
                            const ChainConfig&) {
      FitResult res;
      auto truths = true_quantile_coeffs(1, spec.p);
      for (const auto& [name, value] : truths) {
        res.estimate[name] = value + noise_rng.normal(0.1, 0.5);
        res.ineff[name] = 2.0;
      }
      return res;
    };
    ReplicationReport rep = replicate(1, {Family::AL, Family::TQR}, {0.1, 0.5},
                                      5, cfg, priors, 60, noisy);
    for (const ReplicationRow& row : rep.rows) {
      CHECK(row.rmse >= std::abs(row.bias));
    }
    // TQR rows only carry the second-stage coefficients
    std::size_t tqr_rows = 0;
    for (const ReplicationRow& row : rep.rows) tqr_rows += (row.model == "tqr");
    CHECK(tqr_rows == 2 * 3);
  }

  SUBCASE("replication counts are enforced") {
    CHECK_THROWS_AS(replicate(1, {Family::AL}, {0.5}, 1, cfg, priors, 50),
                    std::invalid_argument);
  }

  SUBCASE("failures are recorded with their replication index") {
    int calls = 0;
    ModelFitter flaky = [&](const ModelSpec& spec, const CensoredDataset&,
                            const ChainConfig&) -> FitResult {
      if (++calls == 2) throw std::runtime_error("synthetic failure");
      FitResult res;
      for (const auto& [name, value] : true_quantile_coeffs(1, spec.p)) {
        res.estimate[name] = value;
        res.ineff[name] = 1.0;
      }
      return res;
    };
    // run serially (single model/p) so exactly one replication fails
    ReplicationReport rep = replicate(1, {Family::AL}, {0.5}, 3, cfg, priors,
                                      50, flaky);
    CHECK(rep.failures.size() == 1);
    CHECK(rep.failures[0].find("rep") != std::string::npos);
  }
}

TEST_CASE("AL fit on setting-1 data recovers the structural coefficient") {
  Rng rng(40917);
  GeneratedData gen = gen_setting(1, 300, rng);
  ModelSpec spec;
  spec.family = Family::AL;
  spec.p = 0.5;
  ChainConfig cfg;
  cfg.iterations = 20000;
  cfg.burn_in = 5000;
  cfg.seed = 99;
  Chain chain = run_chain(spec, gen.data, cfg);
  SummaryReport rep = summarize({chain});
  double delta_mean = 0.0, eta_mean = 0.0;
  for (const ParameterSummary& ps : rep.parameters) {
    if (ps.name == "delta") delta_mean = ps.mean;
    if (ps.name == "eta") eta_mean = ps.mean;
  }
  CHECK(std::abs(delta_mean - 1.0) < 0.05);
  CHECK(std::abs(eta_mean - 0.6) < 0.25);
}
