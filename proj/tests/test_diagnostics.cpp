#include "tqreg/diagnostics.hpp"

#include "support/test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace tqreg;

TEST_CASE("inefficiency factor") {
  Rng rng(211);

  SUBCASE("iid draws have unit inefficiency") {
    arma::vec x(100000);
    for (auto& v : x) v = rng.normal();
    CHECK(inefficiency_factor(x) == doctest::Approx(1.0).scale(1.0).epsilon(0.1));
  }

  SUBCASE("AR(1) with coefficient 0.9 integrates to 19") {
    arma::vec x(100000);
    double cur = 0.0;
    double innov = std::sqrt(1.0 - 0.81);
    for (auto& v : x) {
      cur = 0.9 * cur + innov * rng.normal();
      v = cur;
    }
    CHECK(inefficiency_factor(x) == doctest::Approx(19.0).scale(1.0).epsilon(2.0 / 19.0));
  }

  SUBCASE("negative autocorrelation gives IF below one") {
    arma::vec x(100000);
    double sign = 1.0;
    for (auto& v : x) {
      v = sign * 2.0 + rng.normal();
      sign = -sign;
    }
    double f = inefficiency_factor(x);
    CHECK(f < 1.0);
    CHECK(f >= 0.0);
  }

  SUBCASE("affine invariance") {
    arma::vec x(5000);
    double cur = 0.0;
    for (auto& v : x) {
      cur = 0.5 * cur + rng.normal();
      v = cur;
    }
    double f1 = inefficiency_factor(x);
    double f2 = inefficiency_factor(3.7 * x + 11.0);
    CHECK(f1 == doctest::Approx(f2).epsilon(1e-10));
  }

  SUBCASE("errors") {
    arma::vec tiny(10, arma::fill::randn);
    CHECK_THROWS_AS(inefficiency_factor(tiny), std::invalid_argument);
    arma::vec flat(100, arma::fill::value(3.0));
    CHECK_THROWS_AS(inefficiency_factor(flat), std::invalid_argument);
  }
}

TEST_CASE("Gelman-Rubin statistic") {
  Rng rng(223);

  SUBCASE("same-target chains converge to PSRF below 1.01") {
    std::vector<arma::vec> chains;
    for (int c = 0; c < 2; ++c) {
      arma::vec x(10000);
      for (auto& v : x) v = rng.normal();
      chains.push_back(std::move(x));
    }
    GelmanRubinResult gr = gelman_rubin(chains);
    CHECK(gr.psrf < 1.01);
    CHECK(gr.upper >= gr.psrf);
  }

  SUBCASE("separated chains are flagged") {
    std::vector<arma::vec> chains;
    for (int c = 0; c < 2; ++c) {
      arma::vec x(10000);
      for (auto& v : x) v = rng.normal(c == 0 ? 0.0 : 5.0, 1.0);
      chains.push_back(std::move(x));
    }
    CHECK(gelman_rubin(chains).psrf > 1.1);
  }

  SUBCASE("common affine transformation leaves PSRF unchanged") {
    std::vector<arma::vec> chains;
    for (int c = 0; c < 3; ++c) {
      arma::vec x(2000);
      for (auto& v : x) v = rng.normal(0.1 * c, 1.0);
      chains.push_back(std::move(x));
    }
    double p1 = gelman_rubin(chains).psrf;
    for (auto& x : chains) x = -2.0 * x + 7.0;
    double p2 = gelman_rubin(chains).psrf;
    CHECK(p1 == doctest::Approx(p2).epsilon(1e-10));
  }

  SUBCASE("errors") {
    std::vector<arma::vec> one = {arma::vec(200, arma::fill::randn)};
    CHECK_THROWS_AS(gelman_rubin(one), std::invalid_argument);
    std::vector<arma::vec> degenerate = {arma::vec(200, arma::fill::ones),
                                         arma::vec(200, arma::fill::ones)};
    CHECK_THROWS_AS(gelman_rubin(degenerate), std::invalid_argument);
    std::vector<arma::vec> uneven = {arma::vec(200, arma::fill::randn),
                                     arma::vec(150, arma::fill::randn)};
    CHECK_THROWS_AS(gelman_rubin(uneven), std::invalid_argument);
  }
}

TEST_CASE("summaries") {
  Rng rng(227);

  SUBCASE("constant column") {
    Chain chain;
    chain.names = {"c"};
    chain.draws = arma::mat(200, 1, arma::fill::value(4.2));
    SummaryReport rep = summarize({chain});
    CHECK(rep.parameters[0].mean == doctest::Approx(4.2));
    CHECK(rep.parameters[0].lower == doctest::Approx(4.2));
    CHECK(rep.parameters[0].upper == doctest::Approx(4.2));
    CHECK(std::isnan(rep.parameters[0].inefficiency));
  }

  SUBCASE("normal quantiles") {
    Chain chain;
    chain.names = {"z"};
    chain.draws.set_size(100000, 1);
    for (arma::uword i = 0; i < chain.draws.n_rows; ++i) {
      chain.draws(i, 0) = rng.normal();
    }
    SummaryReport rep = summarize({chain});
    CHECK(rep.parameters[0].lower ==
          doctest::Approx(-1.96).scale(1.0).epsilon(0.02 / 1.96));
    CHECK(rep.parameters[0].upper ==
          doctest::Approx(1.96).scale(1.0).epsilon(0.02 / 1.96));
    CHECK(rep.parameters[0].lower <= rep.parameters[0].upper);
    // widening the level widens the interval
    SummaryReport wide = summarize({chain}, 0.99);
    CHECK(wide.parameters[0].lower < rep.parameters[0].lower);
    CHECK(wide.parameters[0].upper > rep.parameters[0].upper);
  }

  SUBCASE("two chains produce a PSRF column") {
    Chain a, b;
    a.names = b.names = {"x"};
    a.draws.set_size(2000, 1);
    b.draws.set_size(2000, 1);
    for (arma::uword i = 0; i < 2000; ++i) {
      a.draws(i, 0) = rng.normal();
      b.draws(i, 0) = rng.normal();
    }
    SummaryReport rep = summarize({a, b});
    CHECK(rep.parameters[0].psrf == doctest::Approx(1.0).epsilon(0.02));
    CHECK(rep.parameters[0].psrf_upper >= rep.parameters[0].psrf);
    SummaryReport single = summarize({a});
    CHECK(std::isnan(single.parameters[0].psrf));
  }

  SUBCASE("empty chain is an error") {
    Chain chain;
    chain.names = {"x"};
    chain.draws.set_size(0, 1);
    CHECK_THROWS_AS(summarize({chain}), std::invalid_argument);
  }
}

TEST_CASE("type-7 quantiles interpolate order statistics") {
  arma::vec x = {4.0, 1.0, 3.0, 2.0};
  CHECK(quantile_type7(x, 0.0) == doctest::Approx(1.0));
  CHECK(quantile_type7(x, 1.0) == doctest::Approx(4.0));
  CHECK(quantile_type7(x, 0.5) == doctest::Approx(2.5));
  CHECK(quantile_type7(x, 1.0 / 3.0) == doctest::Approx(2.0));
  CHECK(quantile_type7(x, 0.25) == doctest::Approx(1.75));
}
