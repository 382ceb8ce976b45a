#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "kinex/acceptance.hpp"

using namespace kinex;

TEST_CASE("linear acceptance examples") {
  for (double eta : {0.1, 0.5, 1.0, 5.0}) {
    CHECK(accept_prob_linear(0.5, eta, 1.0) == 1.0);
    CHECK(accept_prob_linear(0.0, eta, 1.0) == 1.0);
    CHECK(accept_prob_linear(-eta / 2, eta, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(accept_prob_linear(-2 * eta, eta, 1.0) == 0.0);
    CHECK(accept_prob_linear(-eta, eta, 1.0) == 0.0);
  }
  // The scale is eta times the mean wealth.
  CHECK(accept_prob_linear(-0.5, 0.5, 2.0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("exponential acceptance examples") {
  CHECK(accept_prob_exp(0.3, 0.5, 0.3, 1.0) == 1.0);
  CHECK(accept_prob_exp(0.3 - 0.5, 0.5, 0.3, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(accept_prob_exp(0.0, 0.5, -0.2, 1.0) == 1.0);
  // A positive threshold makes even a zero-gain trade uncertain.
  CHECK(accept_prob_exp(0.0, 0.5, 0.2, 1.0) == doctest::Approx(std::exp(-0.4)).epsilon(1e-15));
  // Continuous at the threshold.
  CHECK(accept_prob_exp(0.2 - 1e-12, 0.5, 0.2, 1.0) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("relative acceptance examples") {
  CHECK(accept_prob_relative(-0.25, 1.0, 0.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(accept_prob_relative(-0.5, 2.0, 0.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(accept_prob_relative(0.0, 1.0, 0.5) == 1.0);
  CHECK(accept_prob_relative(3.0, 1.0, 0.5) == 1.0);
  CHECK(accept_prob_relative(-0.6, 1.0, 0.5) == 0.0);
  // A unit without wealth takes any gain and refuses any loss.
  CHECK(accept_prob_relative(0.1, 0.0, 0.5) == 1.0);
  CHECK(accept_prob_relative(0.0, 0.0, 0.5) == 1.0);
  CHECK(accept_prob_relative(-0.1, 0.0, 0.5) == 0.0);
}

TEST_CASE("scale parameters must be positive") {
  CHECK_THROWS_AS(accept_prob_linear(0.0, 0.0, 1.0), ConfigError);
  CHECK_THROWS_AS(accept_prob_linear(0.0, 1.0, 0.0), ConfigError);
  CHECK_THROWS_AS(accept_prob_exp(0.0, -1.0, 0.0, 1.0), ConfigError);
  CHECK_THROWS_AS(accept_prob_relative(0.0, 1.0, 0.0), ConfigError);
}

TEST_CASE("every acceptance probability lies in [0, 1] and grows with delta") {
  RngStream rng(1);
  for (int i = 0; i < 200000; ++i) {
    const double eta = std::exp(6.0 * rng.uniform() - 3.0);
    const double mean = std::exp(4.0 * rng.uniform() - 2.0);
    const double dx0 = 4.0 * rng.uniform() - 2.0;
    const double x = 5.0 * rng.uniform();
    const double d1 = 20.0 * rng.uniform() - 10.0;
    const double d2 = d1 + 5.0 * rng.uniform();
    const double q[] = {accept_prob_linear(d1, eta, mean), accept_prob_exp(d1, eta, dx0, mean),
                        accept_prob_relative(d1, x, eta)};
    const double r[] = {accept_prob_linear(d2, eta, mean), accept_prob_exp(d2, eta, dx0, mean),
                        accept_prob_relative(d2, x, eta)};
    for (int k = 0; k < 3; ++k) {
      REQUIRE(q[k] >= 0.0);
      REQUIRE(q[k] <= 1.0);
      REQUIRE(r[k] >= q[k]);
    }
  }
}

namespace {

Population pair_population(double xj, double xk) {
  Population p;
  p.wealth = {xj, xk};
  p.total_wealth_initial = xj + xk;
  return p;
}

TradeProposal proposal(double delta) {
  TradeProposal t;
  t.j = 0;
  t.k = 1;
  t.delta = delta;
  return t;
}

TradeProposal mirrored(const TradeProposal& t) {
  TradeProposal m = t;
  std::swap(m.j, m.k);
  m.delta = -t.delta;
  return m;
}

double acceptance_rate(const TradeProposal& t, const Population& pop, const AcceptanceCriterion& c,
                       int n, std::uint64_t seed) {
  RngStream rng(seed);
  int yes = 0;
  for (int i = 0; i < n; ++i) yes += decide_trade(t, pop, c, rng) ? 1 : 0;
  return yes / static_cast<double>(n);
}

}  // namespace

TEST_CASE("always accepts without touching the stream") {
  const Population pop = pair_population(1.0, 1.0);
  RngStream a(3);
  RngStream b(3);
  for (double d : {-5.0, -0.5, 0.0, 0.5})
    CHECK(decide_trade(proposal(d), pop, AcceptanceCriterion{}, a));
  CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("joint acceptance is the product of the two unit probabilities") {
  const Population pop = pair_population(0.8, 1.2);
  const int n = 400000;
  for (double d : {-0.3, 0.2, 0.45}) {
    const AcceptanceCriterion lin{CriterionKind::LinearAbsolute, 0.5};
    const double m = pop.mean_wealth();
    const double expected = accept_prob_linear(d, 0.5, m) * accept_prob_linear(-d, 0.5, m);
    const double rate = acceptance_rate(proposal(d), pop, lin, n, 5);
    CHECK(std::abs(rate - expected) < 5 * std::sqrt(0.25 / n));

    const AcceptanceCriterion ex{CriterionKind::ExponentialAbsolute, 0.5, 0.2};
    const double e2 = accept_prob_exp(d, 0.5, 0.2, m) * accept_prob_exp(-d, 0.5, 0.2, m);
    CHECK(std::abs(acceptance_rate(proposal(d), pop, ex, n, 6) - e2) < 5 * std::sqrt(0.25 / n));

    const AcceptanceCriterion rel{CriterionKind::LinearRelative, 0.5};
    const double e3 = accept_prob_relative(d, 0.8, 0.5) * accept_prob_relative(-d, 1.2, 0.5);
    CHECK(std::abs(acceptance_rate(proposal(d), pop, rel, n, 7) - e3) < 5 * std::sqrt(0.25 / n));
  }
}

TEST_CASE("symmetric criteria give the same verdict on the mirrored proposal") {
  const Population pop = pair_population(0.7, 1.9);
  const AcceptanceCriterion criteria[] = {{CriterionKind::LinearAbsolute, 0.5},
                                          {CriterionKind::ExponentialAbsolute, 0.5, -0.2},
                                          {CriterionKind::LinearRelative, 1.0}};
  for (const auto& c : criteria)
    for (double d : {-0.6, -0.1, 0.0, 0.3}) {
      RngStream a(11);
      // Same two uniforms, roles swapped: u_j faces q_j(d) in one and q_k in the other.
      for (int i = 0; i < 2000; ++i) {
        const double uj = a.uniform();
        const double uk = a.uniform();
        const double m = pop.mean_wealth();
        double qj = 0, qk = 0, mj = 0, mk = 0;
        switch (c.kind) {
          case CriterionKind::LinearAbsolute:
            qj = accept_prob_linear(d, c.eta, m);
            qk = accept_prob_linear(-d, c.eta, m);
            mj = accept_prob_linear(-d, c.eta, m);
            mk = accept_prob_linear(d, c.eta, m);
            break;
          case CriterionKind::ExponentialAbsolute:
            qj = accept_prob_exp(d, c.eta, c.dx0, m);
            qk = accept_prob_exp(-d, c.eta, c.dx0, m);
            mj = accept_prob_exp(-d, c.eta, c.dx0, m);
            mk = accept_prob_exp(d, c.eta, c.dx0, m);
            break;
          default:
            qj = accept_prob_relative(d, 0.7, c.eta);
            qk = accept_prob_relative(-d, 1.9, c.eta);
            mj = accept_prob_relative(-d, 1.9, c.eta);
            mk = accept_prob_relative(d, 0.7, c.eta);
            break;
        }
        CHECK(qj == mk);
        CHECK(qk == mj);
        CHECK(((uj < qj) && (uk < qk)) == ((uk < mj) && (uj < mk)));
      }
      // decide_trade itself on both views.
      const double r1 = acceptance_rate(proposal(d), pop, c, 100000, 21);
      const double r2 = acceptance_rate(mirrored(proposal(d)), pop, c, 100000, 22);
      CHECK(std::abs(r1 - r2) < 5 * std::sqrt(0.5 / 100000));
    }
}

TEST_CASE("a transfer beyond the threshold is refused by the loser") {
  const Population pop = pair_population(1.0, 1.0);
  const AcceptanceCriterion lin{CriterionKind::LinearAbsolute, 0.5};
  RngStream rng(8);
  for (int i = 0; i < 1000; ++i) {
    CHECK_FALSE(decide_trade(proposal(-0.6), pop, lin, rng));
    CHECK_FALSE(decide_trade(proposal(0.6), pop, lin, rng));
  }
}

TEST_CASE("zero transfers always pass the symmetric linear criteria") {
  const Population pop = pair_population(0.5, 1.5);
  RngStream rng(9);
  const AcceptanceCriterion lin{CriterionKind::LinearAbsolute, 0.1};
  const AcceptanceCriterion rel{CriterionKind::LinearRelative, 0.1};
  for (int i = 0; i < 1000; ++i) {
    CHECK(decide_trade(proposal(0.0), pop, lin, rng));
    CHECK(decide_trade(proposal(0.0), pop, rel, rng));
  }
}

TEST_CASE("asymmetric criterion favours the richer unit") {
  const Population pop = pair_population(0.5, 2.0);  // j poorer
  const Population tie = pair_population(1.0, 1.0);
  RngStream rng(10);
  for (double theta : {0.0, 0.3, 0.9, 1.0}) {
    // k richer gains: always passes.
    for (int i = 0; i < 1000; ++i) CHECK(accept_asymmetric(proposal(-0.2), pop, theta, rng));
    // Ties count as the richer unit gaining.
    for (int i = 0; i < 1000; ++i) CHECK(accept_asymmetric(proposal(0.2), tie, theta, rng));
    const int n = 200000;
    int vetoed = 0;
    for (int i = 0; i < n; ++i) vetoed += accept_asymmetric(proposal(0.2), pop, theta, rng) ? 0 : 1;
    CHECK(std::abs(vetoed / double(n) - theta) < 5 * std::sqrt(0.25 / n));
  }
  const AcceptanceCriterion a{CriterionKind::AsymmetricRich, 1.0, 0.0, 0.0};
  for (int i = 0; i < 1000; ++i) CHECK(decide_trade(proposal(0.3), pop, a, rng));
}

TEST_CASE("heterogeneous criterion uses each unit's own scale") {
  Population pop = pair_population(1.0, 1.0);
  pop.eta = {0.2, 2.0};
  const AcceptanceCriterion het{CriterionKind::HeterogeneousLinear};
  const int n = 200000;
  // j loses 0.1: q_j = 1 - 0.1 / 0.2 = 0.5.
  CHECK(std::abs(acceptance_rate(proposal(-0.1), pop, het, n, 12) - 0.5) < 5 * std::sqrt(0.25 / n));
  // k loses 0.1: q_k = 1 - 0.1 / 2 = 0.95.
  CHECK(std::abs(acceptance_rate(proposal(0.1), pop, het, n, 13) - 0.95) < 5 * std::sqrt(0.25 / n));
}

TEST_CASE("eta recipes") {
  RngStream rng(14);
  const auto flat = assign_heterogeneous_eta(UniformEta{0.1, 0.1}, 500, rng);
  CHECK(std::all_of(flat.begin(), flat.end(), [](double e) { return e == 0.1; }));

  const auto spread = assign_heterogeneous_eta(UniformEta{0.1, 5.0}, 100000, rng);
  double mean = 0.0;
  for (double e : spread) {
    REQUIRE(e > 0.1);
    REQUIRE(e <= 5.0);
    mean += e;
  }
  mean /= spread.size();
  CHECK(std::abs(mean - 2.55) < 5 * 4.9 / std::sqrt(12.0 * 100000));

  const auto two = assign_heterogeneous_eta(TwoClassEta{0.95, 2.0, 0.5, 0.7}, 1000, rng);
  CHECK(std::count(two.begin(), two.end(), 2.0) == 950);
  for (std::size_t i = 950; i < 1000; ++i) {
    CHECK(two[i] > 0.5);
    CHECK(two[i] <= 0.7);
  }
  CHECK(assign_heterogeneous_eta(TwoClassEta{0.95, 2.0, 0.5, 0.7}, 999, rng)[948] == 2.0);

  CHECK_THROWS_AS(assign_heterogeneous_eta(UniformEta{2.0, 1.0}, 10, rng), ConfigError);
  CHECK_THROWS_AS(assign_heterogeneous_eta(UniformEta{0.0, 1.0}, 10, rng), ConfigError);
  CHECK_THROWS_AS(assign_heterogeneous_eta(TwoClassEta{1.5, 2.0, 0.5, 0.7}, 10, rng), ConfigError);
  CHECK_THROWS_AS(assign_heterogeneous_eta(TwoClassEta{0.9, 2.0, 0.7, 0.5}, 10, rng), ConfigError);
}
