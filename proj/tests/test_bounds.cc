#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "fixtures.h"
#include "markovrng/bounds.h"
#include "markovrng/errors.h"
#include "markovrng/extractor.h"
#include "markovrng/legendre.h"
#include "markovrng/oracle.h"

using namespace markovrng;

namespace {

const double kLog2 = std::log(2.0);

double value_or_nan(const BoundReport& r) { return r.value ? *r.value : std::nan(""); }

}  // namespace

TEST_CASE("standard normal") {
  CHECK(StdNormal::cdf(0.0) == doctest::Approx(0.5));
  CHECK(StdNormal::cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
  CHECK(StdNormal::quantile(0.5) == doctest::Approx(0.0));
  for (double p : {1e-6, 1e-3, 0.1, 0.25, 0.6, 0.9, 1.0 - 1e-6})
    CHECK(std::fabs(StdNormal::cdf(StdNormal::quantile(p)) - p) < 1e-8 * std::max(p, 1e-3));
}

TEST_CASE("single-shot bounds") {
  SUBCASE("flat profile, exponential achievability") {
    const std::vector<double> flat(1 << 20, 1.0 / (1 << 20));
    const auto r = single_shot_bound(flat, 1 << 10, SingleShotKind::kExpAch);
    CHECK(r.value == doctest::Approx(0.046875).epsilon(1e-10));
    CHECK(r.theta_star == doctest::Approx(1.0).epsilon(1e-6));
    const auto v = single_shot_bound(std::vector<double>(1 << 10, 1.0 / (1 << 10)), 1 << 10, SingleShotKind::kExpAch);
    CHECK(v.clamped);
  }
  SUBCASE("converses sit below the exhaustive optimum") {
    const std::vector<double> p = {0.7, 0.2, 0.1};
    const double opt = optimal_delta(p, 2).value;
    CHECK(opt == doctest::Approx(0.2));
    for (auto kind : {SingleShotKind::kSphereConv, SingleShotKind::kHanConv}) {
      double lower = 0.0;
      try {
        lower = single_shot_bound(p, 2, kind).value;
      } catch (const Infeasible&) {
      }
      CHECK(lower <= opt + 1e-12);
    }
    for (auto kind : {SingleShotKind::kHan, SingleShotKind::kLeftoverLoose, SingleShotKind::kExpAch})
      CHECK(single_shot_bound(p, 2, kind).value >= opt - 1e-12);
  }
  SUBCASE("enumerated chain: achievability over the Toeplitz average, converse under the optimum") {
    const auto model = fixtures::binary();
    const int n = 10, m = 2;
    const auto dist = enumerate(model, n);
    const double avg = exact_family_delta(model, n, m).value;
    for (auto kind : {SingleShotKind::kExpAch, SingleShotKind::kLeftoverLoose})
      CHECK(single_shot_bound(dist.probabilities, 1 << m, kind).value >= avg - 1e-12);
    const auto small = enumerate(model, 4);
    const auto opt = optimal_delta(small.probabilities, 2);
    CHECK(opt.exhaustive);
    CHECK(single_shot_bound(small.probabilities, 2, SingleShotKind::kSphereConv).value <= opt.value + 1e-12);
    CHECK(single_shot_bound(small.probabilities, 2, SingleShotKind::kHan).value >= opt.value - 1e-12);
  }
  SUBCASE("side information reduces to the plain bound when Y is constant") {
    const std::vector<double> p = {0.4, 0.3, 0.2, 0.1};
    Matrix col(4, 1);
    for (int i = 0; i < 4; ++i) col(i, 0) = p[i];
    CHECK(single_shot_bound(col, 2, SingleShotKind::kExpAchMulti).value ==
          doctest::Approx(single_shot_bound(p, 2, SingleShotKind::kExpAch).value).epsilon(1e-10));
  }
  SUBCASE("info spectrum validates the conditioning") {
    const Matrix pxy = Matrix::from_rows({{0.3, 0.2}, {0.1, 0.4}});
    SingleShotOptions opt;
    opt.q_y = {1.0, 0.0};
    CHECK_THROWS_AS(single_shot_bound(pxy, 2, SingleShotKind::kInfoSpectrum, opt), SupportViolation);
  }
  SUBCASE("kind names round trip") {
    for (auto k : {SingleShotKind::kHan, SingleShotKind::kStrongConv, SingleShotKind::kStrongTailMulti})
      CHECK(parse_single_shot_kind(single_shot_kind_name(k)) == k);
  }
}

TEST_CASE("Markov achievability") {
  SUBCASE("fair coin reduces to the closed form") {
    const auto fair = fixtures::binary(0.5, 0.5, {0.5, 0.5});
    const auto r = urng_markov_bound(fair, Theorem::kAch, BoundQuery::from_rate(100, 0.5 * kLog2));
    CHECK(value_or_nan(r) == doctest::Approx(25.0 * kLog2 - std::log(1.5)).epsilon(1e-9));
    CHECK(r.theta_star == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("above the entropy rate the bound is vacuous") {
    const auto model = fixtures::binary();
    const auto r = urng_markov_bound(model, Theorem::kAch, BoundQuery::from_rate(1000, entropy_rate(model) + 0.01));
    CHECK(r.clamped);
    CHECK(value_or_nan(r) <= 0.0);
  }
  SUBCASE("normalized value approaches the large-deviation exponent") {
    const auto model = fixtures::binary();
    const double R = 0.3;
    const int64_t n = 1000000;
    const auto r = urng_markov_bound(model, Theorem::kAch, BoundQuery::from_rate(n, R));
    AsymptoticParams p;
    p.R = R;
    CHECK(std::fabs(value_or_nan(r) / n - asymptotic(model, Regime::kLdAch, p).value) < 1e-3);
  }
  SUBCASE("single-terminal only") {
    CHECK_THROWS_AS(urng_markov_bound(fixtures::joint_a2(), Theorem::kAch, BoundQuery::from_rate(100, 0.1)),
                    std::invalid_argument);
  }
}

TEST_CASE("direction consistency on a query grid") {
  const auto model = fixtures::binary();
  const RenyiProfile prof(model, Variant::kSingle);
  const InverseMaps maps(prof);
  const double h = maps.entropy();
  int checked = 0;
  for (int64_t n : {int64_t{2000}, int64_t{10000}, int64_t{100000}, int64_t{1000000}, int64_t{3000000}}) {
    for (int i = 1; i <= 10; ++i) {
      const double R = maps.a_lower() + (h - maps.a_lower()) * (0.05 + 0.9 * i / 10.0);
      const auto q = BoundQuery::from_rate(n, R);
      const auto ach = urng_markov_bound(model, Theorem::kAch, q);
      const auto sphere = urng_markov_bound(model, Theorem::kConvSphere, q);
      const auto strong = urng_markov_bound(model, Theorem::kConvStrong, q);
      if (sphere.value) CHECK(value_or_nan(ach) <= *sphere.value + 1e-9);
      if (strong.value) CHECK(value_or_nan(ach) <= *strong.value + 1e-9);
      ++checked;
    }
  }
  CHECK(checked == 50);
}

TEST_CASE("converse windows") {
  const auto model = fixtures::binary();
  const double h = entropy_rate(model);
  CHECK_THROWS_AS(urng_markov_bound(model, Theorem::kConvSphere, BoundQuery::from_rate(1000, h + 0.05)), OutOfWindow);
  CHECK_THROWS_AS(urng_markov_bound(model, Theorem::kConvStrong, BoundQuery::from_rate(1000, h + 0.05)), OutOfWindow);
}

TEST_CASE("relative entropy rate bounds") {
  const auto model = fixtures::binary();
  const double h = entropy_rate(model);
  SUBCASE("gap vanishes at large n") {
    const int64_t n = 1000000;
    const auto up = urng_rer_bound(model, n, h + 0.1, RateDirection::kUpper, 0.01);
    const auto lo = urng_rer_bound(model, n, h + 0.1, RateDirection::kLower, 0.01);
    CHECK(value_or_nan(up) - value_or_nan(lo) <= 0.02);
    CHECK(std::fabs(value_or_nan(up) - 0.1) <= 0.02);
    CHECK(std::fabs(value_or_nan(lo) - 0.1) <= 0.02);
    CHECK(value_or_nan(lo) <= value_or_nan(up));
  }
  SUBCASE("below the entropy rate") {
    CHECK(value_or_nan(urng_rer_bound(model, 10000, h - 0.05, RateDirection::kLower)) <= 0.0);
    AsymptoticParams p;
    p.R = h - 0.05;
    CHECK(asymptotic(model, Regime::kRer, p).value == 0.0);
  }
  SUBCASE("uniform source at full rate") {
    const auto fair = fixtures::binary(0.5, 0.5, {0.5, 0.5});
    for (auto d : {RateDirection::kUpper, RateDirection::kLower})
      CHECK(std::fabs(value_or_nan(urng_rer_bound(fair, 1000000, kLog2, d, 0.5))) < 1e-5);
  }
  SUBCASE("mutual information rate with independent side information") {
    const std::vector<std::vector<double>> wx = {{0.9, 0.2}, {0.1, 0.8}}, wy = {{0.6, 0.3}, {0.4, 0.7}};
    const auto pm = fixtures::product(wx, wy, {0.5, 0.5, 0.0, 0.0});
    for (auto d : {RateDirection::kUpper, RateDirection::kLower})
      CHECK(value_or_nan(surng_mmir_bound(pm, 100000, h + 0.1, d, 0.1)) ==
            doctest::Approx(value_or_nan(urng_rer_bound(model, 100000, h + 0.1, d, 0.1))).epsilon(1e-7));
  }
}

TEST_CASE("side-information bounds") {
  const std::vector<std::vector<double>> wx = {{0.9, 0.2}, {0.1, 0.8}}, wy = {{0.6, 0.3}, {0.4, 0.7}};
  const auto pm = fixtures::product(wx, wy, {0.5, 0.5, 0.0, 0.0});
  const auto x = fixtures::binary();
  SUBCASE("independent side information reduces to the plain chain") {
    for (double R : {0.2, 0.3}) {
      const auto q = BoundQuery::from_rate(10000, R);
      CHECK(value_or_nan(surng_markov_bound(pm, Theorem::kAchA1, q)) ==
            doctest::Approx(value_or_nan(urng_markov_bound(x, Theorem::kAch, q))).epsilon(1e-7));
      const auto c1 = surng_markov_bound(pm, Theorem::kConvA1, q);
      const auto cs = urng_markov_bound(x, Theorem::kConvSphere, q);
      CHECK(value_or_nan(c1) == doctest::Approx(value_or_nan(cs)).epsilon(1e-5));
    }
  }
  SUBCASE("assumption guards") {
    CHECK_THROWS_AS(surng_markov_bound(pm, Theorem::kAchA2, BoundQuery::from_rate(1000, 0.2)), AssumptionViolated);
  }
  SUBCASE("upper conditional achievability dominates") {
    const auto m = fixtures::joint_a2();
    const double hc = entropy_rate(m, true);
    for (double frac : {0.5, 0.8, 0.95}) {
      const auto q = BoundQuery::from_rate(10000, frac * hc);
      CHECK(value_or_nan(surng_markov_bound(m, Theorem::kAchA2, q)) >=
            value_or_nan(surng_markov_bound(m, Theorem::kAchA1, q)) - 1e-9);
    }
    const auto r = surng_markov_bound(m, Theorem::kAchA1, BoundQuery::from_rate(1000, hc + 0.01));
    CHECK(r.clamped);
  }
}

TEST_CASE("asymptotic regimes") {
  const auto model = fixtures::binary();
  const double h = entropy_rate(model), v = variance_rate(model);
  AsymptoticParams p;
  p.n = 10000;
  p.epsilon = 0.5;
  CHECK(asymptotic(model, Regime::kSecondOrder, p).value == doctest::Approx(10000.0 * h).epsilon(1e-12));
  p.epsilon = 0.1;
  CHECK(asymptotic(model, Regime::kSecondOrder, p).value ==
        doctest::Approx(10000.0 * h + std::sqrt(10000.0 * v) * StdNormal::quantile(0.1)).epsilon(1e-12));
  p.delta = 0.05;
  const double md = asymptotic(model, Regime::kMd, p).value;
  CHECK(md == doctest::Approx(0.0025 / (2.0 * v)));
  p.delta = 0.1;
  CHECK(asymptotic(model, Regime::kMd, p).value == doctest::Approx(4.0 * md));
  SUBCASE("achievability and converse exponents meet above the critical rate") {
    const InverseMaps maps{RenyiProfile(model, Variant::kSingle)};
    for (int i = 0; i < 5; ++i) {
      p.R = maps.critical_rate() + (h - maps.critical_rate()) * i / 5.0;
      const auto a = asymptotic(model, Regime::kLdAch, p);
      const auto c = asymptotic(model, Regime::kLdConv, p);
      CHECK(std::fabs(a.value - c.value) < 1e-9);
      CHECK(c.matches_above_critical);
    }
  }
  SUBCASE("regime names round trip") {
    for (auto r : {Regime::kLdAch, Regime::kLdConvSphere, Regime::kSecondOrder}) CHECK(parse_regime(regime_name(r)) == r);
  }
  SUBCASE("degenerate variance") {
    p.delta = 0.1;
    CHECK_THROWS_AS(asymptotic(fixtures::binary(0.5, 0.5), Regime::kMd, p), DegenerateVariance);
  }
}

TEST_CASE("rate for a target epsilon") {
  const auto model = fixtures::binary();
  const double h = entropy_rate(model);
  SUBCASE("monotone in epsilon") {
    double prev = 0.0;
    for (double e : {1e-30, 1e-20, 1e-10, 1e-4, 0.1}) {
      const double r = rate_for_epsilon(model, 10000, e, Theorem::kAch).rate;
      CHECK(r >= prev - 1e-9);
      CHECK(r < h);
      prev = r;
    }
  }
  SUBCASE("vanishing penalty near one") {
    const double r = rate_for_epsilon(model, 1000000, 0.999, Theorem::kAch).rate;
    CHECK(r < h);
    CHECK(r > h - 1e-3);
  }
  SUBCASE("longer blocks get closer to the entropy rate") {
    for (auto t : {Theorem::kAch, Theorem::kConvSphere, Theorem::kConvStrong}) {
      const double small = rate_for_epsilon(model, 10000, 1e-10, t).rate;
      const double large = rate_for_epsilon(model, 1000000, 1e-10, t).rate;
      CHECK(small < large);
      CHECK(large < h);
    }
  }
  SUBCASE("achievability never exceeds the converses") {
    for (double e : {1e-40, 1e-10}) {
      const double a = rate_for_epsilon(model, 10000, e, Theorem::kAch).rate;
      CHECK(a <= rate_for_epsilon(model, 10000, e, Theorem::kConvSphere).rate + 1e-9);
      CHECK(a <= rate_for_epsilon(model, 10000, e, Theorem::kConvStrong).rate + 1e-9);
    }
  }
}

TEST_CASE("report serialization") {
  BoundReport r;
  r.theorem = "conv_strong";
  r.quantity = Quantity::kNegLogDeltaBarUpper;
  r.feasible = false;
  const auto s = report_to_json(r);
  CHECK(s.find("\"value\": null") != std::string::npos);
  CHECK(s.find("neg_log_delta_bar_upper") != std::string::npos);
  for (auto t : {Theorem::kAch, Theorem::kConvA2}) CHECK(parse_theorem(theorem_name(t)) == t);
}
