#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "fixtures.h"
#include "markovrng/errors.h"
#include "markovrng/renyi.h"

using namespace markovrng;

namespace {

Matrix joint(const std::vector<std::vector<double>>& rows) { return Matrix::from_rows(rows); }

// Largest cap level whose trimmed mass stays within the budget, by scanning.
double smooth_min_grid(const std::vector<double>& p, double eps) {
  double best = 0.0;
  for (int i = 1; i <= 200000; ++i) {
    const double c = i / 200000.0;
    double trimmed = 0.0;
    for (double v : p) trimmed += std::max(0.0, v - c);
    if (trimmed / 2.0 <= eps + 1e-12) return -std::log(c);
    best = c;
  }
  return -std::log(best);
}

double iid_variance(const std::vector<double>& p) {
  double m = 0.0, s = 0.0;
  for (double v : p) {
    m -= v * std::log(v);
    s += v * std::log(v) * std::log(v);
  }
  return s - m * m;
}

}  // namespace

TEST_CASE("single-shot Renyi entropy") {
  const std::vector<double> p = {0.5, 0.25, 0.25};
  CHECK(renyi_entropy(p, 1.0) == doctest::Approx(-std::log(0.375)).epsilon(1e-12));
  CHECK(renyi_entropy(p, 0.0) == doctest::Approx(1.0397207708).epsilon(1e-9));
  CHECK(renyi_entropy(p, 1e-8) == doctest::Approx(shannon_entropy(p)).epsilon(1e-7));
  for (double theta : {-0.9, -0.3, 0.5, 3.0}) CHECK(renyi_entropy({0.2, 0.2, 0.2, 0.2, 0.2}, theta) == doctest::Approx(std::log(5.0)));
  CHECK(renyi_entropy(p, kInfinity) == doctest::Approx(std::log(2.0)));
  SUBCASE("non-increasing in theta") {
    double prev = renyi_entropy(p, -0.95);
    for (double theta = -0.9; theta < 5.0; theta += 0.1) {
      const double h = renyi_entropy(p, theta);
      CHECK(h <= prev + 1e-12);
      prev = h;
    }
  }
}

TEST_CASE("min-entropy") {
  CHECK(min_entropy({0.7, 0.2, 0.1}) == doctest::Approx(0.356675).epsilon(1e-6));
  CHECK(min_entropy({0.25, 0.25, 0.25, 0.25}) == doctest::Approx(std::log(4.0)));
  const Matrix diag = joint({{0.5, 0.0}, {0.0, 0.5}});
  CHECK(cond_min_entropy(diag, MinVariant::kLower) == doctest::Approx(0.0));
  CHECK(cond_min_entropy(diag, MinVariant::kUpper) == doctest::Approx(0.0));
  const Matrix uni = joint({{0.25, 0.25}, {0.25, 0.25}});
  CHECK(cond_min_entropy(uni, MinVariant::kPlain) == doctest::Approx(std::log(4.0)));
  for (auto v : {MinVariant::kLower, MinVariant::kUpper}) CHECK(cond_min_entropy(uni, v) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("smooth min-entropy") {
  const std::vector<double> p = {0.7, 0.2, 0.1};
  CHECK(smooth_min_entropy(p, 0.0) == doctest::Approx(min_entropy(p)));
  CHECK(smooth_min_entropy({0.5, 0.5}, 0.1) == doctest::Approx(-std::log(0.4)).epsilon(1e-12));
  SUBCASE("greedy cap agrees with the cap-level scan") {
    for (const auto& q : std::vector<std::vector<double>>{{0.5, 0.5}, {0.7, 0.2, 0.1}, {1.0}, {0.4, 0.3, 0.2, 0.1}})
      for (double eps : {0.01, 0.05, 0.1, 0.25})
        CHECK(smooth_min_entropy(q, eps) == doctest::Approx(smooth_min_grid(q, eps)).epsilon(1e-4));
  }
  SUBCASE("non-decreasing in eps") {
    double prev = 0.0;
    for (double eps = 0.0; eps < 0.45; eps += 0.05) {
      const double h = smooth_min_entropy(p, eps);
      CHECK(h >= prev - 1e-12);
      prev = h;
    }
  }
}

TEST_CASE("conditional Renyi entropies") {
  SUBCASE("independent X and Y") {
    const std::vector<double> px = {0.6, 0.3, 0.1}, py = {0.7, 0.3};
    Matrix m(3, 2);
    for (int x = 0; x < 3; ++x)
      for (int y = 0; y < 2; ++y) m(x, y) = px[x] * py[y];
    for (double theta : {-0.5, 0.5, 2.0}) {
      const double h = renyi_entropy(px, theta);
      CHECK(cond_renyi(m, theta, CondVariant::kLower) == doctest::Approx(h).epsilon(1e-12));
      CHECK(cond_renyi(m, theta, CondVariant::kUpper) == doctest::Approx(h).epsilon(1e-12));
      CHECK(cond_renyi(m, theta, CondVariant::kTwoParam, 0.3) == doctest::Approx(h).epsilon(1e-12));
    }
  }
  SUBCASE("uniform pair") {
    const Matrix m = joint({{0.25, 0.25}, {0.25, 0.25}});
    for (auto v : {CondVariant::kLower, CondVariant::kUpper, CondVariant::kTwoParam})
      CHECK(cond_renyi(m, 1.0, v, 0.5) == doctest::Approx(std::log(2.0)));
  }
  const Matrix m = joint({{0.4, 0.05, 0.1}, {0.1, 0.15, 0.2}});
  SUBCASE("two-parameter endpoints") {
    for (double theta : {-0.6, -0.2, 0.4, 1.5}) {
      CHECK(cond_renyi(m, theta, CondVariant::kTwoParam, theta) ==
            doctest::Approx(cond_renyi(m, theta, CondVariant::kUpper)).epsilon(1e-10));
      CHECK(cond_renyi(m, theta, CondVariant::kTwoParam, 0.0) ==
            doctest::Approx(cond_renyi(m, theta, CondVariant::kLower)).epsilon(1e-10));
    }
  }
  SUBCASE("lower does not exceed upper") {
    for (double theta = -0.9; theta <= 4.0; theta += 0.25)
      CHECK(cond_renyi(m, theta, CondVariant::kLower) <= cond_renyi(m, theta, CondVariant::kUpper) + 1e-12);
  }
  SUBCASE("upper is the relative entropy at the optimal conditioning") {
    for (double theta : {-0.5, 0.5, 2.0}) {
      const auto q = optimal_conditioning(m, theta);
      CHECK(relative_cond_renyi(m, q, theta) == doctest::Approx(cond_renyi(m, theta, CondVariant::kUpper)).epsilon(1e-10));
      for (const std::vector<double>& other : {std::vector<double>{0.3, 0.3, 0.4}, std::vector<double>{0.5, 0.2, 0.3}}) {
        if (theta > 0)
          CHECK(relative_cond_renyi(m, other, theta) <= relative_cond_renyi(m, q, theta) + 1e-12);
      }
    }
  }
  SUBCASE("relative variant support check") {
    CHECK_THROWS_AS(relative_cond_renyi(m, {0.5, 0.5, 0.0}, 1.0), SupportViolation);
  }
  SUBCASE("conditional Shannon is the theta limit") {
    CHECK(cond_renyi(m, 1e-7, CondVariant::kLower) == doctest::Approx(cond_shannon(m)).epsilon(1e-6));
  }
}

TEST_CASE("transition-matrix Renyi rates") {
  const auto w = fixtures::binary();
  SUBCASE("closed-form eigenvalue") {
    CHECK(std::fabs(renyi_rate(w, 1.0, Variant::kSingle) + std::log(0.8123213)) < 1e-6);
    for (double theta : {-0.7, -0.3, 0.5, 2.0, 5.0})
      CHECK(renyi_rate(w, theta, Variant::kSingle) ==
            doctest::Approx(-std::log(fixtures::binary_lambda(0.1, 0.2, theta)) / theta).epsilon(1e-11));
  }
  SUBCASE("i.i.d. reduces to single-shot") {
    const std::vector<double> p = {0.5, 0.3, 0.2};
    for (double theta : {-0.5, 0.5, 2.0})
      CHECK(renyi_rate(fixtures::iid(p), theta, Variant::kSingle) == doctest::Approx(renyi_entropy(p, theta)).epsilon(1e-11));
  }
  SUBCASE("permutation kernel has zero rate") {
    for (double theta : {-0.5, 0.5, 2.0}) CHECK(std::fabs(renyi_rate(fixtures::cycle(3), theta, Variant::kSingle)) < 1e-12);
  }
  SUBCASE("entropy and variance rates") {
    const double h = 2.0 / 3.0 * fixtures::binary_entropy(0.1) + 1.0 / 3.0 * fixtures::binary_entropy(0.2);
    CHECK(entropy_rate(w) == doctest::Approx(h).epsilon(1e-12));
    CHECK(std::fabs(entropy_rate(w) - 0.383523) < 1e-6);
    CHECK(RenyiProfile(w, Variant::kSingle).entropy_rate() == doctest::Approx(h).epsilon(1e-9));
    const auto fair = fixtures::binary(0.5, 0.5);
    CHECK(entropy_rate(fair) == doctest::Approx(std::log(2.0)));
    CHECK(std::fabs(variance_rate(fair)) < 1e-9);
    const std::vector<double> p = {0.6, 0.3, 0.1};
    CHECK(variance_rate(fixtures::iid(p)) == doctest::Approx(iid_variance(p)).epsilon(1e-7));
  }
  SUBCASE("variance against the closed-form second derivative") {
    const double h = 1e-4;
    auto phi = [](double t) { return std::log(fixtures::binary_lambda(0.1, 0.2, t)); };
    const double second = (phi(h) - 2.0 * phi(0.0) + phi(-h)) / (h * h);
    CHECK(variance_rate(w) == doctest::Approx(second).epsilon(1e-5));
  }
  SUBCASE("profile shape") {
    const RenyiProfile prof(w, Variant::kSingle);
    CHECK(prof.rate(1e-4) == doctest::Approx(prof.entropy_rate()).epsilon(1e-3));
    CHECK(prof.rate(-1e-4) == doctest::Approx(prof.entropy_rate()).epsilon(1e-3));
    std::vector<double> grid;
    for (double t = -0.9; t <= 6.0; t += 0.3) grid.push_back(t);
    for (size_t i = 1; i < grid.size(); ++i) CHECK(prof.rate(grid[i]) <= prof.rate(grid[i - 1]) + 1e-12);
    for (size_t i = 1; i + 1 < grid.size(); ++i) {
      const double l = prof.scaled(grid[i - 1]), c = prof.scaled(grid[i]), r = prof.scaled(grid[i + 1]);
      CHECK(c >= 0.5 * (l + r) - 1e-10);
    }
  }
}

TEST_CASE("conditional rates on a joint model") {
  const auto m = fixtures::joint_a2();
  for (double theta : {-0.5, -0.1, 0.3, 1.0, 2.5}) {
    const double lo = renyi_rate(m, theta, Variant::kLower);
    const double up = renyi_rate(m, theta, Variant::kUpper);
    CHECK(lo <= up + 1e-10);
    CHECK(renyi_rate(m, theta, Variant::kTwoParam, theta) == doctest::Approx(up).epsilon(1e-10));
    CHECK(renyi_rate(m, theta, Variant::kTwoParam, 0.0) == doctest::Approx(lo).epsilon(1e-10));
  }
  CHECK(entropy_rate(m, true) <= entropy_rate(m, false));
  const std::vector<std::vector<double>> wx = {{0.9, 0.2}, {0.1, 0.8}}, wy = {{0.6, 0.3}, {0.4, 0.7}};
  const auto pm = fixtures::product(wx, wy, {0.25, 0.25, 0.25, 0.25});
  CHECK_THROWS_AS(renyi_rate(pm, 0.5, Variant::kUpper), AssumptionViolated);
  SUBCASE("independent components reduce to the X chain") {
    for (double theta : {-0.5, 0.7}) CHECK(renyi_rate(pm, theta, Variant::kLower) == doctest::Approx(renyi_rate(fixtures::binary(), theta, Variant::kSingle)).epsilon(1e-10));
    CHECK(entropy_rate(pm, true) == doctest::Approx(entropy_rate(fixtures::binary())).epsilon(1e-10));
  }
}

TEST_CASE("min-entropy rate") {
  const auto cert = min_entropy_rate(fixtures::binary(), MinVariant::kPlain);
  CHECK(cert.rate == doctest::Approx(-std::log(0.9)).epsilon(1e-12));
  CHECK(cert.best_cycle == std::vector<int>{0});
  CHECK(cert.cycle_length == 1);
  CHECK(cert.path_constant == doctest::Approx(0.1));
  CHECK(cert.path_constant <= 1.0);
  CHECK(std::fabs(min_entropy_rate(fixtures::cycle(4), MinVariant::kPlain).rate) < 1e-12);
  CHECK(renyi_rate(fixtures::binary(), 1e3, Variant::kSingle) == doctest::Approx(cert.rate).epsilon(1e-2));
  SUBCASE("two-cycle wins") {
    const auto m = make_model({{0.3, 0.95}, {0.7, 0.05}}, {0.5, 0.5});
    const auto c = min_entropy_rate(m, MinVariant::kPlain);
    CHECK(c.rate == doctest::Approx(-0.5 * std::log(0.7 * 0.95)).epsilon(1e-12));
    CHECK(c.cycle_length == 2);
  }
  SUBCASE("state-space guard") {
    std::vector<double> p(11, 1.0 / 11.0);
    CHECK_THROWS_AS(min_entropy_rate(fixtures::iid(p), MinVariant::kPlain), StateSpaceTooLarge);
  }
}

TEST_CASE("correction terms") {
  SUBCASE("i.i.d. started at stationarity collapses") {
    const std::vector<double> p = {0.5, 0.3, 0.2};
    const auto c = correction_terms(fixtures::iid(p), CorrectionKind::kDelta, 0.7);
    CHECK(c.lower == doctest::Approx(0.7 * renyi_entropy(p, 0.7)).epsilon(1e-10));
    CHECK(c.upper == doctest::Approx(c.lower).epsilon(1e-10));
  }
  SUBCASE("worked example at theta one uses the left eigenvector") {
    // Left eigenvector of W~_1 with min entry 1, from the 2x2 closed form.
    const double lam = fixtures::binary_lambda(0.1, 0.2, 1.0);
    const double v0 = (lam - 0.64) / 0.04, v1 = 1.0;
    const double vmin = std::min(v0, v1);
    const auto c = correction_terms(fixtures::binary(), CorrectionKind::kDelta, 1.0);
    CHECK(c.lower == doctest::Approx(-std::log(v0 / vmin)).epsilon(1e-10));
    CHECK(c.lower <= c.upper);
  }
  SUBCASE("ordering across theta") {
    for (double theta : {-0.5, -0.2, 0.3, 1.0, 2.0}) {
      const auto d = correction_terms(fixtures::binary(), CorrectionKind::kDelta, theta);
      CHECK(d.lower <= d.upper);
      const auto x = correction_terms(fixtures::joint_a2(), CorrectionKind::kXi, theta);
      CHECK(x.lower <= x.upper);
      const auto z = correction_terms(fixtures::joint_a2(), CorrectionKind::kZeta, theta, 0.5 * theta);
      CHECK(z.lower <= z.upper);
    }
  }
  SUBCASE("assumption checks") {
    const std::vector<std::vector<double>> wx = {{0.9, 0.2}, {0.1, 0.8}}, wy = {{0.6, 0.3}, {0.4, 0.7}};
    const auto pm = fixtures::product(wx, wy, {0.25, 0.25, 0.25, 0.25});
    CHECK_THROWS_AS(correction_terms(pm, CorrectionKind::kXi, 0.5), AssumptionViolated);
  }
}
