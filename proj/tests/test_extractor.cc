#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <random>

#include "fixtures.h"
#include "markovrng/bounds.h"
#include "markovrng/errors.h"
#include "markovrng/extractor.h"
#include "markovrng/oracle.h"

using namespace markovrng;

namespace {

Bits random_bits(int n, std::mt19937_64& rng) {
  Bits b(n);
  for (auto& v : b) v = rng() & 1u;
  return b;
}

Bits xor_bits(const Bits& a, const Bits& b) {
  Bits c(a.size());
  for (size_t i = 0; i < a.size(); ++i) c[i] = a[i] ^ b[i];
  return c;
}

// Matrix product computed entry by entry from the defining formula.
Bits naive_hash(const ToeplitzSpec& s, const Bits& x) {
  Bits y(s.m, 0);
  for (int i = 0; i < s.m; ++i)
    for (int j = 0; j < s.n; ++j) y[i] ^= s.seed[i + s.n - 1 - j] & x[j];
  return y;
}

}  // namespace

TEST_CASE("Toeplitz hashing") {
  std::mt19937_64 rng(3);
  SUBCASE("zero seed") {
    const auto spec = make_toeplitz(12, 5, Bits(16, 0));
    for (int t = 0; t < 10; ++t) CHECK(hash(spec, random_bits(12, rng)) == Bits(5, 0));
  }
  SUBCASE("selector seed returns the first m bits") {
    Bits seed(12 + 5 - 1, 0);
    seed[11] = 1;
    const auto spec = make_toeplitz(12, 5, seed);
    for (int t = 0; t < 10; ++t) {
      const auto x = random_bits(12, rng);
      CHECK(hash(spec, x) == Bits(x.begin(), x.begin() + 5));
    }
  }
  SUBCASE("linearity and agreement with the defining formula") {
    for (int n : {7, 64, 65, 200}) {
      const auto spec = toeplitz_from_rng(n, std::min(n, 33), 99 + n);
      for (int t = 0; t < 20; ++t) {
        const auto a = random_bits(n, rng), b = random_bits(n, rng);
        CHECK(hash(spec, xor_bits(a, b)) == xor_bits(hash(spec, a), hash(spec, b)));
        CHECK(hash(spec, a) == naive_hash(spec, a));
      }
    }
  }
  SUBCASE("word shortcut matches the bit path") {
    const auto spec = toeplitz_from_index(10, 3, 0x5a3);
    const ToeplitzHash h(spec);
    for (uint64_t x = 0; x < 1024; ++x) {
      Bits in(10);
      for (int j = 0; j < 10; ++j) in[j] = (x >> j) & 1u;
      const auto out = h(in);
      uint64_t packed = 0;
      for (int i = 0; i < 3; ++i) packed |= uint64_t{out[i]} << i;
      CHECK(h.apply_word(x) == packed);
    }
  }
  SUBCASE("hex seeds are little-endian") {
    const auto spec = toeplitz_from_hex(8, 2, "0101");
    CHECK(spec.seed.size() == 9);
    CHECK(spec.seed[0] == 1);
    for (int i = 1; i < 8; ++i) CHECK(spec.seed[i] == 0);
    CHECK(spec.seed[8] == 1);
    CHECK_THROWS_AS(toeplitz_from_hex(8, 2, "01"), LengthMismatch);
  }
  SUBCASE("length errors") {
    CHECK_THROWS_AS(make_toeplitz(8, 2, Bits(5, 0)), LengthMismatch);
    CHECK_THROWS_AS(make_toeplitz(4, 5, Bits(8, 0)), LengthMismatch);
    CHECK_THROWS_AS(hash(make_toeplitz(8, 2, Bits(9, 0)), Bits(7, 0)), LengthMismatch);
  }
}

TEST_CASE("two-universality of the full family at n=6, m=2") {
  const int n = 6, m = 2;
  const int seeds = 1 << (n + m - 1);
  std::vector<uint64_t> table(static_cast<size_t>(seeds) * 64);
  for (int s = 0; s < seeds; ++s) {
    const ToeplitzHash h(toeplitz_from_index(n, m, s));
    for (uint64_t x = 0; x < 64; ++x) table[s * 64 + x] = h.apply_word(x);
  }
  for (uint64_t x = 0; x < 64; ++x)
    for (uint64_t y = x + 1; y < 64; ++y) {
      int coll = 0;
      for (int s = 0; s < seeds; ++s) coll += table[s * 64 + x] == table[s * 64 + y];
      CHECK(coll * 4 == seeds);
    }
}

TEST_CASE("exact variational distance") {
  SUBCASE("uniform input through a full-rank map") {
    const auto fair = fixtures::binary(0.5, 0.5, {0.5, 0.5});
    Bits seed(10 + 3 - 1, 0);
    seed[9] = 1;
    CHECK(exact_delta(fair, 10, make_toeplitz(10, 3, seed)).value == doctest::Approx(0.0));
  }
  SUBCASE("zero map") {
    const auto d = exact_delta(fixtures::binary(), 10, make_toeplitz(10, 3, Bits(12, 0)));
    CHECK(d.value == doctest::Approx(1.0 - 1.0 / 8.0));
    CHECK(d.rigorous);
    CHECK_FALSE(d.ci95.has_value());
  }
  SUBCASE("family average under the exponential bound") {
    const auto model = fixtures::binary();
    const auto dist = enumerate(model, 10);
    for (int m : {1, 2, 3}) {
      const auto fam = exact_family_delta(model, 10, m);
      CHECK(fam.method == DistanceMethod::kFamilyExact);
      CHECK(fam.value <= single_shot_bound(dist.probabilities, 1 << m, SingleShotKind::kExpAch).value);
    }
  }
  SUBCASE("single members bracket the family average") {
    const auto model = fixtures::binary();
    const int n = 8, m = 2;
    double lo = 1.0, hi = 0.0, sum = 0.0;
    const int seeds = 1 << (n + m - 1);
    for (int s = 0; s < seeds; ++s) {
      const double d = exact_delta(model, n, toeplitz_from_index(n, m, s)).value;
      CHECK(d >= 0.0);
      lo = std::min(lo, d);
      hi = std::max(hi, d);
      sum += d;
    }
    const double avg = exact_family_delta(model, n, m).value;
    CHECK(avg == doctest::Approx(sum / seeds).epsilon(1e-12));
    CHECK(lo <= avg + 1e-15);
    CHECK(avg <= hi + 1e-15);
  }
  SUBCASE("function table agrees with the seed overload") {
    const auto spec = toeplitz_from_index(8, 2, 77);
    const ToeplitzHash h(spec);
    std::vector<uint32_t> table(256);
    for (uint32_t x = 0; x < 256; ++x) table[x] = static_cast<uint32_t>(h.apply_word(x));
    CHECK(exact_delta(fixtures::binary(), 8, table, 4).value ==
          doctest::Approx(exact_delta(fixtures::binary(), 8, spec).value).epsilon(1e-14));
  }
  SUBCASE("side information") {
    const auto m = fixtures::joint_a2();
    const auto with = exact_family_delta(m, 6, 2, true).value;
    const auto without = exact_family_delta(m, 6, 2, false).value;
    CHECK(with >= without - 1e-12);
    CHECK(with <= 1.0);
  }
  SUBCASE("budget") { CHECK_THROWS_AS(exact_family_delta(fixtures::binary(), 16, 4), BudgetExceeded); }
}

TEST_CASE("Monte Carlo distance") {
  SUBCASE("uniform source sits at the plug-in bias level") {
    const auto fair = fixtures::binary(0.5, 0.5, {0.5, 0.5});
    const auto spec = toeplitz_from_rng(32, 8, 5);
    const int64_t samples = 100000;
    const auto d = mc_delta(fair, 32, spec, samples, 17);
    // Half the mean absolute deviation of 256 multinomial cells.
    const double bias = 0.5 * std::sqrt(2.0 * 256.0 / (M_PI * samples));
    CHECK(d.value <= 0.05);
    CHECK(d.value == doctest::Approx(bias).epsilon(0.3));
    CHECK_FALSE(d.rigorous);
    CHECK(d.ci95.has_value());
  }
  SUBCASE("deterministic source") {
    const auto d = mc_delta(fixtures::cycle(2), 16, toeplitz_from_rng(16, 4, 1), 2000, 3);
    CHECK(d.value == doctest::Approx(1.0 - 1.0 / 16.0));
    CHECK(*d.ci95 == doctest::Approx(0.0));
  }
  SUBCASE("independent runs agree within their intervals") {
    const auto spec = toeplitz_from_rng(12, 3, 8);
    const auto a = mc_delta(fixtures::binary(), 12, spec, 50000, 1);
    const auto b = mc_delta(fixtures::binary(), 12, spec, 50000, 2);
    CHECK(std::fabs(a.value - b.value) <= *a.ci95 + *b.ci95);
    const double exact = exact_delta(fixtures::binary(), 12, spec).value;
    CHECK(std::fabs(a.value - exact) <= 3.0 * *a.ci95 + 0.01);
  }
}

TEST_CASE("bit files") {
  std::mt19937_64 rng(1);
  const Bits b = random_bits(203, rng);
  const auto packed = pack_bits(b);
  CHECK(packed.size() == 26);
  auto back = unpack_bits(packed);
  back.resize(b.size());
  CHECK(back == b);
  const std::string path = "extractor_test_bits.bin";
  write_bit_file(path, b);
  auto read = read_bit_file(path);
  read.resize(b.size());
  CHECK(read == b);
  std::remove(path.c_str());
}

TEST_CASE("stream extraction") {
  SUBCASE("arity") {
    const auto spec = toeplitz_from_rng(16, 4, 2);
    std::mt19937_64 rng(4);
    const auto r = extract_stream(random_bits(160, rng), spec);
    CHECK(r.output.size() == 40);
    CHECK(r.report.blocks == 10);
    CHECK(r.report.output_bits == 40);
    CHECK_THROWS_AS(extract_stream(random_bits(150, rng), spec), LengthMismatch);
  }
  SUBCASE("constant source repeats one hash") {
    const auto spec = toeplitz_from_rng(16, 4, 2);
    Bits block(16);
    for (int j = 0; j < 16; ++j) block[j] = j % 3 == 0;
    Bits input;
    for (int k = 0; k < 5; ++k) input.insert(input.end(), block.begin(), block.end());
    const auto out = extract_stream(input, spec).output;
    const auto h = hash(spec, block);
    for (int k = 0; k < 5; ++k) CHECK(Bits(out.begin() + 4 * k, out.begin() + 4 * k + 4) == h);
  }
  SUBCASE("pipeline meets its target") {
    const auto model = fixtures::binary();
    const int n = 10000;
    const double rate = rate_for_epsilon(model, n, 1e-6, Theorem::kAch).rate;
    const int m = static_cast<int>(std::floor(n * rate / std::log(2.0)));
    const auto spec = toeplitz_from_rng(n, m, 11);
    const auto input = sample_bits(model, n, 3, 21);
    const auto r = extract_stream(input, spec, &model);
    CHECK(r.output.size() == static_cast<size_t>(3 * m));
    REQUIRE(r.report.epsilon_bound.has_value());
    CHECK(*r.report.epsilon_bound <= 1e-6);
    CHECK(extraction_report_to_json(r.report).find("epsilon_bound") != std::string::npos);
  }
  SUBCASE("exact audit") {
    const auto model = fixtures::binary();
    const auto spec = toeplitz_from_rng(10, 2, 6);
    const auto r = extract_stream(sample_bits(model, 10, 4, 1), spec, &model, Audit::kExact);
    REQUIRE(r.report.audit.has_value());
    CHECK(r.report.audit->value == doctest::Approx(exact_delta(model, 10, spec).value));
  }
}
