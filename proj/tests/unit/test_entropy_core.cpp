#include <cmath>

#include "bfc/dexel_stats.hpp"
#include "bfc/error.hpp"
#include "bfc/permutation.hpp"
#include "bfc/range_coder.hpp"
#include "bfc/symbol_table.hpp"
#include "bfc/synth.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace bfc;
using bfc::test::bits_of;

namespace {

DexelStats stats_of(const std::vector<std::string>& rows) {
  std::vector<BinaryDescriptor> d;
  for (const auto& r : rows) d.push_back(bits_of(r));
  return estimate_dexel_stats(d);
}

}  // namespace

TEST_CASE("dexel stats examples") {
  std::vector<BinaryDescriptor> zeros(100, BinaryDescriptor(16));
  const auto z = estimate_dexel_stats(zeros);
  for (std::size_t j = 0; j < 16; ++j) CHECK(z.marginal(j) == std::array<std::uint64_t, 2>{100, 0});

  const auto u = stats_of({"00", "01", "10", "11"});
  CHECK(u.marginal(0) == std::array<std::uint64_t, 2>{2, 2});
  CHECK(u.marginal(1) == std::array<std::uint64_t, 2>{2, 2});
  CHECK(u.joint(0, 1) == std::array<std::uint64_t, 4>{1, 1, 1, 1});
  CHECK(conditional_entropy(u, 0, 1) == 1.0);
  CHECK_THROWS_AS(conditional_entropy(u, 1, 1), InvalidPair);
  CHECK_THROWS_AS(estimate_dexel_stats(std::vector<BinaryDescriptor>{}), EmptyTrainingSet);
}

TEST_CASE("estimated Markov conditionals lie within binomial bounds") {
  Rng rng(9);
  const std::vector<std::uint32_t> chain{0, 1};
  std::vector<BinaryDescriptor> d;
  for (int i = 0; i < 20000; ++i) d.push_back(sample_markov_descriptor(rng, chain, 0.1, 0.9));
  const auto s = estimate_dexel_stats(d);
  const auto j = s.joint(0, 1);
  for (int prev = 0; prev < 2; ++prev) {
    const double n = static_cast<double>(j[2 * prev] + j[2 * prev + 1]);
    const double p1 = static_cast<double>(j[2 * prev + 1]) / n;
    const double expected = prev ? 0.9 : 0.1;
    CHECK(std::abs(p1 - expected) < 3.0 * std::sqrt(expected * (1 - expected) / n));
  }
}

TEST_CASE("stats merge is order independent") {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<BinaryDescriptor> d;
    for (int i = 0; i < 50; ++i) d.push_back(test::random_bits(rng, 70, 0.3));
    const auto whole = estimate_dexel_stats(d);
    const auto cut = 1 + rng.below(d.size() - 1);
    auto a = estimate_dexel_stats(std::span(d).first(cut));
    auto b = estimate_dexel_stats(std::span(d).subspan(cut));
    auto ab = a;
    ab.merge(b);
    b.merge(a);
    CHECK(ab == whole);
    CHECK(b == whole);
    CHECK(estimate_dexel_stats(d, 3) == whole);
  }
}

TEST_CASE("binary entropy examples") {
  CHECK(entropy(0.5, 0.5) == doctest::Approx(1.0));
  CHECK(entropy(1.0, 0.0) == 0.0);
  CHECK(entropy(0.9, 0.1) == doctest::Approx(0.4690).epsilon(1e-4));
}

TEST_CASE("conditional entropy of a copy is zero") {
  const auto s = stats_of({"00", "11", "11", "00", "11"});
  CHECK(std::abs(conditional_entropy(s, 0, 1)) < 1e-9);
}

TEST_CASE("greedy permutation examples") {
  // Dexel 2 constant, dexels 0 and 1 fair and equal.
  const auto s = stats_of({"000", "110", "000", "110"});
  const auto p = learn_permutation(s);
  CHECK(p.order == std::vector<std::uint32_t>{2, 0, 1});
  CHECK(truncated_entropy_bound(s, p.order) == doctest::Approx(1.0));

  std::vector<std::string> all;
  for (int v = 0; v < 16; ++v) {
    std::string r;
    for (int j = 0; j < 4; ++j) r += (v >> j & 1) ? '1' : '0';
    all.push_back(r);
  }
  const auto fair = stats_of(all);
  const auto q = learn_permutation(fair);
  CHECK(q.order == std::vector<std::uint32_t>{0, 1, 2, 3});
  CHECK(truncated_entropy_bound(fair, q.order) == doctest::Approx(4.0));
}

TEST_CASE("truncated bound never exceeds the sum of marginals") {
  Rng rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t P = 2 + rng.below(40);
    std::vector<BinaryDescriptor> d;
    for (int i = 0; i < 200; ++i) d.push_back(test::random_bits(rng, P, rng.uniform()));
    const auto s = estimate_dexel_stats(d);
    double marginal = 0;
    for (std::size_t j = 0; j < P; ++j) marginal += marginal_entropy(s, j);
    CHECK(truncated_entropy_bound(s, learn_permutation(s).order) <= marginal + 1e-9);
  }
}

TEST_CASE("permutation coding round trip and modeled length") {
  Rng rng(8);
  const std::vector<std::uint32_t> chain{3, 1, 0, 2, 5, 4, 7, 6};
  std::vector<BinaryDescriptor> d;
  for (int i = 0; i < 500; ++i) d.push_back(sample_markov_descriptor(rng, chain, 0.2, 0.8));
  const auto perm = learn_permutation(estimate_dexel_stats(d));
  RangeEncoder enc;
  double modeled = 0;
  for (const auto& x : d) {
    perm.encode(enc, x);
    modeled += perm.code_length(x);
  }
  const auto bytes = enc.finish();
  RangeDecoder dec(bytes);
  for (const auto& x : d) CHECK(perm.decode(dec) == x);
  CHECK(8.0 * static_cast<double>(bytes.size()) <= modeled + 64.0);
}

TEST_CASE("range coder examples") {
  const auto fair = SymbolTable::uniform(2);
  const std::vector<std::uint32_t> none;
  const auto flush = range_encode(none, fair, ContextRule::Memoryless);
  CHECK(8 * flush.size() <= 64);
  CHECK(range_decode(flush, 0, fair, ContextRule::Memoryless).empty());

  Rng rng(1);
  std::vector<std::uint32_t> bits(100000);
  for (auto& b : bits) b = static_cast<std::uint32_t>(rng.below(2));
  const auto coded = range_encode(bits, fair, ContextRule::Memoryless);
  CHECK(8 * coded.size() >= 100000);
  CHECK(8 * coded.size() <= 100000 + 64);
  CHECK(range_decode(coded, bits.size(), fair, ContextRule::Memoryless) == bits);

  auto cut = coded;
  cut.resize(cut.size() / 2);
  CHECK_THROWS_AS(range_decode(cut, bits.size(), fair, ContextRule::Memoryless), TruncatedBitstream);
  const std::vector<std::uint32_t> bad{0, 2};
  CHECK_THROWS_AS(range_encode(bad, fair, ContextRule::Memoryless), SymbolError);
}

TEST_CASE("range coder stays within 64 bits of the ideal length") {
  Rng rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    const std::uint32_t A = 2 + static_cast<std::uint32_t>(rng.below(30));
    const bool contextual = trial % 2 == 1;
    const std::uint32_t rows = contextual ? A : 1;
    std::vector<double> p(rows * A);
    for (auto& x : p) x = std::pow(rng.uniform(0.001, 1.0), 4.0);
    const auto table = SymbolTable::from_probabilities(A, p);
    const auto rule = contextual ? ContextRule::PreviousSymbol : ContextRule::Memoryless;
    std::vector<std::uint32_t> s(rng.below(5000));
    for (auto& x : s) x = static_cast<std::uint32_t>(rng.below(A));
    const auto bytes = range_encode(s, table, rule);
    CHECK(range_decode(bytes, s.size(), table, rule) == s);
    CHECK(8.0 * static_cast<double>(bytes.size()) <= ideal_code_length(s, table, rule) + 64.0);
  }
}

TEST_CASE("symbol tables keep every frequency positive") {
  const std::vector<std::uint64_t> counts{0, 0, 1000000, 0};
  const auto t = SymbolTable::from_counts(4, counts);
  std::uint32_t total = 0;
  for (std::uint32_t s = 0; s < 4; ++s) {
    CHECK(t.frequency(0, s) >= 1);
    total += t.frequency(0, s);
  }
  CHECK(total == kProbabilityTotal);
}

TEST_CASE("exp-Golomb through the range coder") {
  RangeEncoder enc;
  const std::vector<std::uint32_t> values{0, 1, 2, 3, 14, 15, 1000, 65535, 4000000};
  for (auto v : values) enc.encode_exp_golomb(v);
  const auto bytes = enc.finish();
  RangeDecoder dec(bytes);
  for (auto v : values) CHECK(dec.decode_exp_golomb() == v);
  CHECK(exp_golomb_bits(0) == 1);
  CHECK(exp_golomb_bits(1) == 3);
  CHECK(exp_golomb_bits(6) == 5);
}
