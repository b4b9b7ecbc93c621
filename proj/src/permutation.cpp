#include "bfc/permutation.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "bfc/error.hpp"

namespace bfc {

namespace {

constexpr double kTieTolerance = 1e-12;

std::uint32_t zero_frequency_from_counts(std::uint64_t zeros, std::uint64_t ones) {
  const std::array<double, 2> p{static_cast<double>(zeros) + 1.0, static_cast<double>(ones) + 1.0};
  return quantize_distribution(p)[0];
}

}  // namespace

void CodingPermutation::refresh() {
  costs_.assign(4 * order.size(), 0.0);
  for (std::size_t k = 0; k < order.size(); ++k) {
    for (int prev = 0; prev < 2; ++prev) {
      const double f0 = zero_frequency(k, prev != 0);
      costs_[4 * k + 2 * prev + 0] = kProbabilityBits - std::log2(f0);
      costs_[4 * k + 2 * prev + 1] = kProbabilityBits - std::log2(kProbabilityTotal - f0);
    }
  }
}

double CodingPermutation::code_length(const BinaryDescriptor& d) const {
  if (d.size() != order.size()) throw DimensionError("descriptor length differs from permutation size");
  double bits = 0.0;
  bool previous = false;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const bool b = d.bit(order[k]);
    bits += cost(k, previous, b);
    previous = b;
  }
  return bits;
}

void CodingPermutation::encode(RangeEncoder& enc, const BinaryDescriptor& d) const {
  if (d.size() != order.size()) throw DimensionError("descriptor length differs from permutation size");
  bool previous = false;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const bool b = d.bit(order[k]);
    enc.encode_bit(b, zero_frequency(k, previous));
    previous = b;
  }
}

BinaryDescriptor CodingPermutation::decode(RangeDecoder& dec) const {
  BinaryDescriptor d(order.size());
  bool previous = false;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const bool b = dec.decode_bit(zero_frequency(k, previous));
    d.set_bit(order[k], b);
    previous = b;
  }
  return d;
}

void CodingPermutation::serialize(ByteWriter& w) const {
  w.u16(static_cast<std::uint16_t>(order.size()));
  for (auto j : order) w.u16(static_cast<std::uint16_t>(j));
  w.u16(static_cast<std::uint16_t>(first_zero));
  for (std::size_t k = 1; k < order.size(); ++k) {
    w.u16(static_cast<std::uint16_t>(zero_after[k][0]));
    w.u16(static_cast<std::uint16_t>(zero_after[k][1]));
  }
}

CodingPermutation CodingPermutation::parse(ByteReader& r) {
  const auto at = r.offset();
  CodingPermutation p;
  const auto n = r.u16();
  p.order.resize(n);
  std::vector<bool> seen(n, false);
  for (auto& j : p.order) {
    j = r.u16();
    if (j >= n || seen[j]) throw FormatError("coding order is not a permutation", at);
    seen[j] = true;
  }
  auto check = [&](std::uint32_t f) {
    if (f == 0) throw FormatError("zero probability in coding table", at);
    return f;
  };
  p.first_zero = check(r.u16());
  p.zero_after.assign(n, {kProbabilityTotal / 2, kProbabilityTotal / 2});
  for (std::size_t k = 1; k < n; ++k) {
    p.zero_after[k][0] = check(r.u16());
    p.zero_after[k][1] = check(r.u16());
  }
  p.refresh();
  return p;
}

CodingPermutation learn_permutation(const DexelStats& stats) {
  const std::size_t n = stats.length();
  if (stats.sample_count() == 0) throw EmptyTrainingSet("cannot learn a coding order from empty stats");
  CodingPermutation p;
  p.order.reserve(n);
  std::vector<bool> used(n, false);

  std::size_t best = 0;
  double best_h = marginal_entropy(stats, 0);
  for (std::size_t j = 1; j < n; ++j) {
    const double h = marginal_entropy(stats, j);
    if (h < best_h - kTieTolerance) {
      best = j;
      best_h = h;
    }
  }
  p.order.push_back(static_cast<std::uint32_t>(best));
  used[best] = true;

  while (p.order.size() < n) {
    const std::size_t previous = p.order.back();
    std::size_t pick = n;
    double pick_h = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (used[j]) continue;
      const double h = conditional_entropy(stats, j, previous);
      if (pick == n || h < pick_h - kTieTolerance) {
        pick = j;
        pick_h = h;
      }
    }
    p.order.push_back(static_cast<std::uint32_t>(pick));
    used[pick] = true;
  }

  const auto m = stats.marginal(p.order[0]);
  p.first_zero = zero_frequency_from_counts(m[0], m[1]);
  p.zero_after.assign(n, {kProbabilityTotal / 2, kProbabilityTotal / 2});
  for (std::size_t k = 1; k < n; ++k) {
    // joint(cur, prev) indexed [2 * cur + prev].
    const auto c = stats.joint(p.order[k], p.order[k - 1]);
    p.zero_after[k][0] = zero_frequency_from_counts(c[0], c[2]);
    p.zero_after[k][1] = zero_frequency_from_counts(c[1], c[3]);
  }
  p.refresh();
  return p;
}

double truncated_entropy_bound(const DexelStats& stats, std::span<const std::uint32_t> order) {
  if (order.empty()) return 0.0;
  double bound = marginal_entropy(stats, order[0]);
  for (std::size_t k = 1; k < order.size(); ++k) bound += conditional_entropy(stats, order[k], order[k - 1]);
  return bound;
}

CodingPermutation fair_permutation(std::size_t length) {
  CodingPermutation p;
  p.order.resize(length);
  std::iota(p.order.begin(), p.order.end(), 0u);
  p.zero_after.assign(length, {kProbabilityTotal / 2, kProbabilityTotal / 2});
  p.refresh();
  return p;
}

}  // namespace bfc
