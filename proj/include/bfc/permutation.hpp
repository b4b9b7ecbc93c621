#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "bfc/bytes.hpp"
#include "bfc/dexel_stats.hpp"
#include "bfc/range_coder.hpp"

namespace bfc {

// Greedy dexel coding order plus the first-order Markov model along it.
// first_zero is the 16-bit frequency of 0 for the first coded dexel;
// zero_after[k] = {freq of 0 given previous coded bit 0, given previous 1}
// for positions k >= 1 (entry 0 is unused and kept at 2^15).
struct CodingPermutation {
  std::vector<std::uint32_t> order;
  std::uint32_t first_zero = kProbabilityTotal / 2;
  std::vector<std::array<std::uint32_t, 2>> zero_after;

  std::size_t size() const noexcept { return order.size(); }

  // Cost in bits of coding `bit` at position k after `previous`.
  double cost(std::size_t k, bool previous, bool bit) const {
    return costs_[4 * k + 2 * static_cast<std::size_t>(previous) + static_cast<std::size_t>(bit)];
  }
  // Modeled bits of a whole descriptor (natural dexel order, length = size()).
  double code_length(const BinaryDescriptor& d) const;

  void encode(RangeEncoder& enc, const BinaryDescriptor& d) const;
  BinaryDescriptor decode(RangeDecoder& dec) const;

  // Recomputes the cost lookup; call after editing the public fields.
  void refresh();
  void serialize(ByteWriter& w) const;
  static CodingPermutation parse(ByteReader& r);

  friend bool operator==(const CodingPermutation& a, const CodingPermutation& b) {
    return a.order == b.order && a.first_zero == b.first_zero && a.zero_after == b.zero_after;
  }

private:
  std::uint32_t zero_frequency(std::size_t k, bool previous) const {
    return k == 0 ? first_zero : zero_after[k][previous ? 1 : 0];
  }
  std::vector<double> costs_;
};

// Greedy order: first the dexel of minimum entropy, then repeatedly the unused
// dexel of minimum conditional entropy given the last chosen one. Entropies
// use unsmoothed frequencies; a candidate must beat the incumbent by more than
// 1e-12 bits, so ties go to the lowest index. The Markov tables use Laplace
// smoothing on the pair counts.
CodingPermutation learn_permutation(const DexelStats& stats);

// H(first) + sum_k H(order[k] | order[k-1]) with unsmoothed estimates.
double truncated_entropy_bound(const DexelStats& stats, std::span<const std::uint32_t> order);

// Identity order with all tables at 1/2; useful when no training data exists.
CodingPermutation fair_permutation(std::size_t length);

}  // namespace bfc
