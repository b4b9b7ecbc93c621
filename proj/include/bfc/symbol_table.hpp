#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bfc/bytes.hpp"

namespace bfc {

inline constexpr std::uint32_t kProbabilityBits = 16;
inline constexpr std::uint32_t kProbabilityTotal = 1u << kProbabilityBits;

// Static model for the range coder: one or more rows (contexts), each a
// distribution over `alphabet` symbols in 16-bit fixed point. The quantized
// frequencies are normative for both encoder and decoder; every entry is at
// least 1 and each row sums to exactly 2^16.
class SymbolTable {
public:
  SymbolTable() = default;

  // counts is rows x alphabet, row-major. Laplace add-1 before normalizing.
  static SymbolTable from_counts(std::uint32_t alphabet, std::span<const std::uint64_t> counts);
  // probabilities is rows x alphabet; each row is normalized, then quantized.
  static SymbolTable from_probabilities(std::uint32_t alphabet, std::span<const double> probabilities);
  static SymbolTable from_frequencies(std::uint32_t alphabet, std::vector<std::uint32_t> frequencies);
  static SymbolTable uniform(std::uint32_t alphabet, std::uint32_t rows = 1);

  std::uint32_t alphabet() const noexcept { return alphabet_; }
  std::uint32_t rows() const noexcept { return rows_; }
  bool empty() const noexcept { return alphabet_ == 0; }

  std::uint32_t frequency(std::uint32_t row, std::uint32_t symbol) const {
    return cumulative_[row * (alphabet_ + 1) + symbol + 1] - cumulative_[row * (alphabet_ + 1) + symbol];
  }
  // cumulative(row, s) for s in [0, alphabet]; cumulative(row, alphabet) == 2^16.
  std::uint32_t cumulative(std::uint32_t row, std::uint32_t symbol) const {
    return cumulative_[row * (alphabet_ + 1) + symbol];
  }
  std::span<const std::uint32_t> cumulative_row(std::uint32_t row) const {
    return std::span(cumulative_).subspan(row * (alphabet_ + 1), alphabet_ + 1);
  }
  double probability(std::uint32_t row, std::uint32_t symbol) const {
    return frequency(row, symbol) / static_cast<double>(kProbabilityTotal);
  }
  // Ideal code length -log2 p under the quantized model.
  double cost_bits(std::uint32_t row, std::uint32_t symbol) const { return costs_[row * alphabet_ + symbol]; }

  void serialize(ByteWriter& w) const;
  static SymbolTable parse(ByteReader& r);

  friend bool operator==(const SymbolTable& a, const SymbolTable& b) {
    return a.alphabet_ == b.alphabet_ && a.rows_ == b.rows_ && a.cumulative_ == b.cumulative_;
  }

private:
  void finish();

  std::uint32_t alphabet_ = 0;
  std::uint32_t rows_ = 0;
  std::vector<std::uint32_t> cumulative_;  // rows x (alphabet + 1)
  std::vector<double> costs_;
};

// Quantizes one distribution to frequencies >= 1 summing to 2^16.
std::vector<std::uint32_t> quantize_distribution(std::span<const double> probabilities);

}  // namespace bfc
