#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bfc/symbol_table.hpp"

namespace bfc {

// Byte-oriented range coder: 32-bit range, 33-bit low with carry propagation
// through a pending-byte cache, renormalization one byte at a time whenever the
// range drops below 2^24. Symbol intervals are computed as floor(range * cum /
// 2^16) with a 64-bit product, so the coding loss per symbol is below 2^-24 of
// the range. finish() emits 5 bytes; an empty message is therefore 40 bits.
class RangeEncoder {
public:
  // Interval [cum_lo, cum_hi) in units of 2^-16; cum_lo < cum_hi <= 2^16.
  void encode(std::uint32_t cum_lo, std::uint32_t cum_hi);
  void encode(const SymbolTable& table, std::uint32_t row, std::uint32_t symbol);
  // Binary symbol where zero_frequency is the 16-bit frequency of 0.
  void encode_bit(bool bit, std::uint32_t zero_frequency) {
    if (bit) {
      encode(zero_frequency, kProbabilityTotal);
    } else {
      encode(0, zero_frequency);
    }
  }
  // Equiprobable bits, most significant first. count <= 32.
  void encode_direct(std::uint32_t value, unsigned count);
  // Order-0 exponential Golomb code of `value` through encode_direct.
  void encode_exp_golomb(std::uint32_t value);

  std::vector<std::uint8_t> finish();

private:
  void shift_low();

  std::uint64_t low_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::uint8_t cache_ = 0;
  std::uint64_t cache_size_ = 1;
  std::vector<std::uint8_t> out_;
};

class RangeDecoder {
public:
  // Throws TruncatedBitstream if fewer than the 5 priming bytes are present.
  explicit RangeDecoder(std::span<const std::uint8_t> bytes);

  std::uint32_t decode(const SymbolTable& table, std::uint32_t row);
  bool decode_bit(std::uint32_t zero_frequency);
  std::uint32_t decode_direct(unsigned count);
  std::uint32_t decode_exp_golomb();

  std::size_t consumed() const noexcept { return pos_; }

private:
  std::uint8_t next_byte();
  void normalize();

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
  std::uint32_t code_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
};

inline constexpr unsigned kCoderFlushBits = 40;

// Exp-Golomb code length in bits.
unsigned exp_golomb_bits(std::uint32_t value);

enum class ContextRule {
  Memoryless,      // every symbol coded with row 0
  PreviousSymbol,  // row = previous symbol; the first symbol uses row 0
};

// Throws SymbolError for symbols outside the alphabet or a table whose row
// count does not support the context rule.
std::vector<std::uint8_t> range_encode(std::span<const std::uint32_t> symbols,
                                       const SymbolTable& table, ContextRule rule);
// Throws TruncatedBitstream when the bytes run out before `count` symbols.
std::vector<std::uint32_t> range_decode(std::span<const std::uint8_t> bytes, std::size_t count,
                                        const SymbolTable& table, ContextRule rule);

// Explicit per-symbol contexts (row indices), as used by the inter BoVW coder.
std::vector<std::uint8_t> range_encode_with_contexts(std::span<const std::uint32_t> symbols,
                                                     std::span<const std::uint32_t> contexts,
                                                     const SymbolTable& table);
std::vector<std::uint32_t> range_decode_with_contexts(std::span<const std::uint8_t> bytes,
                                                      std::span<const std::uint32_t> contexts,
                                                      const SymbolTable& table);

// Sum of -log2 p(symbol | context) under the quantized table.
double ideal_code_length(std::span<const std::uint32_t> symbols, const SymbolTable& table,
                         ContextRule rule);

}  // namespace bfc
