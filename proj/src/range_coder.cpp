#include "bfc/range_coder.hpp"

#include <bit>
#include <string>

#include "bfc/error.hpp"

namespace bfc {

namespace {
constexpr std::uint32_t kTop = 1u << 24;

std::uint32_t scaled(std::uint32_t range, std::uint32_t cum) {
  return static_cast<std::uint32_t>((static_cast<std::uint64_t>(range) * cum) >> kProbabilityBits);
}
}  // namespace

void RangeEncoder::shift_low() {
  if (static_cast<std::uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
    const auto carry = static_cast<std::uint8_t>(low_ >> 32);
    std::uint8_t pending = cache_;
    do {
      out_.push_back(static_cast<std::uint8_t>(pending + carry));
      pending = 0xFF;
    } while (--cache_size_ != 0);
    cache_ = static_cast<std::uint8_t>(low_ >> 24);
  }
  ++cache_size_;
  low_ = (low_ & 0x00FFFFFFu) << 8;
}

void RangeEncoder::encode(std::uint32_t cum_lo, std::uint32_t cum_hi) {
  const std::uint32_t lo = scaled(range_, cum_lo);
  const std::uint32_t hi = scaled(range_, cum_hi);
  low_ += lo;
  range_ = hi - lo;
  while (range_ < kTop) {
    range_ <<= 8;
    shift_low();
  }
}

void RangeEncoder::encode(const SymbolTable& table, std::uint32_t row, std::uint32_t symbol) {
  if (symbol >= table.alphabet()) {
    throw SymbolError("symbol " + std::to_string(symbol) + " outside alphabet of size " +
                      std::to_string(table.alphabet()));
  }
  if (row >= table.rows()) throw SymbolError("context row " + std::to_string(row) + " outside table");
  encode(table.cumulative(row, symbol), table.cumulative(row, symbol + 1));
}

void RangeEncoder::encode_direct(std::uint32_t value, unsigned count) {
  for (unsigned i = count; i-- > 0;) {
    range_ >>= 1;
    if ((value >> i) & 1u) low_ += range_;
    while (range_ < kTop) {
      range_ <<= 8;
      shift_low();
    }
  }
}

unsigned exp_golomb_bits(std::uint32_t value) {
  const auto width = static_cast<unsigned>(std::bit_width(static_cast<std::uint64_t>(value) + 1));
  return 2 * width - 1;
}

void RangeEncoder::encode_exp_golomb(std::uint32_t value) {
  const std::uint64_t v = static_cast<std::uint64_t>(value) + 1;
  const auto width = static_cast<unsigned>(std::bit_width(v));
  encode_direct(0, width - 1);
  // The leading 1 of v terminates the zero prefix.
  for (unsigned i = width; i-- > 0;) encode_direct(static_cast<std::uint32_t>((v >> i) & 1u), 1);
}

std::vector<std::uint8_t> RangeEncoder::finish() {
  for (int i = 0; i < 5; ++i) shift_low();
  auto out = std::move(out_);
  *this = RangeEncoder{};
  return out;
}

RangeDecoder::RangeDecoder(std::span<const std::uint8_t> bytes) : in_(bytes) {
  for (int i = 0; i < 5; ++i) code_ = (code_ << 8) | next_byte();
}

std::uint8_t RangeDecoder::next_byte() {
  if (pos_ >= in_.size()) throw TruncatedBitstream("range decoder ran past the end of its input");
  return in_[pos_++];
}

void RangeDecoder::normalize() {
  while (range_ < kTop) {
    code_ = (code_ << 8) | next_byte();
    range_ <<= 8;
  }
}

std::uint32_t RangeDecoder::decode(const SymbolTable& table, std::uint32_t row) {
  if (row >= table.rows()) throw SymbolError("context row " + std::to_string(row) + " outside table");
  const auto cum = table.cumulative_row(row);
  // Largest s with scaled(range, cum[s]) <= code.
  std::uint32_t lo = 0;
  std::uint32_t hi = table.alphabet();
  while (hi - lo > 1) {
    const std::uint32_t mid = (lo + hi) / 2;
    if (scaled(range_, cum[mid]) <= code_) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const std::uint32_t start = scaled(range_, cum[lo]);
  const std::uint32_t end = scaled(range_, cum[lo + 1]);
  if (code_ >= end) throw TruncatedBitstream("corrupt range-coded data");
  code_ -= start;
  range_ = end - start;
  normalize();
  return lo;
}

bool RangeDecoder::decode_bit(std::uint32_t zero_frequency) {
  const std::uint32_t bound = scaled(range_, zero_frequency);
  bool bit = false;
  if (code_ < bound) {
    range_ = bound;
  } else {
    code_ -= bound;
    range_ -= bound;
    bit = true;
  }
  normalize();
  return bit;
}

std::uint32_t RangeDecoder::decode_direct(unsigned count) {
  std::uint32_t value = 0;
  for (unsigned i = 0; i < count; ++i) {
    range_ >>= 1;
    std::uint32_t bit = 0;
    if (code_ >= range_) {
      code_ -= range_;
      bit = 1;
    }
    value = (value << 1) | bit;
    normalize();
  }
  return value;
}

std::uint32_t RangeDecoder::decode_exp_golomb() {
  unsigned zeros = 0;
  while (decode_direct(1) == 0) {
    if (++zeros > 32) throw TruncatedBitstream("corrupt exp-Golomb code");
  }
  std::uint64_t v = 1;
  for (unsigned i = 0; i < zeros; ++i) v = (v << 1) | decode_direct(1);
  return static_cast<std::uint32_t>(v - 1);
}

namespace {

void check_rule(const SymbolTable& table, ContextRule rule) {
  if (table.empty()) throw SymbolError("empty symbol table");
  if (rule == ContextRule::PreviousSymbol && table.rows() != table.alphabet()) {
    throw SymbolError("previous-symbol context needs one row per symbol");
  }
}

}  // namespace

std::vector<std::uint8_t> range_encode(std::span<const std::uint32_t> symbols,
                                       const SymbolTable& table, ContextRule rule) {
  check_rule(table, rule);
  RangeEncoder enc;
  std::uint32_t row = 0;
  for (auto s : symbols) {
    enc.encode(table, row, s);
    if (rule == ContextRule::PreviousSymbol) row = s;
  }
  return enc.finish();
}

std::vector<std::uint32_t> range_decode(std::span<const std::uint8_t> bytes, std::size_t count,
                                        const SymbolTable& table, ContextRule rule) {
  check_rule(table, rule);
  RangeDecoder dec(bytes);
  std::vector<std::uint32_t> out;
  out.reserve(count);
  std::uint32_t row = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const auto s = dec.decode(table, row);
    out.push_back(s);
    if (rule == ContextRule::PreviousSymbol) row = s;
  }
  return out;
}

std::vector<std::uint8_t> range_encode_with_contexts(std::span<const std::uint32_t> symbols,
                                                     std::span<const std::uint32_t> contexts,
                                                     const SymbolTable& table) {
  if (contexts.size() != symbols.size()) throw SymbolError("context count differs from symbol count");
  RangeEncoder enc;
  for (std::size_t i = 0; i < symbols.size(); ++i) enc.encode(table, contexts[i], symbols[i]);
  return enc.finish();
}

std::vector<std::uint32_t> range_decode_with_contexts(std::span<const std::uint8_t> bytes,
                                                      std::span<const std::uint32_t> contexts,
                                                      const SymbolTable& table) {
  RangeDecoder dec(bytes);
  std::vector<std::uint32_t> out;
  out.reserve(contexts.size());
  for (auto c : contexts) out.push_back(dec.decode(table, c));
  return out;
}

double ideal_code_length(std::span<const std::uint32_t> symbols, const SymbolTable& table,
                         ContextRule rule) {
  check_rule(table, rule);
  double bits = 0.0;
  std::uint32_t row = 0;
  for (auto s : symbols) {
    if (s >= table.alphabet()) throw SymbolError("symbol outside alphabet");
    bits += table.cost_bits(row, s);
    if (rule == ContextRule::PreviousSymbol) row = s;
  }
  return bits;
}

}  // namespace bfc
