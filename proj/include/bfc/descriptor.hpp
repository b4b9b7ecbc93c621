#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace bfc {

// Fixed-length bit vector. Bit j lives in bit (j mod 64) of word j/64, which
// matches the container byte layout (bit j = bit (j mod 8) of byte j/8) when
// the words are written little-endian. Padding bits are always zero.
class BinaryDescriptor {
public:
  BinaryDescriptor() = default;
  explicit BinaryDescriptor(std::size_t length)
      : words_((length + 63) / 64, 0), length_(length) {}

  // Bytes in container order; must hold at least ceil(length/8) bytes.
  static BinaryDescriptor from_bytes(std::span<const std::uint8_t> bytes, std::size_t length);
  // Each element is 0 or 1.
  static BinaryDescriptor from_bits(std::span<const std::uint8_t> bits);
  static BinaryDescriptor from_hex(const std::string& hex, std::size_t length);

  std::size_t size() const noexcept { return length_; }
  std::size_t byte_size() const noexcept { return (length_ + 7) / 8; }

  bool bit(std::size_t j) const noexcept { return (words_[j >> 6] >> (j & 63)) & 1u; }
  void set_bit(std::size_t j, bool value) noexcept {
    const std::uint64_t mask = std::uint64_t{1} << (j & 63);
    if (value) {
      words_[j >> 6] |= mask;
    } else {
      words_[j >> 6] &= ~mask;
    }
  }

  std::size_t popcount() const noexcept {
    std::size_t n = 0;
    for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
  }

  std::span<const std::uint64_t> words() const noexcept { return words_; }

  std::vector<std::uint8_t> to_bytes() const;
  void append_bytes(std::vector<std::uint8_t>& out) const;
  std::string to_hex() const;

  BinaryDescriptor operator^(const BinaryDescriptor& other) const;

  friend bool operator==(const BinaryDescriptor&, const BinaryDescriptor&) = default;
  friend auto operator<=>(const BinaryDescriptor&, const BinaryDescriptor&) = default;

private:
  std::vector<std::uint64_t> words_;
  std::size_t length_ = 0;
};

// Number of differing bits. Both descriptors must have the same length.
inline std::size_t hamming(const BinaryDescriptor& a, const BinaryDescriptor& b) noexcept {
  const auto wa = a.words();
  const auto wb = b.words();
  std::size_t d = 0;
  for (std::size_t i = 0; i < wa.size(); ++i) d += static_cast<std::size_t>(std::popcount(wa[i] ^ wb[i]));
  return d;
}

}  // namespace bfc
