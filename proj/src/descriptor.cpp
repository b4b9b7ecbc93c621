#include "bfc/descriptor.hpp"

#include <stdexcept>

#include "bfc/error.hpp"

namespace bfc {

BinaryDescriptor BinaryDescriptor::from_bytes(std::span<const std::uint8_t> bytes,
                                              std::size_t length) {
  BinaryDescriptor d(length);
  const std::size_t nbytes = d.byte_size();
  if (bytes.size() < nbytes) throw DimensionError("descriptor byte buffer too short");
  for (std::size_t i = 0; i < nbytes; ++i) {
    d.words_[i >> 3] |= std::uint64_t{bytes[i]} << (8 * (i & 7));
  }
  // Clear padding so equality stays bit-exact on the declared length.
  if (length % 64 != 0 && !d.words_.empty()) {
    d.words_.back() &= (std::uint64_t{1} << (length % 64)) - 1;
  }
  return d;
}

BinaryDescriptor BinaryDescriptor::from_bits(std::span<const std::uint8_t> bits) {
  BinaryDescriptor d(bits.size());
  for (std::size_t j = 0; j < bits.size(); ++j) d.set_bit(j, bits[j] != 0);
  return d;
}

BinaryDescriptor BinaryDescriptor::from_hex(const std::string& hex, std::size_t length) {
  const std::size_t nbytes = (length + 7) / 8;
  if (hex.size() != 2 * nbytes) {
    throw DimensionError("hex descriptor has " + std::to_string(hex.size()) +
                         " digits, expected " + std::to_string(2 * nbytes));
  }
  auto nibble = [](char c) -> std::uint8_t {
    if (c >= '0' && c <= '9') return static_cast<std::uint8_t>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<std::uint8_t>(c - 'a' + 10);
    if (c >= 'A' && c <= 'F') return static_cast<std::uint8_t>(c - 'A' + 10);
    throw DimensionError(std::string("invalid hex digit '") + c + "'");
  };
  std::vector<std::uint8_t> bytes(nbytes);
  for (std::size_t i = 0; i < nbytes; ++i) {
    bytes[i] = static_cast<std::uint8_t>((nibble(hex[2 * i]) << 4) | nibble(hex[2 * i + 1]));
  }
  auto d = from_bytes(bytes, length);
  if (d.to_bytes() != bytes) throw DimensionError("hex descriptor sets bits beyond its length");
  return d;
}

std::vector<std::uint8_t> BinaryDescriptor::to_bytes() const {
  std::vector<std::uint8_t> out;
  out.reserve(byte_size());
  append_bytes(out);
  return out;
}

void BinaryDescriptor::append_bytes(std::vector<std::uint8_t>& out) const {
  const std::size_t nbytes = byte_size();
  for (std::size_t i = 0; i < nbytes; ++i) {
    out.push_back(static_cast<std::uint8_t>(words_[i >> 3] >> (8 * (i & 7))));
  }
}

std::string BinaryDescriptor::to_hex() const {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s;
  for (auto b : to_bytes()) {
    s.push_back(digits[b >> 4]);
    s.push_back(digits[b & 15]);
  }
  return s;
}

BinaryDescriptor BinaryDescriptor::operator^(const BinaryDescriptor& other) const {
  if (other.length_ != length_) throw DimensionError("xor of descriptors with different lengths");
  BinaryDescriptor r(length_);
  for (std::size_t i = 0; i < words_.size(); ++i) r.words_[i] = words_[i] ^ other.words_[i];
  return r;
}

}  // namespace bfc
