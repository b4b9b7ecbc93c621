#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bfc/descriptor.hpp"
#include "bfc/features.hpp"
#include "bfc/rng.hpp"

namespace bfc::test {

inline BinaryDescriptor random_bits(Rng& rng, std::size_t P, double p_one = 0.5) {
  std::vector<std::uint8_t> bits(P);
  for (auto& b : bits) b = rng.bernoulli(p_one) ? 1 : 0;
  return BinaryDescriptor::from_bits(bits);
}

inline BinaryDescriptor bits_of(const std::string& s) {
  std::vector<std::uint8_t> v;
  for (char c : s) v.push_back(c == '1' ? 1 : 0);
  return BinaryDescriptor::from_bits(v);
}

inline LocalFeature feature(std::int32_t x, std::int32_t y, std::int32_t scale, std::uint8_t o,
                            BinaryDescriptor d) {
  return LocalFeature{QuantizedKeypoint{x, y, scale, o}, std::move(d)};
}

// Scratch directory removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("bfc_test_" + tag + "_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::filesystem::path operator/(const std::string& name) const { return path / name; }
};

}  // namespace bfc::test
