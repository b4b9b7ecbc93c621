#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "bfc/boosting.hpp"
#include "bfc/permutation.hpp"
#include "bfc/symbol_table.hpp"

namespace bfc {

// Candidate neighbourhood for inter prediction, in quantized units.
struct SearchWindow {
  std::int32_t dx = 64;
  std::int32_t dy = 64;
  std::int32_t dscale = 4;

  friend bool operator==(const SearchWindow&, const SearchWindow&) = default;
};

inline constexpr std::uint32_t kScaleAlphabet = 256;  // last symbol escapes to exp-Golomb
inline constexpr std::uint32_t kGlobalAlphabet = 16;  // last symbol escapes to exp-Golomb

struct LocalIntraModel {
  std::uint16_t source_length = 0;  // P before dexel selection
  CodingPermutation descriptor;     // over the K retained dexels
  SymbolTable scale;
  SymbolTable orientation;

  std::size_t retained() const noexcept { return descriptor.size(); }
};

struct LocalInterModel {
  SearchWindow window;  // displacement tables span [-w, w]
  CodingPermutation residual;
  SymbolTable dx;
  SymbolTable dy;
  SymbolTable dscale;
  SymbolTable dtheta;

  std::size_t retained() const noexcept { return residual.size(); }
};

// Per-step memoryless table and per-element table conditioned on the previous
// frame's index for the same visual word.
struct GlobalModel {
  std::uint32_t words = 0;
  double delta = 0.0;
  SymbolTable intra;
  SymbolTable inter;
};

enum class SectionKind : std::uint8_t {
  IntraLocal = 1,
  InterLocal = 2,
  IntraBovw = 3,
  InterBovw = 4,
  DexelRanking = 5,
};

// "BFCB" sidecar shared by encoder and decoder.
struct Codebook {
  std::optional<DexelRanking> ranking;
  std::optional<LocalIntraModel> intra;
  std::optional<LocalInterModel> inter;
  std::vector<GlobalModel> globals;

  const GlobalModel* find_global(std::uint32_t words, double delta) const;
  void put_global(GlobalModel model);
};

std::vector<std::uint8_t> serialize_codebook(const Codebook& codebook);
Codebook parse_codebook(std::span<const std::uint8_t> bytes);
Codebook read_codebook(const std::filesystem::path& path);
void write_codebook(const Codebook& codebook, const std::filesystem::path& path);

// Bytes of a single section payload (used for config digests).
std::vector<std::uint8_t> section_bytes(const LocalIntraModel& model);
std::vector<std::uint8_t> section_bytes(const LocalInterModel& model);

}  // namespace bfc
