#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bfc/bovw.hpp"
#include "bfc/codebook.hpp"
#include "bfc/local_codec.hpp"

namespace bfc {

// Index q maps to symbol min(q, 15); symbol 15 is followed by an
// exp-Golomb code of q - 15. The inter context of element j is the symbol
// of the previous frame's element j.
std::uint32_t global_symbol(std::uint32_t index) noexcept;

// Memoryless and conditional tables from quantized training sequences
// (each sequence is consecutive frames of one video). Laplace-smoothed.
// Throws EmptyTrainingSet without descriptors, DimensionError on mixed V,
// ConfigError when a descriptor's step differs from `delta`.
GlobalModel train_global_model(std::span<const std::vector<QuantizedGlobal>> sequences,
                               std::uint32_t words, double delta);

// Modeled bits, excluding coder flush.
double global_intra_bits(const QuantizedGlobal& q, const GlobalModel& model);
double global_inter_bits(const QuantizedGlobal& q, const QuantizedGlobal& previous, const GlobalModel& model);

// Each call yields one self-contained range-coded message.
std::vector<std::uint8_t> encode_global_intra(const QuantizedGlobal& q, const GlobalModel& model);
QuantizedGlobal decode_global_intra(std::span<const std::uint8_t> bytes, const GlobalModel& model);
std::vector<std::uint8_t> encode_global_inter(const QuantizedGlobal& q, const QuantizedGlobal& previous,
                                              const GlobalModel& model);
QuantizedGlobal decode_global_inter(std::span<const std::uint8_t> bytes, const QuantizedGlobal& previous,
                                    const GlobalModel& model);

std::uint64_t global_model_digest(const GlobalModel& model);

struct EncodedGlobalFrame {
  std::uint32_t frame_index = 0;
  bool inter = false;
  std::vector<std::uint8_t> payload;
};

// "BGE1" stream. Intra codes every frame alone; inter predicts every frame
// but the first from its predecessor; auto keeps the shorter of the two per
// frame.
struct EncodedGlobalStream {
  CodingMode mode = CodingMode::Intra;
  std::uint32_t words = 0;
  double delta = 0.0;
  std::uint64_t digest = 0;
  std::vector<EncodedGlobalFrame> frames;

  std::size_t payload_bytes() const noexcept {
    std::size_t n = 0;
    for (const auto& f : frames) n += f.payload.size();
    return n;
  }
};

inline constexpr std::size_t kGlobalFrameHeaderBytes = 9;

EncodedGlobalStream encode_global_stream(std::span<const QuantizedGlobal> sequence,
                                         std::span<const std::uint32_t> frame_indices, CodingMode mode,
                                         const GlobalModel& model);
// Throws StreamError on a model/digest mismatch.
std::vector<QuantizedGlobal> decode_global_stream(const EncodedGlobalStream& stream, const GlobalModel& model);

std::vector<std::uint8_t> serialize_global_stream(const EncodedGlobalStream& stream);
EncodedGlobalStream parse_global_stream(std::span<const std::uint8_t> bytes);

}  // namespace bfc
