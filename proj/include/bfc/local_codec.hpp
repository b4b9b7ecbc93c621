#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bfc/codebook.hpp"
#include "bfc/features.hpp"

namespace bfc {

enum class CodingMode : std::uint8_t { Intra = 0, Inter = 1, Auto = 2 };
enum class FeatureMode : std::uint8_t { Intra = 0, Inter = 1 };

const char* to_string(CodingMode mode);
CodingMode parse_coding_mode(const std::string& text);  // throws ConfigError

// Fixed-length code widths for intra keypoint coordinates (quarter pixels).
struct LocationFormat {
  std::uint8_t x_bits = 12;
  std::uint8_t y_bits = 12;

  friend bool operator==(const LocationFormat&, const LocationFormat&) = default;
};

// Widths from "width"/"height" metadata (pixels) when present, else from the
// largest coordinate in the stream.
LocationFormat location_format_for(const FeatureStream& stream);

struct EncoderConfig {
  std::uint32_t K = 0;
  double lambda = 1.0;  // bits per Hamming unit
  SearchWindow window;
  CodingMode mode = CodingMode::Auto;
  LocationFormat location;
  std::vector<std::uint32_t> selection;  // dexel ranking; first K are retained
  LocalIntraModel intra;
  LocalInterModel inter;
};

// Builds a config from a trained codebook. K must match the codebook.
EncoderConfig make_encoder_config(const Codebook& codebook, std::uint32_t K, double lambda,
                                  SearchWindow window, CodingMode mode, LocationFormat location);

// Throws ConfigError on inconsistent K, lambda < 0, or a window larger than
// the codebook's displacement tables.
void validate(const EncoderConfig& config);

// Hash of both local models, K, lambda and the search window.
std::uint64_t config_digest(const EncoderConfig& config);

// Bit k of the result is input bit selection[k]. Throws ConfigError when the
// selection is shorter than K or refers past the descriptor.
BinaryDescriptor select_dexels(const BinaryDescriptor& descriptor,
                               std::span<const std::uint32_t> selection, std::size_t K);
FrameFeatures project_frame(const FrameFeatures& frame, std::span<const std::uint32_t> selection,
                            std::size_t K);
// Projects every descriptor and puts each frame in raster order, which is
// exactly what the decoder reproduces.
FeatureStream project_stream(const FeatureStream& stream, std::span<const std::uint32_t> selection,
                             std::size_t K);

struct ReferenceMatch {
  std::uint32_t index = 0;        // into the raster-ordered reference frame
  double cost = 0.0;              // Hamming + lambda * location bits
  std::uint32_t hamming = 0;
  double location_bits = 0.0;     // identifier + displacement
};

// Best reference within the search window. `reference` must be in raster
// order with K-dexel descriptors. Returns nullopt when no candidate lies in
// the window.
std::optional<ReferenceMatch> find_reference(const LocalFeature& feature,
                                             const FrameFeatures& reference,
                                             const EncoderConfig& config);

// Modeled bit costs of the two coding routes.
double intra_location_bits(const QuantizedKeypoint& k, const EncoderConfig& config);
double inter_location_bits(const QuantizedKeypoint& k, const QuantizedKeypoint& ref,
                           std::size_t reference_count, const EncoderConfig& config);
unsigned identifier_bits(std::size_t reference_count);

struct FeatureRate {
  double mode_bits = 0.0;
  double location_bits = 0.0;    // keypoint or displacement
  double identifier_bits = 0.0;  // reference id (inter only)
  double descriptor_bits = 0.0;  // descriptor or residual

  double total() const noexcept { return mode_bits + location_bits + identifier_bits + descriptor_bits; }
};

struct FeatureDecision {
  FeatureMode mode = FeatureMode::Intra;
  std::uint32_t reference = 0;
  double intra_cost = 0.0;
  double inter_cost = std::numeric_limits<double>::infinity();  // inf: no candidate
};

struct EncodedFrame {
  std::uint32_t frame_index = 0;
  std::uint32_t feature_count = 0;
  bool has_reference = false;          // records carry a mode flag
  std::vector<std::uint8_t> payload;   // one range-coded message
  // Encoder-side report; not part of the bitstream.
  std::vector<FeatureDecision> decisions;
  std::vector<FeatureRate> rates;
  double flush_bits = 0.0;  // payload bits not attributed to any feature

  double payload_bits() const noexcept { return 8.0 * static_cast<double>(payload.size()); }
};

// Features are coded in raster order. Throws StreamError when descriptor
// lengths differ from K or coordinates exceed the location format.
EncodedFrame encode_frame(const FrameFeatures& frame, const FrameFeatures* reference,
                          const EncoderConfig& config);

// Throws StreamError when the frame needs a reference that is not supplied and
// TruncatedBitstream on corrupt or short payloads.
FrameFeatures decode_frame(const EncodedFrame& encoded, const FrameFeatures* reference,
                           const EncoderConfig& config);

// "BFE1" stream: header carries everything the decoder needs besides the
// codebook, plus the digest that ties the two together.
struct EncodedStream {
  CodingMode mode = CodingMode::Auto;
  std::uint16_t source_length = 0;
  std::uint16_t K = 0;
  LocationFormat location;
  double lambda = 1.0;
  SearchWindow window;
  std::uint64_t digest = 0;
  std::map<std::string, std::string> metadata;
  std::vector<EncodedFrame> frames;
};

inline constexpr std::size_t kEncodedFrameHeaderBytes = 13;

EncodedStream encode_stream(const FeatureStream& stream, const EncoderConfig& config);
// Rebuilds the config from the stream header and `codebook`; throws
// StreamError on digest mismatch.
FeatureStream decode_stream(const EncodedStream& encoded, const Codebook& codebook);
EncoderConfig decoder_config(const EncodedStream& encoded, const Codebook& codebook);

// Frame-at-a-time decoder that keeps only the last decoded frame.
class StreamDecoder {
public:
  explicit StreamDecoder(EncoderConfig config) : config_(std::move(config)) {}
  FrameFeatures decode_next(const EncodedFrame& frame);

private:
  EncoderConfig config_;
  std::optional<FrameFeatures> previous_;
};

std::vector<std::uint8_t> serialize_encoded_stream(const EncodedStream& stream);
EncodedStream parse_encoded_stream(std::span<const std::uint8_t> bytes);

struct StreamRate {
  std::size_t features = 0;
  std::size_t intra_features = 0;
  std::size_t inter_features = 0;
  double mode_bits = 0.0;
  double location_bits = 0.0;
  double identifier_bits = 0.0;
  double descriptor_bits = 0.0;
  double flush_bits = 0.0;
  double payload_bits = 0.0;

  double bits_per_feature() const noexcept {
    return features == 0 ? 0.0 : payload_bits / static_cast<double>(features);
  }
};

StreamRate summarize_rate(const EncodedStream& stream);

}  // namespace bfc
