#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bfc/descriptor.hpp"

namespace bfc {

inline constexpr int kOrientationBins = 32;

// Keypoint on the quarter-pixel / quarter-scale / pi/16 lattice.
struct QuantizedKeypoint {
  std::int32_t x = 0;
  std::int32_t y = 0;
  std::int32_t scale = 0;
  std::uint8_t orientation = 0;  // [0, 31]

  friend bool operator==(const QuantizedKeypoint&, const QuantizedKeypoint&) = default;
};

struct Keypoint {
  double x = 0;
  double y = 0;
  double scale = 0;
  double orientation = 0;  // radians
};

// Rounds half away from zero at step 1/4 (x, y, scale) and pi/16
// (orientation, taken modulo 2*pi). Throws InvalidKeypoint on non-finite
// input, non-positive scale, or negative quantized coordinates.
QuantizedKeypoint quantize_keypoint(double x, double y, double scale, double orientation);
inline QuantizedKeypoint quantize_keypoint(const Keypoint& k) {
  return quantize_keypoint(k.x, k.y, k.scale, k.orientation);
}
Keypoint dequantize_keypoint(const QuantizedKeypoint& q);

struct LocalFeature {
  QuantizedKeypoint keypoint;
  BinaryDescriptor descriptor;

  friend bool operator==(const LocalFeature&, const LocalFeature&) = default;
};

struct FrameFeatures {
  std::uint32_t frame_index = 0;
  std::vector<LocalFeature> features;

  friend bool operator==(const FrameFeatures&, const FrameFeatures&) = default;
};

struct FeatureStream {
  std::uint16_t descriptor_length = 0;
  std::vector<FrameFeatures> frames;
  std::map<std::string, std::string> metadata;

  friend bool operator==(const FeatureStream&, const FeatureStream&) = default;
};

// Raster order used by the codecs: (y, x, scale, orientation, descriptor).
bool raster_less(const LocalFeature& a, const LocalFeature& b);
void sort_raster(FrameFeatures& frame);

// Throws StreamError when a type invariant is violated.
void validate(const FeatureStream& stream);

}  // namespace bfc
