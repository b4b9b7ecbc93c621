#include "bfc/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>

#include "bfc/error.hpp"

namespace bfc {

namespace {

constexpr double kOrientationStep = std::numbers::pi / 16.0;

std::int32_t quarter_steps(double v, const char* name) {
  const double q = std::round(v * 4.0);
  if (q < 0.0 || q > 2147483647.0) {
    throw InvalidKeypoint(std::string(name) + " out of range: " + std::to_string(v));
  }
  return static_cast<std::int32_t>(q);
}

}  // namespace

QuantizedKeypoint quantize_keypoint(double x, double y, double scale, double orientation) {
  if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(scale) ||
      !std::isfinite(orientation)) {
    throw InvalidKeypoint("non-finite keypoint component");
  }
  if (scale <= 0.0) throw InvalidKeypoint("scale must be positive");

  QuantizedKeypoint q;
  q.x = quarter_steps(x, "x");
  q.y = quarter_steps(y, "y");
  q.scale = quarter_steps(scale, "scale");

  double theta = std::fmod(orientation, 2.0 * std::numbers::pi);
  if (theta < 0.0) theta += 2.0 * std::numbers::pi;
  const auto bin = static_cast<long>(std::round(theta / kOrientationStep));
  q.orientation = static_cast<std::uint8_t>(bin % kOrientationBins);
  return q;
}

Keypoint dequantize_keypoint(const QuantizedKeypoint& q) {
  return {q.x / 4.0, q.y / 4.0, q.scale / 4.0, q.orientation * kOrientationStep};
}

bool raster_less(const LocalFeature& a, const LocalFeature& b) {
  const auto& ka = a.keypoint;
  const auto& kb = b.keypoint;
  if (std::tie(ka.y, ka.x, ka.scale, ka.orientation) !=
      std::tie(kb.y, kb.x, kb.scale, kb.orientation)) {
    return std::tie(ka.y, ka.x, ka.scale, ka.orientation) <
           std::tie(kb.y, kb.x, kb.scale, kb.orientation);
  }
  return a.descriptor < b.descriptor;
}

void sort_raster(FrameFeatures& frame) {
  std::stable_sort(frame.features.begin(), frame.features.end(), raster_less);
}

void validate(const FeatureStream& stream) {
  bool first = true;
  std::uint32_t previous = 0;
  for (const auto& frame : stream.frames) {
    if (!first && frame.frame_index <= previous) {
      throw StreamError("frame indices must be strictly increasing (frame " +
                        std::to_string(frame.frame_index) + " after " +
                        std::to_string(previous) + ")");
    }
    first = false;
    previous = frame.frame_index;
    for (const auto& f : frame.features) {
      if (f.descriptor.size() != stream.descriptor_length) {
        throw StreamError("descriptor length " + std::to_string(f.descriptor.size()) +
                          " in frame " + std::to_string(frame.frame_index) +
                          " differs from stream length " +
                          std::to_string(stream.descriptor_length));
      }
      const auto& k = f.keypoint;
      if (k.x < 0 || k.y < 0 || k.scale < 0 || k.orientation >= kOrientationBins) {
        throw StreamError("keypoint out of range in frame " + std::to_string(frame.frame_index));
      }
    }
  }
}

}  // namespace bfc
