#include "bfc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "bfc/error.hpp"

namespace bfc {

namespace {

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ConfigError(std::string(name) + " must be a probability in [0, 1]");
  }
}

}  // namespace

void validate(const SynthConfig& c) {
  check_probability(c.p_one_after_zero, "p_one_after_zero");
  check_probability(c.p_one_after_one, "p_one_after_one");
  check_probability(c.duplication, "duplication");
  check_probability(c.flip_probability, "flip_probability");
  if (c.descriptor_length == 0) throw ConfigError("descriptor_length must be positive");
  if (c.min_features > c.max_features) throw ConfigError("min_features exceeds max_features");
  if (c.drift < 0 || c.scale_drift < 0 || c.orientation_drift < 0) {
    throw ConfigError("drift amounts must be non-negative");
  }
  if (c.width == 0 || c.height == 0) throw ConfigError("frame dimensions must be positive");
  if (!(c.min_scale > 0.0) || c.max_scale < c.min_scale) throw ConfigError("invalid scale range");
}

BinaryDescriptor sample_markov_descriptor(Rng& rng, std::span<const std::uint32_t> chain,
                                          double p01, double p11) {
  BinaryDescriptor d(chain.size());
  const double denom = p01 + 1.0 - p11;
  const double stationary = denom > 0.0 ? p01 / denom : 0.5;
  bool previous = false;
  for (std::size_t k = 0; k < chain.size(); ++k) {
    const double p = k == 0 ? stationary : (previous ? p11 : p01);
    previous = rng.bernoulli(p);
    d.set_bit(chain[k], previous);
  }
  return d;
}

BinaryDescriptor flip_bits(Rng& rng, const BinaryDescriptor& d, double p) {
  BinaryDescriptor out = d;
  if (p <= 0.0) return out;
  for (std::size_t j = 0; j < d.size(); ++j) {
    if (rng.bernoulli(p)) out.set_bit(j, !d.bit(j));
  }
  return out;
}

FeatureStream synth_stream(const SynthConfig& c) {
  validate(c);
  Rng rng(c.seed);

  std::vector<std::uint32_t> chain(c.descriptor_length);
  std::iota(chain.begin(), chain.end(), 0u);
  if (c.shuffle_chain) {
    for (std::size_t i = chain.size(); i > 1; --i) std::swap(chain[i - 1], chain[rng.below(i)]);
  }

  const std::int32_t max_x = static_cast<std::int32_t>(c.width) * 4 - 1;
  const std::int32_t max_y = static_cast<std::int32_t>(c.height) * 4 - 1;
  const std::int32_t min_s = static_cast<std::int32_t>(std::round(c.min_scale * 4));
  const std::int32_t max_s = static_cast<std::int32_t>(std::round(c.max_scale * 4));

  auto fresh = [&] {
    LocalFeature f;
    f.keypoint.x = static_cast<std::int32_t>(rng.between(0, max_x));
    f.keypoint.y = static_cast<std::int32_t>(rng.between(0, max_y));
    f.keypoint.scale = static_cast<std::int32_t>(rng.between(min_s, max_s));
    f.keypoint.orientation = static_cast<std::uint8_t>(rng.below(kOrientationBins));
    f.descriptor = sample_markov_descriptor(rng, chain, c.p_one_after_zero, c.p_one_after_one);
    return f;
  };
  auto jitter = [&](std::int32_t v, std::int32_t amount, std::int32_t lo, std::int32_t hi) {
    if (amount == 0) return v;
    return std::clamp(v + static_cast<std::int32_t>(rng.between(-amount, amount)), lo, hi);
  };

  FeatureStream s;
  s.descriptor_length = c.descriptor_length;
  s.metadata["width"] = std::to_string(c.width);
  s.metadata["height"] = std::to_string(c.height);
  s.frames.reserve(c.frames);
  for (std::uint32_t n = 0; n < c.frames; ++n) {
    FrameFeatures frame;
    frame.frame_index = n;
    const auto m = static_cast<std::uint32_t>(rng.between(c.min_features, c.max_features));
    const FrameFeatures* prev = n > 0 ? &s.frames.back() : nullptr;
    for (std::uint32_t i = 0; i < m; ++i) {
      if (prev != nullptr && i < prev->features.size() && rng.bernoulli(c.duplication)) {
        LocalFeature f = prev->features[i];
        f.keypoint.x = jitter(f.keypoint.x, c.drift, 0, max_x);
        f.keypoint.y = jitter(f.keypoint.y, c.drift, 0, max_y);
        f.keypoint.scale = jitter(f.keypoint.scale, c.scale_drift, std::max(min_s, 1), max_s);
        if (c.orientation_drift > 0) {
          const auto d = rng.between(-c.orientation_drift, c.orientation_drift);
          f.keypoint.orientation = static_cast<std::uint8_t>(
              ((f.keypoint.orientation + d) % kOrientationBins + kOrientationBins) % kOrientationBins);
        }
        f.descriptor = flip_bits(rng, f.descriptor, c.flip_probability);
        frame.features.push_back(std::move(f));
      } else {
        frame.features.push_back(fresh());
      }
    }
    sort_raster(frame);
    s.frames.push_back(std::move(frame));
  }
  return s;
}

}  // namespace bfc
