#pragma once

#include <cstdint>
#include <span>

#include "bfc/features.hpp"
#include "bfc/rng.hpp"

namespace bfc {

// Generator for temporally correlated feature streams. Descriptor bits follow
// a first-order binary Markov chain (optionally along a shuffled dexel order);
// consecutive frames share a fraction of features that drift and flip bits.
struct SynthConfig {
  std::uint16_t descriptor_length = 512;
  std::uint32_t frames = 30;
  std::uint32_t min_features = 50;
  std::uint32_t max_features = 100;
  double p_one_after_zero = 0.5;  // P(bit=1 | previous bit in chain = 0)
  double p_one_after_one = 0.5;   // P(bit=1 | previous bit in chain = 1)
  bool shuffle_chain = false;
  double duplication = 0.0;       // P(feature copies the prior frame's feature)
  double flip_probability = 0.0;  // per-dexel flip on copied features
  std::int32_t drift = 0;         // max |dx|, |dy| in quarter pixels
  std::int32_t scale_drift = 0;   // max |dscale| in quarter units
  std::int32_t orientation_drift = 0;  // max |dtheta| in pi/16 bins
  std::uint32_t width = 640;
  std::uint32_t height = 480;
  double min_scale = 1.0;  // pixels
  double max_scale = 12.0;
  std::uint64_t seed = 1;
};

// Throws ConfigError on invalid probabilities or ranges.
void validate(const SynthConfig& config);

FeatureStream synth_stream(const SynthConfig& config);

// Descriptor drawn from the configured Markov chain. `chain` lists the dexel
// visiting order.
BinaryDescriptor sample_markov_descriptor(Rng& rng, std::span<const std::uint32_t> chain,
                                          double p_one_after_zero, double p_one_after_one);

// Copies `d` with each bit flipped independently with probability p.
BinaryDescriptor flip_bits(Rng& rng, const BinaryDescriptor& d, double p);

}  // namespace bfc
