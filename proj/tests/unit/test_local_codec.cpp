#include <algorithm>
#include <cmath>

#include "bfc/error.hpp"
#include "bfc/local_codec.hpp"
#include "bfc/local_training.hpp"
#include "bfc/synth.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace bfc;
using bfc::test::bits_of;

namespace {

Codebook trained(std::uint32_t K, double duplication = 0.8, std::uint64_t seed = 100) {
  SynthConfig c;
  c.descriptor_length = 128;
  c.frames = 12;
  c.duplication = duplication;
  c.flip_probability = 0.03;
  c.drift = 6;
  c.seed = seed;
  const std::vector<FeatureStream> training{synth_stream(c)};
  return train_local_codebook(training, std::nullopt, LocalTrainingConfig{K, {}, 1.0, 1});
}

FeatureStream sample_stream(std::uint64_t seed, double duplication = 0.8) {
  SynthConfig c;
  c.descriptor_length = 128;
  c.frames = 10;
  c.duplication = duplication;
  c.flip_probability = 0.03;
  c.drift = 6;
  c.seed = seed;
  return synth_stream(c);
}

EncoderConfig config_for(const Codebook& book, std::uint32_t K, CodingMode mode, double lambda = 1.0) {
  return make_encoder_config(book, K, lambda, SearchWindow{}, mode, LocationFormat{12, 12});
}

}  // namespace

TEST_CASE("select_dexels examples") {
  const auto d = bits_of("0101");  // bit0=0, bit1=1, bit2=0, bit3=1
  const std::vector<std::uint32_t> sel{3, 1, 0, 2};
  CHECK(select_dexels(d, sel, 2) == bits_of("11"));
  const std::vector<std::uint32_t> id{0, 1, 2, 3};
  CHECK(select_dexels(d, id, 4) == d);
  CHECK_THROWS_AS(select_dexels(d, std::vector<std::uint32_t>{0}, 2), ConfigError);
}

TEST_CASE("find_reference examples") {
  const auto book = trained(16);
  const auto cfg = config_for(book, 16, CodingMode::Auto, 0.0);
  Rng rng(3);
  FrameFeatures ref;
  CHECK_FALSE(find_reference(test::feature(100, 100, 8, 0, test::random_bits(rng, 16)), ref, cfg).has_value());

  const auto probe = test::feature(100, 100, 8, 0, test::random_bits(rng, 16));
  ref.features.push_back(test::feature(90, 90, 8, 1, test::random_bits(rng, 16)));
  ref.features.push_back(probe);
  sort_raster(ref);
  const auto cfg1 = config_for(book, 16, CodingMode::Auto, 1.0);
  const auto m = find_reference(probe, ref, cfg1);
  REQUIRE(m.has_value());
  CHECK(ref.features[m->index] == probe);
  CHECK(m->hamming == 0);
  CHECK(m->cost == doctest::Approx(inter_location_bits(probe.keypoint, probe.keypoint, 2, cfg1)));
}

TEST_CASE("find_reference with lambda 0 matches an exhaustive scan") {
  const auto book = trained(16);
  const auto cfg = config_for(book, 16, CodingMode::Auto, 0.0);
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    FrameFeatures ref;
    for (int i = 0; i < 5; ++i) {
      ref.features.push_back(test::feature(static_cast<std::int32_t>(100 + rng.below(40)),
                                           static_cast<std::int32_t>(100 + rng.below(40)), 8, 0,
                                           test::random_bits(rng, 16)));
    }
    sort_raster(ref);
    const auto probe = test::feature(120, 120, 8, 0, test::random_bits(rng, 16));
    std::size_t best = 99, best_d = 99;
    for (std::size_t l = 0; l < ref.features.size(); ++l) {
      const auto d = hamming(probe.descriptor, ref.features[l].descriptor);
      if (d < best_d) {
        best = l;
        best_d = d;
      }
    }
    const auto m = find_reference(probe, ref, cfg);
    REQUIRE(m.has_value());
    CHECK(m->index == best);
  }
}

TEST_CASE("identical frame codes fully INTER with zero residual") {
  const auto book = trained(64, 0.95);
  auto s = sample_stream(5, 0.0);
  FrameFeatures frame = s.frames[0];
  sort_raster(frame);
  const auto cfg = config_for(book, 64, CodingMode::Auto, 0.1);
  const auto projected = project_frame(frame, cfg.selection, 64);
  const auto enc = encode_frame(projected, &projected, cfg);
  double desc = 0;
  for (std::size_t i = 0; i < enc.decisions.size(); ++i) {
    CHECK(enc.decisions[i].mode == FeatureMode::Inter);
    desc += enc.rates[i].descriptor_bits;
  }
  CHECK(desc / static_cast<double>(enc.decisions.size()) < 0.1 * 64);
  CHECK(decode_frame(enc, &projected, cfg) == projected);
}

TEST_CASE("frames without a reference are all INTRA and decode alone") {
  const auto book = trained(32);
  const auto cfg = config_for(book, 32, CodingMode::Auto);
  const auto s = project_stream(sample_stream(6), cfg.selection, 32);
  const auto enc = encode_frame(s.frames[0], nullptr, cfg);
  CHECK_FALSE(enc.has_reference);
  for (const auto& d : enc.decisions) CHECK(d.mode == FeatureMode::Intra);
  CHECK(decode_frame(enc, nullptr, cfg) == s.frames[0]);
}

TEST_CASE("decoding needs the reference when records are INTER") {
  const auto book = trained(32);
  const auto cfg = config_for(book, 32, CodingMode::Inter);
  const auto s = project_stream(sample_stream(7, 0.9), cfg.selection, 32);
  const auto enc = encode_frame(s.frames[1], &s.frames[0], cfg);
  CHECK(enc.has_reference);
  CHECK_THROWS_AS(decode_frame(enc, nullptr, cfg), StreamError);
  auto cut = enc;
  cut.payload.resize(2);
  CHECK_THROWS_AS(decode_frame(cut, &s.frames[0], cfg), TruncatedBitstream);
}

TEST_CASE("streaming decode uses only the previous decoded frame") {
  const auto book = trained(32);
  SynthConfig c;
  c.descriptor_length = 128;
  c.frames = 50;
  c.duplication = 0.8;
  c.min_features = 20;
  c.max_features = 40;
  c.seed = 8;
  const auto stream = synth_stream(c);
  const auto cfg = config_for(book, 32, CodingMode::Auto);
  const auto encoded = encode_stream(stream, cfg);
  StreamDecoder decoder(decoder_config(encoded, book));
  const auto expected = project_stream(stream, cfg.selection, 32);
  for (std::size_t n = 0; n < encoded.frames.size(); ++n) {
    CHECK(decoder.decode_next(encoded.frames[n]) == expected.frames[n]);
  }
}

TEST_CASE("mode decision picks the cheaper modeled cost and rates add up") {
  const auto book = trained(64);
  for (std::uint64_t seed = 20; seed < 26; ++seed) {
    for (double lambda : {0.0, 0.5, 1.0, 4.0}) {
      const auto stream = sample_stream(seed);
      const auto cfg = config_for(book, 64, CodingMode::Auto, lambda);
      const auto encoded = encode_stream(stream, cfg);
      for (const auto& f : encoded.frames) {
        double sum = f.flush_bits;
        for (std::size_t i = 0; i < f.decisions.size(); ++i) {
          const auto& d = f.decisions[i];
          const double chosen = d.mode == FeatureMode::Inter ? d.inter_cost : d.intra_cost;
          const double other = d.mode == FeatureMode::Inter ? d.intra_cost : d.inter_cost;
          CHECK(chosen <= other);
          sum += f.rates[i].total();
        }
        CHECK(sum == doctest::Approx(f.payload_bits()).epsilon(1e-12));
      }
      CHECK(decode_stream(parse_encoded_stream(serialize_encoded_stream(encoded)), book).frames ==
            project_stream(stream, cfg.selection, 64).frames);
    }
  }
}

TEST_CASE("encoded stream validation") {
  const auto book = trained(32);
  CHECK_THROWS_AS(config_for(book, 64, CodingMode::Auto), ConfigError);
  auto bytes = serialize_encoded_stream(encode_stream(sample_stream(9), config_for(book, 32, CodingMode::Auto)));
  auto bad = bytes;
  bad[1] = 'X';
  CHECK_THROWS_AS(parse_encoded_stream(bad), FormatError);
  bad = bytes;
  bad.resize(bad.size() - 3);
  CHECK_THROWS_AS(parse_encoded_stream(bad), FormatError);
  const auto other = trained(32, 0.5, 999);
  CHECK_THROWS_AS(decode_stream(parse_encoded_stream(bytes), other), StreamError);
}
