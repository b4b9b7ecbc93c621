#include <cmath>
#include <numbers>

#include "bfc/bytes.hpp"
#include "bfc/error.hpp"
#include "bfc/stream_io.hpp"
#include "bfc/synth.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace bfc;
using bfc::test::random_bits;

TEST_CASE("quantize_keypoint examples") {
  CHECK(quantize_keypoint(10.0, 20.0, 2.0, 0.0) == QuantizedKeypoint{40, 80, 8, 0});
  CHECK(quantize_keypoint(10.13, 20.0, 2.0, std::numbers::pi) == QuantizedKeypoint{41, 80, 8, 16});
  CHECK(quantize_keypoint(0.0, 0.0, 1.0, 2.0 * std::numbers::pi) == QuantizedKeypoint{0, 0, 4, 0});
  CHECK_THROWS_AS(quantize_keypoint(NAN, 0.0, 1.0, 0.0), InvalidKeypoint);
  CHECK_THROWS_AS(quantize_keypoint(1.0, 1.0, 0.0, 0.0), InvalidKeypoint);
  CHECK_THROWS_AS(quantize_keypoint(-5.0, 1.0, 1.0, 0.0), InvalidKeypoint);
}

TEST_CASE("quantize_keypoint rounds half away from zero") {
  // 10.125 / 0.25 = 40.5 exactly.
  CHECK(quantize_keypoint(10.125, 0.0, 1.0, 0.0).x == 41);
  CHECK(quantize_keypoint(0.0, 0.0, 1.0, -std::numbers::pi / 16.0).orientation == 31);
}

TEST_CASE("dequantize then quantize is the identity") {
  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    QuantizedKeypoint q{static_cast<std::int32_t>(rng.below(4000)), static_cast<std::int32_t>(rng.below(4000)),
                        static_cast<std::int32_t>(1 + rng.below(300)), static_cast<std::uint8_t>(rng.below(32))};
    CHECK(quantize_keypoint(dequantize_keypoint(q)) == q);
  }
}

TEST_CASE("orientation maps [0, 2pi) onto exactly 32 bins") {
  std::vector<int> seen(33, 0);
  for (int i = 0; i < 100000; ++i) {
    const double o = std::nextafter(2.0 * std::numbers::pi, 0.0) * i / 99999.0;
    ++seen[quantize_keypoint(1.0, 1.0, 1.0, o).orientation];
  }
  for (int b = 0; b < 32; ++b) CHECK(seen[b] > 0);
  CHECK(seen[32] == 0);
}

TEST_CASE("BFS1 size and round trip") {
  FeatureStream s;
  s.descriptor_length = 512;
  Rng rng(3);
  for (std::uint32_t n = 0; n < 2; ++n) {
    FrameFeatures f;
    f.frame_index = n;
    for (int i = 0; i < 3; ++i) f.features.push_back(test::feature(4 * i, 8 * i, 5, 3, random_bits(rng, 512)));
    sort_raster(f);
    s.frames.push_back(f);
  }
  const auto bytes = serialize_stream(s);
  CHECK(bytes.size() == 12 + 2 * 8 + 6 * (13 + 64));
  CHECK(parse_stream(bytes) == s);
  CHECK(serialize_stream(parse_stream(bytes)) == bytes);
  CHECK(stream_from_json(stream_to_json(s)) == s);
}

TEST_CASE("BFS1 edge cases") {
  FeatureStream empty;
  empty.descriptor_length = 256;
  CHECK(parse_stream(serialize_stream(empty)).frames.empty());

  FeatureStream one = empty;
  one.frames.push_back(FrameFeatures{0, {}});
  CHECK(serialize_stream(one).size() == 12 + 8);

  auto bytes = serialize_stream(one);
  bytes[0] = 'X';
  CHECK_THROWS_AS(parse_stream(bytes), FormatError);
  bytes = serialize_stream(one);
  bytes.pop_back();
  try {
    parse_stream(bytes);
    FAIL("truncated stream accepted");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("byte offset") != std::string::npos);
  }
}

TEST_CASE("BFS1 rejects a descriptor length mismatch") {
  FeatureStream s;
  s.descriptor_length = 16;
  s.frames.push_back(FrameFeatures{0, {test::feature(0, 0, 4, 0, test::bits_of("10101"))}});
  CHECK_THROWS(serialize_stream(s));
}

TEST_CASE("synth_stream determinism and duplication") {
  SynthConfig c;
  c.frames = 6;
  c.seed = 7;
  CHECK(synth_stream(c) == synth_stream(c));
  c.duplication = 1.0;
  c.min_features = c.max_features = 40;
  const auto s = synth_stream(c);
  for (const auto& f : s.frames) CHECK(f.features == s.frames[0].features);
}

TEST_CASE("synth_stream marginal is fair under independent fair dexels") {
  SynthConfig c;
  c.frames = 20;
  c.min_features = c.max_features = 10;
  c.descriptor_length = 512;
  const auto s = synth_stream(c);
  double ones = 0, n = 0;
  for (const auto& f : s.frames) {
    for (const auto& x : f.features) {
      ones += static_cast<double>(x.descriptor.popcount());
      n += 512;
    }
  }
  CHECK(n >= 1e5);
  CHECK(std::abs(ones / n - 0.5) < 3.0 * std::sqrt(0.25 / n));
}

TEST_CASE("flip_bits at 0.5 yields fair bits") {
  Rng rng(4);
  BinaryDescriptor zero(100000);
  const auto d = flip_bits(rng, zero, 0.5);
  const double p = static_cast<double>(d.popcount()) / 1e5;
  CHECK(std::abs(p - 0.5) < 3.0 * std::sqrt(0.25 / 1e5));
}

TEST_CASE("descriptor bytes and hex round trip") {
  Rng rng(5);
  for (std::size_t P : {1u, 7u, 8u, 63u, 64u, 65u, 512u}) {
    const auto d = random_bits(rng, P);
    CHECK(BinaryDescriptor::from_bytes(d.to_bytes(), P) == d);
    CHECK(BinaryDescriptor::from_hex(d.to_hex(), P) == d);
  }
  const auto d = test::bits_of("10000001");
  CHECK(d.to_bytes() == std::vector<std::uint8_t>{0x81});
}
