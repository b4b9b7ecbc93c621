#include "bfc/local_codec.hpp"

#include <algorithm>
#include <bit>
#include <cstdlib>

#include "bfc/bytes.hpp"
#include "bfc/error.hpp"
#include "bfc/range_coder.hpp"

namespace bfc {

namespace {

constexpr std::uint16_t kEncodedVersion = 1;

std::uint32_t scale_symbol(std::int32_t scale) {
  return static_cast<std::uint32_t>(std::min<std::int32_t>(scale, kScaleAlphabet - 1));
}

double scale_bits(std::int32_t scale, const SymbolTable& table) {
  const auto s = scale_symbol(scale);
  double bits = table.cost_bits(0, s);
  if (s == kScaleAlphabet - 1) bits += exp_golomb_bits(static_cast<std::uint32_t>(scale) - s);
  return bits;
}

std::uint32_t orientation_delta(std::uint8_t theta, std::uint8_t reference) {
  return static_cast<std::uint32_t>((theta - reference + kOrientationBins) % kOrientationBins);
}

bool in_window(const QuantizedKeypoint& k, const QuantizedKeypoint& r, const SearchWindow& w) {
  return std::abs(k.x - r.x) <= w.dx && std::abs(k.y - r.y) <= w.dy &&
         std::abs(k.scale - r.scale) <= w.dscale;
}

unsigned bits_for(std::int64_t max_value) {
  return max_value <= 0 ? 1u : static_cast<unsigned>(std::bit_width(static_cast<std::uint64_t>(max_value)));
}

}  // namespace

const char* to_string(CodingMode mode) {
  switch (mode) {
    case CodingMode::Intra: return "intra";
    case CodingMode::Inter: return "inter";
    case CodingMode::Auto: return "auto";
  }
  return "?";
}

CodingMode parse_coding_mode(const std::string& text) {
  if (text == "intra") return CodingMode::Intra;
  if (text == "inter") return CodingMode::Inter;
  if (text == "auto") return CodingMode::Auto;
  throw ConfigError("unknown coding mode '" + text + "' (expected intra|inter|auto)");
}

LocationFormat location_format_for(const FeatureStream& stream) {
  std::int64_t max_x = -1;
  std::int64_t max_y = -1;
  auto from_meta = [&](const char* key) -> std::int64_t {
    auto it = stream.metadata.find(key);
    if (it == stream.metadata.end()) return -1;
    try {
      const long long v = std::stoll(it->second);
      return v > 0 ? v * 4 - 1 : -1;
    } catch (const std::exception&) {
      throw ConfigError(std::string("metadata '") + key + "' is not an integer");
    }
  };
  max_x = from_meta("width");
  max_y = from_meta("height");
  for (const auto& frame : stream.frames) {
    for (const auto& f : frame.features) {
      max_x = std::max<std::int64_t>(max_x, f.keypoint.x);
      max_y = std::max<std::int64_t>(max_y, f.keypoint.y);
    }
  }
  LocationFormat fmt;
  fmt.x_bits = static_cast<std::uint8_t>(bits_for(max_x));
  fmt.y_bits = static_cast<std::uint8_t>(bits_for(max_y));
  return fmt;
}

EncoderConfig make_encoder_config(const Codebook& codebook, std::uint32_t K, double lambda,
                                  SearchWindow window, CodingMode mode, LocationFormat location) {
  if (!codebook.intra || !codebook.inter) {
    throw ConfigError("codebook lacks the intra-local and inter-local sections");
  }
  EncoderConfig c;
  c.K = K;
  c.lambda = lambda;
  c.window = window;
  c.mode = mode;
  c.location = location;
  c.intra = *codebook.intra;
  c.inter = *codebook.inter;
  if (codebook.ranking) {
    c.selection = codebook.ranking->order;
  } else {
    c.selection.resize(c.intra.source_length);
    for (std::uint32_t j = 0; j < c.selection.size(); ++j) c.selection[j] = j;
  }
  validate(c);
  return c;
}

void validate(const EncoderConfig& c) {
  if (c.K == 0) throw ConfigError("K must be positive");
  if (c.K > c.intra.source_length) {
    throw ConfigError("K=" + std::to_string(c.K) + " exceeds descriptor length " +
                      std::to_string(c.intra.source_length));
  }
  if (c.intra.retained() != c.K || c.inter.retained() != c.K) {
    throw ConfigError("codebook was trained for K=" + std::to_string(c.intra.retained()) +
                      ", not K=" + std::to_string(c.K));
  }
  if (c.selection.size() < c.K) throw ConfigError("dexel selection shorter than K");
  if (!(c.lambda >= 0.0)) throw ConfigError("lambda must be non-negative");
  if (c.window.dx < 0 || c.window.dy < 0 || c.window.dscale < 0) {
    throw ConfigError("search window components must be non-negative");
  }
  if (c.window.dx > c.inter.window.dx || c.window.dy > c.inter.window.dy ||
      c.window.dscale > c.inter.window.dscale) {
    throw ConfigError("search window exceeds the codebook's displacement range");
  }
  if (c.location.x_bits == 0 || c.location.x_bits > 31 || c.location.y_bits == 0 || c.location.y_bits > 31) {
    throw ConfigError("location code widths must be in [1, 31]");
  }
}

std::uint64_t config_digest(const EncoderConfig& c) {
  ByteWriter w;
  w.bytes(section_bytes(c.intra));
  w.bytes(section_bytes(c.inter));
  for (std::uint32_t k = 0; k < c.K; ++k) w.u16(static_cast<std::uint16_t>(c.selection[k]));
  w.u32(c.K);
  w.f64(c.lambda);
  w.i32(c.window.dx);
  w.i32(c.window.dy);
  w.i32(c.window.dscale);
  return fnv1a64(w.buffer());
}

BinaryDescriptor select_dexels(const BinaryDescriptor& descriptor,
                               std::span<const std::uint32_t> selection, std::size_t K) {
  if (K > selection.size()) {
    throw ConfigError("K=" + std::to_string(K) + " exceeds selection of " +
                      std::to_string(selection.size()) + " dexels");
  }
  BinaryDescriptor out(K);
  for (std::size_t k = 0; k < K; ++k) {
    if (selection[k] >= descriptor.size()) throw ConfigError("selection refers past the descriptor");
    out.set_bit(k, descriptor.bit(selection[k]));
  }
  return out;
}

FrameFeatures project_frame(const FrameFeatures& frame, std::span<const std::uint32_t> selection,
                            std::size_t K) {
  FrameFeatures out;
  out.frame_index = frame.frame_index;
  out.features.reserve(frame.features.size());
  for (const auto& f : frame.features) {
    out.features.push_back({f.keypoint, select_dexels(f.descriptor, selection, K)});
  }
  sort_raster(out);
  return out;
}

FeatureStream project_stream(const FeatureStream& stream, std::span<const std::uint32_t> selection,
                             std::size_t K) {
  FeatureStream out;
  out.descriptor_length = static_cast<std::uint16_t>(K);
  out.metadata = stream.metadata;
  out.frames.reserve(stream.frames.size());
  for (const auto& frame : stream.frames) out.frames.push_back(project_frame(frame, selection, K));
  return out;
}

unsigned identifier_bits(std::size_t reference_count) {
  return reference_count <= 1 ? 0u
                              : static_cast<unsigned>(std::bit_width(reference_count - 1));
}

double intra_location_bits(const QuantizedKeypoint& k, const EncoderConfig& c) {
  return c.location.x_bits + c.location.y_bits + scale_bits(k.scale, c.intra.scale) +
         c.intra.orientation.cost_bits(0, k.orientation);
}

double inter_location_bits(const QuantizedKeypoint& k, const QuantizedKeypoint& r,
                           std::size_t reference_count, const EncoderConfig& c) {
  const auto& m = c.inter;
  return identifier_bits(reference_count) +
         m.dx.cost_bits(0, static_cast<std::uint32_t>(k.x - r.x + m.window.dx)) +
         m.dy.cost_bits(0, static_cast<std::uint32_t>(k.y - r.y + m.window.dy)) +
         m.dscale.cost_bits(0, static_cast<std::uint32_t>(k.scale - r.scale + m.window.dscale)) +
         m.dtheta.cost_bits(0, orientation_delta(k.orientation, r.orientation));
}

std::optional<ReferenceMatch> find_reference(const LocalFeature& feature,
                                             const FrameFeatures& reference,
                                             const EncoderConfig& c) {
  std::optional<ReferenceMatch> best;
  const auto n = reference.features.size();
  for (std::size_t l = 0; l < n; ++l) {
    const auto& ref = reference.features[l];
    if (!in_window(feature.keypoint, ref.keypoint, c.window)) continue;
    if (ref.descriptor.size() != feature.descriptor.size()) {
      throw StreamError("reference descriptor length differs from the coded feature");
    }
    const auto d = static_cast<std::uint32_t>(hamming(feature.descriptor, ref.descriptor));
    const double r = inter_location_bits(feature.keypoint, ref.keypoint, n, c);
    const double cost = d + c.lambda * r;
    if (!best || cost < best->cost) best = ReferenceMatch{static_cast<std::uint32_t>(l), cost, d, r};
  }
  return best;
}

EncodedFrame encode_frame(const FrameFeatures& input, const FrameFeatures* reference,
                          const EncoderConfig& c) {
  FrameFeatures frame = input;
  sort_raster(frame);
  const bool use_reference =
      c.mode != CodingMode::Intra && reference != nullptr && !reference->features.empty();
  const std::uint32_t x_limit = 1u << c.location.x_bits;
  const std::uint32_t y_limit = 1u << c.location.y_bits;
  const std::size_t ref_count = use_reference ? reference->features.size() : 0;
  const unsigned id_bits = identifier_bits(ref_count);

  EncodedFrame out;
  out.frame_index = frame.frame_index;
  out.feature_count = static_cast<std::uint32_t>(frame.features.size());
  out.has_reference = use_reference;
  out.decisions.reserve(frame.features.size());
  out.rates.reserve(frame.features.size());

  RangeEncoder enc;
  double attributed = 0.0;
  for (const auto& f : frame.features) {
    if (f.descriptor.size() != c.K) {
      throw StreamError("descriptor of length " + std::to_string(f.descriptor.size()) +
                        " in frame " + std::to_string(frame.frame_index) + ", expected K=" +
                        std::to_string(c.K));
    }
    const auto& k = f.keypoint;
    if (k.x < 0 || k.y < 0 || static_cast<std::uint32_t>(k.x) >= x_limit ||
        static_cast<std::uint32_t>(k.y) >= y_limit) {
      throw StreamError("keypoint outside the coded location range in frame " +
                        std::to_string(frame.frame_index));
    }

    FeatureDecision decision;
    const double intra_loc = intra_location_bits(k, c);
    const double intra_desc = c.intra.descriptor.code_length(f.descriptor);
    decision.intra_cost = intra_loc + intra_desc;

    std::optional<ReferenceMatch> match;
    BinaryDescriptor residual;
    double inter_desc = 0.0;
    if (use_reference) {
      match = find_reference(f, *reference, c);
      if (match) {
        residual = f.descriptor ^ reference->features[match->index].descriptor;
        inter_desc = c.inter.residual.code_length(residual);
        decision.inter_cost = match->location_bits + inter_desc;
        decision.reference = match->index;
        const bool inter = c.mode == CodingMode::Inter || decision.inter_cost < decision.intra_cost;
        decision.mode = inter ? FeatureMode::Inter : FeatureMode::Intra;
      }
    }

    FeatureRate rate;
    if (use_reference) {
      enc.encode_direct(decision.mode == FeatureMode::Inter ? 1u : 0u, 1);
      rate.mode_bits = 1.0;
    }
    if (decision.mode == FeatureMode::Intra) {
      enc.encode_direct(static_cast<std::uint32_t>(k.x), c.location.x_bits);
      enc.encode_direct(static_cast<std::uint32_t>(k.y), c.location.y_bits);
      const auto s = scale_symbol(k.scale);
      enc.encode(c.intra.scale, 0, s);
      if (s == kScaleAlphabet - 1) enc.encode_exp_golomb(static_cast<std::uint32_t>(k.scale) - s);
      enc.encode(c.intra.orientation, 0, k.orientation);
      c.intra.descriptor.encode(enc, f.descriptor);
      rate.location_bits = intra_loc;
      rate.descriptor_bits = intra_desc;
    } else {
      const auto& r = reference->features[match->index].keypoint;
      const auto& m = c.inter;
      enc.encode_direct(match->index, id_bits);
      enc.encode(m.dx, 0, static_cast<std::uint32_t>(k.x - r.x + m.window.dx));
      enc.encode(m.dy, 0, static_cast<std::uint32_t>(k.y - r.y + m.window.dy));
      enc.encode(m.dscale, 0, static_cast<std::uint32_t>(k.scale - r.scale + m.window.dscale));
      enc.encode(m.dtheta, 0, orientation_delta(k.orientation, r.orientation));
      m.residual.encode(enc, residual);
      rate.identifier_bits = id_bits;
      rate.location_bits = match->location_bits - id_bits;
      rate.descriptor_bits = inter_desc;
    }
    attributed += rate.total();
    out.decisions.push_back(decision);
    out.rates.push_back(rate);
  }
  out.payload = enc.finish();
  out.flush_bits = out.payload_bits() - attributed;
  return out;
}

FrameFeatures decode_frame(const EncodedFrame& encoded, const FrameFeatures* reference,
                           const EncoderConfig& c) {
  if (encoded.has_reference && (reference == nullptr || reference->features.empty())) {
    throw StreamError("frame " + std::to_string(encoded.frame_index) +
                      " is inter-coded but no reference frame is available");
  }
  const std::size_t ref_count = encoded.has_reference ? reference->features.size() : 0;
  const unsigned id_bits = identifier_bits(ref_count);

  FrameFeatures out;
  out.frame_index = encoded.frame_index;
  out.features.reserve(encoded.feature_count);
  RangeDecoder dec(encoded.payload);
  for (std::uint32_t i = 0; i < encoded.feature_count; ++i) {
    const bool inter = encoded.has_reference && dec.decode_direct(1) == 1;
    LocalFeature f;
    auto& k = f.keypoint;
    if (!inter) {
      k.x = static_cast<std::int32_t>(dec.decode_direct(c.location.x_bits));
      k.y = static_cast<std::int32_t>(dec.decode_direct(c.location.y_bits));
      const auto s = dec.decode(c.intra.scale, 0);
      k.scale = static_cast<std::int32_t>(s);
      if (s == kScaleAlphabet - 1) {
        const auto extra = dec.decode_exp_golomb();
        if (extra > static_cast<std::uint32_t>(std::numeric_limits<std::int32_t>::max()) - s) {
          throw TruncatedBitstream("corrupt scale escape");
        }
        k.scale += static_cast<std::int32_t>(extra);
      }
      k.orientation = static_cast<std::uint8_t>(dec.decode(c.intra.orientation, 0));
      f.descriptor = c.intra.descriptor.decode(dec);
    } else {
      const auto id = dec.decode_direct(id_bits);
      if (id >= ref_count) throw TruncatedBitstream("reference identifier out of range");
      const auto& ref = reference->features[id];
      const auto& m = c.inter;
      k.x = ref.keypoint.x + static_cast<std::int32_t>(dec.decode(m.dx, 0)) - m.window.dx;
      k.y = ref.keypoint.y + static_cast<std::int32_t>(dec.decode(m.dy, 0)) - m.window.dy;
      k.scale = ref.keypoint.scale + static_cast<std::int32_t>(dec.decode(m.dscale, 0)) - m.window.dscale;
      k.orientation = static_cast<std::uint8_t>((ref.keypoint.orientation + dec.decode(m.dtheta, 0)) %
                                                kOrientationBins);
      if (k.x < 0 || k.y < 0 || k.scale < 0) throw TruncatedBitstream("corrupt displacement");
      if (ref.descriptor.size() != c.K) throw StreamError("reference descriptor length differs from K");
      f.descriptor = m.residual.decode(dec) ^ ref.descriptor;
    }
    out.features.push_back(std::move(f));
  }
  return out;
}

EncodedStream encode_stream(const FeatureStream& stream, const EncoderConfig& c) {
  validate(c);
  validate(stream);
  if (stream.descriptor_length != c.intra.source_length) {
    throw StreamError("stream descriptor length " + std::to_string(stream.descriptor_length) +
                      " differs from codebook length " + std::to_string(c.intra.source_length));
  }
  EncodedStream out;
  out.mode = c.mode;
  out.source_length = stream.descriptor_length;
  out.K = static_cast<std::uint16_t>(c.K);
  out.location = c.location;
  out.lambda = c.lambda;
  out.window = c.window;
  out.digest = config_digest(c);
  out.metadata = stream.metadata;
  out.frames.reserve(stream.frames.size());
  std::optional<FrameFeatures> previous;
  for (const auto& frame : stream.frames) {
    auto projected = project_frame(frame, c.selection, c.K);
    out.frames.push_back(encode_frame(projected, previous ? &*previous : nullptr, c));
    // Lossless coding: the decoder's reconstruction equals the projection.
    previous = std::move(projected);
  }
  return out;
}

EncoderConfig decoder_config(const EncodedStream& encoded, const Codebook& codebook) {
  EncoderConfig c = make_encoder_config(codebook, encoded.K, encoded.lambda, encoded.window,
                                        encoded.mode, encoded.location);
  if (c.intra.source_length != encoded.source_length) {
    throw StreamError("stream was encoded from P=" + std::to_string(encoded.source_length) +
                      " but the codebook expects P=" + std::to_string(c.intra.source_length));
  }
  if (config_digest(c) != encoded.digest) {
    throw StreamError("codebook digest does not match the encoded stream");
  }
  return c;
}

FrameFeatures StreamDecoder::decode_next(const EncodedFrame& frame) {
  auto decoded = decode_frame(frame, previous_ ? &*previous_ : nullptr, config_);
  previous_ = decoded;
  return decoded;
}

FeatureStream decode_stream(const EncodedStream& encoded, const Codebook& codebook) {
  StreamDecoder decoder(decoder_config(encoded, codebook));
  FeatureStream out;
  out.descriptor_length = encoded.K;
  out.metadata = encoded.metadata;
  out.frames.reserve(encoded.frames.size());
  for (const auto& frame : encoded.frames) out.frames.push_back(decoder.decode_next(frame));
  return out;
}

std::vector<std::uint8_t> serialize_encoded_stream(const EncodedStream& s) {
  ByteWriter w;
  w.magic("BFE1");
  w.u16(kEncodedVersion);
  w.u8(static_cast<std::uint8_t>(s.mode));
  w.u16(s.source_length);
  w.u16(s.K);
  w.u8(s.location.x_bits);
  w.u8(s.location.y_bits);
  w.f64(s.lambda);
  w.u16(static_cast<std::uint16_t>(s.window.dx));
  w.u16(static_cast<std::uint16_t>(s.window.dy));
  w.u16(static_cast<std::uint16_t>(s.window.dscale));
  w.u64(s.digest);
  w.u32(static_cast<std::uint32_t>(s.metadata.size()));
  for (const auto& [key, value] : s.metadata) {
    w.string(key);
    w.string(value);
  }
  w.u32(static_cast<std::uint32_t>(s.frames.size()));
  for (const auto& f : s.frames) {
    w.u32(f.frame_index);
    w.u32(f.feature_count);
    w.u8(f.has_reference ? 1 : 0);
    w.u32(static_cast<std::uint32_t>(f.payload.size()));
    w.bytes(f.payload);
  }
  return w.take();
}

EncodedStream parse_encoded_stream(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic("BFE1");
  auto at = r.offset();
  if (r.u16() != kEncodedVersion) throw FormatError("unsupported BFE version", at);
  EncodedStream s;
  at = r.offset();
  const auto mode = r.u8();
  if (mode > 2) throw FormatError("invalid coding mode", at);
  s.mode = static_cast<CodingMode>(mode);
  s.source_length = r.u16();
  s.K = r.u16();
  s.location.x_bits = r.u8();
  s.location.y_bits = r.u8();
  s.lambda = r.f64();
  s.window.dx = r.u16();
  s.window.dy = r.u16();
  s.window.dscale = r.u16();
  s.digest = r.u64();
  const auto meta = r.u32();
  for (std::uint32_t i = 0; i < meta; ++i) {
    auto key = r.string();
    s.metadata[key] = r.string();
  }
  const auto n = r.u32();
  if (n > r.remaining() / kEncodedFrameHeaderBytes) throw FormatError("frame count exceeds file size", r.offset());
  s.frames.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    EncodedFrame f;
    f.frame_index = r.u32();
    f.feature_count = r.u32();
    at = r.offset();
    const auto flag = r.u8();
    if (flag > 1) throw FormatError("invalid reference flag", at);
    f.has_reference = flag == 1;
    const auto len = r.u32();
    auto payload = r.bytes(len);
    f.payload.assign(payload.begin(), payload.end());
    s.frames.push_back(std::move(f));
  }
  if (!r.at_end()) throw FormatError("trailing bytes after the last frame", r.offset());
  return s;
}

StreamRate summarize_rate(const EncodedStream& stream) {
  StreamRate total;
  for (const auto& f : stream.frames) {
    for (std::size_t i = 0; i < f.rates.size(); ++i) {
      const auto& r = f.rates[i];
      total.mode_bits += r.mode_bits;
      total.location_bits += r.location_bits;
      total.identifier_bits += r.identifier_bits;
      total.descriptor_bits += r.descriptor_bits;
      if (f.decisions[i].mode == FeatureMode::Inter) {
        ++total.inter_features;
      } else {
        ++total.intra_features;
      }
    }
    total.features += f.feature_count;
    total.flush_bits += f.flush_bits;
    total.payload_bits += f.payload_bits();
  }
  return total;
}

}  // namespace bfc
