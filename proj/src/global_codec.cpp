#include "bfc/global_codec.hpp"

#include <algorithm>
#include <cmath>

#include "bfc/bytes.hpp"
#include "bfc/error.hpp"
#include "bfc/range_coder.hpp"

namespace bfc {

namespace {

constexpr std::uint16_t kGlobalStreamVersion = 1;
constexpr std::uint32_t kEscape = kGlobalAlphabet - 1;

void check_model(const GlobalModel& model, const QuantizedGlobal& q, bool inter) {
  if (q.indices.size() != model.words) {
    throw DimensionError("descriptor has " + std::to_string(q.indices.size()) + " words, model expects " +
                         std::to_string(model.words));
  }
  const auto& table = inter ? model.inter : model.intra;
  if (table.alphabet() != kGlobalAlphabet) {
    throw ConfigError(std::string("codebook has no ") + (inter ? "inter" : "intra") + " BoVW table for V=" +
                      std::to_string(model.words));
  }
}

void encode_index(RangeEncoder& enc, const SymbolTable& table, std::uint32_t row, std::uint32_t q) {
  const auto s = global_symbol(q);
  enc.encode(table, row, s);
  if (s == kEscape) enc.encode_exp_golomb(q - kEscape);
}

std::uint32_t decode_index(RangeDecoder& dec, const SymbolTable& table, std::uint32_t row) {
  const auto s = dec.decode(table, row);
  if (s != kEscape) return s;
  const auto extra = dec.decode_exp_golomb();
  if (extra > 0xFFFFFFFFu - kEscape) throw TruncatedBitstream("corrupt escape code");
  return kEscape + extra;
}

double index_bits(const SymbolTable& table, std::uint32_t row, std::uint32_t q) {
  const auto s = global_symbol(q);
  return table.cost_bits(row, s) + (s == kEscape ? exp_golomb_bits(q - kEscape) : 0.0);
}

}  // namespace

std::uint32_t global_symbol(std::uint32_t index) noexcept { return std::min(index, kEscape); }

GlobalModel train_global_model(std::span<const std::vector<QuantizedGlobal>> sequences, std::uint32_t words,
                               double delta) {
  std::vector<std::uint64_t> intra(kGlobalAlphabet, 0);
  std::vector<std::uint64_t> inter(kGlobalAlphabet * kGlobalAlphabet, 0);
  std::size_t seen = 0;
  for (const auto& seq : sequences) {
    for (std::size_t n = 0; n < seq.size(); ++n) {
      const auto& q = seq[n];
      if (q.indices.size() != words) throw DimensionError("training descriptor has the wrong dimension");
      if (q.delta != delta) throw ConfigError("training descriptor quantized with a different step");
      ++seen;
      for (std::size_t j = 0; j < words; ++j) {
        const auto s = global_symbol(q.indices[j]);
        ++intra[s];
        if (n > 0) ++inter[global_symbol(seq[n - 1].indices[j]) * kGlobalAlphabet + s];
      }
    }
  }
  if (seen == 0) throw EmptyTrainingSet("no quantized global descriptors to train on");
  GlobalModel m;
  m.words = words;
  m.delta = delta;
  m.intra = SymbolTable::from_counts(kGlobalAlphabet, intra);
  m.inter = SymbolTable::from_counts(kGlobalAlphabet, inter);
  return m;
}

double global_intra_bits(const QuantizedGlobal& q, const GlobalModel& model) {
  check_model(model, q, false);
  double bits = 0.0;
  for (auto v : q.indices) bits += index_bits(model.intra, 0, v);
  return bits;
}

double global_inter_bits(const QuantizedGlobal& q, const QuantizedGlobal& previous, const GlobalModel& model) {
  check_model(model, q, true);
  check_model(model, previous, true);
  double bits = 0.0;
  for (std::size_t j = 0; j < q.indices.size(); ++j) {
    bits += index_bits(model.inter, global_symbol(previous.indices[j]), q.indices[j]);
  }
  return bits;
}

std::vector<std::uint8_t> encode_global_intra(const QuantizedGlobal& q, const GlobalModel& model) {
  check_model(model, q, false);
  RangeEncoder enc;
  for (auto v : q.indices) encode_index(enc, model.intra, 0, v);
  return enc.finish();
}

QuantizedGlobal decode_global_intra(std::span<const std::uint8_t> bytes, const GlobalModel& model) {
  QuantizedGlobal q;
  q.delta = model.delta;
  q.indices.resize(model.words);
  RangeDecoder dec(bytes);
  for (auto& v : q.indices) v = decode_index(dec, model.intra, 0);
  return q;
}

std::vector<std::uint8_t> encode_global_inter(const QuantizedGlobal& q, const QuantizedGlobal& previous,
                                              const GlobalModel& model) {
  check_model(model, q, true);
  check_model(model, previous, true);
  RangeEncoder enc;
  for (std::size_t j = 0; j < q.indices.size(); ++j) {
    encode_index(enc, model.inter, global_symbol(previous.indices[j]), q.indices[j]);
  }
  return enc.finish();
}

QuantizedGlobal decode_global_inter(std::span<const std::uint8_t> bytes, const QuantizedGlobal& previous,
                                    const GlobalModel& model) {
  check_model(model, previous, true);
  QuantizedGlobal q;
  q.delta = model.delta;
  q.indices.resize(model.words);
  RangeDecoder dec(bytes);
  for (std::size_t j = 0; j < q.indices.size(); ++j) {
    q.indices[j] = decode_index(dec, model.inter, global_symbol(previous.indices[j]));
  }
  return q;
}

std::uint64_t global_model_digest(const GlobalModel& model) {
  ByteWriter w;
  w.u32(model.words);
  w.f64(model.delta);
  if (!model.intra.empty()) model.intra.serialize(w);
  if (!model.inter.empty()) model.inter.serialize(w);
  return fnv1a64(w.buffer());
}

EncodedGlobalStream encode_global_stream(std::span<const QuantizedGlobal> sequence,
                                         std::span<const std::uint32_t> frame_indices, CodingMode mode,
                                         const GlobalModel& model) {
  if (frame_indices.size() != sequence.size()) throw ConfigError("frame index count differs from sequence length");
  for (std::size_t n = 1; n < frame_indices.size(); ++n) {
    if (frame_indices[n] <= frame_indices[n - 1]) throw StreamError("frame indices must strictly increase");
  }
  EncodedGlobalStream out;
  out.mode = mode;
  out.words = model.words;
  out.delta = model.delta;
  out.digest = global_model_digest(model);
  for (std::size_t n = 0; n < sequence.size(); ++n) {
    const auto& q = sequence[n];
    if (q.delta != model.delta) throw ConfigError("descriptor quantized with a step other than the model's");
    EncodedGlobalFrame f;
    f.frame_index = frame_indices[n];
    if (n == 0 || mode == CodingMode::Intra) {
      f.payload = encode_global_intra(q, model);
    } else if (mode == CodingMode::Inter) {
      f.inter = true;
      f.payload = encode_global_inter(q, sequence[n - 1], model);
    } else {
      auto intra = encode_global_intra(q, model);
      auto inter = encode_global_inter(q, sequence[n - 1], model);
      f.inter = inter.size() < intra.size();
      f.payload = f.inter ? std::move(inter) : std::move(intra);
    }
    out.frames.push_back(std::move(f));
  }
  return out;
}

std::vector<QuantizedGlobal> decode_global_stream(const EncodedGlobalStream& stream, const GlobalModel& model) {
  if (stream.words != model.words || stream.delta != model.delta) {
    throw StreamError("global stream has V=" + std::to_string(stream.words) +
                      " but the codebook model has V=" + std::to_string(model.words) +
                      " or a different step");
  }
  if (stream.digest != global_model_digest(model)) throw StreamError("codebook digest does not match the global stream");
  std::vector<QuantizedGlobal> out;
  out.reserve(stream.frames.size());
  for (const auto& f : stream.frames) {
    if (f.inter) {
      if (out.empty()) throw StreamError("first global frame cannot be inter-coded");
      out.push_back(decode_global_inter(f.payload, out.back(), model));
    } else {
      out.push_back(decode_global_intra(f.payload, model));
    }
  }
  return out;
}

std::vector<std::uint8_t> serialize_global_stream(const EncodedGlobalStream& s) {
  ByteWriter w;
  w.magic("BGE1");
  w.u16(kGlobalStreamVersion);
  w.u8(static_cast<std::uint8_t>(s.mode));
  w.u32(s.words);
  w.f64(s.delta);
  w.u64(s.digest);
  w.u32(static_cast<std::uint32_t>(s.frames.size()));
  for (const auto& f : s.frames) {
    w.u32(f.frame_index);
    w.u8(f.inter ? 1 : 0);
    w.u32(static_cast<std::uint32_t>(f.payload.size()));
    w.bytes(f.payload);
  }
  return w.take();
}

EncodedGlobalStream parse_global_stream(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic("BGE1");
  auto at = r.offset();
  if (r.u16() != kGlobalStreamVersion) throw FormatError("unsupported BGE version", at);
  EncodedGlobalStream s;
  at = r.offset();
  const auto mode = r.u8();
  if (mode > 2) throw FormatError("invalid coding mode", at);
  s.mode = static_cast<CodingMode>(mode);
  s.words = r.u32();
  at = r.offset();
  s.delta = r.f64();
  if (!(s.delta > 0.0) || !std::isfinite(s.delta)) throw FormatError("invalid quantization step", at);
  s.digest = r.u64();
  const auto n = r.u32();
  if (n > r.remaining() / kGlobalFrameHeaderBytes) throw FormatError("frame count exceeds file size", r.offset());
  for (std::uint32_t i = 0; i < n; ++i) {
    EncodedGlobalFrame f;
    f.frame_index = r.u32();
    if (!s.frames.empty() && f.frame_index <= s.frames.back().frame_index) {
      throw FormatError("frame indices must strictly increase", r.offset() - 4);
    }
    at = r.offset();
    const auto flag = r.u8();
    if (flag > 1) throw FormatError("invalid inter flag", at);
    f.inter = flag == 1;
    const auto len = r.u32();
    const auto payload = r.bytes(len);
    f.payload.assign(payload.begin(), payload.end());
    s.frames.push_back(std::move(f));
  }
  if (!r.at_end()) throw FormatError("trailing bytes after the last frame", r.offset());
  return s;
}

}  // namespace bfc
