#include "bfc/stream_io.hpp"

#include <cctype>

#include "json.hpp"

#include "bfc/bytes.hpp"
#include "bfc/error.hpp"

namespace bfc {

std::vector<std::uint8_t> serialize_stream(const FeatureStream& stream) {
  validate(stream);
  ByteWriter w;
  w.magic("BFS1");
  w.u16(kStreamVersion);
  w.u16(stream.descriptor_length);
  w.u32(static_cast<std::uint32_t>(stream.frames.size()));
  for (const auto& frame : stream.frames) {
    w.u32(frame.frame_index);
    w.u32(static_cast<std::uint32_t>(frame.features.size()));
    for (const auto& f : frame.features) {
      w.i32(f.keypoint.x);
      w.i32(f.keypoint.y);
      w.i32(f.keypoint.scale);
      w.u8(f.keypoint.orientation);
      f.descriptor.append_bytes(w.buffer());
    }
  }
  if (!stream.metadata.empty()) {
    w.u32(static_cast<std::uint32_t>(stream.metadata.size()));
    for (const auto& [key, value] : stream.metadata) {
      w.string(key);
      w.string(value);
    }
  }
  return w.take();
}

FeatureStream parse_stream(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic("BFS1");
  const auto version_at = r.offset();
  if (r.u16() != kStreamVersion) throw FormatError("unsupported BFS version", version_at);

  FeatureStream s;
  s.descriptor_length = r.u16();
  const std::size_t desc_bytes = (s.descriptor_length + 7u) / 8u;
  const auto n_frames = r.u32();
  // Every frame needs at least its header; reject absurd counts before
  // reserving memory.
  if (n_frames > r.remaining() / kFrameHeaderBytes) {
    throw FormatError("frame count exceeds file size", r.offset());
  }
  s.frames.reserve(n_frames);
  for (std::uint32_t n = 0; n < n_frames; ++n) {
    FrameFeatures frame;
    const auto frame_at = r.offset();
    frame.frame_index = r.u32();
    if (!s.frames.empty() && frame.frame_index <= s.frames.back().frame_index) {
      throw FormatError("frame indices not strictly increasing", frame_at);
    }
    const auto m = r.u32();
    if (m > r.remaining() / (kKeypointRecordBytes + desc_bytes)) {
      throw FormatError("feature count exceeds file size", r.offset());
    }
    frame.features.reserve(m);
    for (std::uint32_t i = 0; i < m; ++i) {
      LocalFeature f;
      const auto at = r.offset();
      f.keypoint.x = r.i32();
      f.keypoint.y = r.i32();
      f.keypoint.scale = r.i32();
      f.keypoint.orientation = r.u8();
      if (f.keypoint.x < 0 || f.keypoint.y < 0 || f.keypoint.scale < 0 ||
          f.keypoint.orientation >= kOrientationBins) {
        throw FormatError("keypoint field out of range", at);
      }
      const auto desc_at = r.offset();
      auto raw = r.bytes(desc_bytes);
      f.descriptor = BinaryDescriptor::from_bytes(raw, s.descriptor_length);
      if (s.descriptor_length % 8 != 0 &&
          (raw.back() >> (s.descriptor_length % 8)) != 0) {
        throw FormatError("descriptor padding bits set", desc_at + desc_bytes - 1);
      }
      frame.features.push_back(std::move(f));
    }
    s.frames.push_back(std::move(frame));
  }
  if (!r.at_end()) {
    const auto count = r.u32();
    std::string previous_key;
    for (std::uint32_t i = 0; i < count; ++i) {
      const auto at = r.offset();
      auto key = r.string();
      if (i > 0 && key <= previous_key) throw FormatError("metadata keys not ascending", at);
      previous_key = key;
      s.metadata[key] = r.string();
    }
    if (count == 0) throw FormatError("empty metadata trailer", r.offset());
    if (!r.at_end()) throw FormatError("trailing bytes after metadata", r.offset());
  }
  return s;
}

FeatureStream read_stream(const std::filesystem::path& path) {
  return parse_stream(read_file(path));
}

std::size_t write_stream(const FeatureStream& stream, const std::filesystem::path& path) {
  const auto bytes = serialize_stream(stream);
  write_file(path, bytes);
  return bytes.size();
}

std::string stream_to_json(const FeatureStream& stream) {
  validate(stream);
  nlohmann::ordered_json j;
  j["format"] = "BFS1";
  j["version"] = kStreamVersion;
  j["descriptor_length"] = stream.descriptor_length;
  j["metadata"] = stream.metadata;
  auto& frames = j["frames"] = nlohmann::ordered_json::array();
  for (const auto& frame : stream.frames) {
    nlohmann::ordered_json jf;
    jf["frame_index"] = frame.frame_index;
    auto& feats = jf["features"] = nlohmann::ordered_json::array();
    for (const auto& f : frame.features) {
      feats.push_back({{"x", f.keypoint.x},
                       {"y", f.keypoint.y},
                       {"scale", f.keypoint.scale},
                       {"orientation", f.keypoint.orientation},
                       {"descriptor", f.descriptor.to_hex()}});
    }
    frames.push_back(std::move(jf));
  }
  return j.dump(1) + "\n";
}

FeatureStream stream_from_json(const std::string& text) {
  FeatureStream s;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.value("format", std::string{}) != "BFS1") throw FormatError("JSON stream: format must be \"BFS1\"", 0);
    if (j.at("version").get<int>() != kStreamVersion) throw FormatError("JSON stream: unsupported version", 0);
    s.descriptor_length = j.at("descriptor_length").get<std::uint16_t>();
    if (j.contains("metadata")) s.metadata = j.at("metadata").get<std::map<std::string, std::string>>();
    for (const auto& jf : j.at("frames")) {
      FrameFeatures frame;
      frame.frame_index = jf.at("frame_index").get<std::uint32_t>();
      for (const auto& jfeat : jf.at("features")) {
        LocalFeature f;
        f.keypoint.x = jfeat.at("x").get<std::int32_t>();
        f.keypoint.y = jfeat.at("y").get<std::int32_t>();
        f.keypoint.scale = jfeat.at("scale").get<std::int32_t>();
        f.keypoint.orientation = jfeat.at("orientation").get<std::uint8_t>();
        f.descriptor = BinaryDescriptor::from_hex(jfeat.at("descriptor").get<std::string>(),
                                                  s.descriptor_length);
        frame.features.push_back(std::move(f));
      }
      s.frames.push_back(std::move(frame));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("JSON stream: ") + e.what(), 0);
  } catch (const DimensionError& e) {
    throw FormatError(std::string("JSON stream: ") + e.what(), 0);
  }
  try {
    validate(s);
  } catch (const StreamError& e) {
    throw FormatError(std::string("JSON stream: ") + e.what(), 0);
  }
  return s;
}

FeatureStream read_stream_any(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  std::size_t i = 0;
  while (i < bytes.size() && std::isspace(bytes[i])) ++i;
  if (i < bytes.size() && bytes[i] == '{') {
    return stream_from_json(std::string(bytes.begin(), bytes.end()));
  }
  return parse_stream(bytes);
}

void write_stream_any(const FeatureStream& stream, const std::filesystem::path& path) {
  if (path.extension() == ".json") {
    const auto text = stream_to_json(stream);
    write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  } else {
    write_stream(stream, path);
  }
}

}  // namespace bfc
