#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "bfc/features.hpp"

namespace bfc {

// "BFS1" container, little-endian:
//   header   : u32 magic "BFS1", u16 version (=1), u16 P, u32 N
//   frame    : u32 frame_index, u32 M
//   feature  : i32 x, i32 y, i32 scale, u8 orientation, ceil(P/8) descriptor bytes
//   trailer  : present only when metadata is non-empty:
//              u32 count, then count x (u32 len, key bytes, u32 len, value bytes)
//              in ascending key order.
inline constexpr std::uint16_t kStreamVersion = 1;
inline constexpr std::size_t kStreamHeaderBytes = 12;
inline constexpr std::size_t kFrameHeaderBytes = 8;
inline constexpr std::size_t kKeypointRecordBytes = 13;

std::vector<std::uint8_t> serialize_stream(const FeatureStream& stream);
FeatureStream parse_stream(std::span<const std::uint8_t> bytes);

FeatureStream read_stream(const std::filesystem::path& path);
std::size_t write_stream(const FeatureStream& stream, const std::filesystem::path& path);

// JSON mirror of the binary layout; descriptors are hex strings of the
// container bytes.
std::string stream_to_json(const FeatureStream& stream);
FeatureStream stream_from_json(const std::string& text);

// Picks the binary or JSON reader from the file's first byte.
FeatureStream read_stream_any(const std::filesystem::path& path);
void write_stream_any(const FeatureStream& stream, const std::filesystem::path& path);

}  // namespace bfc
