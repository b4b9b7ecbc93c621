#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "bfc/features.hpp"
#include "bfc/homography.hpp"

namespace bfc {

// Planar scene seen by a moving camera. Each frame observes the same
// `inliers` plane points through a plane-to-frame homography that follows a
// bounded random walk, with Gaussian position noise and per-frame descriptor
// bit noise, plus freshly drawn outliers making up `outlier_fraction` of the
// frame. Points leaving the image are dropped for that frame.
struct PlanarConfig {
  std::uint32_t frames = 101;
  std::uint32_t inliers = 50;
  double outlier_fraction = 0.2;
  double noise = 0.5;       // pixels, per coordinate
  double bit_noise = 0.1;  // per-dexel flip probability per frame
  std::uint16_t descriptor_length = 512;
  std::uint32_t width = 640;
  std::uint32_t height = 480;
  std::uint64_t seed = 1;
};

struct PlanarScene {
  FeatureStream stream;
  std::vector<FrameGroundTruth> truth;
};

PlanarScene planar_scene(const PlanarConfig& config);

// Clustered retrieval corpus. Descriptors are noisy copies of prototypes
// drawn from a shared pool; every scene owns a subset of the pool. Scene
// images and query frames draw `scene_fraction` of their features from the
// scene subset and the rest from the whole pool; distractors draw from the
// whole pool. The training video is a run of shots, each showing a random
// scene or none. Query and training sequences are temporally correlated: a
// feature persists into the next frame with probability `query_persistence`.
struct RetrievalDatasetConfig {
  std::uint16_t descriptor_length = 512;
  std::uint32_t scenes = 10;
  std::uint32_t images_per_scene = 10;
  std::uint32_t distractors = 100;
  std::uint32_t query_frames = 5;
  std::uint32_t training_frames = 120;
  std::uint32_t shot_length = 10;
  std::uint32_t min_features = 60;
  std::uint32_t max_features = 100;
  std::uint32_t pool_size = 1000;
  std::uint32_t scene_prototypes = 40;
  double scene_fraction = 0.7;
  double bit_noise = 0.06;
  double query_persistence = 0.8;
  std::uint64_t seed = 1;
};

struct RetrievalDataset {
  // Database images sorted by id; frame_index equals the id.
  FeatureStream database;
  std::vector<std::string> query_names;
  std::vector<FeatureStream> queries;
  std::map<std::string, std::set<std::uint32_t>> relevance;
  FeatureStream training;  // training video
};

RetrievalDataset retrieval_dataset(const RetrievalDatasetConfig& config);

// Layout: database.bfs, training.bfs, queries/<name>.bfs, relevance.json.
void write_retrieval_dataset(const RetrievalDataset& data, const std::filesystem::path& dir);
RetrievalDataset read_retrieval_dataset(const std::filesystem::path& dir);

}  // namespace bfc
