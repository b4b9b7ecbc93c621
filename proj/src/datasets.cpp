#include "bfc/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "bfc/error.hpp"
#include "bfc/retrieval.hpp"
#include "bfc/rng.hpp"
#include "bfc/stream_io.hpp"
#include "bfc/synth.hpp"

namespace bfc {

namespace {

BinaryDescriptor random_descriptor(Rng& rng, std::size_t length) {
  BinaryDescriptor d(length);
  for (std::size_t j = 0; j < length; j += 64) {
    const auto word = rng.next();
    for (std::size_t b = 0; b < 64 && j + b < length; ++b) d.set_bit(j + b, (word >> b) & 1u);
  }
  return d;
}

Homography centered_motion(double theta, double scale, double tx, double ty, double g, double h, double cx,
                           double cy) {
  const double c = scale * std::cos(theta);
  const double s = scale * std::sin(theta);
  Homography to_origin = Homography::normalized({1, 0, -cx, 0, 1, -cy, 0, 0, 1});
  Homography A = Homography::normalized({c, -s, 0, s, c, 0, g, h, 1});
  Homography back = Homography::normalized({1, 0, cx + tx, 0, 1, cy + ty, 0, 0, 1});
  return back * A * to_origin;
}

double clamp_abs(double v, double limit) { return std::clamp(v, -limit, limit); }

bool inside(double x, double y, std::uint32_t w, std::uint32_t h) {
  return x >= 0.0 && y >= 0.0 && x < static_cast<double>(w) && y < static_cast<double>(h);
}

}  // namespace

PlanarScene planar_scene(const PlanarConfig& c) {
  if (c.frames == 0 || c.inliers == 0) throw ConfigError("planar scene needs frames and inliers");
  if (c.outlier_fraction < 0.0 || c.outlier_fraction >= 1.0) throw ConfigError("outlier_fraction must lie in [0, 1)");
  if (c.bit_noise < 0.0 || c.bit_noise > 1.0) throw ConfigError("bit_noise must lie in [0, 1]");
  if (c.noise < 0.0) throw ConfigError("noise must be non-negative");
  if (c.width < 256 || c.height < 192) throw ConfigError("planar scene needs at least 256x192 pixels");
  Rng rng(c.seed);
  const double W = c.width;
  const double H = c.height;
  const double mx = W / 10.0;
  const double my = H / 10.0;
  const std::array<Point2, 4> plane_corners{{{mx, my}, {W - mx, my}, {W - mx, H - my}, {mx, H - my}}};

  struct PlanePoint {
    Point2 p;
    BinaryDescriptor d;
    double scale;
    double orientation;
  };
  std::vector<PlanePoint> points;
  for (std::uint32_t i = 0; i < c.inliers; ++i) {
    points.push_back({{rng.uniform(mx, W - mx), rng.uniform(my, H - my)},
                      random_descriptor(rng, c.descriptor_length),
                      rng.uniform(1.5, 8.0),
                      rng.uniform(0.0, 2.0 * std::numbers::pi)});
  }
  const auto outliers = static_cast<std::uint32_t>(
      std::llround(c.inliers * c.outlier_fraction / (1.0 - c.outlier_fraction)));

  PlanarScene scene;
  scene.stream.descriptor_length = c.descriptor_length;
  scene.stream.metadata = {{"width", std::to_string(c.width)}, {"height", std::to_string(c.height)},
                           {"generator", "planar"}};
  double theta = 0.0, scale = 1.0, tx = 0.0, ty = 0.0, g = 0.0, h = 0.0;
  for (std::uint32_t n = 0; n < c.frames; ++n) {
    if (n > 0) {
      theta = clamp_abs(theta + rng.uniform(-0.02, 0.02), 0.2);
      scale = std::clamp(scale * (1.0 + rng.uniform(-0.02, 0.02)), 0.85, 1.15);
      tx = clamp_abs(tx + rng.uniform(-4.0, 4.0), 0.05 * W);
      ty = clamp_abs(ty + rng.uniform(-4.0, 4.0), 0.05 * H);
      g = clamp_abs(g + rng.uniform(-2e-5, 2e-5), 1e-4);
      h = clamp_abs(h + rng.uniform(-2e-5, 2e-5), 1e-4);
    }
    const Homography Hn = centered_motion(theta, scale, tx, ty, g, h, W / 2.0, H / 2.0);
    FrameGroundTruth truth;
    truth.H = Hn;
    for (std::size_t k = 0; k < 4; ++k) truth.corners[k] = Hn.apply(plane_corners[k]);
    scene.truth.push_back(truth);

    FrameFeatures frame;
    frame.frame_index = n;
    for (const auto& pt : points) {
      const auto q = Hn.apply(pt.p);
      const double x = q.x + c.noise * rng.normal();
      const double y = q.y + c.noise * rng.normal();
      auto d = flip_bits(rng, pt.d, c.bit_noise);
      if (!inside(x, y, c.width, c.height)) continue;
      frame.features.push_back({quantize_keypoint(x, y, pt.scale * scale, pt.orientation + theta), std::move(d)});
    }
    for (std::uint32_t i = 0; i < outliers; ++i) {
      const double x = rng.uniform(0.0, W);
      const double y = rng.uniform(0.0, H);
      const double s = rng.uniform(1.5, 8.0);
      const double o = rng.uniform(0.0, 2.0 * std::numbers::pi);
      frame.features.push_back({quantize_keypoint(x, y, s, o), random_descriptor(rng, c.descriptor_length)});
    }
    sort_raster(frame);
    scene.stream.frames.push_back(std::move(frame));
  }
  return scene;
}

RetrievalDataset retrieval_dataset(const RetrievalDatasetConfig& c) {
  if (c.scenes == 0 || c.images_per_scene == 0) throw ConfigError("dataset needs scenes with images");
  if (c.query_frames == 0) throw ConfigError("query sequences need at least one frame");
  if (c.shot_length == 0) throw ConfigError("shot_length must be positive");
  if (c.min_features > c.max_features) throw ConfigError("min_features exceeds max_features");
  if (c.scene_prototypes == 0 || c.scene_prototypes > c.pool_size) {
    throw ConfigError("scene_prototypes must lie in [1, pool_size]");
  }
  for (double p : {c.scene_fraction, c.bit_noise, c.query_persistence}) {
    if (p < 0.0 || p > 1.0) throw ConfigError("probabilities must lie in [0, 1]");
  }
  Rng rng(c.seed);
  const std::size_t P = c.descriptor_length;
  const double W = 640.0;
  const double H = 480.0;
  std::vector<BinaryDescriptor> pool;
  pool.reserve(c.pool_size);
  for (std::uint32_t i = 0; i < c.pool_size; ++i) pool.push_back(random_descriptor(rng, P));

  std::vector<std::vector<std::uint32_t>> scene_sets(c.scenes);
  for (auto& set : scene_sets) {
    std::vector<std::uint32_t> all(c.pool_size);
    std::iota(all.begin(), all.end(), 0u);
    for (std::uint32_t i = 0; i < c.scene_prototypes; ++i) {
      std::swap(all[i], all[i + rng.below(c.pool_size - i)]);
    }
    set.assign(all.begin(), all.begin() + c.scene_prototypes);
  }

  auto fresh_feature = [&](int scene) {
    std::uint32_t proto;
    if (scene >= 0 && rng.bernoulli(c.scene_fraction)) {
      const auto& set = scene_sets[static_cast<std::size_t>(scene)];
      proto = set[rng.below(set.size())];
    } else {
      proto = static_cast<std::uint32_t>(rng.below(pool.size()));
    }
    const double x = rng.uniform(0.0, W);
    const double y = rng.uniform(0.0, H);
    const double s = rng.uniform(1.5, 10.0);
    const double o = rng.uniform(0.0, 2.0 * std::numbers::pi);
    return LocalFeature{quantize_keypoint(x, y, s, o), flip_bits(rng, pool[proto], c.bit_noise)};
  };
  auto image = [&](int scene) {
    FrameFeatures f;
    const auto count = rng.between(c.min_features, c.max_features);
    for (std::int64_t i = 0; i < count; ++i) f.features.push_back(fresh_feature(scene));
    sort_raster(f);
    return f;
  };

  // Persisting features drift by up to 2 px and flip 2% of their bits.
  auto next_frame = [&](const FrameFeatures& prev, int scene) {
    FrameFeatures frame;
    const auto target = static_cast<std::size_t>(rng.between(c.min_features, c.max_features));
    for (const auto& f : prev.features) {
      if (frame.features.size() >= target) break;
      if (!rng.bernoulli(c.query_persistence)) continue;
      auto k = f.keypoint;
      k.x = static_cast<std::int32_t>(std::clamp<std::int64_t>(k.x + rng.between(-8, 8), 0, 4 * 640 - 1));
      k.y = static_cast<std::int32_t>(std::clamp<std::int64_t>(k.y + rng.between(-8, 8), 0, 4 * 480 - 1));
      frame.features.push_back({k, flip_bits(rng, f.descriptor, 0.02)});
    }
    while (frame.features.size() < target) frame.features.push_back(fresh_feature(scene));
    sort_raster(frame);
    return frame;
  };

  RetrievalDataset data;
  std::vector<FrameFeatures> images;
  std::vector<int> image_scene;
  for (std::uint32_t s = 0; s < c.scenes; ++s) {
    for (std::uint32_t i = 0; i < c.images_per_scene; ++i) {
      images.push_back(image(static_cast<int>(s)));
      image_scene.push_back(static_cast<int>(s));
    }
  }
  for (std::uint32_t i = 0; i < c.distractors; ++i) {
    images.push_back(image(-1));
    image_scene.push_back(-1);
  }
  std::vector<std::uint32_t> ids(images.size());
  std::iota(ids.begin(), ids.end(), 0u);
  for (std::size_t i = ids.size(); i > 1; --i) std::swap(ids[i - 1], ids[rng.below(i)]);

  data.database.descriptor_length = c.descriptor_length;
  data.database.metadata = {{"width", "640"}, {"height", "480"}, {"generator", "retrieval-database"}};
  data.database.frames.resize(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    images[i].frame_index = ids[i];
    data.database.frames[ids[i]] = std::move(images[i]);
  }

  for (std::uint32_t s = 0; s < c.scenes; ++s) {
    std::string name = "query_" + std::string(s < 10 ? "0" : "") + std::to_string(s);
    FeatureStream q;
    q.descriptor_length = c.descriptor_length;
    q.metadata = {{"width", "640"}, {"height", "480"}, {"generator", "retrieval-query"}};
    FrameFeatures prev;
    for (std::uint32_t n = 0; n < c.query_frames; ++n) {
      FrameFeatures frame = n == 0 ? image(static_cast<int>(s)) : next_frame(prev, static_cast<int>(s));
      frame.frame_index = n;
      prev = frame;
      q.frames.push_back(std::move(frame));
    }
    auto& rel = data.relevance[name];
    for (std::size_t i = 0; i < image_scene.size(); ++i) {
      if (image_scene[i] == static_cast<int>(s)) rel.insert(ids[i]);
    }
    data.query_names.push_back(std::move(name));
    data.queries.push_back(std::move(q));
  }

  data.training.descriptor_length = c.descriptor_length;
  data.training.metadata = {{"width", "640"}, {"height", "480"}, {"generator", "retrieval-training"}};
  FrameFeatures prev;
  int scene = -1;
  for (std::uint32_t i = 0; i < c.training_frames; ++i) {
    FrameFeatures f;
    if (i % c.shot_length == 0) {
      scene = rng.bernoulli(0.5) ? static_cast<int>(rng.below(c.scenes)) : -1;
      f = image(scene);
    } else {
      f = next_frame(prev, scene);
    }
    f.frame_index = i;
    prev = f;
    data.training.frames.push_back(std::move(f));
  }
  return data;
}

void write_retrieval_dataset(const RetrievalDataset& data, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "queries", ec);
  if (ec) throw IoError("cannot create " + (dir / "queries").string() + ": " + ec.message());
  write_stream(data.database, dir / "database.bfs");
  write_stream(data.training, dir / "training.bfs");
  for (std::size_t q = 0; q < data.queries.size(); ++q) {
    write_stream(data.queries[q], dir / "queries" / (data.query_names[q] + ".bfs"));
  }
  write_relevance_json(data.relevance, dir / "relevance.json");
}

RetrievalDataset read_retrieval_dataset(const std::filesystem::path& dir) {
  RetrievalDataset data;
  data.database = read_stream_any(dir / "database.bfs");
  if (std::filesystem::exists(dir / "training.bfs")) data.training = read_stream_any(dir / "training.bfs");
  data.relevance = read_relevance_json(dir / "relevance.json");
  std::vector<std::filesystem::path> files;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(dir / "queries", ec)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  if (ec) throw IoError("cannot list " + (dir / "queries").string() + ": " + ec.message());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    data.query_names.push_back(f.stem().string());
    data.queries.push_back(read_stream_any(f));
  }
  if (data.queries.empty()) throw ConfigError("no query streams under " + (dir / "queries").string());
  return data;
}

}  // namespace bfc
