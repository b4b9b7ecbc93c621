#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "bfc/features.hpp"

namespace bfc {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

// Row-major 3x3 matrix with h[8] == 1.
struct Homography {
  std::array<double, 9> h{1, 0, 0, 0, 1, 0, 0, 0, 1};

  static Homography identity() { return {}; }
  // Divides by h[8]; throws DimensionError when it is zero or non-finite.
  static Homography normalized(const std::array<double, 9>& m);

  Point2 apply(const Point2& p) const;
  Homography inverse() const;  // throws DimensionError when singular
  Homography operator*(const Homography& other) const;
  double determinant() const;
};

double distance(const Point2& a, const Point2& b);

struct FeatureMatch {
  std::uint32_t a = 0;
  std::uint32_t b = 0;
  std::uint32_t d1 = 0;
  std::uint32_t d2 = 0;
};

inline constexpr double kDefaultRatio = 0.7;

// Nearest and second-nearest neighbour of every feature of `a` in `b` by
// Hamming distance (ties to the lowest index); a pair is kept iff
// d1 < ratio * d2, compared exactly with the ratio rounded to 1e-6.
// Throws InsufficientCandidates when |b| < 2, ConfigError unless
// 0 < ratio < 1, DimensionError on differing descriptor lengths.
std::vector<FeatureMatch> match_features(std::span<const LocalFeature> a, std::span<const LocalFeature> b,
                                         double ratio = kDefaultRatio);

struct Correspondence {
  Point2 a;
  Point2 b;
};

// Normalized DLT over all correspondences (algebraic least squares).
// Returns nullopt for degenerate configurations.
std::optional<Homography> fit_homography(std::span<const Correspondence> points);

// Mean of forward |H a - b| and backward |H^-1 b - a|.
double symmetric_transfer_error(const Homography& H, const Homography& H_inverse, const Correspondence& c);

struct RansacConfig {
  std::size_t iterations = 2000;
  double inlier_threshold = 3.0;  // pixels
  std::uint64_t seed = 1;
};

struct RansacResult {
  Homography H;
  std::vector<std::uint32_t> inliers;
};

// 4-point minimal samples, inlier iff symmetric transfer error < threshold,
// best consensus refit by least squares. nullopt when no sample reaches 4
// inliers. Throws InsufficientMatches below 4 correspondences.
std::optional<RansacResult> estimate_homography(std::span<const Correspondence> points,
                                                const RansacConfig& config = {});

// Mean corner displacement between H applied to `from` and `to`.
double backprojection_error(const Homography& H, std::span<const Point2, 4> from, std::span<const Point2, 4> to);

struct FrameGroundTruth {
  std::array<Point2, 4> corners;
  Homography H;  // plane to frame
};

struct HomographyEvalConfig {
  double ratio = kDefaultRatio;
  double epsilon = 3.0;  // backprojection threshold in pixels
  RansacConfig ransac;
  unsigned jobs = 1;
};

struct PairOutcome {
  std::size_t matches = 0;
  std::size_t inliers = 0;
  bool estimated = false;
  double error = 0.0;  // +inf when nothing was estimated
  bool correct = false;
};

struct HomographyEvaluation {
  std::vector<PairOutcome> pairs;  // pair n relates frames n and n+1
  double precision() const noexcept;
};

// Consecutive frame pairs of `stream`; ground truth per frame. Throws
// ConfigError when the counts differ.
HomographyEvaluation evaluate_homography(const FeatureStream& stream, std::span<const FrameGroundTruth> truth,
                                         const HomographyEvalConfig& config = {});

// CSV rows of 17 numbers: 4 corners (x, y) then H row-major.
std::vector<FrameGroundTruth> read_ground_truth_csv(const std::filesystem::path& path);
void write_ground_truth_csv(std::span<const FrameGroundTruth> truth, const std::filesystem::path& path);

}  // namespace bfc
