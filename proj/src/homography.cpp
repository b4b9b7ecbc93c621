#include "bfc/homography.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "bfc/error.hpp"
#include "bfc/parallel.hpp"
#include "bfc/rng.hpp"

namespace bfc {

namespace {

constexpr double kRankTolerance = 1e-10;

Eigen::Matrix3d to_eigen(const Homography& H) {
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) m(r, c) = H.h[3 * r + c];
  }
  return m;
}

std::optional<Homography> from_eigen(const Eigen::Matrix3d& m) {
  std::array<double, 9> a{};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) a[3 * r + c] = m(r, c);
  }
  if (!std::isfinite(a[8]) || std::abs(a[8]) < 1e-12) return std::nullopt;
  auto H = Homography::normalized(a);
  const double det = H.determinant();
  if (!std::isfinite(det) || std::abs(det) < 1e-12) return std::nullopt;
  return H;
}

// Similarity moving the centroid to the origin with mean distance sqrt(2).
Eigen::Matrix3d normalizer(std::span<const Correspondence> pts, bool second) {
  double cx = 0.0;
  double cy = 0.0;
  for (const auto& c : pts) {
    const auto& p = second ? c.b : c.a;
    cx += p.x;
    cy += p.y;
  }
  const double n = static_cast<double>(pts.size());
  cx /= n;
  cy /= n;
  double mean = 0.0;
  for (const auto& c : pts) {
    const auto& p = second ? c.b : c.a;
    mean += std::hypot(p.x - cx, p.y - cy);
  }
  mean /= n;
  const double s = mean > 0.0 ? std::sqrt(2.0) / mean : 1.0;
  Eigen::Matrix3d T;
  T << s, 0, -s * cx, 0, s, -s * cy, 0, 0, 1;
  return T;
}

}  // namespace

Homography Homography::normalized(const std::array<double, 9>& m) {
  if (!std::isfinite(m[8]) || m[8] == 0.0) throw DimensionError("homography with zero h33");
  Homography H;
  for (std::size_t i = 0; i < 9; ++i) H.h[i] = m[i] / m[8];
  H.h[8] = 1.0;
  return H;
}

Point2 Homography::apply(const Point2& p) const {
  const double w = h[6] * p.x + h[7] * p.y + h[8];
  return {(h[0] * p.x + h[1] * p.y + h[2]) / w, (h[3] * p.x + h[4] * p.y + h[5]) / w};
}

double Homography::determinant() const { return to_eigen(*this).determinant(); }

Homography Homography::inverse() const {
  const auto m = to_eigen(*this);
  const double det = m.determinant();
  if (!std::isfinite(det) || det == 0.0) throw DimensionError("singular homography");
  auto inv = from_eigen(m.inverse());
  if (!inv) throw DimensionError("homography inverse is not normalizable");
  return *inv;
}

Homography Homography::operator*(const Homography& other) const {
  auto prod = from_eigen(to_eigen(*this) * to_eigen(other));
  if (!prod) throw DimensionError("homography product is not normalizable");
  return *prod;
}

double distance(const Point2& a, const Point2& b) { return std::hypot(a.x - b.x, a.y - b.y); }

std::vector<FeatureMatch> match_features(std::span<const LocalFeature> a, std::span<const LocalFeature> b,
                                         double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("ratio must lie in (0, 1)");
  if (b.size() < 2) {
    throw InsufficientCandidates("ratio test needs at least 2 candidates, got " + std::to_string(b.size()));
  }
  constexpr std::int64_t kScale = 1000000;
  const std::int64_t num = std::llround(ratio * kScale);
  std::vector<FeatureMatch> out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::uint32_t best = 0;
    std::uint32_t d1 = std::numeric_limits<std::uint32_t>::max();
    std::uint32_t d2 = std::numeric_limits<std::uint32_t>::max();
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (a[i].descriptor.size() != b[j].descriptor.size()) throw DimensionError("descriptor lengths differ");
      const auto d = static_cast<std::uint32_t>(hamming(a[i].descriptor, b[j].descriptor));
      if (d < d1) {
        d2 = d1;
        d1 = d;
        best = static_cast<std::uint32_t>(j);
      } else if (d < d2) {
        d2 = d;
      }
    }
    if (static_cast<std::int64_t>(d1) * kScale < num * static_cast<std::int64_t>(d2)) {
      out.push_back({static_cast<std::uint32_t>(i), best, d1, d2});
    }
  }
  return out;
}

std::optional<Homography> fit_homography(std::span<const Correspondence> pts) {
  if (pts.size() < 4) return std::nullopt;
  const auto Ta = normalizer(pts, false);
  const auto Tb = normalizer(pts, true);
  Eigen::MatrixXd A(2 * pts.size(), 9);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Eigen::Vector3d pa = Ta * Eigen::Vector3d(pts[i].a.x, pts[i].a.y, 1.0);
    const Eigen::Vector3d pb = Tb * Eigen::Vector3d(pts[i].b.x, pts[i].b.y, 1.0);
    const double x = pa.x(), y = pa.y(), u = pb.x(), v = pb.y();
    const auto r = static_cast<Eigen::Index>(2 * i);
    A.row(r) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
    A.row(r + 1) << x, y, 1, 0, 0, 0, -u * x, -u * y, -u;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  // Rank below 8 leaves the solution undetermined.
  if (s.size() >= 8 && s(7) <= kRankTolerance * s(0)) return std::nullopt;
  const Eigen::VectorXd h = svd.matrixV().col(8);
  Eigen::Matrix3d Hn;
  Hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  return from_eigen(Tb.inverse() * Hn * Ta);
}

double symmetric_transfer_error(const Homography& H, const Homography& H_inverse, const Correspondence& c) {
  return 0.5 * (distance(H.apply(c.a), c.b) + distance(H_inverse.apply(c.b), c.a));
}

std::optional<RansacResult> estimate_homography(std::span<const Correspondence> pts, const RansacConfig& config) {
  if (pts.size() < 4) {
    throw InsufficientMatches("homography needs at least 4 correspondences, got " + std::to_string(pts.size()));
  }
  Rng rng(config.seed);
  const std::size_t n = pts.size();
  std::vector<std::uint32_t> best;
  std::vector<std::uint32_t> current;
  auto consensus = [&](const Homography& H, std::vector<std::uint32_t>& into) {
    into.clear();
    Homography Hi;
    try {
      Hi = H.inverse();
    } catch (const DimensionError&) {
      return;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double e = symmetric_transfer_error(H, Hi, pts[i]);
      if (e < config.inlier_threshold) into.push_back(static_cast<std::uint32_t>(i));
    }
  };
  std::array<Correspondence, 4> sample;
  for (std::size_t it = 0; it < config.iterations; ++it) {
    std::array<std::size_t, 4> idx{};
    for (std::size_t k = 0; k < 4; ++k) {
      bool fresh = false;
      while (!fresh) {
        idx[k] = rng.below(n);
        fresh = true;
        for (std::size_t m = 0; m < k; ++m) fresh = fresh && idx[m] != idx[k];
      }
      sample[k] = pts[idx[k]];
    }
    const auto H = fit_homography(sample);
    if (!H) continue;
    consensus(*H, current);
    if (current.size() > best.size()) best.swap(current);
  }
  if (best.size() < 4) return std::nullopt;
  std::vector<Correspondence> inlier_points;
  inlier_points.reserve(best.size());
  for (auto i : best) inlier_points.push_back(pts[i]);
  auto refit = fit_homography(inlier_points);
  if (!refit) return std::nullopt;
  RansacResult result;
  result.H = *refit;
  consensus(result.H, result.inliers);
  if (result.inliers.size() < 4) result.inliers = best;
  return result;
}

double backprojection_error(const Homography& H, std::span<const Point2, 4> from, std::span<const Point2, 4> to) {
  double e = 0.0;
  for (std::size_t i = 0; i < 4; ++i) e += distance(H.apply(from[i]), to[i]);
  return e / 4.0;
}

double HomographyEvaluation::precision() const noexcept {
  if (pairs.empty()) return 0.0;
  std::size_t ok = 0;
  for (const auto& p : pairs) ok += p.correct ? 1 : 0;
  return static_cast<double>(ok) / static_cast<double>(pairs.size());
}

HomographyEvaluation evaluate_homography(const FeatureStream& stream, std::span<const FrameGroundTruth> truth,
                                         const HomographyEvalConfig& config) {
  if (truth.size() != stream.frames.size()) {
    throw ConfigError("ground truth has " + std::to_string(truth.size()) + " frames, stream has " +
                      std::to_string(stream.frames.size()));
  }
  HomographyEvaluation eval;
  if (stream.frames.size() < 2) return eval;
  eval.pairs.resize(stream.frames.size() - 1);
  parallel_for(eval.pairs.size(), config.jobs, [&](std::size_t begin, std::size_t end) {
    for (std::size_t n = begin; n < end; ++n) {
      auto& out = eval.pairs[n];
      out.error = std::numeric_limits<double>::infinity();
      const auto& fa = stream.frames[n].features;
      const auto& fb = stream.frames[n + 1].features;
      if (fa.empty() || fb.size() < 2) continue;
      const auto matches = match_features(fa, fb, config.ratio);
      out.matches = matches.size();
      if (matches.size() < 4) continue;
      std::vector<Correspondence> pts;
      pts.reserve(matches.size());
      for (const auto& m : matches) {
        const auto ka = dequantize_keypoint(fa[m.a].keypoint);
        const auto kb = dequantize_keypoint(fb[m.b].keypoint);
        pts.push_back({{ka.x, ka.y}, {kb.x, kb.y}});
      }
      RansacConfig rc = config.ransac;
      rc.seed = config.ransac.seed + n;
      const auto result = estimate_homography(pts, rc);
      if (!result) continue;
      out.estimated = true;
      out.inliers = result->inliers.size();
      out.error = backprojection_error(result->H, truth[n].corners, truth[n + 1].corners);
      out.correct = out.error < config.epsilon;
    }
  });
  return eval;
}

std::vector<FrameGroundTruth> read_ground_truth_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open ground truth file " + path.string());
  std::vector<FrameGroundTruth> out;
  std::string line;
  std::uint64_t offset = 0;
  while (std::getline(in, line)) {
    const auto at = offset;
    offset += line.size() + 1;
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        v.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw FormatError("ground truth cell '" + cell + "' is not a number", at);
      }
    }
    if (v.size() != 17) throw FormatError("ground truth rows need 17 columns, got " + std::to_string(v.size()), at);
    FrameGroundTruth g;
    for (std::size_t i = 0; i < 4; ++i) g.corners[i] = {v[2 * i], v[2 * i + 1]};
    std::array<double, 9> h{};
    std::copy(v.begin() + 8, v.end(), h.begin());
    try {
      g.H = Homography::normalized(h);
    } catch (const DimensionError&) {
      throw FormatError("ground truth homography has h33 = 0", at);
    }
    out.push_back(g);
  }
  return out;
}

void write_ground_truth_csv(std::span<const FrameGroundTruth> truth, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write ground truth file " + path.string());
  out << "# c0x,c0y,c1x,c1y,c2x,c2y,c3x,c3y,h00,h01,h02,h10,h11,h12,h20,h21,h22\n";
  char buf[32];
  for (const auto& g : truth) {
    bool first = true;
    auto put = [&](double x) {
      std::snprintf(buf, sizeof buf, "%.17g", x);
      if (!first) out << ',';
      out << buf;
      first = false;
    };
    for (const auto& c : g.corners) {
      put(c.x);
      put(c.y);
    }
    for (double x : g.H.h) put(x);
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace bfc
