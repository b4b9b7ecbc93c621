#include <cmath>
#include <limits>

#include "bfc/datasets.hpp"
#include "bfc/error.hpp"
#include "bfc/homography.hpp"
#include "bfc/metrics.hpp"
#include "bfc/retrieval.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace bfc;

namespace {

BinaryDescriptor ones_prefix(std::size_t P, std::size_t ones) {
  BinaryDescriptor d(P);
  for (std::size_t j = 0; j < ones; ++j) d.set_bit(j, true);
  return d;
}

RankedList ranked(std::vector<std::uint32_t> ids) {
  RankedList r;
  r.relevant.assign(ids.size(), false);
  r.candidates = ids.size();
  r.ids = std::move(ids);
  return r;
}

}  // namespace

TEST_CASE("ratio test examples") {
  const std::vector<LocalFeature> a{test::feature(0, 0, 4, 0, BinaryDescriptor(64))};
  const std::vector<LocalFeature> b{test::feature(0, 0, 4, 0, ones_prefix(64, 30)),
                                    test::feature(0, 0, 4, 0, ones_prefix(64, 40))};
  CHECK(match_features(a, b).empty());  // 30 >= 0.7 * 40

  const std::vector<LocalFeature> c{test::feature(0, 0, 4, 0, ones_prefix(64, 40)),
                                    test::feature(0, 0, 4, 0, ones_prefix(64, 27))};
  const auto m = match_features(a, c);
  REQUIRE(m.size() == 1);
  CHECK(m[0].b == 1);
  CHECK(m[0].d1 == 27);
  CHECK(m[0].d2 == 40);

  CHECK_THROWS_AS(match_features(a, std::span(b).first(1)), InsufficientCandidates);
  CHECK_THROWS_AS(match_features(a, b, 1.0), ConfigError);
}

TEST_CASE("homography from exact correspondences") {
  const auto H = Homography::normalized({1.1, 0.05, 12.0, -0.03, 0.95, -7.0, 1e-4, -5e-5, 1.0});
  Rng rng(3);
  std::vector<Correspondence> pts;
  for (int i = 0; i < 20; ++i) {
    const Point2 p{rng.uniform(0, 640), rng.uniform(0, 480)};
    pts.push_back({p, H.apply(p)});
  }
  const auto fit = fit_homography(pts);
  REQUIRE(fit.has_value());
  for (const auto& c : pts) CHECK(distance(fit->apply(c.a), c.b) < 1e-6);

  std::vector<Correspondence> id;
  for (int i = 0; i < 8; ++i) {
    const Point2 p{rng.uniform(0, 100), rng.uniform(0, 100)};
    id.push_back({p, p});
  }
  const auto r = estimate_homography(id);
  REQUIRE(r.has_value());
  for (std::size_t k = 0; k < 9; ++k) CHECK(std::abs(r->H.h[k] - Homography::identity().h[k]) < 1e-9);
}

TEST_CASE("RANSAC rejects outliers") {
  const auto H = Homography::normalized({0.9, -0.1, 30.0, 0.08, 1.05, 5.0, 2e-5, 1e-4, 1.0});
  Rng rng(5);
  std::vector<Correspondence> pts;
  for (int i = 0; i < 20; ++i) {
    const Point2 p{rng.uniform(0, 640), rng.uniform(0, 480)};
    pts.push_back({p, H.apply(p)});
  }
  for (int i = 0; i < 10; ++i) {
    pts.push_back({{rng.uniform(0, 640), rng.uniform(0, 480)}, {rng.uniform(0, 640), rng.uniform(0, 480)}});
  }
  const auto r = estimate_homography(pts);
  REQUIRE(r.has_value());
  CHECK(r->inliers.size() == 20);
  for (std::uint32_t i : r->inliers) CHECK(i < 20);
  const std::array<Point2, 4> corners{Point2{0, 0}, Point2{640, 0}, Point2{640, 480}, Point2{0, 480}};
  std::array<Point2, 4> mapped;
  for (std::size_t k = 0; k < 4; ++k) mapped[k] = H.apply(corners[k]);
  CHECK(backprojection_error(r->H, corners, mapped) < 1e-6);

  pts.resize(3);
  CHECK_THROWS_AS(estimate_homography(pts), InsufficientMatches);
}

TEST_CASE("homography evaluation on planar scenes") {
  PlanarConfig c;
  c.frames = 11;
  c.noise = 0.0;
  c.bit_noise = 0.0;
  c.outlier_fraction = 0.0;
  const auto clean = planar_scene(c);
  CHECK(evaluate_homography(clean.stream, clean.truth).precision() == 1.0);

  auto scrambled = clean.stream;
  Rng rng(9);
  for (auto& f : scrambled.frames) {
    for (auto& x : f.features) x.descriptor = test::random_bits(rng, scrambled.descriptor_length);
  }
  CHECK(evaluate_homography(scrambled, clean.truth).precision() <= 0.1);

  auto short_truth = clean.truth;
  short_truth.pop_back();
  CHECK_THROWS_AS(evaluate_homography(clean.stream, short_truth), ConfigError);
}

TEST_CASE("ground truth CSV round trip") {
  const auto scene = planar_scene(PlanarConfig{.frames = 3});
  test::TempDir dir("gt");
  write_ground_truth_csv(scene.truth, dir / "gt.csv");
  const auto back = read_ground_truth_csv(dir / "gt.csv");
  REQUIRE(back.size() == 3);
  for (std::size_t n = 0; n < 3; ++n) {
    for (std::size_t k = 0; k < 4; ++k) {
      CHECK(back[n].corners[k].x == scene.truth[n].corners[k].x);
      CHECK(back[n].corners[k].y == scene.truth[n].corners[k].y);
    }
    CHECK(back[n].H.h == scene.truth[n].H.h);
  }
}

TEST_CASE("retrieve orders by distance then id") {
  RetrievalDatabase db;
  db.entries.push_back({7, {1.0, 0.0}, {}});
  db.entries.push_back({3, {0.0, 1.0}, {}});
  db.entries.push_back({5, {0.0, 1.0}, {}});
  db.entries.push_back({1, {0.6, 0.8}, {}});
  const auto r = retrieve({0.0, 1.0}, db, 2, {5, 7});
  CHECK(r.ids == std::vector<std::uint32_t>{3, 5, 1, 7});
  CHECK(r.relevant == std::vector<bool>{false, true, false, true});
  CHECK(r.candidates == 2);
  CHECK(retrieve({0.0, 1.0}, db, 99, {}).candidates == 4);
  CHECK_THROWS_AS(retrieve({0.0, 1.0, 0.0}, db, 2, {}), DimensionError);
}

TEST_CASE("rerank by scores") {
  auto r = ranked({10, 20, 30, 40});
  r.candidates = 3;
  const std::vector<std::size_t> scores{5, 2, 9};
  CHECK(rerank_by_scores(r, scores).ids == std::vector<std::uint32_t>{30, 10, 20, 40});
  const std::vector<std::size_t> flat{1, 1, 1};
  CHECK(rerank_by_scores(r, flat).ids == r.ids);
}

TEST_CASE("average precision examples") {
  CHECK(average_precision({true, false, false}) == 1.0);
  CHECK(average_precision({false, true}) == 0.5);
  CHECK(average_precision({true, false, true}) == doctest::Approx(5.0 / 6.0));
  CHECK_THROWS_AS(average_precision({false, false}), UndefinedAP);
  CHECK_THROWS_AS(average_precision({}), UndefinedAP);
}

TEST_CASE("MAP averages frames within a query first") {
  const std::vector<std::vector<double>> aps{{1.0}, {0.5, 0.5, 0.5}};
  CHECK(mean_average_precision(aps) == doctest::Approx(0.75));
  const std::vector<double> flat{1.0, 0.5, 0.5, 0.5};
  CHECK(mean(flat) == doctest::Approx(0.625));
  const std::vector<std::vector<double>> hole{{1.0}, {}};
  CHECK_THROWS_AS(mean_average_precision(hole), ConfigError);
}

TEST_CASE("median rank aggregation") {
  const std::vector<RankedList> three{ranked({1, 2, 3}), ranked({2, 1, 3}), ranked({1, 3, 2})};
  CHECK(median_rank_aggregate(three).ids == std::vector<std::uint32_t>{1, 2, 3});
  // Lower medians 1 and 1 tie; the smaller id wins.
  const std::vector<RankedList> two{ranked({9, 4}), ranked({4, 9})};
  CHECK(median_rank_aggregate(two).ids == std::vector<std::uint32_t>{4, 9});
  const std::vector<RankedList> mismatched{ranked({1, 2}), ranked({1, 3})};
  CHECK_THROWS_AS(median_rank_aggregate(mismatched), ConfigError);
  CHECK_THROWS_AS(median_rank_aggregate(std::span<const RankedList>{}), ConfigError);
}

TEST_CASE("relevance JSON round trip") {
  const std::map<std::string, std::set<std::uint32_t>> rel{{"q0", {1, 5, 9}}, {"q1", {}}, {"q2", {0}}};
  test::TempDir dir("rel");
  write_relevance_json(rel, dir / "rel.json");
  CHECK(read_relevance_json(dir / "rel.json") == rel);
}
