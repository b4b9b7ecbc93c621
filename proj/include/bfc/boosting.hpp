#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "bfc/descriptor.hpp"
#include "bfc/rng.hpp"

namespace bfc {

struct DescriptorPair {
  BinaryDescriptor a;
  BinaryDescriptor b;
  bool matching = false;
};

// Labeled training pairs. Weights are optional initial weights (uniform when
// empty) and are normalized to sum to 1 before training.
struct PairSet {
  std::vector<DescriptorPair> pairs;
  std::vector<double> weights;
};

// Dexels ordered by discriminability, most discriminative first; scores[r] is
// the cost-weighted error of the dexel chosen in round r.
struct DexelRanking {
  std::vector<std::uint32_t> order;
  std::vector<double> scores;

  friend bool operator==(const DexelRanking&, const DexelRanking&) = default;
};

struct BoostingConfig {
  std::size_t rounds = 0;   // 0 means all P dexels
  double asymmetry = 2.0;   // cost multiplier for a missed match
};

// Greedy asymmetric pairwise boosting with the weak classifier
// h_j(A, B) = [A_j == B_j] ("same entity"). Each round picks the unused dexel
// with the lowest cost-weighted error
//   eps_j = sum_i w_i c_i [h_j wrong on i] / sum_i w_i c_i,
// c_i = asymmetry for matching pairs and 1 otherwise, then reweights
// w_i <- w_i exp(+alpha) on errors and exp(-alpha) on hits with
// alpha = 0.5 ln((1 - eps) / eps), and renormalizes. Ties go to the lowest
// dexel index. Pairs are put in a canonical order first, so the result does
// not depend on input order.
//
// Throws DegenerateTrainingSet unless both labels are present, DimensionError
// on length mismatch, ConfigError on rounds > P or asymmetry <= 0.
DexelRanking rank_dexels(const PairSet& pairs, std::size_t length, const BoostingConfig& config = {});

// Rows "hexA,hexB,label" with label 1 (matching) or 0; '#' starts a comment.
PairSet read_pair_csv(const std::filesystem::path& path, std::size_t length);
void write_pair_csv(const PairSet& pairs, const std::filesystem::path& path);

// Planted-informative-dexel pair generator: on matching pairs the planted
// dexels agree with probability planted_agreement, on non-matching pairs and
// for every other dexel the two descriptors are independent fair coins.
struct PlantedPairConfig {
  std::size_t length = 64;
  std::size_t planted = 8;
  std::size_t matching_pairs = 1000;
  std::size_t non_matching_pairs = 1000;
  double planted_agreement = 0.9;
  std::uint64_t seed = 1;
};

struct PlantedPairs {
  PairSet pairs;
  std::vector<std::uint32_t> planted;  // ascending
};

PlantedPairs planted_pairs(const PlantedPairConfig& config);

}  // namespace bfc
