#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bfc/codebook.hpp"
#include "bfc/features.hpp"
#include "bfc/local_codec.hpp"

namespace bfc {

struct LocalTrainingConfig {
  std::uint32_t K = 0;  // 0 means P
  SearchWindow window;
  double lambda = 1.0;
  unsigned jobs = 1;
};

struct LocalTrainingReport {
  std::size_t intra_samples = 0;
  std::size_t inter_samples = 0;  // features chosen INTER in the final pass
  double truncated_bound_intra = 0.0;  // bits per descriptor
  double truncated_bound_inter = 0.0;
};

// Trains intra and inter local models from the K-projected training streams.
// Intra: dexel statistics, scale and orientation histograms over all
// features. Inter: a first pass matches every feature of frame n to its
// nearest-Hamming neighbour of frame n-1 inside the window; a second pass
// runs the auto-mode encoder with those tables and retrains on the features
// it codes as INTER. Without any inter sample the inter tables stay uniform.
// The ranking, when supplied, gives the dexel selection and is stored in the
// returned codebook.
Codebook train_local_codebook(std::span<const FeatureStream> streams,
                              const std::optional<DexelRanking>& ranking,
                              const LocalTrainingConfig& config,
                              LocalTrainingReport* report = nullptr);

}  // namespace bfc
