#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "bfc/descriptor.hpp"
#include "bfc/features.hpp"

namespace bfc {

// Exact first- and second-order dexel counts over a set of descriptors.
class DexelStats {
public:
  DexelStats() = default;
  explicit DexelStats(std::size_t length);

  void add(const BinaryDescriptor& d);
  // Commutative, associative. Throws DimensionError on length mismatch.
  void merge(const DexelStats& other);

  std::size_t length() const noexcept { return length_; }
  std::uint64_t sample_count() const noexcept { return samples_; }

  // {count of 0, count of 1} for dexel j.
  std::array<std::uint64_t, 2> marginal(std::size_t j) const;
  // Joint counts indexed [2 * value(j1) + value(j2)].
  std::array<std::uint64_t, 4> joint(std::size_t j1, std::size_t j2) const;

  friend bool operator==(const DexelStats&, const DexelStats&) = default;

private:
  std::size_t length_ = 0;
  std::uint64_t samples_ = 0;
  std::vector<std::uint64_t> ones_;
  std::vector<std::uint64_t> both_;  // upper triangle incl. diagonal, row-major P x P
};

// Throws EmptyTrainingSet when no descriptors are supplied. `jobs` > 1
// counts disjoint slices in parallel and merges them.
DexelStats estimate_dexel_stats(std::span<const BinaryDescriptor> descriptors,
                                unsigned jobs = 1);
DexelStats estimate_dexel_stats(const FeatureStream& stream, unsigned jobs = 1);

enum class Smoothing { None, Laplace };

// Binary entropy in bits, with 0 log 0 = 0.
double entropy(double p0, double p1);

double marginal_entropy(const DexelStats& stats, std::size_t j,
                        Smoothing smoothing = Smoothing::None);

// H(dexel j1 | dexel j2). Laplace smoothing adds one to each of the four
// joint cells; the marginal of j2 is taken from the same smoothed joint.
// Throws InvalidPair when j1 == j2 and EmptyTrainingSet on empty stats.
double conditional_entropy(const DexelStats& stats, std::size_t j1, std::size_t j2,
                           Smoothing smoothing = Smoothing::None);

}  // namespace bfc
