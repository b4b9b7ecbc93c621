#include "bfc/dexel_stats.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "bfc/error.hpp"

namespace bfc {

DexelStats::DexelStats(std::size_t length)
    : length_(length), ones_(length, 0), both_(length * length, 0) {}

void DexelStats::add(const BinaryDescriptor& d) {
  if (d.size() != length_) throw DimensionError("descriptor length does not match stats");
  thread_local std::vector<std::uint32_t> set;
  set.clear();
  const auto words = d.words();
  for (std::size_t w = 0; w < words.size(); ++w) {
    for (auto bits = words[w]; bits != 0; bits &= bits - 1) {
      set.push_back(static_cast<std::uint32_t>(w * 64 + static_cast<std::size_t>(std::countr_zero(bits))));
    }
  }
  for (std::size_t a = 0; a < set.size(); ++a) {
    ++ones_[set[a]];
    auto* row = &both_[set[a] * length_];
    for (std::size_t b = a; b < set.size(); ++b) ++row[set[b]];
  }
  ++samples_;
}

void DexelStats::merge(const DexelStats& other) {
  if (other.length_ != length_) throw DimensionError("cannot merge stats of different lengths");
  samples_ += other.samples_;
  for (std::size_t i = 0; i < ones_.size(); ++i) ones_[i] += other.ones_[i];
  for (std::size_t i = 0; i < both_.size(); ++i) both_[i] += other.both_[i];
}

std::array<std::uint64_t, 2> DexelStats::marginal(std::size_t j) const {
  return {samples_ - ones_.at(j), ones_[j]};
}

std::array<std::uint64_t, 4> DexelStats::joint(std::size_t j1, std::size_t j2) const {
  const auto lo = std::min(j1, j2);
  const auto hi = std::max(j1, j2);
  const std::uint64_t n11 = both_.at(lo * length_ + hi);
  const std::uint64_t n1x = ones_[j1];
  const std::uint64_t nx1 = ones_[j2];
  const std::uint64_t n10 = n1x - n11;
  const std::uint64_t n01 = nx1 - n11;
  const std::uint64_t n00 = samples_ - n1x - nx1 + n11;
  return {n00, n01, n10, n11};
}

DexelStats estimate_dexel_stats(std::span<const BinaryDescriptor> descriptors, unsigned jobs) {
  if (descriptors.empty()) throw EmptyTrainingSet("no descriptors to estimate dexel statistics");
  const std::size_t length = descriptors.front().size();
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(descriptors.size())));
  if (jobs == 1) {
    DexelStats stats(length);
    for (const auto& d : descriptors) stats.add(d);
    return stats;
  }
  std::vector<DexelStats> partial(jobs, DexelStats(length));
  std::vector<std::thread> workers;
  const std::size_t chunk = (descriptors.size() + jobs - 1) / jobs;
  for (unsigned t = 0; t < jobs; ++t) {
    workers.emplace_back([&, t] {
      const auto begin = std::min(descriptors.size(), t * chunk);
      const auto end = std::min(descriptors.size(), begin + chunk);
      for (auto i = begin; i < end; ++i) partial[t].add(descriptors[i]);
    });
  }
  for (auto& w : workers) w.join();
  for (unsigned t = 1; t < jobs; ++t) partial[0].merge(partial[t]);
  return std::move(partial[0]);
}

DexelStats estimate_dexel_stats(const FeatureStream& stream, unsigned jobs) {
  std::vector<BinaryDescriptor> all;
  for (const auto& frame : stream.frames) {
    for (const auto& f : frame.features) all.push_back(f.descriptor);
  }
  return estimate_dexel_stats(all, jobs);
}

double entropy(double p0, double p1) {
  double h = 0.0;
  if (p0 > 0.0) h -= p0 * std::log2(p0);
  if (p1 > 0.0) h -= p1 * std::log2(p1);
  return h;
}

double marginal_entropy(const DexelStats& stats, std::size_t j, Smoothing smoothing) {
  if (stats.sample_count() == 0) throw EmptyTrainingSet("empty dexel statistics");
  const auto m = stats.marginal(j);
  const double add = smoothing == Smoothing::Laplace ? 1.0 : 0.0;
  const double total = static_cast<double>(stats.sample_count()) + 2.0 * add;
  return entropy((static_cast<double>(m[0]) + add) / total, (static_cast<double>(m[1]) + add) / total);
}

double conditional_entropy(const DexelStats& stats, std::size_t j1, std::size_t j2,
                           Smoothing smoothing) {
  if (j1 == j2) throw InvalidPair("conditional entropy of a dexel given itself");
  if (stats.sample_count() == 0) throw EmptyTrainingSet("empty dexel statistics");
  const auto n = stats.joint(j1, j2);
  const double add = smoothing == Smoothing::Laplace ? 1.0 : 0.0;
  const double total = static_cast<double>(stats.sample_count()) + 4.0 * add;
  double p[4];
  for (int i = 0; i < 4; ++i) p[i] = (static_cast<double>(n[i]) + add) / total;
  // H(X|Y) = sum_{x,y} p(x,y) log2(p(y) / p(x,y)), x = value of j1, y = value of j2.
  const double py[2] = {p[0] + p[2], p[1] + p[3]};
  double h = 0.0;
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      const double pxy = p[2 * x + y];
      if (pxy > 0.0) h += pxy * std::log2(py[y] / pxy);
    }
  }
  return std::max(0.0, h);
}

}  // namespace bfc
