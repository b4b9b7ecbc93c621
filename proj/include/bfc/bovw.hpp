#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "bfc/codebook.hpp"
#include "bfc/descriptor.hpp"
#include "bfc/features.hpp"

namespace bfc {

enum class ClusterMethod : std::uint8_t { KMeans = 0, KMedians = 1, KMedoids = 2 };
enum class Metric : std::uint8_t { Euclidean = 0, Hamming = 1 };

const char* to_string(ClusterMethod method);
ClusterMethod parse_cluster_method(const std::string& text);  // throws ConfigError
Metric metric_of(ClusterMethod method) noexcept;

// Visual-word dictionary. Centroids are V x P row-major reals; for the
// Hamming methods every entry is 0 or 1 and `binary` mirrors them.
struct Dictionary {
  std::uint32_t length = 0;  // P
  ClusterMethod method = ClusterMethod::KMeans;
  std::vector<double> centroids;
  std::vector<BinaryDescriptor> binary;
  std::vector<double> idf;  // V entries, >= 0

  std::size_t words() const noexcept { return idf.size(); }
  Metric metric() const noexcept { return metric_of(method); }
  std::span<const double> centroid(std::size_t v) const {
    return std::span(centroids).subspan(v * length, length);
  }

  // Nearest word; ties go to the lowest index. Throws DimensionError.
  std::uint32_t assign(const BinaryDescriptor& d) const;
  // Squared Euclidean distance for k-means, Hamming distance otherwise.
  double distance(const BinaryDescriptor& d, std::size_t word) const;

  // Recomputes cached centroid norms and binary mirrors after editing.
  void refresh();

  friend bool operator==(const Dictionary& a, const Dictionary& b) {
    return a.length == b.length && a.method == b.method && a.centroids == b.centroids && a.idf == b.idf;
  }

private:
  std::vector<double> norms_;  // squared norms of the centroids
};

struct DictionaryConfig {
  std::uint32_t words = 256;
  ClusterMethod method = ClusterMethod::KMeans;
  std::size_t max_iterations = 100;
  std::uint64_t seed = 1;
  unsigned jobs = 1;
};

struct DictionaryReport {
  std::size_t iterations = 0;
  bool converged = false;          // assignment fixpoint reached
  std::vector<double> distortion;  // after each iteration's update
};

// k-means++ seeding (also for the Hamming methods, under their own metric),
// then Lloyd-style alternation until the assignment no longer changes or the
// iteration cap is hit. An empty cluster takes the point of the largest
// cluster that lies farthest from its centroid. idf starts at 1 for every
// word. Throws ConfigError when V exceeds the sample size or the number of
// distinct descriptors, DimensionError on mixed lengths.
Dictionary learn_dictionary(std::span<const BinaryDescriptor> sample, const DictionaryConfig& config,
                            DictionaryReport* report = nullptr);

// Sum over the sample of each descriptor's distance to its assigned word.
double dictionary_distortion(const Dictionary& dict, std::span<const BinaryDescriptor> sample);

// idf_v = max(0, ln(D / (1 + df_v))) over D documents (frames).
std::vector<double> compute_idf(const Dictionary& dict, std::span<const FrameFeatures> documents);

using GlobalDescriptor = std::vector<double>;

// Word counts of a frame.
std::vector<std::uint32_t> word_histogram(const FrameFeatures& frame, const Dictionary& dict);
// Histogram x idf, L2-normalized; an all-zero weighted histogram stays zero.
GlobalDescriptor build_global(const FrameFeatures& frame, const Dictionary& dict);
GlobalDescriptor normalize_global(GlobalDescriptor g);

struct QuantizedGlobal {
  std::vector<std::uint32_t> indices;
  double delta = 0.0;

  friend bool operator==(const QuantizedGlobal&, const QuantizedGlobal&) = default;
};

// indices[j] = floor(g[j] / delta), adjusted so that in floating point
// 0 <= g[j] - indices[j] * delta < delta. Throws ConfigError unless delta > 0
// and every value is finite and non-negative.
QuantizedGlobal quantize_global(const GlobalDescriptor& g, double delta);
GlobalDescriptor dequantize_global(const QuantizedGlobal& q);

enum class GopStrategy : std::uint8_t { Skip = 0, Median = 1 };
const char* to_string(GopStrategy strategy);
GopStrategy parse_gop_strategy(const std::string& text);

// Skip: the first descriptor. Median: element-wise lower median, then
// L2-normalized. Throws EmptyGop.
GlobalDescriptor aggregate_gop(std::span<const GlobalDescriptor> gop, GopStrategy strategy);

void write_dictionary(const Dictionary& dict, const std::filesystem::path& path);
Dictionary read_dictionary(const std::filesystem::path& path);
std::vector<std::uint8_t> serialize_dictionary(const Dictionary& dict);
Dictionary parse_dictionary(std::span<const std::uint8_t> bytes);

}  // namespace bfc
