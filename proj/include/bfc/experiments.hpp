#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bfc/boosting.hpp"
#include "bfc/bovw.hpp"
#include "bfc/datasets.hpp"
#include "bfc/local_codec.hpp"

namespace bfc {

enum class SweepTask : std::uint8_t { Retrieval = 0, Homography = 1 };
const char* to_string(SweepTask task);
SweepTask parse_sweep_task(const std::string& text);

// Cartesian grid. Empty axes take their defaults: k = {P}, delta = {0.05},
// gop = {1}, strategy = {skip}, mode = {auto}. The homography task uses
// only k and mode.
struct SweepGrid {
  std::vector<std::uint32_t> k;
  std::vector<double> delta;  // 0 means unquantized global descriptors
  std::vector<std::uint32_t> gop;
  std::vector<GopStrategy> strategy;
  std::vector<CodingMode> mode;
};

// Parses "axis=v1,v2,..." for axes k, delta, gop, strategy, mode.
void parse_grid_axis(SweepGrid& grid, const std::string& spec);

struct SweepConfig {
  SweepTask task = SweepTask::Retrieval;
  SweepGrid grid;
  double lambda = 1.0;
  SearchWindow window;
  std::size_t rerank_depth = 0;  // 0 disables local re-ranking
  double ratio = 0.7;
  unsigned jobs = 1;
  std::optional<DexelRanking> ranking;

  // Retrieval artifacts. idf of `dictionary` is used as is.
  std::optional<RetrievalDataset> retrieval;
  std::optional<Dictionary> dictionary;

  // Homography artifacts: evaluation scene plus a training stream.
  std::optional<PlanarScene> scene;
  std::optional<FeatureStream> homography_training;
  HomographyEvalConfig homography;
};

struct SweepRow {
  std::string task;
  std::uint32_t K = 0;
  double delta = 0.0;
  std::uint32_t gop = 1;
  std::string strategy;
  std::string mode;
  std::size_t queries = 0;
  std::size_t features = 0;         // local features coded
  double bits_per_feature = 0.0;    // local payload bits / features
  double bytes_per_query = 0.0;     // global payload bytes per query sequence
  double map = 0.0;                 // retrieval only
  double map_mra = 0.0;             // retrieval only
  double precision = 0.0;           // homography only
};

// One row per grid point. Every coded stream is decoded and checked against
// its K-projection. Throws ConfigError when the task's artifacts are
// missing.
std::vector<SweepRow> run_rate_efficiency(const SweepConfig& config);

inline constexpr const char* kSweepCsvHeader =
    "task,K,delta,gop,strategy,mode,queries,features,bits_per_feature,bytes_per_query,map,map_mra,precision";

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path);
// gnuplot script plotting the metric against the rate, reading `csv`.
void write_sweep_plot(SweepTask task, const std::filesystem::path& csv, const std::filesystem::path& path);

}  // namespace bfc
