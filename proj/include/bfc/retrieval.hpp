#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "bfc/bovw.hpp"
#include "bfc/features.hpp"

namespace bfc {

// Database ids in rank order with their relevance; the first `candidates`
// entries are the re-ranking pool.
struct RankedList {
  std::vector<std::uint32_t> ids;
  std::vector<bool> relevant;
  std::size_t candidates = 0;
};

struct DatabaseEntry {
  std::uint32_t id = 0;
  GlobalDescriptor global;
  std::vector<LocalFeature> features;
};

struct RetrievalDatabase {
  std::vector<DatabaseEntry> entries;

  // Index of `id`; throws ConfigError when absent.
  std::size_t index_of(std::uint32_t id) const;
};

// Builds global descriptors with `dict` and keeps the local features.
// Throws ConfigError on duplicate ids or count mismatch.
RetrievalDatabase build_database(std::span<const FrameFeatures> images, std::span<const std::uint32_t> ids,
                                 const Dictionary& dict, unsigned jobs = 1);

inline constexpr std::size_t kDefaultRerankDepth = 200;

// Ascending Euclidean distance, ties by ascending id; the first min(k, Z)
// entries become re-ranking candidates. Throws DimensionError when the
// query and database dimensions differ.
RankedList retrieve(const GlobalDescriptor& query, const RetrievalDatabase& db, std::size_t k,
                    const std::set<std::uint32_t>& relevant);

// Reorders the candidate block by descending score; equal scores keep their
// prior order. Entries after the block are untouched. `scores` has one entry
// per candidate.
RankedList rerank_by_scores(const RankedList& ranked, std::span<const std::size_t> scores);

// Scores each candidate by the number of query features that pass the ratio
// test against its stored features (0 when it stores fewer than 2).
RankedList rerank(std::span<const LocalFeature> query, const RankedList& ranked, const RetrievalDatabase& db,
                  double ratio = 0.7);

// Per item: its 1-based position in every ranking, scored by the lower
// median; ascending score, ties by ascending id. Relevance is carried over.
// Throws ConfigError when the rankings cover different id sets or none are
// given.
RankedList median_rank_aggregate(std::span<const RankedList> rankings);

// JSON object mapping query names to arrays of relevant database ids.
std::map<std::string, std::set<std::uint32_t>> read_relevance_json(const std::filesystem::path& path);
void write_relevance_json(const std::map<std::string, std::set<std::uint32_t>>& relevance,
                          const std::filesystem::path& path);

}  // namespace bfc
