#include "bfc/retrieval.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "bfc/error.hpp"
#include "bfc/homography.hpp"
#include "bfc/parallel.hpp"
#include "json.hpp"

namespace bfc {

std::size_t RetrievalDatabase::index_of(std::uint32_t id) const {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].id == id) return i;
  }
  throw ConfigError("database has no entry with id " + std::to_string(id));
}

RetrievalDatabase build_database(std::span<const FrameFeatures> images, std::span<const std::uint32_t> ids,
                                 const Dictionary& dict, unsigned jobs) {
  if (images.size() != ids.size()) throw ConfigError("image count differs from id count");
  std::set<std::uint32_t> unique(ids.begin(), ids.end());
  if (unique.size() != ids.size()) throw ConfigError("database ids must be unique");
  RetrievalDatabase db;
  db.entries.resize(images.size());
  parallel_for(images.size(), jobs, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      db.entries[i] = {ids[i], build_global(images[i], dict), images[i].features};
    }
  });
  return db;
}

RankedList retrieve(const GlobalDescriptor& query, const RetrievalDatabase& db, std::size_t k,
                    const std::set<std::uint32_t>& relevant) {
  std::vector<std::pair<double, std::uint32_t>> scored;
  scored.reserve(db.entries.size());
  for (const auto& e : db.entries) {
    if (e.global.size() != query.size()) throw DimensionError("query and database descriptors differ in dimension");
    double d = 0.0;
    for (std::size_t j = 0; j < query.size(); ++j) {
      const double t = query[j] - e.global[j];
      d += t * t;
    }
    scored.emplace_back(d, e.id);
  }
  std::sort(scored.begin(), scored.end());
  RankedList out;
  out.candidates = std::min(k, scored.size());
  for (const auto& [d, id] : scored) {
    out.ids.push_back(id);
    out.relevant.push_back(relevant.count(id) > 0);
  }
  return out;
}

RankedList rerank_by_scores(const RankedList& ranked, std::span<const std::size_t> scores) {
  if (scores.size() != ranked.candidates) throw ConfigError("one score per candidate is required");
  std::vector<std::size_t> order(ranked.candidates);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  RankedList out = ranked;
  for (std::size_t r = 0; r < order.size(); ++r) {
    out.ids[r] = ranked.ids[order[r]];
    out.relevant[r] = ranked.relevant[order[r]];
  }
  return out;
}

RankedList rerank(std::span<const LocalFeature> query, const RankedList& ranked, const RetrievalDatabase& db,
                  double ratio) {
  std::vector<std::size_t> scores(ranked.candidates, 0);
  for (std::size_t r = 0; r < ranked.candidates; ++r) {
    const auto& stored = db.entries[db.index_of(ranked.ids[r])].features;
    if (stored.size() < 2 || query.empty()) continue;
    scores[r] = match_features(query, stored, ratio).size();
  }
  return rerank_by_scores(ranked, scores);
}

RankedList median_rank_aggregate(std::span<const RankedList> rankings) {
  if (rankings.empty()) throw ConfigError("median rank aggregation needs at least one ranking");
  const auto& first = rankings.front();
  std::map<std::uint32_t, std::vector<std::size_t>> positions;
  std::map<std::uint32_t, bool> relevance;
  for (std::size_t r = 0; r < first.ids.size(); ++r) {
    positions[first.ids[r]];
    relevance[first.ids[r]] = first.relevant[r];
  }
  if (positions.size() != first.ids.size()) throw ConfigError("ranking contains duplicate ids");
  for (const auto& ranking : rankings) {
    if (ranking.ids.size() != positions.size()) throw ConfigError("rankings cover different databases");
    for (std::size_t r = 0; r < ranking.ids.size(); ++r) {
      auto it = positions.find(ranking.ids[r]);
      if (it == positions.end()) throw ConfigError("rankings cover different databases");
      it->second.push_back(r + 1);
    }
  }
  std::vector<std::pair<std::size_t, std::uint32_t>> scored;
  scored.reserve(positions.size());
  for (auto& [id, pos] : positions) {
    if (pos.size() != rankings.size()) throw ConfigError("ranking contains duplicate ids");
    const std::size_t mid = (pos.size() - 1) / 2;
    std::nth_element(pos.begin(), pos.begin() + static_cast<std::ptrdiff_t>(mid), pos.end());
    scored.emplace_back(pos[mid], id);
  }
  std::sort(scored.begin(), scored.end());
  RankedList out;
  out.candidates = first.candidates;
  for (const auto& [score, id] : scored) {
    out.ids.push_back(id);
    out.relevant.push_back(relevance[id]);
  }
  return out;
}

std::map<std::string, std::set<std::uint32_t>> read_relevance_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open relevance file " + path.string());
  std::map<std::string, std::set<std::uint32_t>> out;
  try {
    const auto j = nlohmann::json::parse(in);
    if (!j.is_object()) throw FormatError("relevance file must hold a JSON object", 0);
    for (const auto& [key, value] : j.items()) {
      auto& ids = out[key];
      for (const auto& id : value) ids.insert(id.get<std::uint32_t>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("relevance JSON: ") + e.what(), 0);
  }
  return out;
}

void write_relevance_json(const std::map<std::string, std::set<std::uint32_t>>& relevance,
                          const std::filesystem::path& path) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [key, ids] : relevance) j[key] = std::vector<std::uint32_t>(ids.begin(), ids.end());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write relevance file " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace bfc
