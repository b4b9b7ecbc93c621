#include "bfc/boosting.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "bfc/error.hpp"

namespace bfc {

namespace {

constexpr double kEpsilonFloor = 1e-10;
constexpr double kTieTolerance = 1e-15;

struct Sample {
  BinaryDescriptor a;
  BinaryDescriptor b;
  bool matching;
  double weight;
};

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

DexelRanking rank_dexels(const PairSet& set, std::size_t length, const BoostingConfig& config) {
  const std::size_t rounds = config.rounds == 0 ? length : config.rounds;
  if (rounds > length) {
    throw ConfigError("rounds=" + std::to_string(rounds) + " exceeds P=" + std::to_string(length));
  }
  if (!(config.asymmetry > 0.0)) throw ConfigError("asymmetry must be positive");
  if (!set.weights.empty() && set.weights.size() != set.pairs.size()) {
    throw ConfigError("weight count differs from pair count");
  }

  std::vector<Sample> samples;
  samples.reserve(set.pairs.size());
  bool has_match = false;
  bool has_non_match = false;
  for (std::size_t i = 0; i < set.pairs.size(); ++i) {
    const auto& p = set.pairs[i];
    if (p.a.size() != length || p.b.size() != length) {
      throw DimensionError("pair " + std::to_string(i) + " has descriptor length other than " +
                           std::to_string(length));
    }
    const double w = set.weights.empty() ? 1.0 : set.weights[i];
    if (!(w > 0.0) || !std::isfinite(w)) throw ConfigError("pair weights must be positive and finite");
    const bool swap = p.b < p.a;
    samples.push_back({swap ? p.b : p.a, swap ? p.a : p.b, p.matching, w});
    (p.matching ? has_match : has_non_match) = true;
  }
  if (!has_match || !has_non_match) {
    throw DegenerateTrainingSet("boosting needs both matching and non-matching pairs");
  }
  std::sort(samples.begin(), samples.end(), [](const Sample& x, const Sample& y) {
    if (x.a != y.a) return x.a < y.a;
    if (x.b != y.b) return x.b < y.b;
    if (x.matching != y.matching) return x.matching < y.matching;
    return x.weight < y.weight;
  });

  std::vector<double> w(samples.size());
  std::vector<double> cost(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    w[i] = samples[i].weight;
    cost[i] = samples[i].matching ? config.asymmetry : 1.0;
  }
  auto normalize = [&w] {
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (auto& x : w) x /= total;
  };
  normalize();

  // Bit j of diff[i] is set when dexel j disagrees within pair i.
  std::vector<BinaryDescriptor> diff;
  diff.reserve(samples.size());
  for (const auto& s : samples) diff.push_back(s.a ^ s.b);

  DexelRanking ranking;
  std::vector<bool> used(length, false);
  std::vector<double> wrong(length);
  for (std::size_t round = 0; round < rounds; ++round) {
    double total = 0.0;
    std::fill(wrong.begin(), wrong.end(), 0.0);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const double wc = w[i] * cost[i];
      total += wc;
      for (std::size_t j = 0; j < length; ++j) {
        // h_j predicts "matching" when the dexel agrees.
        if (diff[i].bit(j) == samples[i].matching) wrong[j] += wc;
      }
    }
    std::size_t best = length;
    double best_eps = 0.0;
    for (std::size_t j = 0; j < length; ++j) {
      if (used[j]) continue;
      const double eps = wrong[j] / total;
      if (best == length || eps < best_eps - kTieTolerance) {
        best = j;
        best_eps = eps;
      }
    }
    used[best] = true;
    ranking.order.push_back(static_cast<std::uint32_t>(best));
    ranking.scores.push_back(best_eps);

    const double eps = std::clamp(best_eps, kEpsilonFloor, 1.0 - kEpsilonFloor);
    const double alpha = 0.5 * std::log((1.0 - eps) / eps);
    const double up = std::exp(alpha);
    const double down = std::exp(-alpha);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      w[i] *= diff[i].bit(best) == samples[i].matching ? up : down;
    }
    normalize();
  }
  return ranking;
}

PairSet read_pair_csv(const std::filesystem::path& path, std::size_t length) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open pair file " + path.string());
  PairSet set;
  std::string line;
  std::size_t line_no = 0;
  std::uint64_t next_offset = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::uint64_t offset = next_offset;
    next_offset += line.size() + 1;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    const auto where = path.string() + ":" + std::to_string(line_no);
    if (cells.size() != 3) throw FormatError(where + ": expected hexA,hexB,label", offset);
    if (cells[2] != "0" && cells[2] != "1") throw FormatError(where + ": label must be 0 or 1", offset);
    try {
      set.pairs.push_back({BinaryDescriptor::from_hex(cells[0], length),
                           BinaryDescriptor::from_hex(cells[1], length), cells[2] == "1"});
    } catch (const Error& e) {
      throw FormatError(where + ": " + e.what(), offset);
    }
  }
  return set;
}

void write_pair_csv(const PairSet& set, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write pair file " + path.string());
  for (const auto& p : set.pairs) {
    out << p.a.to_hex() << ',' << p.b.to_hex() << ',' << (p.matching ? 1 : 0) << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

PlantedPairs planted_pairs(const PlantedPairConfig& c) {
  if (c.planted > c.length) throw ConfigError("more planted dexels than descriptor length");
  if (c.planted_agreement < 0.0 || c.planted_agreement > 1.0) {
    throw ConfigError("planted_agreement must lie in [0, 1]");
  }
  Rng rng(c.seed);
  PlantedPairs out;
  std::vector<std::uint32_t> all(c.length);
  std::iota(all.begin(), all.end(), 0u);
  for (std::size_t i = 0; i < c.planted; ++i) {
    const auto k = i + rng.below(c.length - i);
    std::swap(all[i], all[k]);
  }
  out.planted.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(c.planted));
  std::sort(out.planted.begin(), out.planted.end());
  std::vector<bool> is_planted(c.length, false);
  for (auto j : out.planted) is_planted[j] = true;

  auto random_descriptor = [&] {
    BinaryDescriptor d(c.length);
    for (std::size_t j = 0; j < c.length; ++j) d.set_bit(j, rng.bernoulli(0.5));
    return d;
  };
  for (std::size_t i = 0; i < c.matching_pairs; ++i) {
    auto a = random_descriptor();
    auto b = random_descriptor();
    for (auto j : out.planted) b.set_bit(j, rng.bernoulli(c.planted_agreement) ? a.bit(j) : !a.bit(j));
    out.pairs.pairs.push_back({std::move(a), std::move(b), true});
  }
  for (std::size_t i = 0; i < c.non_matching_pairs; ++i) {
    out.pairs.pairs.push_back({random_descriptor(), random_descriptor(), false});
  }
  return out;
}

}  // namespace bfc
