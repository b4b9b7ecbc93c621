#include "bfc/bovw.hpp"

#include <algorithm>
#include <cmath>

#include "bfc/bytes.hpp"
#include "bfc/error.hpp"
#include "bfc/parallel.hpp"
#include "bfc/rng.hpp"

namespace bfc {

namespace {

constexpr std::uint16_t kDictionaryVersion = 1;

void set_bits(const BinaryDescriptor& d, std::vector<std::uint32_t>& out) {
  out.clear();
  const auto words = d.words();
  for (std::size_t w = 0; w < words.size(); ++w) {
    for (auto bits = words[w]; bits != 0; bits &= bits - 1) {
      out.push_back(static_cast<std::uint32_t>(w * 64 + static_cast<std::size_t>(std::countr_zero(bits))));
    }
  }
}

struct Assignment {
  std::uint32_t word = 0;
  double distance = 0.0;
};

Assignment nearest(const Dictionary& dict, const BinaryDescriptor& d) {
  Assignment best{0, 0.0};
  const auto V = dict.words();
  if (dict.metric() == Metric::Hamming) {
    for (std::size_t v = 0; v < V; ++v) {
      const double dist = static_cast<double>(hamming(d, dict.binary[v]));
      if (v == 0 || dist < best.distance) best = {static_cast<std::uint32_t>(v), dist};
    }
    return best;
  }
  for (std::size_t v = 0; v < V; ++v) {
    const double dist = dict.distance(d, v);
    if (v == 0 || dist < best.distance) best = {static_cast<std::uint32_t>(v), dist};
  }
  return best;
}

void check_length(const Dictionary& dict, const BinaryDescriptor& d) {
  if (d.size() != dict.length) {
    throw DimensionError("descriptor length " + std::to_string(d.size()) + " differs from dictionary P=" +
                         std::to_string(dict.length));
  }
}

}  // namespace

const char* to_string(ClusterMethod method) {
  switch (method) {
    case ClusterMethod::KMeans: return "kmeans";
    case ClusterMethod::KMedians: return "kmedians";
    case ClusterMethod::KMedoids: return "kmedoids";
  }
  return "?";
}

ClusterMethod parse_cluster_method(const std::string& text) {
  if (text == "kmeans") return ClusterMethod::KMeans;
  if (text == "kmedians") return ClusterMethod::KMedians;
  if (text == "kmedoids") return ClusterMethod::KMedoids;
  throw ConfigError("unknown clustering method '" + text + "' (expected kmeans|kmedians|kmedoids)");
}

Metric metric_of(ClusterMethod method) noexcept {
  return method == ClusterMethod::KMeans ? Metric::Euclidean : Metric::Hamming;
}

void Dictionary::refresh() {
  const std::size_t V = words();
  norms_.assign(V, 0.0);
  binary.clear();
  for (std::size_t v = 0; v < V; ++v) {
    const auto c = centroid(v);
    double n = 0.0;
    for (double x : c) n += x * x;
    norms_[v] = n;
    if (metric() == Metric::Hamming) {
      BinaryDescriptor b(length);
      for (std::size_t j = 0; j < length; ++j) b.set_bit(j, c[j] != 0.0);
      binary.push_back(std::move(b));
    }
  }
}

double Dictionary::distance(const BinaryDescriptor& d, std::size_t v) const {
  if (metric() == Metric::Hamming) return static_cast<double>(hamming(d, binary[v]));
  const auto c = centroid(v);
  double dot = 0.0;
  const auto words = d.words();
  for (std::size_t w = 0; w < words.size(); ++w) {
    for (auto bits = words[w]; bits != 0; bits &= bits - 1) {
      dot += c[w * 64 + static_cast<std::size_t>(std::countr_zero(bits))];
    }
  }
  return norms_[v] - 2.0 * dot + static_cast<double>(d.popcount());
}

std::uint32_t Dictionary::assign(const BinaryDescriptor& d) const {
  check_length(*this, d);
  return nearest(*this, d).word;
}

Dictionary learn_dictionary(std::span<const BinaryDescriptor> sample, const DictionaryConfig& config,
                            DictionaryReport* report) {
  const std::size_t n = sample.size();
  const std::size_t V = config.words;
  if (V == 0) throw ConfigError("dictionary size must be positive");
  if (V > n) {
    throw ConfigError("dictionary size V=" + std::to_string(V) + " exceeds the sample size " +
                      std::to_string(n));
  }
  const std::size_t P = sample.front().size();
  for (const auto& d : sample) {
    if (d.size() != P) throw DimensionError("training descriptors differ in length");
  }

  Dictionary dict;
  dict.length = static_cast<std::uint32_t>(P);
  dict.method = config.method;
  dict.idf.assign(V, 1.0);
  dict.centroids.assign(V * P, 0.0);
  auto set_centroid = [&](std::size_t v, const BinaryDescriptor& d) {
    for (std::size_t j = 0; j < P; ++j) dict.centroids[v * P + j] = d.bit(j) ? 1.0 : 0.0;
  };

  // k-means++ seeding over sample points; D^2 uses the method's own metric.
  Rng rng(config.seed);
  const bool euclid = dict.metric() == Metric::Euclidean;
  auto seed_weight = [euclid](std::size_t h) {
    return euclid ? static_cast<double>(h) : static_cast<double>(h) * static_cast<double>(h);
  };
  std::vector<double> weight(n);
  std::size_t chosen = rng.below(n);
  set_centroid(0, sample[chosen]);
  for (std::size_t i = 0; i < n; ++i) weight[i] = seed_weight(hamming(sample[i], sample[chosen]));
  for (std::size_t v = 1; v < V; ++v) {
    double total = 0.0;
    for (double w : weight) total += w;
    if (total == 0.0) {
      throw ConfigError("dictionary size V=" + std::to_string(V) +
                        " exceeds the number of distinct training descriptors");
    }
    const double r = rng.uniform() * total;
    double acc = 0.0;
    chosen = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (weight[i] == 0.0) continue;
      acc += weight[i];
      chosen = i;
      if (acc > r) break;
    }
    set_centroid(v, sample[chosen]);
    for (std::size_t i = 0; i < n; ++i) {
      weight[i] = std::min(weight[i], seed_weight(hamming(sample[i], sample[chosen])));
    }
  }
  dict.refresh();

  std::vector<Assignment> assignment(n);
  std::vector<std::uint32_t> previous;
  DictionaryReport local;
  for (std::size_t iter = 0; iter < config.max_iterations; ++iter) {
    parallel_for(n, config.jobs, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) assignment[i] = nearest(dict, sample[i]);
    });
    double distortion = 0.0;
    std::vector<std::uint32_t> current(n);
    for (std::size_t i = 0; i < n; ++i) {
      distortion += assignment[i].distance;
      current[i] = assignment[i].word;
    }
    local.distortion.push_back(distortion);
    local.iterations = iter + 1;
    if (current == previous) {
      local.converged = true;
      break;
    }
    previous = current;

    // Update step.
    std::vector<std::vector<std::size_t>> members(V);
    for (std::size_t i = 0; i < n; ++i) members[current[i]].push_back(i);
    std::vector<std::uint32_t> ones;
    for (std::size_t v = 0; v < V; ++v) {
      if (members[v].empty()) continue;
      if (config.method == ClusterMethod::KMedoids) {
        std::size_t best = members[v].front();
        std::size_t best_cost = 0;
        bool first = true;
        for (auto m : members[v]) {
          std::size_t cost = 0;
          for (auto i : members[v]) cost += hamming(sample[m], sample[i]);
          if (first || cost < best_cost) {
            best = m;
            best_cost = cost;
            first = false;
          }
        }
        set_centroid(v, sample[best]);
        continue;
      }
      std::vector<std::uint64_t> count(P, 0);
      for (auto i : members[v]) {
        set_bits(sample[i], ones);
        for (auto j : ones) ++count[j];
      }
      const double size = static_cast<double>(members[v].size());
      for (std::size_t j = 0; j < P; ++j) {
        dict.centroids[v * P + j] = config.method == ClusterMethod::KMeans
                                        ? static_cast<double>(count[j]) / size
                                        : (2 * count[j] > members[v].size() ? 1.0 : 0.0);
      }
    }
    dict.refresh();

    // Empty-cluster repair.
    for (std::size_t v = 0; v < V; ++v) {
      if (!members[v].empty()) continue;
      std::size_t largest = 0;
      for (std::size_t u = 1; u < V; ++u) {
        if (members[u].size() > members[largest].size()) largest = u;
      }
      if (members[largest].size() < 2) break;
      std::size_t far_pos = 0;
      double far = -1.0;
      for (std::size_t k = 0; k < members[largest].size(); ++k) {
        const double d = dict.distance(sample[members[largest][k]], largest);
        if (d > far) {
          far = d;
          far_pos = k;
        }
      }
      const auto point = members[largest][far_pos];
      members[largest].erase(members[largest].begin() + static_cast<std::ptrdiff_t>(far_pos));
      members[v].push_back(point);
      set_centroid(v, sample[point]);
      dict.refresh();
    }
  }
  if (report) *report = std::move(local);
  return dict;
}

double dictionary_distortion(const Dictionary& dict, std::span<const BinaryDescriptor> sample) {
  double total = 0.0;
  for (const auto& d : sample) {
    check_length(dict, d);
    total += nearest(dict, d).distance;
  }
  return total;
}

std::vector<double> compute_idf(const Dictionary& dict, std::span<const FrameFeatures> documents) {
  if (documents.empty()) throw EmptyTrainingSet("idf needs at least one document");
  const std::size_t V = dict.words();
  std::vector<std::uint64_t> df(V, 0);
  std::vector<bool> seen(V);
  for (const auto& doc : documents) {
    std::fill(seen.begin(), seen.end(), false);
    for (const auto& f : doc.features) {
      const auto v = dict.assign(f.descriptor);
      if (!seen[v]) {
        seen[v] = true;
        ++df[v];
      }
    }
  }
  const double D = static_cast<double>(documents.size());
  std::vector<double> idf(V);
  for (std::size_t v = 0; v < V; ++v) idf[v] = std::max(0.0, std::log(D / (1.0 + static_cast<double>(df[v]))));
  return idf;
}

std::vector<std::uint32_t> word_histogram(const FrameFeatures& frame, const Dictionary& dict) {
  std::vector<std::uint32_t> h(dict.words(), 0);
  for (const auto& f : frame.features) ++h[dict.assign(f.descriptor)];
  return h;
}

GlobalDescriptor normalize_global(GlobalDescriptor g) {
  double norm = 0.0;
  for (double x : g) norm += x * x;
  if (norm == 0.0) return g;
  norm = std::sqrt(norm);
  for (double& x : g) x /= norm;
  return g;
}

GlobalDescriptor build_global(const FrameFeatures& frame, const Dictionary& dict) {
  const auto h = word_histogram(frame, dict);
  GlobalDescriptor g(h.size());
  for (std::size_t v = 0; v < h.size(); ++v) g[v] = h[v] * dict.idf[v];
  return normalize_global(std::move(g));
}

QuantizedGlobal quantize_global(const GlobalDescriptor& g, double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ConfigError("quantization step must be positive");
  QuantizedGlobal q;
  q.delta = delta;
  q.indices.resize(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double v = g[j];
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("global descriptor values must be finite and >= 0");
    const double f = std::floor(v / delta);
    if (f > 4294967295.0) throw ConfigError("quantization index overflows 32 bits");
    auto idx = static_cast<std::uint32_t>(f);
    while (idx > 0 && v - static_cast<double>(idx) * delta < 0.0) --idx;
    while (v - static_cast<double>(idx) * delta >= delta) ++idx;
    q.indices[j] = idx;
  }
  return q;
}

GlobalDescriptor dequantize_global(const QuantizedGlobal& q) {
  GlobalDescriptor g(q.indices.size());
  for (std::size_t j = 0; j < g.size(); ++j) g[j] = static_cast<double>(q.indices[j]) * q.delta;
  return g;
}

const char* to_string(GopStrategy strategy) {
  return strategy == GopStrategy::Skip ? "skip" : "median";
}

GopStrategy parse_gop_strategy(const std::string& text) {
  if (text == "skip") return GopStrategy::Skip;
  if (text == "median" || text == "gop") return GopStrategy::Median;
  throw ConfigError("unknown GOP strategy '" + text + "' (expected skip|median)");
}

GlobalDescriptor aggregate_gop(std::span<const GlobalDescriptor> gop, GopStrategy strategy) {
  if (gop.empty()) throw EmptyGop("GOP contains no descriptors");
  const std::size_t V = gop.front().size();
  for (const auto& g : gop) {
    if (g.size() != V) throw DimensionError("GOP descriptors differ in dimension");
  }
  if (strategy == GopStrategy::Skip) return gop.front();
  GlobalDescriptor out(V);
  std::vector<double> column(gop.size());
  const std::size_t mid = (gop.size() - 1) / 2;
  for (std::size_t j = 0; j < V; ++j) {
    for (std::size_t i = 0; i < gop.size(); ++i) column[i] = gop[i][j];
    std::nth_element(column.begin(), column.begin() + static_cast<std::ptrdiff_t>(mid), column.end());
    out[j] = column[mid];
  }
  return normalize_global(std::move(out));
}

std::vector<std::uint8_t> serialize_dictionary(const Dictionary& dict) {
  ByteWriter w;
  w.magic("BFDC");
  w.u16(kDictionaryVersion);
  w.u32(static_cast<std::uint32_t>(dict.words()));
  w.u32(dict.length);
  w.u8(static_cast<std::uint8_t>(dict.method));
  for (std::size_t v = 0; v < dict.words(); ++v) {
    if (dict.metric() == Metric::Hamming) {
      BinaryDescriptor b(dict.length);
      const auto c = dict.centroid(v);
      for (std::size_t j = 0; j < dict.length; ++j) b.set_bit(j, c[j] != 0.0);
      b.append_bytes(w.buffer());
    } else {
      for (double x : dict.centroid(v)) w.f64(x);
    }
  }
  for (double x : dict.idf) w.f64(x);
  return w.take();
}

Dictionary parse_dictionary(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic("BFDC");
  auto at = r.offset();
  if (r.u16() != kDictionaryVersion) throw FormatError("unsupported dictionary version", at);
  Dictionary dict;
  at = r.offset();
  const auto V = r.u32();
  dict.length = r.u32();
  if (V == 0 || dict.length == 0) throw FormatError("dictionary dimensions must be positive", at);
  at = r.offset();
  const auto method = r.u8();
  if (method > 2) throw FormatError("unknown clustering method", at);
  dict.method = static_cast<ClusterMethod>(method);
  const std::size_t per_word =
      dict.metric() == Metric::Hamming ? (dict.length + 7) / 8 : std::size_t{8} * dict.length;
  if (static_cast<std::uint64_t>(V) * (per_word + 8) > r.remaining()) {
    throw FormatError("dictionary larger than the file", r.offset());
  }
  dict.centroids.resize(static_cast<std::size_t>(V) * dict.length);
  for (std::size_t v = 0; v < V; ++v) {
    if (dict.metric() == Metric::Hamming) {
      at = r.offset();
      const auto raw = r.bytes((dict.length + 7) / 8);
      const auto b = BinaryDescriptor::from_bytes(raw, dict.length);
      if (!std::equal(raw.begin(), raw.end(), b.to_bytes().begin())) {
        throw FormatError("non-zero padding bits in centroid", at);
      }
      for (std::size_t j = 0; j < dict.length; ++j) dict.centroids[v * dict.length + j] = b.bit(j) ? 1.0 : 0.0;
    } else {
      for (std::size_t j = 0; j < dict.length; ++j) {
        at = r.offset();
        const double x = r.f64();
        if (!std::isfinite(x)) throw FormatError("non-finite centroid value", at);
        dict.centroids[v * dict.length + j] = x;
      }
    }
  }
  dict.idf.resize(V);
  for (auto& x : dict.idf) {
    at = r.offset();
    x = r.f64();
    if (!std::isfinite(x) || x < 0.0) throw FormatError("idf must be finite and non-negative", at);
  }
  if (!r.at_end()) throw FormatError("trailing bytes after dictionary", r.offset());
  dict.refresh();
  return dict;
}

void write_dictionary(const Dictionary& dict, const std::filesystem::path& path) {
  write_file(path, serialize_dictionary(dict));
}

Dictionary read_dictionary(const std::filesystem::path& path) {
  return parse_dictionary(read_file(path));
}

}  // namespace bfc
