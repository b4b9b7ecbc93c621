#include "bfc/experiments.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "bfc/error.hpp"
#include "bfc/global_codec.hpp"
#include "bfc/local_training.hpp"
#include "bfc/metrics.hpp"
#include "bfc/retrieval.hpp"

namespace bfc {

namespace {

template <class T>
std::vector<T> or_default(const std::vector<T>& axis, T fallback) {
  return axis.empty() ? std::vector<T>{fallback} : axis;
}

std::vector<std::uint32_t> selection_for(const std::optional<DexelRanking>& ranking, std::size_t P) {
  if (ranking) return ranking->order;
  std::vector<std::uint32_t> s(P);
  for (std::uint32_t j = 0; j < P; ++j) s[j] = j;
  return s;
}

struct LocalCoding {
  double bits = 0.0;
  std::size_t features = 0;
  FeatureStream decoded;
};

LocalCoding code_local(const FeatureStream& stream, const Codebook& codebook, std::uint32_t K, CodingMode mode,
                       const SweepConfig& c) {
  auto enc = make_encoder_config(codebook, K, c.lambda, c.window, mode, location_format_for(stream));
  const auto encoded = encode_stream(stream, enc);
  LocalCoding out;
  out.decoded = decode_stream(encoded, codebook);
  if (out.decoded.frames != project_stream(stream, enc.selection, K).frames) {
    throw StreamError("decoded stream differs from the K-projected input");
  }
  for (const auto& f : encoded.frames) {
    out.bits += f.payload_bits();
    out.features += f.feature_count;
  }
  return out;
}

std::vector<GlobalDescriptor> transmitted(const std::vector<GlobalDescriptor>& frames, std::uint32_t gop,
                                          GopStrategy strategy) {
  std::vector<GlobalDescriptor> out;
  for (std::size_t start = 0; start < frames.size(); start += gop) {
    const auto end = std::min(frames.size(), start + gop);
    out.push_back(aggregate_gop(std::span(frames).subspan(start, end - start), strategy));
  }
  return out;
}

FeatureStream gop_leaders(const FeatureStream& stream, std::uint32_t gop) {
  FeatureStream out;
  out.descriptor_length = stream.descriptor_length;
  out.metadata = stream.metadata;
  for (std::size_t n = 0; n < stream.frames.size(); n += gop) out.frames.push_back(stream.frames[n]);
  return out;
}

std::vector<SweepRow> retrieval_sweep(const SweepConfig& c) {
  if (!c.retrieval || !c.dictionary) throw ConfigError("retrieval sweep needs a dataset and a dictionary");
  const auto& data = *c.retrieval;
  const auto& dict = *c.dictionary;
  const std::size_t P = data.database.descriptor_length;
  if (dict.length != P) throw ConfigError("dictionary P differs from the database descriptor length");
  if (data.training.frames.empty()) throw ConfigError("retrieval sweep needs a training video");
  const auto ks = or_default(c.grid.k, static_cast<std::uint32_t>(P));
  const auto deltas = or_default(c.grid.delta, 0.05);
  const auto gops = or_default(c.grid.gop, 1u);
  const auto strategies = or_default(c.grid.strategy, GopStrategy::Skip);
  const auto modes = or_default(c.grid.mode, CodingMode::Auto);
  for (auto g : gops) {
    if (g == 0) throw ConfigError("GOP size must be positive");
  }

  std::vector<std::uint32_t> ids;
  for (const auto& f : data.database.frames) ids.push_back(f.frame_index);
  const auto db = build_database(data.database.frames, ids, dict, c.jobs);

  std::vector<std::vector<GlobalDescriptor>> query_globals;
  for (const auto& q : data.queries) {
    std::vector<GlobalDescriptor> g;
    for (const auto& f : q.frames) g.push_back(build_global(f, dict));
    query_globals.push_back(std::move(g));
  }
  std::vector<GlobalDescriptor> training_globals;
  for (const auto& f : data.training.frames) training_globals.push_back(build_global(f, dict));

  std::vector<std::set<std::uint32_t>> relevant;
  for (const auto& name : data.query_names) {
    auto it = data.relevance.find(name);
    if (it == data.relevance.end()) throw ConfigError("no relevance entry for query " + name);
    relevant.push_back(it->second);
  }

  const auto selection = selection_for(c.ranking, P);
  std::map<std::uint32_t, Codebook> local_books;
  std::map<std::uint32_t, RetrievalDatabase> projected_db;

  std::vector<SweepRow> rows;
  for (auto K : ks) {
    if (K == 0 || K > P) throw ConfigError("K=" + std::to_string(K) + " outside [1, " + std::to_string(P) + "]");
    const bool local = c.rerank_depth > 0 || !c.grid.k.empty();
    if (local && !local_books.count(K)) {
      LocalTrainingConfig tc{K, c.window, c.lambda, c.jobs};
      local_books[K] = train_local_codebook(std::span(&data.training, 1), c.ranking, tc);
      RetrievalDatabase pdb = db;
      for (auto& e : pdb.entries) {
        FrameFeatures tmp;
        tmp.features = e.features;
        e.features = project_frame(tmp, selection, K).features;
      }
      projected_db[K] = std::move(pdb);
    }
    for (double delta : deltas) {
      if (delta < 0.0) throw ConfigError("delta must be non-negative");
      for (auto gop : gops) {
        for (auto strategy : strategies) {
          std::optional<GlobalModel> model;
          if (delta > 0.0) {
            std::vector<std::vector<QuantizedGlobal>> train_seq(1);
            for (const auto& g : transmitted(training_globals, gop, strategy)) {
              train_seq[0].push_back(quantize_global(g, delta));
            }
            model = train_global_model(train_seq, static_cast<std::uint32_t>(dict.words()), delta);
          }
          for (auto mode : modes) {
            SweepRow row;
            row.task = "retrieval";
            row.K = K;
            row.delta = delta;
            row.gop = gop;
            row.strategy = to_string(strategy);
            row.mode = to_string(mode);
            row.queries = data.queries.size();
            std::vector<std::vector<double>> aps;
            std::vector<double> mra_aps;
            double global_bytes = 0.0;
            double local_bits = 0.0;
            for (std::size_t q = 0; q < data.queries.size(); ++q) {
              const auto sent = transmitted(query_globals[q], gop, strategy);
              std::vector<GlobalDescriptor> received;
              if (model) {
                std::vector<QuantizedGlobal> qs;
                std::vector<std::uint32_t> idx;
                for (std::size_t m = 0; m < sent.size(); ++m) {
                  qs.push_back(quantize_global(sent[m], delta));
                  idx.push_back(static_cast<std::uint32_t>(m * gop));
                }
                const auto encoded = encode_global_stream(qs, idx, mode, *model);
                global_bytes += static_cast<double>(encoded.payload_bytes());
                const auto decoded = decode_global_stream(encoded, *model);
                if (decoded != qs) throw StreamError("global descriptors did not round-trip");
                for (const auto& d : decoded) received.push_back(dequantize_global(d));
              } else {
                received = sent;
                global_bytes += 8.0 * static_cast<double>(dict.words() * sent.size());
              }
              std::optional<LocalCoding> coded;
              if (local) {
                coded = code_local(gop_leaders(data.queries[q], gop), local_books[K], K, mode, c);
                local_bits += coded->bits;
                row.features += coded->features;
              }
              std::vector<RankedList> rankings;
              std::vector<double> frame_aps;
              for (std::size_t m = 0; m < received.size(); ++m) {
                auto ranked = retrieve(received[m], db, c.rerank_depth, relevant[q]);
                if (c.rerank_depth > 0) {
                  ranked = rerank(coded->decoded.frames[m].features, ranked, projected_db[K], c.ratio);
                }
                frame_aps.push_back(average_precision(ranked.relevant));
                rankings.push_back(std::move(ranked));
              }
              mra_aps.push_back(average_precision(median_rank_aggregate(rankings).relevant));
              aps.push_back(std::move(frame_aps));
            }
            row.map = mean_average_precision(aps);
            row.map_mra = mean(mra_aps);
            row.bytes_per_query = global_bytes / static_cast<double>(data.queries.size());
            row.bits_per_feature = row.features == 0 ? 0.0 : local_bits / static_cast<double>(row.features);
            rows.push_back(std::move(row));
          }
        }
      }
    }
  }
  return rows;
}

std::vector<SweepRow> homography_sweep(const SweepConfig& c) {
  if (!c.scene || !c.homography_training) throw ConfigError("homography sweep needs a scene and a training stream");
  const auto& stream = c.scene->stream;
  const std::size_t P = stream.descriptor_length;
  if (c.homography_training->descriptor_length != P) throw ConfigError("training stream P differs from the scene");
  const auto ks = or_default(c.grid.k, static_cast<std::uint32_t>(P));
  const auto modes = or_default(c.grid.mode, CodingMode::Auto);
  std::vector<SweepRow> rows;
  for (auto K : ks) {
    if (K == 0 || K > P) throw ConfigError("K=" + std::to_string(K) + " outside [1, " + std::to_string(P) + "]");
    LocalTrainingConfig tc{K, c.window, c.lambda, c.jobs};
    const auto book = train_local_codebook(std::span(&*c.homography_training, 1), c.ranking, tc);
    for (auto mode : modes) {
      const auto coded = code_local(stream, book, K, mode, c);
      HomographyEvalConfig hc = c.homography;
      hc.jobs = c.jobs;
      const auto eval = evaluate_homography(coded.decoded, c.scene->truth, hc);
      SweepRow row;
      row.task = "homography";
      row.K = K;
      row.mode = to_string(mode);
      row.strategy = "-";
      row.queries = eval.pairs.size();
      row.features = coded.features;
      row.bits_per_feature = coded.features == 0 ? 0.0 : coded.bits / static_cast<double>(coded.features);
      row.precision = eval.precision();
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

}  // namespace

const char* to_string(SweepTask task) { return task == SweepTask::Retrieval ? "retrieval" : "homography"; }

SweepTask parse_sweep_task(const std::string& text) {
  if (text == "retrieval") return SweepTask::Retrieval;
  if (text == "homography") return SweepTask::Homography;
  throw ConfigError("unknown sweep task '" + text + "' (expected retrieval|homography)");
}

void parse_grid_axis(SweepGrid& grid, const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq + 1 == spec.size()) {
    throw ConfigError("grid axis '" + spec + "' must look like name=v1,v2");
  }
  const auto axis = spec.substr(0, eq);
  const auto values = split(spec.substr(eq + 1), ',');
  auto number = [&](const std::string& v) {
    try {
      std::size_t used = 0;
      const double x = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return x;
    } catch (const std::exception&) {
      throw ConfigError("grid value '" + v + "' for axis " + axis + " is not a number");
    }
  };
  auto whole = [&](const std::string& v) {
    const double x = number(v);
    if (x < 1 || x != std::floor(x) || x > 65535) throw ConfigError("axis " + axis + " needs positive integers");
    return static_cast<std::uint32_t>(x);
  };
  for (const auto& v : values) {
    if (axis == "k") {
      grid.k.push_back(whole(v));
    } else if (axis == "delta") {
      const double d = number(v);
      if (d < 0.0) throw ConfigError("delta must be non-negative");
      grid.delta.push_back(d);
    } else if (axis == "gop") {
      grid.gop.push_back(whole(v));
    } else if (axis == "strategy") {
      grid.strategy.push_back(parse_gop_strategy(v));
    } else if (axis == "mode") {
      grid.mode.push_back(parse_coding_mode(v));
    } else {
      throw ConfigError("unknown grid axis '" + axis + "' (expected k|delta|gop|strategy|mode)");
    }
  }
}

std::vector<SweepRow> run_rate_efficiency(const SweepConfig& config) {
  return config.task == SweepTask::Retrieval ? retrieval_sweep(config) : homography_sweep(config);
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << kSweepCsvHeader << '\n';
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%u,%.6g,%u,%s,%s,%zu,%zu,%.6f,%.3f,%.6f,%.6f,%.6f\n", r.task.c_str(), r.K,
                  r.delta, r.gop, r.strategy.c_str(), r.mode.c_str(), r.queries, r.features, r.bits_per_feature,
                  r.bytes_per_query, r.map, r.map_mra, r.precision);
    out << buf;
  }
  if (!out) throw IoError("write failed for " + path.string());
}

void write_sweep_plot(SweepTask task, const std::filesystem::path& csv, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "set datafile separator ','\n"
      << "set key autotitle columnhead\n"
      << "set grid\n"
      << "set terminal pngcairo size 800,600\n"
      << "set output '" << path.stem().string() << ".png'\n";
  if (task == SweepTask::Retrieval) {
    out << "set xlabel 'Bytes/query'\nset ylabel 'MAP'\n"
        << "plot '" << csv.string() << "' using 10:11 with linespoints title 'MAP', \\\n"
        << "     '' using 10:12 with linespoints title 'MAP (MRA)'\n";
  } else {
    out << "set xlabel 'bits/feature'\nset ylabel 'precision'\n"
        << "plot '" << csv.string() << "' using 9:13 with linespoints title 'precision'\n";
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace bfc
