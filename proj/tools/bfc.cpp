// Command-line front end: training, coding, synthesis and evaluation.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bfc/boosting.hpp"
#include "bfc/bovw.hpp"
#include "bfc/bytes.hpp"
#include "bfc/codebook.hpp"
#include "bfc/datasets.hpp"
#include "bfc/error.hpp"
#include "bfc/experiments.hpp"
#include "bfc/global_codec.hpp"
#include "bfc/homography.hpp"
#include "bfc/local_codec.hpp"
#include "bfc/local_training.hpp"
#include "bfc/metrics.hpp"
#include "bfc/retrieval.hpp"
#include "bfc/stream_io.hpp"
#include "bfc/synth.hpp"

namespace fs = std::filesystem;
using namespace bfc;

namespace {

constexpr const char* kCodebookEnv = "BFC_CODEBOOK_DIR";

// --codebook / --dictionary fall back to files in $BFC_CODEBOOK_DIR.
fs::path artifact_path(const std::string& given, const char* default_name, const char* flag) {
  if (!given.empty()) return given;
  if (const char* dir = std::getenv(kCodebookEnv); dir != nullptr && *dir != '\0') {
    return fs::path(dir) / default_name;
  }
  throw ConfigError(std::string(flag) + " is required (or set " + kCodebookEnv + ")");
}

Codebook load_or_empty(const fs::path& path) {
  return fs::exists(path) ? read_codebook(path) : Codebook{};
}

SearchWindow parse_window(const std::vector<int>& w) {
  if (w.size() != 3) throw ConfigError("--window takes three values: dx dy dscale");
  SearchWindow s{w[0], w[1], w[2]};
  if (s.dx < 0 || s.dy < 0 || s.dscale < 0) throw ConfigError("--window components must be non-negative");
  return s;
}

void say(const std::string& line) { std::cout << line << '\n'; }

std::string fmt(double v, int precision = 3) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(precision);
  os << v;
  return os.str();
}

struct Common {
  unsigned jobs = 1;
};

// ---------------------------------------------------------------- synth
struct SynthArgs {
  std::string kind = "stream";
  std::string out;
  std::string truth;
  SynthConfig stream;
  PlanarConfig planar;
  RetrievalDatasetConfig retrieval;
  PlantedPairConfig pairs;
  std::uint64_t seed = 1;
  std::uint32_t frames = 0;
  std::uint16_t length = 0;
};

void add_synth(CLI::App& app, SynthArgs& a) {
  auto* c = app.add_subcommand("synth", "Generate synthetic streams, planar scenes, retrieval corpora or pairs");
  c->add_option("--kind", a.kind, "stream | planar | retrieval | pairs")
      ->check(CLI::IsMember({"stream", "planar", "retrieval", "pairs"}));
  c->add_option("--out", a.out, "Output file (directory for --kind retrieval)")->required();
  c->add_option("--truth", a.truth, "Ground-truth CSV for --kind planar");
  c->add_option("--seed", a.seed, "Generator seed");
  c->add_option("--frames", a.frames, "Frame count (0 keeps the kind's default)");
  c->add_option("--length", a.length, "Descriptor length P (0 keeps the kind's default)");
  c->add_option("--min-features", a.stream.min_features);
  c->add_option("--max-features", a.stream.max_features);
  c->add_option("--p01", a.stream.p_one_after_zero, "P(1 | previous 0) along the dexel chain");
  c->add_option("--p11", a.stream.p_one_after_one, "P(1 | previous 1) along the dexel chain");
  c->add_flag("--shuffle-chain", a.stream.shuffle_chain, "Visit dexels in a random order");
  c->add_option("--duplication", a.stream.duplication, "Probability a feature copies the prior frame's");
  c->add_option("--flip", a.stream.flip_probability, "Bit-flip probability on copied features");
  c->add_option("--drift", a.stream.drift, "Max keypoint drift in quarter pixels");
  c->add_option("--scale-drift", a.stream.scale_drift);
  c->add_option("--orientation-drift", a.stream.orientation_drift);
  c->add_option("--width", a.stream.width);
  c->add_option("--height", a.stream.height);
  c->add_option("--inliers", a.planar.inliers, "Planar: plane points per frame");
  c->add_option("--outlier-fraction", a.planar.outlier_fraction, "Planar: outlier share of each frame");
  c->add_option("--noise", a.planar.noise, "Planar: keypoint noise in pixels");
  c->add_option("--bit-noise", a.planar.bit_noise, "Planar: per-frame descriptor flip probability");
  c->add_option("--planted", a.pairs.planted, "Pairs: informative dexels");
  c->add_option("--matching", a.pairs.matching_pairs, "Pairs: matching pair count");
  c->add_option("--non-matching", a.pairs.non_matching_pairs, "Pairs: non-matching pair count");
  c->add_option("--agreement", a.pairs.planted_agreement, "Pairs: planted-dexel agreement on matches");
  c->callback([&a] {
    if (a.kind == "stream") {
      a.stream.seed = a.seed;
      if (a.frames) a.stream.frames = a.frames;
      if (a.length) a.stream.descriptor_length = a.length;
      const auto s = synth_stream(a.stream);
      write_stream_any(s, a.out);
      say("wrote " + a.out + ": " + std::to_string(s.frames.size()) + " frames");
    } else if (a.kind == "planar") {
      a.planar.seed = a.seed;
      if (a.frames) a.planar.frames = a.frames;
      if (a.length) a.planar.descriptor_length = a.length;
      const auto scene = planar_scene(a.planar);
      write_stream_any(scene.stream, a.out);
      if (!a.truth.empty()) write_ground_truth_csv(scene.truth, a.truth);
      say("wrote " + a.out + ": " + std::to_string(scene.stream.frames.size()) + " frames");
    } else if (a.kind == "retrieval") {
      a.retrieval.seed = a.seed;
      if (a.frames) a.retrieval.query_frames = a.frames;
      if (a.length) a.retrieval.descriptor_length = a.length;
      const auto data = retrieval_dataset(a.retrieval);
      write_retrieval_dataset(data, a.out);
      say("wrote " + a.out + ": " + std::to_string(data.database.frames.size()) + " database images, " +
          std::to_string(data.queries.size()) + " queries");
    } else {
      a.pairs.seed = a.seed;
      if (a.length) a.pairs.length = a.length;
      const auto planted = planted_pairs(a.pairs);
      write_pair_csv(planted.pairs, a.out);
      std::string list;
      for (auto j : planted.planted) list += (list.empty() ? "" : ",") + std::to_string(j);
      say("wrote " + a.out + ": " + std::to_string(planted.pairs.pairs.size()) + " pairs; planted dexels " + list);
    }
  });
}

// ---------------------------------------------------------- rank-dexels
struct RankArgs {
  std::string pairs;
  std::string codebook;
  std::size_t length = 512;
  BoostingConfig boosting;
};

void add_rank(CLI::App& app, RankArgs& a) {
  auto* c = app.add_subcommand("rank-dexels", "Rank dexels by asymmetric pairwise boosting");
  c->add_option("--pairs", a.pairs, "CSV rows hexA,hexB,label")->required();
  c->add_option("--length", a.length, "Descriptor length P");
  c->add_option("--rounds", a.boosting.rounds, "Boosting rounds (0 = P)");
  c->add_option("--asymmetry", a.boosting.asymmetry, "Cost multiplier for missed matches");
  c->add_option("--codebook", a.codebook, "Codebook to store the ranking in (created if absent)");
  c->callback([&a] {
    const auto path = artifact_path(a.codebook, "codebook.bfcb", "--codebook");
    const auto pairs = read_pair_csv(a.pairs, a.length);
    auto ranking = rank_dexels(pairs, a.length, a.boosting);
    auto book = load_or_empty(path);
    book.ranking = ranking;
    write_codebook(book, path);
    std::string head;
    for (std::size_t i = 0; i < std::min<std::size_t>(16, ranking.order.size()); ++i) {
      head += (i ? "," : "") + std::to_string(ranking.order[i]);
    }
    say("ranked " + std::to_string(ranking.order.size()) + " dexels from " + std::to_string(pairs.pairs.size()) +
        " pairs; first: " + head);
  });
}

// ---------------------------------------------------------- train-local
struct TrainLocalArgs {
  std::vector<std::string> streams;
  std::string codebook;
  std::uint32_t K = 0;
  double lambda = 1.0;
  std::vector<int> window{64, 64, 4};
  bool ignore_ranking = false;
};

void add_train_local(CLI::App& app, TrainLocalArgs& a, const Common& common) {
  auto* c = app.add_subcommand("train-local", "Train intra/inter local-feature coding tables");
  c->add_option("--stream", a.streams, "Training stream(s)")->required();
  c->add_option("--codebook", a.codebook, "Codebook to write (ranking and BoVW sections are kept)");
  c->add_option("--k", a.K, "Retained dexels K (0 = P)");
  c->add_option("--lambda", a.lambda, "Bits per Hamming unit in the matching cost");
  c->add_option("--window", a.window, "Search window dx dy dscale (quantized units)")->expected(3);
  c->add_flag("--ignore-ranking", a.ignore_ranking, "Train on the first K dexels even if a ranking exists");
  c->callback([&a, &common] {
    const auto path = artifact_path(a.codebook, "codebook.bfcb", "--codebook");
    std::vector<FeatureStream> streams;
    for (const auto& s : a.streams) streams.push_back(read_stream_any(s));
    auto book = load_or_empty(path);
    std::optional<DexelRanking> ranking;
    if (!a.ignore_ranking) ranking = book.ranking;
    LocalTrainingConfig tc{a.K, parse_window(a.window), a.lambda, common.jobs};
    LocalTrainingReport report;
    auto trained = train_local_codebook(streams, ranking, tc, &report);
    book.intra = trained.intra;
    book.inter = trained.inter;
    if (a.ignore_ranking) book.ranking.reset();
    write_codebook(book, path);
    const double K = static_cast<double>(book.intra->retained());
    say("trained K=" + std::to_string(book.intra->retained()) + " on " + std::to_string(report.intra_samples) +
        " features (" + std::to_string(report.inter_samples) + " inter samples)");
    say("truncated bound intra: " + fmt(report.truncated_bound_intra) + " bits/descriptor (" +
        fmt(report.truncated_bound_intra / K) + " bits/dexel)");
    say("truncated bound inter: " + fmt(report.truncated_bound_inter) + " bits/descriptor");
  });
}

// ------------------------------------------------------------ dict-learn
struct DictArgs {
  std::string stream;
  std::string idf_stream;
  std::string out;
  DictionaryConfig config;
  std::string method = "kmeans";
  std::size_t sample = 0;
};

void add_dict(CLI::App& app, DictArgs& a, const Common& common) {
  auto* c = app.add_subcommand("dict-learn", "Learn a BoVW dictionary from a feature stream");
  c->add_option("--stream", a.stream, "Training stream")->required();
  c->add_option("--idf-stream", a.idf_stream, "Documents for idf (default: the training frames)");
  c->add_option("--out", a.out, "Dictionary file");
  c->add_option("--words", a.config.words, "Dictionary size V");
  c->add_option("--method", a.method, "kmeans | kmedians | kmedoids")
      ->check(CLI::IsMember({"kmeans", "kmedians", "kmedoids"}));
  c->add_option("--max-iter", a.config.max_iterations, "Iteration cap");
  c->add_option("--sample", a.sample, "Use only the first N descriptors (0 = all)");
  c->add_option("--seed", a.config.seed, "k-means++ seed");
  c->callback([&a, &common] {
    const auto path = artifact_path(a.out, "dictionary.bfdc", "--out");
    a.config.method = parse_cluster_method(a.method);
    a.config.jobs = common.jobs;
    const auto stream = read_stream_any(a.stream);
    std::vector<BinaryDescriptor> sample;
    for (const auto& f : stream.frames) {
      for (const auto& x : f.features) {
        if (a.sample && sample.size() >= a.sample) break;
        sample.push_back(x.descriptor);
      }
    }
    if (sample.empty()) throw EmptyTrainingSet("training stream holds no descriptors");
    DictionaryReport report;
    auto dict = learn_dictionary(sample, a.config, &report);
    const auto docs = a.idf_stream.empty() ? stream : read_stream_any(a.idf_stream);
    dict.idf = compute_idf(dict, docs.frames);
    write_dictionary(dict, path);
    say("learned V=" + std::to_string(dict.words()) + " (" + to_string(dict.method) + ") from " +
        std::to_string(sample.size()) + " descriptors in " + std::to_string(report.iterations) + " iterations" +
        (report.converged ? "" : " (cap reached)") + "; distortion " + fmt(report.distortion.back(), 1));
  });
}

// ------------------------------------------------------------ train-bovw
struct TrainBovwArgs {
  std::vector<std::string> streams;
  std::string dictionary;
  std::string codebook;
  std::vector<double> deltas{0.05};
  std::uint32_t gop = 1;
  std::string strategy = "skip";
};

std::vector<QuantizedGlobal> quantized_sequence(const FeatureStream& s, const Dictionary& dict, double delta,
                                                std::uint32_t gop, GopStrategy strategy,
                                                std::vector<std::uint32_t>* frame_indices = nullptr) {
  if (gop == 0) throw ConfigError("--gop must be positive");
  std::vector<GlobalDescriptor> globals;
  for (const auto& f : s.frames) globals.push_back(build_global(f, dict));
  std::vector<QuantizedGlobal> out;
  for (std::size_t start = 0; start < globals.size(); start += gop) {
    const auto n = std::min<std::size_t>(gop, globals.size() - start);
    out.push_back(quantize_global(aggregate_gop(std::span(globals).subspan(start, n), strategy), delta));
    if (frame_indices) frame_indices->push_back(s.frames[start].frame_index);
  }
  return out;
}

void add_train_bovw(CLI::App& app, TrainBovwArgs& a) {
  auto* c = app.add_subcommand("train-bovw", "Train intra/inter BoVW index tables for each step size");
  c->add_option("--stream", a.streams, "Training video(s)")->required();
  c->add_option("--dictionary", a.dictionary, "Dictionary file");
  c->add_option("--codebook", a.codebook, "Codebook to update");
  c->add_option("--delta", a.deltas, "Quantization step(s)");
  c->add_option("--gop", a.gop, "GOP size used when training");
  c->add_option("--strategy", a.strategy, "skip | median")->check(CLI::IsMember({"skip", "median"}));
  c->callback([&a] {
    const auto dict = read_dictionary(artifact_path(a.dictionary, "dictionary.bfdc", "--dictionary"));
    const auto path = artifact_path(a.codebook, "codebook.bfcb", "--codebook");
    auto book = load_or_empty(path);
    std::vector<FeatureStream> streams;
    for (const auto& s : a.streams) streams.push_back(read_stream_any(s));
    for (double delta : a.deltas) {
      std::vector<std::vector<QuantizedGlobal>> seqs;
      for (const auto& s : streams) {
        seqs.push_back(quantized_sequence(s, dict, delta, a.gop, parse_gop_strategy(a.strategy)));
      }
      auto model = train_global_model(seqs, static_cast<std::uint32_t>(dict.words()), delta);
      say("trained BoVW tables V=" + std::to_string(model.words) + " delta=" + fmt(delta, 4) +
          "; p(0)=" + fmt(model.intra.probability(0, 0), 4) + ", p(0|0)=" + fmt(model.inter.probability(0, 0), 4));
      book.put_global(std::move(model));
    }
    write_codebook(book, path);
  });
}

// ---------------------------------------------------------------- encode
struct EncodeArgs {
  std::string stream;
  std::string codebook;
  std::string out;
  std::string report;
  std::uint32_t K = 0;
  double lambda = 1.0;
  std::string mode = "auto";
  std::vector<int> window{64, 64, 4};
};

void add_encode(CLI::App& app, EncodeArgs& a) {
  auto* c = app.add_subcommand("encode", "Encode a feature stream");
  c->add_option("--stream", a.stream, "Input stream (.bfs or .json)")->required();
  c->add_option("--codebook", a.codebook, "Codebook file");
  c->add_option("--out", a.out, "Encoded stream (.bfe)")->required();
  c->add_option("--k", a.K, "Retained dexels K (0 = codebook's K)");
  c->add_option("--lambda", a.lambda, "Bits per Hamming unit in the matching cost");
  c->add_option("--mode", a.mode, "intra | inter | auto")->check(CLI::IsMember({"intra", "inter", "auto"}));
  c->add_option("--window", a.window, "Search window dx dy dscale")->expected(3);
  c->add_option("--report", a.report, "Per-feature rate report CSV");
  c->callback([&a] {
    const auto book = read_codebook(artifact_path(a.codebook, "codebook.bfcb", "--codebook"));
    if (!book.intra) throw ConfigError("codebook has no local tables; run train-local first");
    const auto stream = read_stream_any(a.stream);
    const std::uint32_t K = a.K ? a.K : static_cast<std::uint32_t>(book.intra->retained());
    const auto config = make_encoder_config(book, K, a.lambda, parse_window(a.window), parse_coding_mode(a.mode),
                                            location_format_for(stream));
    const auto encoded = encode_stream(stream, config);
    const auto bytes = serialize_encoded_stream(encoded);
    write_file(a.out, bytes);
    const auto rate = summarize_rate(encoded);
    if (!a.report.empty()) {
      std::ofstream r(a.report);
      if (!r) throw IoError("cannot write " + a.report);
      r << "frame,feature,mode,mode_bits,location_bits,identifier_bits,descriptor_bits,total_bits\n";
      for (const auto& f : encoded.frames) {
        for (std::size_t i = 0; i < f.rates.size(); ++i) {
          const auto& x = f.rates[i];
          r << f.frame_index << ',' << i << ',' << (f.decisions[i].mode == FeatureMode::Inter ? "inter" : "intra")
            << ',' << x.mode_bits << ',' << x.location_bits << ',' << x.identifier_bits << ','
            << x.descriptor_bits << ',' << x.total() << '\n';
        }
        r << f.frame_index << ",flush,-,0,0,0,0," << f.flush_bits << '\n';
      }
    }
    const double n = rate.features ? static_cast<double>(rate.features) : 1.0;
    say("encoded " + std::to_string(rate.features) + " features in " + std::to_string(encoded.frames.size()) +
        " frames (" + std::to_string(rate.intra_features) + " intra, " + std::to_string(rate.inter_features) +
        " inter) to " + std::to_string(bytes.size()) + " bytes");
    say("rate: " + fmt(rate.bits_per_feature()) + " bits/feature (descriptor " + fmt(rate.descriptor_bits / n) +
        ", location " + fmt(rate.location_bits / n) + ", identifier " + fmt(rate.identifier_bits / n) +
        ", mode " + fmt(rate.mode_bits / n) + ", flush " + fmt(rate.flush_bits / n) + ")");
  });
}

// ---------------------------------------------------------------- decode
struct DecodeArgs {
  std::string in;
  std::string codebook;
  std::string out;
};

void add_decode(CLI::App& app, DecodeArgs& a) {
  auto* c = app.add_subcommand("decode", "Decode an encoded stream back to K-dexel features");
  c->add_option("--in", a.in, "Encoded stream (.bfe)")->required();
  c->add_option("--codebook", a.codebook, "Codebook file");
  c->add_option("--out", a.out, "Decoded stream (.bfs or .json)")->required();
  c->callback([&a] {
    const auto book = read_codebook(artifact_path(a.codebook, "codebook.bfcb", "--codebook"));
    const auto encoded = parse_encoded_stream(read_file(a.in));
    const auto decoded = decode_stream(encoded, book);
    write_stream_any(decoded, a.out);
    std::size_t features = 0;
    for (const auto& f : decoded.frames) features += f.features.size();
    say("decoded " + std::to_string(features) + " features in " + std::to_string(decoded.frames.size()) +
        " frames");
  });
}

// ----------------------------------------------------------- bovw-encode
struct BovwEncodeArgs {
  std::string stream;
  std::string dictionary;
  std::string codebook;
  std::string out;
  double delta = 0.05;
  std::string mode = "inter";
  std::uint32_t gop = 1;
  std::string strategy = "skip";
};

void add_bovw_encode(CLI::App& app, BovwEncodeArgs& a) {
  auto* c = app.add_subcommand("bovw-encode", "Encode the quantized BoVW descriptors of a stream");
  c->add_option("--stream", a.stream, "Input stream")->required();
  c->add_option("--dictionary", a.dictionary, "Dictionary file");
  c->add_option("--codebook", a.codebook, "Codebook with BoVW tables");
  c->add_option("--out", a.out, "Global stream (.bge)")->required();
  c->add_option("--delta", a.delta, "Quantization step");
  c->add_option("--mode", a.mode, "intra | inter | auto")->check(CLI::IsMember({"intra", "inter", "auto"}));
  c->add_option("--gop", a.gop, "Send one descriptor per GOP");
  c->add_option("--strategy", a.strategy, "skip | median")->check(CLI::IsMember({"skip", "median"}));
  c->callback([&a] {
    const auto dict = read_dictionary(artifact_path(a.dictionary, "dictionary.bfdc", "--dictionary"));
    const auto book = read_codebook(artifact_path(a.codebook, "codebook.bfcb", "--codebook"));
    const auto* model = book.find_global(static_cast<std::uint32_t>(dict.words()), a.delta);
    if (model == nullptr) {
      throw ConfigError("codebook has no BoVW tables for V=" + std::to_string(dict.words()) +
                        " delta=" + fmt(a.delta, 4) + "; run train-bovw");
    }
    const auto stream = read_stream_any(a.stream);
    std::vector<std::uint32_t> indices;
    const auto seq = quantized_sequence(stream, dict, a.delta, a.gop, parse_gop_strategy(a.strategy), &indices);
    const auto encoded = encode_global_stream(seq, indices, parse_coding_mode(a.mode), *model);
    write_file(a.out, serialize_global_stream(encoded));
    say("encoded " + std::to_string(seq.size()) + " global descriptors: " +
        std::to_string(encoded.payload_bytes()) + " Bytes/query (" +
        fmt(seq.empty() ? 0.0 : static_cast<double>(encoded.payload_bytes()) / seq.size(), 2) +
        " bytes/descriptor)");
  });
}

// ----------------------------------------------------------- bovw-decode
struct BovwDecodeArgs {
  std::string in;
  std::string codebook;
  std::string out;
};

void add_bovw_decode(CLI::App& app, BovwDecodeArgs& a) {
  auto* c = app.add_subcommand("bovw-decode", "Decode a global stream to dequantized descriptors (CSV)");
  c->add_option("--in", a.in, "Global stream (.bge)")->required();
  c->add_option("--codebook", a.codebook, "Codebook with BoVW tables");
  c->add_option("--out", a.out, "CSV: frame_index then V values")->required();
  c->callback([&a] {
    const auto book = read_codebook(artifact_path(a.codebook, "codebook.bfcb", "--codebook"));
    const auto encoded = parse_global_stream(read_file(a.in));
    const auto* model = book.find_global(encoded.words, encoded.delta);
    if (model == nullptr) throw StreamError("codebook has no BoVW tables matching the stream");
    const auto decoded = decode_global_stream(encoded, *model);
    std::ofstream out(a.out);
    if (!out) throw IoError("cannot write " + a.out);
    out.precision(17);
    for (std::size_t n = 0; n < decoded.size(); ++n) {
      out << encoded.frames[n].frame_index;
      for (double v : dequantize_global(decoded[n])) out << ',' << v;
      out << '\n';
    }
    if (!out) throw IoError("write failed for " + a.out);
    say("decoded " + std::to_string(decoded.size()) + " global descriptors");
  });
}

// ------------------------------------------------------- eval-homography
struct EvalHomArgs {
  std::string stream;
  std::string truth;
  std::string out;
  HomographyEvalConfig config;
};

void add_eval_homography(CLI::App& app, EvalHomArgs& a, const Common& common) {
  auto* c = app.add_subcommand("eval-homography", "Homography precision over consecutive frame pairs");
  c->add_option("--stream", a.stream, "Decoded feature stream")->required();
  c->add_option("--truth", a.truth, "Ground-truth CSV")->required();
  c->add_option("--ratio", a.config.ratio, "Ratio-test threshold");
  c->add_option("--epsilon", a.config.epsilon, "Backprojection threshold in pixels");
  c->add_option("--iterations", a.config.ransac.iterations, "RANSAC iterations");
  c->add_option("--inlier-threshold", a.config.ransac.inlier_threshold, "RANSAC inlier threshold in pixels");
  c->add_option("--seed", a.config.ransac.seed, "RANSAC seed");
  c->add_option("--out", a.out, "Per-pair CSV");
  c->callback([&a, &common] {
    a.config.jobs = common.jobs;
    const auto stream = read_stream_any(a.stream);
    const auto truth = read_ground_truth_csv(a.truth);
    const auto eval = evaluate_homography(stream, truth, a.config);
    if (!a.out.empty()) {
      std::ofstream out(a.out);
      if (!out) throw IoError("cannot write " + a.out);
      out << "pair,matches,inliers,estimated,error,correct\n";
      for (std::size_t n = 0; n < eval.pairs.size(); ++n) {
        const auto& p = eval.pairs[n];
        out << n << ',' << p.matches << ',' << p.inliers << ',' << p.estimated << ',' << p.error << ','
            << p.correct << '\n';
      }
    }
    say("precision: " + fmt(eval.precision(), 4) + " over " + std::to_string(eval.pairs.size()) + " frame pairs");
  });
}

// ------------------------------------------- eval-retrieval and sweep
struct RetrievalInputs {
  std::string dataset;
  std::string dictionary;
  std::string codebook;
  std::string idf = "database";
  std::uint32_t words = 256;
  std::uint64_t seed = 1;
};

void add_retrieval_inputs(CLI::App* c, RetrievalInputs& r) {
  c->add_option("--dataset", r.dataset, "Dataset directory (synthesized from --seed when absent)");
  c->add_option("--dictionary", r.dictionary, "Dictionary (learned from the training video when absent)");
  c->add_option("--codebook", r.codebook, "Codebook whose dexel ranking is used");
  c->add_option("--idf", r.idf, "idf documents: database | training | dictionary")
      ->check(CLI::IsMember({"database", "training", "dictionary"}));
  c->add_option("--words", r.words, "V when learning a dictionary");
}

void load_retrieval(const RetrievalInputs& r, SweepConfig& sweep) {
  if (r.dataset.empty()) {
    RetrievalDatasetConfig dc;
    dc.seed = r.seed;
    sweep.retrieval = retrieval_dataset(dc);
  } else {
    sweep.retrieval = read_retrieval_dataset(r.dataset);
  }
  if (!r.dictionary.empty()) {
    sweep.dictionary = read_dictionary(r.dictionary);
  } else {
    std::vector<BinaryDescriptor> sample;
    for (const auto& f : sweep.retrieval->training.frames) {
      for (const auto& x : f.features) sample.push_back(x.descriptor);
    }
    DictionaryConfig dc;
    dc.words = r.words;
    dc.seed = r.seed;
    dc.jobs = sweep.jobs;
    sweep.dictionary = learn_dictionary(sample, dc);
  }
  if (r.idf == "database") {
    sweep.dictionary->idf = compute_idf(*sweep.dictionary, sweep.retrieval->database.frames);
  } else if (r.idf == "training") {
    sweep.dictionary->idf = compute_idf(*sweep.dictionary, sweep.retrieval->training.frames);
  }
  if (!r.codebook.empty()) sweep.ranking = read_codebook(r.codebook).ranking;
}

struct EvalRetArgs {
  RetrievalInputs inputs;
  double delta = 0.0;
  std::uint32_t gop = 1;
  std::string strategy = "skip";
  std::string mode = "auto";
  std::uint32_t K = 0;
  std::size_t rerank = 0;
  double ratio = 0.7;
  std::string out;
};

void print_rows(const std::vector<SweepRow>& rows) {
  for (const auto& r : rows) {
    if (r.task == "retrieval") {
      say("K=" + std::to_string(r.K) + " delta=" + fmt(r.delta, 4) + " gop=" + std::to_string(r.gop) + " " +
          r.strategy + " " + r.mode + ": MAP " + fmt(r.map, 4) + ", MAP(MRA) " + fmt(r.map_mra, 4) + ", " +
          fmt(r.bytes_per_query, 1) + " Bytes/query" +
          (r.features ? ", " + fmt(r.bits_per_feature, 2) + " bits/feature" : std::string()));
    } else {
      say("K=" + std::to_string(r.K) + " " + r.mode + ": precision " + fmt(r.precision, 4) + ", " +
          fmt(r.bits_per_feature, 2) + " bits/feature");
    }
  }
}

void add_eval_retrieval(CLI::App& app, EvalRetArgs& a, const Common& common) {
  auto* c = app.add_subcommand("eval-retrieval", "Retrieval MAP / MRA on a dataset");
  add_retrieval_inputs(c, a.inputs);
  c->add_option("--seed", a.inputs.seed, "Seed for synthesized data and dictionary");
  c->add_option("--delta", a.delta, "Quantization step (0 = unquantized)");
  c->add_option("--gop", a.gop, "GOP size");
  c->add_option("--strategy", a.strategy, "skip | median")->check(CLI::IsMember({"skip", "median"}));
  c->add_option("--mode", a.mode, "intra | inter | auto")->check(CLI::IsMember({"intra", "inter", "auto"}));
  c->add_option("--k", a.K, "Retained dexels for re-ranking (0 = P)");
  c->add_option("--rerank", a.rerank, "Re-rank the top N with local features (0 = off)");
  c->add_option("--ratio", a.ratio, "Ratio-test threshold");
  c->add_option("--out", a.out, "Result CSV");
  c->callback([&a, &common] {
    SweepConfig sweep;
    sweep.task = SweepTask::Retrieval;
    sweep.jobs = common.jobs;
    sweep.rerank_depth = a.rerank;
    sweep.ratio = a.ratio;
    load_retrieval(a.inputs, sweep);
    sweep.grid.delta = {a.delta};
    sweep.grid.gop = {a.gop};
    sweep.grid.strategy = {parse_gop_strategy(a.strategy)};
    sweep.grid.mode = {parse_coding_mode(a.mode)};
    if (a.K) sweep.grid.k = {a.K};
    const auto rows = run_rate_efficiency(sweep);
    if (!a.out.empty()) write_sweep_csv(rows, a.out);
    print_rows(rows);
  });
}

struct SweepArgs {
  std::string task = "retrieval";
  std::vector<std::string> grid;
  std::string out;
  std::string plot;
  RetrievalInputs inputs;
  std::string stream;
  std::string truth;
  std::string training;
  double lambda = 1.0;
  std::vector<int> window{64, 64, 4};
  std::size_t rerank = 0;
  double ratio = 0.7;
};

void add_sweep(CLI::App& app, SweepArgs& a, const Common& common) {
  auto* c = app.add_subcommand("sweep", "Rate-efficiency sweep over a parameter grid");
  c->add_option("--task", a.task, "retrieval | homography")->check(CLI::IsMember({"retrieval", "homography"}));
  c->add_option("--grid", a.grid, "Axis values, e.g. k=8,64,512 (repeatable; axes k delta gop strategy mode)");
  c->add_option("--out", a.out, "Result CSV")->required();
  c->add_option("--plot", a.plot, "gnuplot script to write");
  add_retrieval_inputs(c, a.inputs);
  c->add_option("--seed", a.inputs.seed, "Seed for synthesized data");
  c->add_option("--stream", a.stream, "Homography: evaluation stream (synthesized when absent)");
  c->add_option("--truth", a.truth, "Homography: ground-truth CSV for --stream");
  c->add_option("--training", a.training, "Homography: training stream for the codebooks");
  c->add_option("--lambda", a.lambda, "Bits per Hamming unit in the matching cost");
  c->add_option("--window", a.window, "Search window dx dy dscale")->expected(3);
  c->add_option("--rerank", a.rerank, "Retrieval: re-rank depth (0 = off)");
  c->add_option("--ratio", a.ratio, "Ratio-test threshold");
  c->callback([&a, &common] {
    SweepConfig sweep;
    sweep.task = parse_sweep_task(a.task);
    sweep.jobs = common.jobs;
    sweep.lambda = a.lambda;
    sweep.window = parse_window(a.window);
    sweep.rerank_depth = a.rerank;
    sweep.ratio = a.ratio;
    sweep.homography.ratio = a.ratio;
    for (const auto& g : a.grid) parse_grid_axis(sweep.grid, g);
    if (sweep.task == SweepTask::Retrieval) {
      load_retrieval(a.inputs, sweep);
    } else {
      if (!a.inputs.codebook.empty()) sweep.ranking = read_codebook(a.inputs.codebook).ranking;
      PlanarConfig pc;
      pc.seed = a.inputs.seed;
      if (a.stream.empty()) {
        sweep.scene = planar_scene(pc);
      } else {
        if (a.truth.empty()) throw ConfigError("--truth is required with --stream");
        sweep.scene = PlanarScene{read_stream_any(a.stream), read_ground_truth_csv(a.truth)};
      }
      if (a.training.empty()) {
        pc.seed = a.inputs.seed + 1;
        pc.descriptor_length = sweep.scene->stream.descriptor_length;
        pc.frames = 30;
        sweep.homography_training = planar_scene(pc).stream;
      } else {
        sweep.homography_training = read_stream_any(a.training);
      }
    }
    const auto rows = run_rate_efficiency(sweep);
    write_sweep_csv(rows, a.out);
    if (!a.plot.empty()) write_sweep_plot(sweep.task, a.out, a.plot);
    print_rows(rows);
    say("wrote " + std::to_string(rows.size()) + " rows to " + a.out);
  });
}

int fail(const char* kind, const std::string& what, int code) {
  std::string msg = what;
  for (auto& ch : msg) {
    if (ch == '\n' || ch == '\r') ch = ' ';
  }
  std::cerr << "error: " << kind << ": " << msg << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Binary local feature and BoVW codec toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "INI file: top-level keys plus [subcommand] sections; flags win");
  Common common;
  app.add_option("--jobs", common.jobs, "Worker threads")->check(CLI::Range(1u, 256u));

  SynthArgs synth;
  RankArgs rank;
  TrainLocalArgs train_local;
  DictArgs dict;
  TrainBovwArgs train_bovw;
  EncodeArgs encode;
  DecodeArgs decode;
  BovwEncodeArgs bovw_encode;
  BovwDecodeArgs bovw_decode;
  EvalHomArgs eval_hom;
  EvalRetArgs eval_ret;
  SweepArgs sweep;
  add_train_local(app, train_local, common);
  add_train_bovw(app, train_bovw);
  add_rank(app, rank);
  add_dict(app, dict, common);
  add_encode(app, encode);
  add_decode(app, decode);
  add_bovw_encode(app, bovw_encode);
  add_bovw_decode(app, bovw_decode);
  add_synth(app, synth);
  add_eval_homography(app, eval_hom, common);
  add_eval_retrieval(app, eval_ret, common);
  add_sweep(app, sweep, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("UsageError", e.what(), 2);
  } catch (const ConfigError& e) {
    return fail(e.kind(), e.what(), 2);
  } catch (const Error& e) {
    return fail(e.kind(), e.what(), 1);
  } catch (const std::exception& e) {
    return fail("InternalError", e.what(), 1);
  }
  return 0;
}
