#include "bfc/local_training.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>

#include "bfc/dexel_stats.hpp"
#include "bfc/error.hpp"
#include "bfc/permutation.hpp"

namespace bfc {

namespace {

struct InterSamples {
  std::vector<BinaryDescriptor> residuals;
  std::vector<std::uint64_t> dx, dy, dscale, dtheta;

  explicit InterSamples(const SearchWindow& w)
      : dx(2 * w.dx + 1, 0), dy(2 * w.dy + 1, 0), dscale(2 * w.dscale + 1, 0), dtheta(kOrientationBins, 0) {}

  void add(const LocalFeature& f, const LocalFeature& r, const SearchWindow& w) {
    residuals.push_back(f.descriptor ^ r.descriptor);
    ++dx[f.keypoint.x - r.keypoint.x + w.dx];
    ++dy[f.keypoint.y - r.keypoint.y + w.dy];
    ++dscale[f.keypoint.scale - r.keypoint.scale + w.dscale];
    ++dtheta[(f.keypoint.orientation - r.keypoint.orientation + kOrientationBins) % kOrientationBins];
  }
};

SymbolTable table_from(const std::vector<std::uint64_t>& counts) {
  return SymbolTable::from_counts(static_cast<std::uint32_t>(counts.size()), counts);
}

LocalInterModel inter_model(const InterSamples& s, const SearchWindow& w, std::size_t K, unsigned jobs) {
  LocalInterModel m;
  m.window = w;
  if (s.residuals.empty()) {
    m.residual = fair_permutation(K);
    m.dx = SymbolTable::uniform(2 * w.dx + 1);
    m.dy = SymbolTable::uniform(2 * w.dy + 1);
    m.dscale = SymbolTable::uniform(2 * w.dscale + 1);
    m.dtheta = SymbolTable::uniform(kOrientationBins);
    return m;
  }
  m.residual = learn_permutation(estimate_dexel_stats(s.residuals, jobs));
  m.dx = table_from(s.dx);
  m.dy = table_from(s.dy);
  m.dscale = table_from(s.dscale);
  m.dtheta = table_from(s.dtheta);
  return m;
}

bool in_window(const QuantizedKeypoint& k, const QuantizedKeypoint& r, const SearchWindow& w) {
  return std::abs(k.x - r.x) <= w.dx && std::abs(k.y - r.y) <= w.dy &&
         std::abs(k.scale - r.scale) <= w.dscale;
}

}  // namespace

Codebook train_local_codebook(std::span<const FeatureStream> streams,
                              const std::optional<DexelRanking>& ranking,
                              const LocalTrainingConfig& config, LocalTrainingReport* report) {
  if (streams.empty()) throw EmptyTrainingSet("no training streams");
  const std::uint16_t P = streams.front().descriptor_length;
  for (const auto& s : streams) {
    if (s.descriptor_length != P) throw DimensionError("training streams differ in descriptor length");
    validate(s);
  }
  const std::uint32_t K = config.K == 0 ? P : config.K;
  if (K > P) throw ConfigError("K=" + std::to_string(K) + " exceeds P=" + std::to_string(P));
  if (config.window.dx < 0 || config.window.dy < 0 || config.window.dscale < 0) {
    throw ConfigError("search window components must be non-negative");
  }

  std::vector<std::uint32_t> selection(P);
  if (ranking) {
    if (ranking->order.size() < K) throw ConfigError("dexel ranking shorter than K");
    selection = ranking->order;
  } else {
    std::iota(selection.begin(), selection.end(), 0u);
  }

  std::vector<FeatureStream> projected;
  projected.reserve(streams.size());
  for (const auto& s : streams) projected.push_back(project_stream(s, selection, K));

  // Intra.
  std::vector<BinaryDescriptor> descriptors;
  std::vector<std::uint64_t> scales(kScaleAlphabet, 0);
  std::vector<std::uint64_t> orientations(kOrientationBins, 0);
  for (const auto& s : projected) {
    for (const auto& frame : s.frames) {
      for (const auto& f : frame.features) {
        descriptors.push_back(f.descriptor);
        ++scales[std::min<std::int32_t>(f.keypoint.scale, kScaleAlphabet - 1)];
        ++orientations[f.keypoint.orientation];
      }
    }
  }
  if (descriptors.empty()) throw EmptyTrainingSet("training streams contain no features");
  const DexelStats intra_stats = estimate_dexel_stats(descriptors, config.jobs);
  LocalIntraModel intra;
  intra.source_length = P;
  intra.descriptor = learn_permutation(intra_stats);
  intra.scale = table_from(scales);
  intra.orientation = table_from(orientations);

  // Inter, first pass: nearest Hamming neighbour in the window.
  const SearchWindow& w = config.window;
  InterSamples first(w);
  for (const auto& s : projected) {
    for (std::size_t n = 1; n < s.frames.size(); ++n) {
      const auto& ref = s.frames[n - 1].features;
      for (const auto& f : s.frames[n].features) {
        std::size_t best = ref.size();
        std::size_t best_d = 0;
        for (std::size_t l = 0; l < ref.size(); ++l) {
          if (!in_window(f.keypoint, ref[l].keypoint, w)) continue;
          const auto d = hamming(f.descriptor, ref[l].descriptor);
          if (best == ref.size() || d < best_d) {
            best = l;
            best_d = d;
          }
        }
        if (best != ref.size()) first.add(f, ref[best], w);
      }
    }
  }
  LocalInterModel inter = inter_model(first, w, K, config.jobs);

  // Second pass: retrain on what the auto-mode encoder actually predicts.
  Codebook codebook;
  codebook.ranking = ranking;
  codebook.intra = intra;
  codebook.inter = inter;
  std::size_t inter_samples = first.residuals.size();
  if (!first.residuals.empty()) {
    EncoderConfig enc;
    enc.K = K;
    enc.lambda = config.lambda;
    enc.window = w;
    enc.mode = CodingMode::Auto;
    enc.intra = intra;
    enc.inter = inter;
    enc.selection.resize(K);
    std::iota(enc.selection.begin(), enc.selection.end(), 0u);
    InterSamples second(w);
    for (const auto& s : projected) {
      enc.location = location_format_for(s);
      for (std::size_t n = 1; n < s.frames.size(); ++n) {
        const auto& ref = s.frames[n - 1];
        if (ref.features.empty()) continue;
        const auto coded = encode_frame(s.frames[n], &ref, enc);
        for (std::size_t i = 0; i < coded.decisions.size(); ++i) {
          const auto& d = coded.decisions[i];
          if (d.mode == FeatureMode::Inter) second.add(s.frames[n].features[i], ref.features[d.reference], w);
        }
      }
    }
    if (!second.residuals.empty()) {
      codebook.inter = inter_model(second, w, K, config.jobs);
      inter_samples = second.residuals.size();
      if (report) {
        report->truncated_bound_inter = truncated_entropy_bound(
            estimate_dexel_stats(second.residuals, config.jobs), codebook.inter->residual.order);
      }
    } else if (report) {
      report->truncated_bound_inter = truncated_entropy_bound(
          estimate_dexel_stats(first.residuals, config.jobs), inter.residual.order);
    }
  }
  if (report) {
    report->intra_samples = descriptors.size();
    report->inter_samples = first.residuals.empty() ? 0 : inter_samples;
    report->truncated_bound_intra = truncated_entropy_bound(intra_stats, intra.descriptor.order);
  }
  return codebook;
}

}  // namespace bfc
