#include "bfc/symbol_table.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "bfc/error.hpp"

namespace bfc {

std::vector<std::uint32_t> quantize_distribution(std::span<const double> probabilities) {
  const auto n = probabilities.size();
  if (n < 2 || n > kProbabilityTotal) throw ConfigError("alphabet size must be in [2, 65536]");
  double sum = 0.0;
  for (double p : probabilities) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw ConfigError("probabilities must be finite and non-negative");
    sum += p;
  }
  if (!(sum > 0.0)) throw ConfigError("distribution has zero mass");

  std::vector<std::int64_t> f(n);
  std::int64_t total = 0;
  for (std::size_t s = 0; s < n; ++s) {
    f[s] = std::max<std::int64_t>(1, std::llround(probabilities[s] / sum * kProbabilityTotal));
    total += f[s];
  }
  // Settle the rounding residue on the largest entries; ties go to the lowest
  // symbol so the result is deterministic.
  while (total != kProbabilityTotal) {
    std::size_t best = 0;
    for (std::size_t s = 1; s < n; ++s) {
      if (f[s] > f[best]) best = s;
    }
    if (total < kProbabilityTotal) {
      f[best] += kProbabilityTotal - total;
      total = kProbabilityTotal;
    } else {
      const auto take = std::min<std::int64_t>(total - kProbabilityTotal, f[best] - 1);
      f[best] -= take;
      total -= take;
    }
  }
  return {f.begin(), f.end()};
}

SymbolTable SymbolTable::from_counts(std::uint32_t alphabet, std::span<const std::uint64_t> counts) {
  if (alphabet == 0 || counts.size() % alphabet != 0 || counts.empty()) {
    throw ConfigError("count table shape does not match alphabet");
  }
  std::vector<double> p(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) p[i] = static_cast<double>(counts[i]) + 1.0;
  return from_probabilities(alphabet, p);
}

SymbolTable SymbolTable::from_probabilities(std::uint32_t alphabet, std::span<const double> probabilities) {
  if (alphabet == 0 || probabilities.size() % alphabet != 0 || probabilities.empty()) {
    throw ConfigError("probability table shape does not match alphabet");
  }
  std::vector<std::uint32_t> freqs;
  freqs.reserve(probabilities.size());
  for (std::size_t r = 0; r < probabilities.size() / alphabet; ++r) {
    auto q = quantize_distribution(probabilities.subspan(r * alphabet, alphabet));
    freqs.insert(freqs.end(), q.begin(), q.end());
  }
  return from_frequencies(alphabet, std::move(freqs));
}

SymbolTable SymbolTable::from_frequencies(std::uint32_t alphabet, std::vector<std::uint32_t> frequencies) {
  if (alphabet < 2 || alphabet > kProbabilityTotal) throw ConfigError("alphabet size must be in [2, 65536]");
  if (frequencies.empty() || frequencies.size() % alphabet != 0) {
    throw ConfigError("frequency table shape does not match alphabet");
  }
  SymbolTable t;
  t.alphabet_ = alphabet;
  t.rows_ = static_cast<std::uint32_t>(frequencies.size() / alphabet);
  t.cumulative_.reserve(t.rows_ * (alphabet + 1));
  for (std::uint32_t r = 0; r < t.rows_; ++r) {
    std::uint32_t acc = 0;
    t.cumulative_.push_back(0);
    for (std::uint32_t s = 0; s < alphabet; ++s) {
      const auto f = frequencies[r * alphabet + s];
      if (f == 0) throw ConfigError("symbol frequency must be at least 1");
      acc += f;
      t.cumulative_.push_back(acc);
    }
    if (acc != kProbabilityTotal) {
      throw ConfigError("row " + std::to_string(r) + " frequencies sum to " + std::to_string(acc));
    }
  }
  t.finish();
  return t;
}

SymbolTable SymbolTable::uniform(std::uint32_t alphabet, std::uint32_t rows) {
  std::vector<double> p(static_cast<std::size_t>(alphabet) * rows, 1.0);
  return from_probabilities(alphabet, p);
}

void SymbolTable::finish() {
  costs_.resize(static_cast<std::size_t>(rows_) * alphabet_);
  for (std::uint32_t r = 0; r < rows_; ++r) {
    for (std::uint32_t s = 0; s < alphabet_; ++s) {
      costs_[r * alphabet_ + s] = kProbabilityBits - std::log2(static_cast<double>(frequency(r, s)));
    }
  }
}

void SymbolTable::serialize(ByteWriter& w) const {
  w.u32(alphabet_);
  w.u32(rows_);
  for (std::uint32_t r = 0; r < rows_; ++r) {
    for (std::uint32_t s = 0; s < alphabet_; ++s) w.u16(static_cast<std::uint16_t>(frequency(r, s)));
  }
}

SymbolTable SymbolTable::parse(ByteReader& r) {
  const auto at = r.offset();
  const auto alphabet = r.u32();
  const auto rows = r.u32();
  if (alphabet < 2 || alphabet > kProbabilityTotal || rows == 0 ||
      static_cast<std::uint64_t>(alphabet) * rows * 2 > r.remaining()) {
    throw FormatError("invalid symbol table shape", at);
  }
  std::vector<std::uint32_t> f(static_cast<std::size_t>(alphabet) * rows);
  for (auto& v : f) v = r.u16();
  try {
    return from_frequencies(alphabet, std::move(f));
  } catch (const ConfigError& e) {
    throw FormatError(std::string("invalid symbol table: ") + e.what(), at);
  }
}

}  // namespace bfc
