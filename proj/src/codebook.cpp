#include "bfc/codebook.hpp"

#include <cmath>
#include <string>

#include "bfc/bytes.hpp"
#include "bfc/error.hpp"

namespace bfc {

namespace {

constexpr std::uint16_t kCodebookVersion = 1;

void write_intra(ByteWriter& w, const LocalIntraModel& m) {
  w.u16(m.source_length);
  m.descriptor.serialize(w);
  m.scale.serialize(w);
  m.orientation.serialize(w);
}

void write_inter(ByteWriter& w, const LocalInterModel& m) {
  w.u16(static_cast<std::uint16_t>(m.window.dx));
  w.u16(static_cast<std::uint16_t>(m.window.dy));
  w.u16(static_cast<std::uint16_t>(m.window.dscale));
  m.residual.serialize(w);
  m.dx.serialize(w);
  m.dy.serialize(w);
  m.dscale.serialize(w);
  m.dtheta.serialize(w);
}

void expect_alphabet(const SymbolTable& t, std::uint32_t alphabet, const char* name, std::size_t at) {
  if (t.alphabet() != alphabet || t.rows() != 1) {
    throw FormatError(std::string("codebook table '") + name + "' has the wrong shape", at);
  }
}

LocalIntraModel read_intra(ByteReader& r) {
  const auto at = r.offset();
  LocalIntraModel m;
  m.source_length = r.u16();
  m.descriptor = CodingPermutation::parse(r);
  m.scale = SymbolTable::parse(r);
  m.orientation = SymbolTable::parse(r);
  if (m.descriptor.size() > m.source_length) throw FormatError("retained dexels exceed source length", at);
  expect_alphabet(m.scale, kScaleAlphabet, "scale", at);
  expect_alphabet(m.orientation, 32, "orientation", at);
  return m;
}

LocalInterModel read_inter(ByteReader& r) {
  const auto at = r.offset();
  LocalInterModel m;
  m.window.dx = r.u16();
  m.window.dy = r.u16();
  m.window.dscale = r.u16();
  m.residual = CodingPermutation::parse(r);
  m.dx = SymbolTable::parse(r);
  m.dy = SymbolTable::parse(r);
  m.dscale = SymbolTable::parse(r);
  m.dtheta = SymbolTable::parse(r);
  expect_alphabet(m.dx, static_cast<std::uint32_t>(2 * m.window.dx + 1), "dx", at);
  expect_alphabet(m.dy, static_cast<std::uint32_t>(2 * m.window.dy + 1), "dy", at);
  expect_alphabet(m.dscale, static_cast<std::uint32_t>(2 * m.window.dscale + 1), "dscale", at);
  expect_alphabet(m.dtheta, 32, "dtheta", at);
  return m;
}

}  // namespace

const GlobalModel* Codebook::find_global(std::uint32_t words, double delta) const {
  for (const auto& g : globals) {
    if (g.words == words && g.delta == delta) return &g;
  }
  return nullptr;
}

void Codebook::put_global(GlobalModel model) {
  for (auto& g : globals) {
    if (g.words == model.words && g.delta == model.delta) {
      g = std::move(model);
      return;
    }
  }
  globals.push_back(std::move(model));
}

std::vector<std::uint8_t> section_bytes(const LocalIntraModel& model) {
  ByteWriter w;
  write_intra(w, model);
  return w.take();
}

std::vector<std::uint8_t> section_bytes(const LocalInterModel& model) {
  ByteWriter w;
  write_inter(w, model);
  return w.take();
}

std::vector<std::uint8_t> serialize_codebook(const Codebook& cb) {
  std::vector<std::pair<SectionKind, std::vector<std::uint8_t>>> sections;
  if (cb.ranking) {
    ByteWriter w;
    w.u16(static_cast<std::uint16_t>(cb.ranking->order.size()));
    for (auto j : cb.ranking->order) w.u16(static_cast<std::uint16_t>(j));
    for (std::size_t i = 0; i < cb.ranking->order.size(); ++i) {
      w.f64(i < cb.ranking->scores.size() ? cb.ranking->scores[i] : 0.0);
    }
    sections.emplace_back(SectionKind::DexelRanking, w.take());
  }
  if (cb.intra) sections.emplace_back(SectionKind::IntraLocal, section_bytes(*cb.intra));
  if (cb.inter) sections.emplace_back(SectionKind::InterLocal, section_bytes(*cb.inter));
  for (const auto& g : cb.globals) {
    if (!g.intra.empty()) {
      ByteWriter w;
      w.u32(g.words);
      w.f64(g.delta);
      g.intra.serialize(w);
      sections.emplace_back(SectionKind::IntraBovw, w.take());
    }
    if (!g.inter.empty()) {
      ByteWriter w;
      w.u32(g.words);
      w.f64(g.delta);
      g.inter.serialize(w);
      sections.emplace_back(SectionKind::InterBovw, w.take());
    }
  }

  ByteWriter w;
  w.magic("BFCB");
  w.u16(kCodebookVersion);
  w.u16(static_cast<std::uint16_t>(sections.size()));
  for (const auto& [kind, payload] : sections) {
    w.u8(static_cast<std::uint8_t>(kind));
    w.u32(static_cast<std::uint32_t>(payload.size()));
    w.bytes(payload);
  }
  return w.take();
}

Codebook parse_codebook(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic("BFCB");
  const auto version_at = r.offset();
  if (r.u16() != kCodebookVersion) throw FormatError("unsupported BFCB version", version_at);
  const auto count = r.u16();
  Codebook cb;
  for (std::uint16_t i = 0; i < count; ++i) {
    const auto at = r.offset();
    const auto kind = r.u8();
    const auto length = r.u32();
    const auto base = r.offset();
    ByteReader s(r.bytes(length), base);
    auto fail = [&](const std::string& what) { throw FormatError(what, s.offset()); };
    {
      switch (static_cast<SectionKind>(kind)) {
        case SectionKind::IntraLocal:
          cb.intra = read_intra(s);
          break;
        case SectionKind::InterLocal:
          cb.inter = read_inter(s);
          break;
        case SectionKind::IntraBovw:
        case SectionKind::InterBovw: {
          GlobalModel g;
          g.words = s.u32();
          g.delta = s.f64();
          if (!(g.delta > 0.0) || !std::isfinite(g.delta)) fail("invalid quantization step");
          auto table = SymbolTable::parse(s);
          const bool intra = static_cast<SectionKind>(kind) == SectionKind::IntraBovw;
          if (table.alphabet() != kGlobalAlphabet || table.rows() != (intra ? 1u : kGlobalAlphabet)) {
            fail("BoVW table has the wrong shape");
          }
          GlobalModel* existing = nullptr;
          for (auto& e : cb.globals) {
            if (e.words == g.words && e.delta == g.delta) existing = &e;
          }
          if (existing == nullptr) {
            cb.globals.push_back(g);
            existing = &cb.globals.back();
          }
          (intra ? existing->intra : existing->inter) = std::move(table);
          break;
        }
        case SectionKind::DexelRanking: {
          DexelRanking rk;
          const auto n = s.u16();
          rk.order.resize(n);
          for (auto& j : rk.order) j = s.u16();
          rk.scores.resize(n);
          for (auto& v : rk.scores) v = s.f64();
          cb.ranking = std::move(rk);
          break;
        }
        default:
          throw FormatError("unknown codebook section kind " + std::to_string(kind), at);
      }
    }
    if (!s.at_end()) throw FormatError("codebook section has trailing bytes", s.offset());
  }
  if (!r.at_end()) throw FormatError("trailing bytes after codebook sections", r.offset());
  return cb;
}

Codebook read_codebook(const std::filesystem::path& path) { return parse_codebook(read_file(path)); }

void write_codebook(const Codebook& codebook, const std::filesystem::path& path) {
  write_file(path, serialize_codebook(codebook));
}

}  // namespace bfc
