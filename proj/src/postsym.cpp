#include "latentdyn/postsym.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <cmath>

#include "latentdyn/error.hpp"
#include "latentdyn/linalg.hpp"
#include "latentdyn/rng.hpp"

namespace latentdyn {

namespace {

constexpr std::array<char32_t, kGlyphCount> kCodePoints = {
    U'~', U'∨', U'⊃', U'∃', U'=', U'0', U's',
    U'∅', U'Δ', U'Ξ', U'Ψ', U'∇', U'⊕', U'◯',
};

constexpr unsigned kMaxExponent = 7;
constexpr std::uint64_t kCodebookSeed = 0x6c617465'6e747379ULL;

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

// Decodes one code point starting at byte `pos`; advances `pos`.
char32_t next_code_point(std::string_view s, std::size_t& pos) {
  const auto lead = static_cast<unsigned char>(s[pos]);
  std::size_t len = 0;
  char32_t cp = 0;
  if (lead < 0x80) {
    len = 1;
    cp = lead;
  } else if ((lead & 0xE0) == 0xC0) {
    len = 2;
    cp = lead & 0x1F;
  } else if ((lead & 0xF0) == 0xE0) {
    len = 3;
    cp = lead & 0x0F;
  } else if ((lead & 0xF8) == 0xF0) {
    len = 4;
    cp = lead & 0x07;
  } else {
    fail(ErrorCode::ParseFailure, "invalid UTF-8 lead byte at offset " + std::to_string(pos));
  }
  if (pos + len > s.size()) fail(ErrorCode::ParseFailure, "truncated UTF-8 sequence at offset " + std::to_string(pos));
  for (std::size_t i = 1; i < len; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + i]);
    if ((b & 0xC0) != 0x80) fail(ErrorCode::ParseFailure, "invalid UTF-8 continuation at offset " + std::to_string(pos + i));
    cp = (cp << 6) | (b & 0x3F);
  }
  pos += len;
  return cp;
}

// First n primes by trial division.
const std::vector<std::uint32_t>& primes(std::size_t n) {
  static thread_local std::vector<std::uint32_t> cache{2};
  for (std::uint32_t candidate = cache.back() + 1; cache.size() < n; ++candidate) {
    bool prime = true;
    for (auto p : cache) {
      if (static_cast<std::uint64_t>(p) * p > candidate) break;
      if (candidate % p == 0) {
        prime = false;
        break;
      }
    }
    if (prime) cache.push_back(candidate);
  }
  return cache;
}

std::vector<double> expand(const std::vector<double>& v, std::size_t dim, double fill, const char* what) {
  if (v.empty()) return std::vector<double>(dim, fill);
  if (v.size() != dim) {
    fail(ErrorCode::DimensionMismatch, std::string(what) + " has length " + std::to_string(v.size()) +
                                           ", expected dim " + std::to_string(dim));
  }
  return v;
}

std::vector<double> shift_seed(const RepairConfig& cfg, char32_t code_point, std::size_t restart) {
  return Rng(cfg.seed).split(code_point).split(restart).unit_vector(cfg.dim);
}

}  // namespace

char32_t glyph_code_point(Glyph g) noexcept { return kCodePoints[static_cast<std::size_t>(g)]; }

std::string glyph_text(Glyph g) {
  std::string out;
  append_utf8(out, glyph_code_point(g));
  return out;
}

bool is_classical(Glyph g) noexcept { return static_cast<std::size_t>(g) < 7; }

std::optional<unsigned> glyph_code(Glyph g) noexcept {
  if (!is_classical(g)) return std::nullopt;
  return static_cast<unsigned>(g) + 1;
}

Formula::Formula(std::vector<Glyph> symbols) : symbols_(std::move(symbols)) {
  if (symbols_.empty()) fail(ErrorCode::Precondition, "formula must be nonempty");
}

Formula Formula::parse(std::string_view utf8) {
  std::vector<Glyph> symbols;
  std::size_t pos = 0;
  while (pos < utf8.size()) {
    const std::size_t start = pos;
    char32_t cp = next_code_point(utf8, pos);
    if (cp == U'∼') cp = U'~';
    std::optional<Glyph> glyph;
    for (std::size_t i = 0; i < kGlyphCount; ++i) {
      if (kCodePoints[i] == cp) glyph = static_cast<Glyph>(i);
    }
    if (!glyph) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "U+%04X", static_cast<unsigned>(cp));
      fail(ErrorCode::ParseFailure, std::string("unknown glyph ") + buf + " at byte " + std::to_string(start));
    }
    symbols.push_back(*glyph);
  }
  if (symbols.empty()) fail(ErrorCode::ParseFailure, "empty formula");
  return Formula(std::move(symbols));
}

std::string Formula::text() const {
  std::string out;
  for (auto g : symbols_) append_utf8(out, glyph_code_point(g));
  return out;
}

GodelCode encode(const Formula& f) {
  const auto& ps = primes(f.size());
  BigInt value = 1;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto code = glyph_code(f.symbols()[i]);
    if (!code) throw NonEncodableError(i);
    value *= boost::multiprecision::pow(BigInt(ps[i]), *code);
  }
  return {value};
}

Formula decode(const GodelCode& c) {
  if (c.value < 2) fail(ErrorCode::MalformedCode, "code must be at least 2");
  BigInt rest = c.value;
  std::vector<Glyph> symbols;
  for (std::size_t i = 0; rest > 1; ++i) {
    const std::uint32_t p = primes(i + 1)[i];
    unsigned exponent = 0;
    for (;;) {
      BigInt q, r;
      boost::multiprecision::divide_qr(rest, BigInt(p), q, r);
      if (r != 0) break;
      rest = std::move(q);
      if (++exponent > kMaxExponent) {
        fail(ErrorCode::MalformedCode, "exponent of prime " + std::to_string(p) + " exceeds 7");
      }
    }
    if (exponent == 0) {
      fail(ErrorCode::MalformedCode, "prime " + std::to_string(p) + " missing before remaining factor");
    }
    symbols.push_back(static_cast<Glyph>(exponent - 1));
  }
  return Formula(std::move(symbols));
}

bool fail_predicate(const Formula& f) {
  for (auto g : f.symbols())
    if (!is_classical(g)) return true;
  return false;
}

std::vector<double> RepairConfig::resolved_center() const { return expand(center, dim, 0.0, "center"); }

std::vector<double> RepairConfig::salience_weights() const {
  auto w = expand(salience, dim, 1.0, "salience");
  for (auto& x : w) x = x / (1.0 + std::abs(x));
  return w;
}

nlohmann::json to_json(const RepairConfig& cfg) {
  return {{"dim", cfg.dim},       {"rate", cfg.rate},         {"center", cfg.resolved_center()},
          {"salience", expand(cfg.salience, cfg.dim, 1.0, "salience")},
          {"max_iters", cfg.max_iters}, {"tol", cfg.tol}, {"restarts", cfg.restarts}, {"seed", cfg.seed}};
}

RepairConfig repair_config_from_json(const nlohmann::json& j) {
  RepairConfig cfg;
  try {
    if (j.contains("dim")) cfg.dim = j.at("dim").get<std::size_t>();
    if (j.contains("rate")) cfg.rate = j.at("rate").get<double>();
    if (j.contains("center")) cfg.center = j.at("center").get<std::vector<double>>();
    if (j.contains("salience")) cfg.salience = j.at("salience").get<std::vector<double>>();
    if (j.contains("max_iters")) cfg.max_iters = j.at("max_iters").get<std::size_t>();
    if (j.contains("tol")) cfg.tol = j.at("tol").get<double>();
    if (j.contains("restarts")) cfg.restarts = j.at("restarts").get<std::size_t>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseFailure, std::string("repair config: ") + e.what());
  }
  return cfg;
}

VectorMap stabilize_map(const RepairConfig& cfg) {
  return [c = cfg.resolved_center(), w = cfg.salience_weights(), rate = cfg.rate](std::span<const double> a) {
    std::vector<double> out(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) {
      const double tension = a[j] - c[j];
      const double salient = w[j] * tension;
      out[j] = c[j] + rate * salient;
    }
    return out;
  };
}

std::vector<double> fuse(std::span<const double> a, std::span<const double> c) {
  std::vector<double> out(a.size());
  const double r = distance(a, c);
  const double scale = r > 1.0 ? 1.0 / r : 1.0;
  for (std::size_t j = 0; j < a.size(); ++j) out[j] = c[j] + (a[j] - c[j]) * scale;
  return out;
}

std::vector<CodebookEntry> emission_codebook(const RepairConfig& cfg) {
  const auto c = cfg.resolved_center();
  std::vector<CodebookEntry> book;
  book.push_back({"G" + glyph_text(Glyph::Empty) + "λ", c});
  for (std::size_t i = 7; i < kGlyphCount; ++i) {
    const auto g = static_cast<Glyph>(i);
    auto u = Rng(kCodebookSeed).split(glyph_code_point(g)).unit_vector(cfg.dim);
    for (std::size_t j = 0; j < cfg.dim; ++j) u[j] += c[j];
    book.push_back({glyph_text(g), std::move(u)});
  }
  return book;
}

PostSymbolicTrace repair(const Formula& f, const RepairConfig& cfg) {
  if (!fail_predicate(f)) fail(ErrorCode::NotFailing, "'" + f.text() + "' is fully encodable");
  if (cfg.dim < 1) fail(ErrorCode::Precondition, "repair dim must be positive");
  if (!(cfg.rate > 0.0 && cfg.rate < 1.0)) fail(ErrorCode::Precondition, "repair rate must lie in (0, 1)");
  if (!(cfg.tol > 0.0)) fail(ErrorCode::Precondition, "repair tolerance must be positive");
  if (cfg.restarts < 1) fail(ErrorCode::Precondition, "repair needs at least one restart chain");

  PostSymbolicTrace trace;
  trace.input = f;
  trace.failed = true;

  // Detect: the first glyph without a code.
  Glyph failing = Glyph::Empty;
  for (auto g : f.symbols()) {
    if (!is_classical(g)) {
      failing = g;
      break;
    }
  }
  const char32_t cp = glyph_code_point(failing);
  const auto step = stabilize_map(cfg);
  const auto c = cfg.resolved_center();

  trace.converged = true;
  for (std::size_t k = 0; k < cfg.restarts; ++k) {
    // Shift: a_0 for this chain.
    auto a = shift_seed(cfg, cp, k);
    if (k == 0) trace.seed_vector = a;
    trace.iterates.append_row(a);
    std::size_t length = 1;
    double step_norm = 0.0;
    bool chain_converged = false;
    // Stabilize.
    for (std::size_t t = 0; t < cfg.max_iters; ++t) {
      auto next = step(a);
      step_norm = distance(next, a);
      a = std::move(next);
      trace.iterates.append_row(a);
      ++length;
      if (step_norm <= cfg.tol) {
        chain_converged = true;
        break;
      }
    }
    trace.chain_lengths.push_back(length);
    trace.chain_fixed_points.push_back(a);
    trace.final_step_norm = std::max(trace.final_step_norm, step_norm);
    if (!chain_converged) {
      fail(ErrorCode::NonConvergence, "restart chain " + std::to_string(k) + " step norm " +
                                          std::to_string(step_norm) + " above tolerance after " +
                                          std::to_string(cfg.max_iters) + " iterations");
    }
  }

  // Converge: parallel combination in restart order, then fusion.
  trace.combined.assign(cfg.dim, 0.0);
  for (const auto& p : trace.chain_fixed_points)
    for (std::size_t j = 0; j < cfg.dim; ++j) trace.combined[j] += p[j];
  for (auto& x : trace.combined) x /= static_cast<double>(cfg.restarts);
  trace.fixed_point = fuse(trace.combined, c);

  // Emit: nearest codebook entry.
  const auto book = emission_codebook(cfg);
  std::size_t best = 0;
  double best_dist = distance(book[0].embedding, trace.fixed_point);
  for (std::size_t i = 1; i < book.size(); ++i) {
    const double dd = distance(book[i].embedding, trace.fixed_point);
    if (dd < best_dist) {
      best = i;
      best_dist = dd;
    }
  }
  trace.emission = book[best].name;

  std::string offsets;
  std::size_t offset = 0;
  for (std::size_t k = 0; k < trace.chain_lengths.size(); ++k) {
    if (k) offsets += ",";
    offsets += std::to_string(offset);
    offset += trace.chain_lengths[k];
  }
  trace.iterates.meta()["chain_offsets"] = offsets;
  trace.iterates.meta()["input"] = f.text();
  return trace;
}

nlohmann::json to_json(const PostSymbolicTrace& trace) {
  nlohmann::json j;
  j["input"] = trace.input.size() ? trace.input.text() : "";
  j["failed"] = trace.failed;
  j["converged"] = trace.converged;
  j["seed_vector"] = trace.seed_vector;
  j["chain_lengths"] = trace.chain_lengths;
  j["chain_fixed_points"] = trace.chain_fixed_points;
  j["combined"] = trace.combined;
  j["fixed_point"] = trace.fixed_point;
  j["final_step_norm"] = trace.final_step_norm;
  j["emission"] = trace.emission;
  j["epistemic"] = nullptr;
  return j;
}

}  // namespace latentdyn
