#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "latentdyn/dynamics.hpp"
#include "latentdyn/trajectory.hpp"

namespace latentdyn {

/// The seven classical constants (codes 1..7 in declaration order) followed by
/// the seven post-symbolic glyphs, which have no code.
enum class Glyph : std::uint8_t {
  Not,      // ~
  Or,       // ∨
  Implies,  // ⊃
  Exists,   // ∃
  Equals,   // =
  Zero,     // 0
  Succ,     // s
  Empty,    // ∅  null operator
  Delta,    // Δ  resolution
  Xi,       // Ξ  tension
  Psi,      // Ψ  salience
  Nabla,    // ∇  recursion
  Oplus,    // ⊕  parallel
  Circle,   // ◯  fusion
};

inline constexpr std::size_t kGlyphCount = 14;

char32_t glyph_code_point(Glyph g) noexcept;
std::string glyph_text(Glyph g);
bool is_classical(Glyph g) noexcept;
/// Table code 1..7 for classical glyphs, nullopt otherwise.
std::optional<unsigned> glyph_code(Glyph g) noexcept;

/// Nonempty glyph sequence.
class Formula {
 public:
  Formula() = default;
  explicit Formula(std::vector<Glyph> symbols);

  /// Parses UTF-8 text made only of the known glyph code points. '~' and
  /// U+223C both read as negation.
  static Formula parse(std::string_view utf8);

  const std::vector<Glyph>& symbols() const noexcept { return symbols_; }
  std::size_t size() const noexcept { return symbols_.size(); }
  std::string text() const;

  friend bool operator==(const Formula&, const Formula&) = default;

 private:
  std::vector<Glyph> symbols_;
};

using BigInt = boost::multiprecision::cpp_int;

/// Product over positions i of prime_i ^ code(symbol_i).
struct GodelCode {
  BigInt value;
  friend bool operator==(const GodelCode&, const GodelCode&) = default;
};

/// Throws NonEncodableError naming the first post-symbolic glyph.
GodelCode encode(const Formula& f);
/// Inverse of encode; MalformedCode unless value factors over consecutive
/// primes from 2 with exponents in 1..7.
Formula decode(const GodelCode& c);

/// True iff the formula has no Godel number, i.e. contains a post-symbolic glyph.
bool fail_predicate(const Formula& f);

struct RepairConfig {
  std::size_t dim = 8;
  double rate = 0.5;               // recursion contraction, in (0, 1)
  std::vector<double> center;      // empty means the origin
  std::vector<double> salience;    // raw weights before softsign; empty means all ones
  std::size_t max_iters = 1000;
  double tol = 1e-10;
  std::size_t restarts = 1;
  std::uint64_t seed = 0;

  /// Center and softsign weights expanded to `dim`.
  std::vector<double> resolved_center() const;
  std::vector<double> salience_weights() const;
};

nlohmann::json to_json(const RepairConfig& cfg);
RepairConfig repair_config_from_json(const nlohmann::json& j);

/// Stabilize step a -> c + rate * (w ⊙ (a - c)), the composition ∇∘Ψ∘Ξ.
VectorMap stabilize_map(const RepairConfig& cfg);

/// Fusion: radial normalization onto the closed unit ball around c.
std::vector<double> fuse(std::span<const double> a, std::span<const double> c);

struct CodebookEntry {
  std::string name;
  std::vector<double> embedding;
};

/// "G∅λ" at the center, then the seven post-symbolic glyphs at fixed unit
/// offsets from it.
std::vector<CodebookEntry> emission_codebook(const RepairConfig& cfg);

struct PostSymbolicTrace {
  Formula input;
  bool failed = false;
  std::vector<double> seed_vector;
  Trajectory iterates;  // every chain's a_0..a_T, concatenated in restart order
  std::vector<std::size_t> chain_lengths;
  std::vector<std::vector<double>> chain_fixed_points;
  std::vector<double> combined;     // ⊕ of chain fixed points
  std::vector<double> fixed_point;  // ◯ of combined
  std::string emission;
  bool converged = false;
  double final_step_norm = 0.0;
};

/// Detect, Shift, Stabilize, Converge and Emit for a failing formula.
/// Throws NotFailing for classical formulas and NonConvergence if any
/// restart chain misses the tolerance.
PostSymbolicTrace repair(const Formula& f, const RepairConfig& cfg);

nlohmann::json to_json(const PostSymbolicTrace& trace);

}  // namespace latentdyn
