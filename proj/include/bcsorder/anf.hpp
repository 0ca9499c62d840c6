#pragma once

// Boolean polynomials in algebraic normal form over
// F2[x1..xn] / <xi^2 + xi>.

#include <bit>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bcsorder/ordering.hpp"

namespace bcsorder {

inline constexpr unsigned kMaxVars = 64;

/// 1-based variable index, x_1 .. x_n.
struct VarId {
  unsigned index = 1;

  constexpr unsigned bit() const noexcept { return index - 1; }
  friend constexpr auto operator<=>(VarId, VarId) = default;
};

/// Packed assignment: bit (i-1) holds the value of x_i.
using Assignment = std::uint64_t;

/// Set of variables; the empty set is the constant monomial 1.
/// x^2 cannot be represented, so idempotency is structural.
struct Monomial {
  std::uint64_t bits = 0;

  static constexpr Monomial one() noexcept { return {}; }
  static constexpr Monomial of(VarId v) noexcept { return {std::uint64_t{1} << v.bit()}; }

  constexpr unsigned degree() const noexcept { return static_cast<unsigned>(std::popcount(bits)); }
  constexpr bool is_one() const noexcept { return bits == 0; }
  constexpr bool contains(VarId v) const noexcept { return (bits >> v.bit()) & 1U; }
  constexpr bool eval(Assignment a) const noexcept { return (bits & ~a) == 0; }

  /// Highest variable index present (internal order x1 < ... < xn).
  constexpr VarId top() const noexcept { return {static_cast<unsigned>(std::bit_width(bits))}; }

  std::vector<VarId> vars() const;

  friend constexpr Monomial operator*(Monomial a, Monomial b) noexcept { return {a.bits | b.bits}; }
  friend constexpr auto operator<=>(Monomial, Monomial) = default;
};

/// Canonical term order: degree first, then lexicographic on the sorted
/// variable index lists ({1,2} < {1,3} < {2,3}).
bool canonical_less(Monomial a, Monomial b) noexcept;

/// XOR-sum of distinct monomials. Terms are kept sorted by raw bit value,
/// which gives O(n) addition by merging; canonical_terms() yields the
/// formatting order.
class Poly {
 public:
  Poly() = default;

  /// Reduces a multiset of monomials mod 2 (pairs cancel).
  explicit Poly(std::vector<Monomial> terms);

  static Poly one() { return Poly(std::vector<Monomial>{Monomial::one()}); }
  static Poly var(VarId v) { return Poly(std::vector<Monomial>{Monomial::of(v)}); }

  std::span<const Monomial> terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }

  bool is_zero() const noexcept { return terms_.empty(); }
  bool is_one() const noexcept { return terms_.size() == 1 && terms_[0].is_one(); }
  bool is_constant() const noexcept { return terms_.empty() || is_one(); }

  /// Union of all variables occurring in the polynomial.
  Monomial support() const noexcept;

  /// Greatest variable under the internal order; nullopt for constants.
  std::optional<VarId> lvar() const noexcept;

  std::vector<Monomial> canonical_terms() const;

  bool eval(Assignment a) const noexcept;

  friend Poly operator+(const Poly& a, const Poly& b);
  friend Poly operator*(const Poly& a, const Poly& b);
  Poly& operator+=(const Poly& b);

  friend bool operator==(const Poly&, const Poly&) = default;

 private:
  struct Sorted {};
  Poly(Sorted, std::vector<Monomial> terms) : terms_(std::move(terms)) {}

  std::vector<Monomial> terms_;
};

Poly poly_add(const Poly& a, const Poly& b);
Poly poly_mul(const Poly& a, const Poly& b);

/// `assignment[i]` is the value of x_{i+1}. Throws InputError if the
/// assignment does not cover every variable of p.
bool poly_eval(const Poly& p, std::span<const std::uint8_t> assignment);

/// Replaces v by q in every monomial containing v.
Poly substitute(const Poly& p, VarId v, const Poly& q);

/// p = initial * x_c + tail with x_c the greatest variable of p under
/// `order` and neither initial nor tail containing x_c.
struct LeadingSplit {
  VarId lead;
  Poly initial;
  Poly tail;
};

/// Split with respect to the internal order x1 < ... < xn.
LeadingSplit leading_split(const Poly& p);
/// Throws DomainError on constant polynomials.
LeadingSplit leading_split(const Poly& p, const Ordering& order);

/// Total degree; nullopt for the zero polynomial.
std::optional<unsigned> tdeg(const Poly& p);

/// Greatest monomial under degree, then lexicographic comparison of the
/// variables' ranks in `order` (highest-ranked variable first).
Monomial lm(const Poly& p, const Ordering& order);

/// Orders polynomials by their canonical text form.
bool canonical_poly_less(const Poly& a, const Poly& b);

std::string format_monomial(Monomial m);
std::string format_poly(const Poly& p);

struct BoolSystem {
  unsigned n = 0;
  std::vector<Poly> polys;

  friend bool operator==(const BoolSystem&, const BoolSystem&) = default;
};

/// Reads the `# vars: <n>` text format. Throws ParseError with the
/// offending line number.
BoolSystem parse_system(const std::string& text);
std::string format_system(const BoolSystem& s);

BoolSystem load_system(const std::string& path);
void save_system(const BoolSystem& s, const std::string& path);

}  // namespace bcsorder
