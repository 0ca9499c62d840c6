#pragma once

#include <cstdint>
#include <vector>

#include "bcsorder/anf.hpp"

namespace bcsorder {

struct InstanceSpec {
  unsigned n = 10;
  unsigned m = 10;
  unsigned degree = 2;
  double density = 0.5;
  bool planted = true;
  std::uint64_t seed = 0;

  /// Throws InputError unless n >= 1, m >= 1, 1 <= degree <= n, 0 < density <= 1.
  void validate() const;
};

/// Bernoulli(density) choice of every non-constant monomial of degree at most
/// spec.degree, per polynomial. In planted mode a seeded assignment s* is
/// drawn and each constant term is fixed so the polynomial vanishes at s*.
BoolSystem gen_random_system(const InstanceSpec& spec);

/// The planted assignment gen_random_system uses for `spec`.
Assignment planted_solution(const InstanceSpec& spec);

inline constexpr unsigned kBruteForceMaxVars = 24;

/// Every assignment in F2^n on which all polynomials vanish, ascending.
/// Throws InputError for n > 24.
std::vector<Assignment> brute_force_solve(const BoolSystem& s);

}  // namespace bcsorder
