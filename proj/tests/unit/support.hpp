#pragma once

#include <vector>

#include "bcsorder/anf.hpp"
#include "bcsorder/random.hpp"

namespace testing {

// Random polynomial over x1..xn: each of `terms` draws is a random subset of
// at most max_deg variables (duplicates cancel mod 2).
inline bcsorder::Poly random_poly(bcsorder::Rng& rng, unsigned n, unsigned terms, unsigned max_deg = 3) {
  std::vector<bcsorder::Monomial> ms;
  for (unsigned t = 0; t < terms; ++t) {
    bcsorder::Monomial m;
    const auto deg = static_cast<unsigned>(bcsorder::uniform_below(rng, max_deg + 1));
    for (unsigned k = 0; k < deg; ++k) {
      m = m * bcsorder::Monomial::of({static_cast<unsigned>(bcsorder::uniform_below(rng, n)) + 1});
    }
    ms.push_back(m);
  }
  return bcsorder::Poly(std::move(ms));
}

inline bcsorder::Poly nonconstant_poly(bcsorder::Rng& rng, unsigned n, unsigned terms, unsigned max_deg = 3) {
  for (;;) {
    bcsorder::Poly p = random_poly(rng, n, terms, max_deg);
    if (!p.is_constant()) return p;
  }
}

inline bcsorder::Poly parse_poly(const std::string& text, unsigned n = 8) {
  return bcsorder::parse_system("# vars: " + std::to_string(n) + "\n" + text + "\n").polys.at(0);
}

}  // namespace testing
