#include "bcsorder/instances.hpp"

#include "bcsorder/errors.hpp"
#include "bcsorder/random.hpp"

namespace bcsorder {

void InstanceSpec::validate() const {
  if (n < 1 || n > kMaxVars) throw InputError("instance n must be in [1, 64]");
  if (m < 1) throw InputError("instance m must be at least 1");
  if (degree < 1 || degree > n) throw InputError("instance degree must be in [1, n]");
  if (!(density > 0.0 && density <= 1.0)) throw InputError("instance density must be in (0, 1]");
}

namespace {

// All non-constant monomials of degree <= d, in canonical order.
std::vector<Monomial> monomials_up_to(unsigned n, unsigned d) {
  std::vector<Monomial> out;
  for (unsigned k = 1; k <= d; ++k) {
    // Lexicographic k-subsets of [0, n).
    std::vector<unsigned> idx(k);
    for (unsigned i = 0; i < k; ++i) idx[i] = i;
    for (;;) {
      Monomial m;
      for (const unsigned i : idx) m.bits |= std::uint64_t{1} << i;
      out.push_back(m);
      int pos = static_cast<int>(k) - 1;
      while (pos >= 0 && idx[pos] == n - k + static_cast<unsigned>(pos)) --pos;
      if (pos < 0) break;
      ++idx[pos];
      for (unsigned i = static_cast<unsigned>(pos) + 1; i < k; ++i) idx[i] = idx[i - 1] + 1;
    }
  }
  return out;
}

}  // namespace

Assignment planted_solution(const InstanceSpec& spec) {
  spec.validate();
  // Independent stream so the planted point does not depend on m or density.
  Rng rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
  const Assignment mask = spec.n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << spec.n) - 1;
  return rng() & mask;
}

BoolSystem gen_random_system(const InstanceSpec& spec) {
  spec.validate();
  const auto pool = monomials_up_to(spec.n, spec.degree);
  const Assignment star = planted_solution(spec);
  Rng rng(spec.seed);
  BoolSystem s{spec.n, {}};
  s.polys.reserve(spec.m);
  for (unsigned i = 0; i < spec.m; ++i) {
    std::vector<Monomial> terms;
    for (const Monomial mono : pool) {
      if (uniform01(rng) < spec.density) terms.push_back(mono);
    }
    const bool constant = uniform01(rng) < spec.density;
    Poly p(std::move(terms));
    if (spec.planted ? p.eval(star) : constant) p += Poly::one();
    s.polys.push_back(std::move(p));
  }
  return s;
}

std::vector<Assignment> brute_force_solve(const BoolSystem& s) {
  if (s.n > kBruteForceMaxVars) {
    throw InputError("brute force refuses n=" + std::to_string(s.n) + " (limit " +
                     std::to_string(kBruteForceMaxVars) + ")");
  }
  std::vector<Assignment> out;
  const Assignment end = Assignment{1} << s.n;
  for (Assignment a = 0; a < end; ++a) {
    bool ok = true;
    for (const Poly& p : s.polys) {
      if (p.eval(a)) {
        ok = false;
        break;
      }
    }
    if (ok) out.push_back(a);
  }
  return out;
}

}  // namespace bcsorder
