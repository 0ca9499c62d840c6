#include "bcsorder/features.hpp"

#include "bcsorder/errors.hpp"
#include "json.hpp"

namespace bcsorder {

Spectrum spectrum(const BoolSystem& s) {
  std::vector<std::uint64_t> counts(s.n, 0);
  std::uint64_t total = 0;
  for (const Poly& p : s.polys) {
    for (const Monomial m : p.terms()) {
      for (std::uint64_t b = m.bits; b != 0; b &= b - 1) {
        ++counts[static_cast<unsigned>(std::countr_zero(b))];
        ++total;
      }
    }
  }
  Spectrum freq(s.n, 0.0);
  if (total == 0) return freq;
  for (unsigned i = 0; i < s.n; ++i) {
    freq[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
  }
  return freq;
}

BoolSystem apply_ordering(const BoolSystem& s, const Ordering& o) {
  if (o.size() != s.n) {
    throw InputError("ordering length " + std::to_string(o.size()) + " does not match n=" + std::to_string(s.n));
  }
  BoolSystem out{s.n, {}};
  out.polys.reserve(s.polys.size());
  for (const Poly& p : s.polys) {
    std::vector<Monomial> renamed;
    renamed.reserve(p.size());
    for (const Monomial m : p.terms()) {
      Monomial r;
      for (std::uint64_t b = m.bits; b != 0; b &= b - 1) {
        const unsigned var = static_cast<unsigned>(std::countr_zero(b)) + 1;
        r.bits |= std::uint64_t{1} << (o.position(var) - 1);
      }
      renamed.push_back(r);
    }
    out.polys.emplace_back(std::move(renamed));
  }
  return out;
}

Spectrum permute_spectrum(const Spectrum& freq, const Ordering& o) {
  if (o.size() != freq.size()) throw InputError("ordering length does not match spectrum length");
  Spectrum out(freq.size());
  for (unsigned i = 1; i <= o.size(); ++i) out[o.position(i) - 1] = freq[i - 1];
  return out;
}

Assignment pull_back(Assignment renamed, const Ordering& o) {
  Assignment original = 0;
  for (unsigned i = 1; i <= o.size(); ++i) {
    if ((renamed >> (o.position(i) - 1)) & 1U) original |= std::uint64_t{1} << (i - 1);
  }
  return original;
}

std::string spectrum_to_json(const Spectrum& s) { return nlohmann::json(s).dump(); }

}  // namespace bcsorder
