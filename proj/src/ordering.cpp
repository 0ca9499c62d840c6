#include "bcsorder/ordering.hpp"

#include <algorithm>
#include <numeric>

#include "bcsorder/errors.hpp"
#include "bcsorder/random.hpp"
#include "json.hpp"

namespace bcsorder {

Ordering::Ordering(std::vector<unsigned> perm) : perm_(std::move(perm)) {
  std::vector<bool> seen(perm_.size() + 1, false);
  for (const unsigned p : perm_) {
    if (p == 0 || p > perm_.size() || seen[p]) {
      throw InputError("ordering is not a permutation of [1.." + std::to_string(perm_.size()) + "]");
    }
    seen[p] = true;
  }
}

Ordering Ordering::identity(unsigned n) {
  std::vector<unsigned> perm(n);
  std::iota(perm.begin(), perm.end(), 1U);
  return Ordering(std::move(perm));
}

Ordering Ordering::inverse() const {
  std::vector<unsigned> inv(perm_.size());
  for (unsigned i = 0; i < perm_.size(); ++i) inv[perm_[i] - 1] = i + 1;
  return Ordering(std::move(inv));
}

std::uint64_t Ordering::hash() const noexcept {
  // FNV-1a over the entries.
  std::uint64_t h = 1469598103934665603ULL;
  for (const unsigned p : perm_) {
    h ^= p;
    h *= 1099511628211ULL;
  }
  return h;
}

Ordering random_ordering(unsigned n, std::uint64_t seed) {
  std::vector<unsigned> perm(n);
  std::iota(perm.begin(), perm.end(), 1U);
  Rng rng(seed);
  // Explicit Fisher-Yates: std::shuffle's draw sequence is implementation-defined.
  for (unsigned i = n; i > 1; --i) {
    const auto j = static_cast<unsigned>(uniform_below(rng, i));
    std::swap(perm[i - 1], perm[j]);
  }
  return Ordering(std::move(perm));
}

Ordering swap_neighbor(const Ordering& o, unsigned i, unsigned j) {
  if (i == j || i == 0 || j == 0 || i > o.size() || j > o.size()) {
    throw InputError("swap positions must be distinct and within [1.." + std::to_string(o.size()) + "]");
  }
  std::vector<unsigned> perm(o.perm().begin(), o.perm().end());
  std::swap(perm[i - 1], perm[j - 1]);
  return Ordering(std::move(perm));
}

std::string ordering_to_json(const Ordering& o) {
  return nlohmann::json(std::vector<unsigned>(o.perm().begin(), o.perm().end())).dump();
}

Ordering ordering_from_json(const std::string& text) {
  try {
    return Ordering(nlohmann::json::parse(text).get<std::vector<unsigned>>());
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed ordering JSON: ") + e.what());
  }
}

}  // namespace bcsorder
