#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace bcsorder {

/// A variable ordering sigma = (x_{i1} < x_{i2} < ... < x_{in}), stored as
/// a permutation: position(i) is the new 1-based index of original
/// variable x_i. The solver always eliminates with x_1 < ... < x_n, so
/// renaming a system through position() realizes sigma.
class Ordering {
 public:
  Ordering() = default;

  /// Throws InputError unless `perm` is a bijection on [1..n].
  explicit Ordering(std::vector<unsigned> perm);

  static Ordering identity(unsigned n);

  unsigned size() const noexcept { return static_cast<unsigned>(perm_.size()); }
  unsigned position(unsigned var) const { return perm_.at(var - 1); }
  std::span<const unsigned> perm() const noexcept { return perm_; }

  Ordering inverse() const;

  /// Stable 64-bit fingerprint, used in annealing traces.
  std::uint64_t hash() const noexcept;

  friend bool operator==(const Ordering&, const Ordering&) = default;

 private:
  std::vector<unsigned> perm_;
};

/// Uniform over S_n via a seeded Fisher-Yates shuffle.
Ordering random_ordering(unsigned n, std::uint64_t seed);

/// Transposes the entries at 1-based positions i < j.
Ordering swap_neighbor(const Ordering& o, unsigned i, unsigned j);

std::string ordering_to_json(const Ordering& o);
Ordering ordering_from_json(const std::string& text);

}  // namespace bcsorder
