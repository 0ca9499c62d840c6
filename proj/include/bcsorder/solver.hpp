#pragma once

// Instrumented Boolean characteristic-set solver.
//
// Each decomposition node splits one polynomial p = I*x_c + U into
//   branch A: {x_c + U, I + 1}   (x_c := U substituted everywhere)
//   branch B: {I, U}
// whose zero sets partition Zero(p). Branch A is explored first; branch B
// is pruned when I = 1. Leaves are either contradictions (1 in the active
// set) or triangular sets whose free variables expand to solutions.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bcsorder/anf.hpp"
#include "bcsorder/ordering.hpp"

namespace bcsorder {

/// head + tail = 0, i.e. x_head = tail, with tail over variables below head.
struct Relation {
  VarId head;
  Poly tail;

  friend bool operator==(const Relation&, const Relation&) = default;
};

struct TriangularSet {
  std::vector<Relation> relations;  // strictly decreasing heads
  std::vector<VarId> free_vars;     // ascending

  /// Number of assignments, 2^|free_vars| (saturating).
  std::uint64_t solution_count() const noexcept;

  friend bool operator==(const TriangularSet&, const TriangularSet&) = default;
};

struct CostMeter {
  std::uint64_t node_count = 0;
  std::uint64_t leaf_count = 0;
  std::uint64_t op_count = 0;
  /// branch_max[k]: largest branching factor (1 or 2) at tree depth k.
  std::vector<unsigned> branch_max;
  double wall_ms = 0.0;

  /// Every field except wall_ms.
  bool same_counts(const CostMeter& o) const noexcept {
    return node_count == o.node_count && leaf_count == o.leaf_count && op_count == o.op_count &&
           branch_max == o.branch_max;
  }
};

struct SolveResult {
  unsigned n = 0;
  std::vector<TriangularSet> triangular_sets;
  std::vector<Assignment> solutions;  // ascending
  bool truncated = false;
  CostMeter cost;
};

inline constexpr std::uint64_t kDefaultSolutionCap = std::uint64_t{1} << 20;

// ---- single-step primitives -------------------------------------------

/// Active polynomial set plus the relations extracted so far.
struct WorkState {
  std::vector<Poly> active;
  std::vector<Relation> relations;
};

/// Drops zero polynomials and duplicates, then repeatedly absorbs any
/// polynomial that is monic in its leading variable (I = 1) as a relation,
/// substituting it into the rest. Returns false on contradiction (the
/// constant 1 appears). Idempotent.
bool simplify(WorkState& state, std::uint64_t* op_count = nullptr);

struct Decomposition {
  VarId lead;
  /// Absent when I = 0 is impossible, i.e. I = 1 syntactically.
  std::optional<std::vector<Poly>> branch_b;
  /// {x_c + U, I + 1}; I + 1 omitted when zero.
  std::vector<Poly> branch_a;
};

/// The two constraint sets of one split of p. Throws DomainError on
/// constant p.
Decomposition decompose_step(const Poly& p);

// ---- full solve -------------------------------------------------------

struct SolveOptions {
  std::uint64_t cap = kDefaultSolutionCap;
  bool keep_sets = true;
};

SolveResult solve_all(const BoolSystem& s, const SolveOptions& opts = {});

/// Solves apply_ordering(s, o); solutions and triangular sets are mapped
/// back to the original variable names.
SolveResult solve_with_ordering(const BoolSystem& s, const Ordering& o, const SolveOptions& opts = {});

std::string format_bits(Assignment a, unsigned n);

/// JSON document {solutions, truncated, triangular_sets?, cost{...}}.
std::string solve_result_to_json(const SolveResult& r, bool emit_sets, bool include_wall = true);

}  // namespace bcsorder
