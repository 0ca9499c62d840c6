#include "bcsorder/solver.hpp"

#include <algorithm>
#include <chrono>

#include "bcsorder/errors.hpp"
#include "bcsorder/features.hpp"
#include "json.hpp"

namespace bcsorder {

std::uint64_t TriangularSet::solution_count() const noexcept {
  return free_vars.size() >= 64 ? ~std::uint64_t{0} : std::uint64_t{1} << free_vars.size();
}

namespace {

bool raw_less(const Poly& a, const Poly& b) {
  return std::lexicographical_compare(a.terms().begin(), a.terms().end(), b.terms().begin(), b.terms().end());
}

// Selection rule: greatest lvar, then fewest terms, then canonical text order.
bool preferred(const Poly& a, const Poly& b) {
  const unsigned la = a.lvar()->index;
  const unsigned lb = b.lvar()->index;
  if (la != lb) return la > lb;
  if (a.size() != b.size()) return a.size() < b.size();
  return canonical_poly_less(a, b);
}

// I = 1 exactly when the leading variable appears only as the bare monomial x_c.
bool is_monic(const Poly& p) {
  const std::uint64_t lead = Monomial::of(*p.lvar()).bits;
  int hits = 0;
  bool bare = false;
  for (const Monomial m : p.terms()) {
    if (m.bits & lead) {
      ++hits;
      bare = m.bits == lead;
    }
  }
  return hits == 1 && bare;
}

Poly metered_substitute(const Poly& p, VarId v, const Poly& q, std::uint64_t* ops) {
  if (ops != nullptr && p.support().contains(v)) {
    std::uint64_t with = 0;
    for (const Monomial m : p.terms()) with += m.contains(v) ? 1 : 0;
    *ops += with * std::max<std::uint64_t>(q.size(), 1) + p.size();
  }
  return substitute(p, v, q);
}

void substitute_all(std::vector<Poly>& polys, VarId v, const Poly& q, std::uint64_t* ops) {
  for (Poly& p : polys) p = metered_substitute(p, v, q, ops);
}

}  // namespace

bool simplify(WorkState& state, std::uint64_t* op_count) {
  auto& active = state.active;
  for (;;) {
    std::erase_if(active, [](const Poly& p) { return p.is_zero(); });
    if (std::any_of(active.begin(), active.end(), [](const Poly& p) { return p.is_one(); })) return false;
    std::sort(active.begin(), active.end(), raw_less);
    active.erase(std::unique(active.begin(), active.end()), active.end());

    std::optional<std::size_t> pick;
    for (std::size_t i = 0; i < active.size(); ++i) {
      if (is_monic(active[i]) && (!pick || preferred(active[i], active[*pick]))) pick = i;
    }
    if (!pick) return true;

    const Poly p = std::move(active[*pick]);
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(*pick));
    const VarId head = *p.lvar();
    Poly tail = p + Poly::var(head);
    substitute_all(active, head, tail, op_count);
    state.relations.push_back({head, std::move(tail)});
  }
}

Decomposition decompose_step(const Poly& p) {
  LeadingSplit split = leading_split(p);
  Decomposition d;
  d.lead = split.lead;
  d.branch_a.push_back(Poly::var(split.lead) + split.tail);
  if (Poly i_plus_1 = split.initial + Poly::one(); !i_plus_1.is_zero()) d.branch_a.push_back(std::move(i_plus_1));
  if (!split.initial.is_one()) d.branch_b = std::vector<Poly>{std::move(split.initial), std::move(split.tail)};
  return d;
}

namespace {

struct Node {
  WorkState state;
  std::size_t depth = 0;
};

class Solver {
 public:
  Solver(unsigned n, const SolveOptions& opts) : n_(n), opts_(opts) { result_.n = n; }

  SolveResult run(std::vector<Poly> polys) {
    const auto start = std::chrono::steady_clock::now();
    std::vector<Node> stack;
    stack.push_back({{std::move(polys), {}}, 0});
    while (!stack.empty()) {
      Node node = std::move(stack.back());
      stack.pop_back();
      expand(std::move(node), stack);
    }
    std::sort(result_.solutions.begin(), result_.solutions.end());
    result_.cost.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return std::move(result_);
  }

 private:
  void expand(Node node, std::vector<Node>& stack) {
    CostMeter& cost = result_.cost;
    ++cost.node_count;
    if (!simplify(node.state, &cost.op_count)) {
      ++cost.leaf_count;
      return;
    }
    auto& active = node.state.active;
    if (active.empty()) {
      ++cost.leaf_count;
      emit_leaf(std::move(node.state.relations));
      return;
    }

    std::size_t pick = 0;
    for (std::size_t i = 1; i < active.size(); ++i) {
      if (preferred(active[i], active[pick])) pick = i;
    }
    const Poly p = std::move(active[pick]);
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(pick));
    LeadingSplit split = leading_split(p);

    // simplify() absorbed every monic polynomial, so I != 1 and both
    // branches are live.
    Node b{{active, node.state.relations}, node.depth + 1};
    if (!split.initial.is_zero()) b.state.active.push_back(split.initial);
    if (!split.tail.is_zero()) b.state.active.push_back(split.tail);

    Node a{std::move(node.state), node.depth + 1};
    substitute_all(a.state.active, split.lead, split.tail, &cost.op_count);
    a.state.active.push_back(split.initial + Poly::one());
    a.state.relations.push_back({split.lead, std::move(split.tail)});

    if (cost.branch_max.size() <= node.depth) cost.branch_max.resize(node.depth + 1, 0);
    cost.branch_max[node.depth] = std::max(cost.branch_max[node.depth], 2U);

    stack.push_back(std::move(b));
    stack.push_back(std::move(a));
  }

  void emit_leaf(std::vector<Relation> relations) {
    std::sort(relations.begin(), relations.end(),
              [](const Relation& x, const Relation& y) { return x.head > y.head; });
    std::uint64_t heads = 0;
    for (const Relation& r : relations) heads |= Monomial::of(r.head).bits;
    TriangularSet set;
    set.relations = std::move(relations);
    for (unsigned v = 1; v <= n_; ++v) {
      if (!((heads >> (v - 1)) & 1U)) set.free_vars.push_back({v});
    }
    expand_solutions(set);
    if (opts_.keep_sets) result_.triangular_sets.push_back(std::move(set));
  }

  void expand_solutions(const TriangularSet& set) {
    if (result_.truncated) return;
    const std::size_t f = set.free_vars.size();
    for (std::uint64_t mask = 0; f >= 64 || mask < (std::uint64_t{1} << f); ++mask) {
      if (result_.solutions.size() >= opts_.cap) {
        result_.truncated = true;
        return;
      }
      Assignment a = 0;
      for (std::size_t k = 0; k < f; ++k) {
        if ((mask >> k) & 1U) a |= Monomial::of(set.free_vars[k]).bits;
      }
      // Tails only mention lower variables, so ascending heads resolve in order.
      for (auto it = set.relations.rbegin(); it != set.relations.rend(); ++it) {
        if (it->tail.eval(a)) a |= Monomial::of(it->head).bits;
      }
      result_.solutions.push_back(a);
      if (f >= 64 && mask == ~std::uint64_t{0}) return;
    }
  }

  unsigned n_;
  SolveOptions opts_;
  SolveResult result_;
};

Poly rename(const Poly& p, const Ordering& o) {
  BoolSystem one{o.size(), {p}};
  return apply_ordering(one, o).polys.front();
}

}  // namespace

SolveResult solve_all(const BoolSystem& s, const SolveOptions& opts) {
  if (opts.cap < 1) throw InputError("solution cap must be at least 1");
  if (s.n > kMaxVars) throw InputError("at most 64 variables are supported");
  return Solver(s.n, opts).run(s.polys);
}

SolveResult solve_with_ordering(const BoolSystem& s, const Ordering& o, const SolveOptions& opts) {
  SolveResult r = solve_all(apply_ordering(s, o), opts);
  const Ordering back = o.inverse();
  for (Assignment& a : r.solutions) a = pull_back(a, o);
  std::sort(r.solutions.begin(), r.solutions.end());
  for (TriangularSet& set : r.triangular_sets) {
    for (Relation& rel : set.relations) {
      rel.head = {back.position(rel.head.index)};
      rel.tail = rename(rel.tail, back);
    }
    for (VarId& v : set.free_vars) v = {back.position(v.index)};
    std::sort(set.free_vars.begin(), set.free_vars.end());
  }
  return r;
}

std::string format_bits(Assignment a, unsigned n) {
  std::string out(n, '0');
  for (unsigned i = 0; i < n; ++i) {
    if ((a >> i) & 1U) out[i] = '1';
  }
  return out;
}

std::string solve_result_to_json(const SolveResult& r, bool emit_sets, bool include_wall) {
  nlohmann::ordered_json doc;
  auto& sols = doc["solutions"] = nlohmann::ordered_json::array();
  for (const Assignment a : r.solutions) sols.push_back(format_bits(a, r.n));
  doc["truncated"] = r.truncated;
  if (emit_sets) {
    auto& sets = doc["triangular_sets"] = nlohmann::ordered_json::array();
    for (const TriangularSet& t : r.triangular_sets) {
      nlohmann::ordered_json js;
      auto& rels = js["relations"] = nlohmann::ordered_json::array();
      for (const Relation& rel : t.relations) {
        const std::string head = "x" + std::to_string(rel.head.index);
        rels.push_back(rel.tail.is_zero() ? head : head + " + " + format_poly(rel.tail));
      }
      auto& fv = js["free_vars"] = nlohmann::ordered_json::array();
      for (const VarId v : t.free_vars) fv.push_back(v.index);
      sets.push_back(std::move(js));
    }
  }
  nlohmann::ordered_json cost;
  cost["node_count"] = r.cost.node_count;
  cost["leaf_count"] = r.cost.leaf_count;
  cost["op_count"] = r.cost.op_count;
  if (include_wall) cost["wall_ms"] = r.cost.wall_ms;
  cost["branch_max"] = r.cost.branch_max;
  doc["cost"] = std::move(cost);
  return doc.dump();
}

}  // namespace bcsorder
