#include <cmath>
#include <set>

#include "bcsorder/dataset.hpp"
#include "bcsorder/errors.hpp"
#include "bcsorder/features.hpp"
#include "bcsorder/instances.hpp"
#include "bcsorder/solver.hpp"
#include "doctest.h"
#include "json.hpp"
#include "support.hpp"

using namespace bcsorder;
using testing::parse_poly;

namespace {

std::set<Assignment> zeros_of(const std::vector<Poly>& ps, unsigned n) {
  std::set<Assignment> z;
  for (Assignment a = 0; a < (Assignment{1} << n); ++a) {
    bool all = true;
    for (const Poly& p : ps) all = all && !p.eval(a);
    if (all) z.insert(a);
  }
  return z;
}

// Packs (x1, x2, x3) into an assignment.
Assignment bits3(int x1, int x2, int x3) { return static_cast<Assignment>(x1 | (x2 << 1) | (x3 << 2)); }

std::vector<Assignment> expand(const TriangularSet& ts, unsigned n) {
  std::vector<Assignment> out;
  for (Assignment a = 0; a < (Assignment{1} << n); ++a) {
    bool ok = true;
    for (const Relation& r : ts.relations) {
      ok = ok && (Poly::var(r.head) + r.tail).eval(a) == false;
    }
    if (ok) out.push_back(a);
  }
  return out;
}

}  // namespace

TEST_SUITE("solver") {
  TEST_CASE("decomposition of x2*x3 + x1") {
    const Poly p = parse_poly("x2*x3 + x1", 3);
    const Decomposition d = decompose_step(p);
    CHECK(d.lead.index == 3);
    REQUIRE(d.branch_a.size() == 2);
    CHECK(d.branch_a[0] == parse_poly("x3 + x1", 3));
    CHECK(d.branch_a[1] == parse_poly("x2 + 1", 3));
    REQUIRE(d.branch_b.has_value());
    CHECK(*d.branch_b == std::vector<Poly>{parse_poly("x2", 3), parse_poly("x1", 3)});

    CHECK(zeros_of({p}, 3) == std::set<Assignment>{bits3(0, 0, 0), bits3(0, 1, 0), bits3(0, 0, 1), bits3(1, 1, 1)});
    CHECK(zeros_of(d.branch_a, 3) == std::set<Assignment>{bits3(0, 1, 0), bits3(1, 1, 1)});
    CHECK(zeros_of(*d.branch_b, 3) == std::set<Assignment>{bits3(0, 0, 0), bits3(0, 0, 1)});
  }

  TEST_CASE("monic polynomials have no second branch") {
    const Decomposition d = decompose_step(parse_poly("x1 + 1", 1));
    CHECK_FALSE(d.branch_b.has_value());
    CHECK(d.branch_a == std::vector<Poly>{parse_poly("x1 + 1", 1)});
    CHECK_THROWS_AS(decompose_step(Poly::one()), DomainError);
  }

  TEST_CASE("splits partition the zero set") {
    Rng rng(31);
    for (int trial = 0; trial < 300; ++trial) {
      const auto n = 1 + static_cast<unsigned>(uniform_below(rng, 10));
      const Poly p = testing::nonconstant_poly(rng, n, 1 + static_cast<unsigned>(uniform_below(rng, 7)));
      const Decomposition d = decompose_step(p);
      const auto a = zeros_of(d.branch_a, n);
      const auto b = d.branch_b ? zeros_of(*d.branch_b, n) : std::set<Assignment>{};
      std::set<Assignment> both = a;
      both.insert(b.begin(), b.end());
      CHECK(both.size() == a.size() + b.size());
      CHECK(both == zeros_of({p}, n));
    }
  }

  TEST_CASE("simplify") {
    WorkState s{{parse_poly("x1 + 1", 2), parse_poly("x1*x2 + x2", 2)}, {}};
    CHECK(simplify(s));
    CHECK(s.active.empty());
    REQUIRE(s.relations.size() == 1);
    CHECK(s.relations[0].head.index == 1);
    CHECK(s.relations[0].tail == Poly::one());

    WorkState c{{parse_poly("x1", 1), parse_poly("x1 + 1", 1)}, {}};
    CHECK_FALSE(simplify(c));

    WorkState z{{Poly{}, Poly{}}, {}};
    CHECK(simplify(z));
    CHECK(z.active.empty());
    CHECK(z.relations.empty());
  }

  TEST_CASE("simplify is idempotent") {
    Rng rng(32);
    for (int trial = 0; trial < 100; ++trial) {
      const auto n = 2 + static_cast<unsigned>(uniform_below(rng, 8));
      WorkState s;
      for (int i = 0; i < 4; ++i) s.active.push_back(testing::random_poly(rng, n, 3, 2));
      if (!simplify(s)) continue;
      WorkState again = s;
      CHECK(simplify(again));
      CHECK(again.active == s.active);
      CHECK(again.relations == s.relations);
    }
  }

  TEST_CASE("worked example has four solutions with x3 = 1") {
    const BoolSystem s = parse_system("# vars: 5\nx1*x2 + x3 + 1\nx2*x4 + x5\nx1 + x4 + x5\n");
    const SolveResult r = solve_all(s);
    CHECK(r.solutions.size() == 4);
    CHECK(r.solutions == brute_force_solve(s));
    for (const Assignment a : r.solutions) CHECK(((a >> 2) & 1) == 1);
    std::vector<std::string> text;
    for (const Assignment a : r.solutions) text.push_back(format_bits(a, 5));
    CHECK(text == std::vector<std::string>{"00100", "01100", "10110", "01111"});
  }

  TEST_CASE("trivial systems") {
    const SolveResult free2 = solve_all(BoolSystem{2, {}});
    CHECK(free2.solutions.size() == 4);
    const SolveResult contra = solve_all(parse_system("# vars: 3\n1\n"));
    CHECK(contra.solutions.empty());
    CHECK(contra.cost.leaf_count == 1);
  }

  TEST_CASE("agreement with brute force under random orderings") {
    for (unsigned i = 0; i < 100; ++i) {
      InstanceSpec spec;
      spec.n = 12;
      spec.m = 12;
      spec.density = density_for_terms(12, 2, 6.0);
      spec.planted = i % 3 != 0;
      spec.seed = 1000 + i;
      const BoolSystem s = gen_random_system(spec);
      const Ordering o = random_ordering(12, 77 + i);
      const SolveResult r = solve_with_ordering(s, o);
      REQUIRE(r.solutions == brute_force_solve(s));
      for (const Assignment a : r.solutions) {
        for (const Poly& p : s.polys) REQUIRE_FALSE(p.eval(a));
      }
    }
  }

  TEST_CASE("triangular sets are monic, triangular and disjoint") {
    for (unsigned i = 0; i < 40; ++i) {
      InstanceSpec spec;
      spec.n = 8 + i % 5;
      spec.m = spec.n / 2;
      spec.density = 0.2;
      spec.seed = 500 + i;
      const BoolSystem s = gen_random_system(spec);
      const SolveResult r = solve_all(s);
      std::set<Assignment> seen;
      std::size_t total = 0;
      for (const TriangularSet& ts : r.triangular_sets) {
        for (std::size_t k = 0; k + 1 < ts.relations.size(); ++k) {
          CHECK(ts.relations[k].head > ts.relations[k + 1].head);
        }
        for (const Relation& rel : ts.relations) {
          const Monomial sup = rel.tail.support();
          CHECK((sup.bits >> (rel.head.index - 1)) == 0);
          for (const VarId v : ts.free_vars) CHECK(v != rel.head);
        }
        const auto z = expand(ts, s.n);
        CHECK(z.size() == ts.solution_count());
        total += z.size();
        seen.insert(z.begin(), z.end());
      }
      CHECK(seen.size() == total);
      CHECK(std::vector<Assignment>(seen.begin(), seen.end()) == brute_force_solve(s));
    }
  }

  TEST_CASE("cost meter bounds and determinism") {
    for (unsigned i = 0; i < 30; ++i) {
      const BoolSystem s = gen_random_system(desk_instance(12, 40 + i));
      const SolveResult a = solve_all(s);
      const SolveResult b = solve_all(s);
      CHECK(a.cost.same_counts(b.cost));
      CHECK(a.solutions == b.solutions);
      CHECK(a.cost.node_count >= a.cost.leaf_count);
      double bound = 1.0;
      for (const unsigned f : a.cost.branch_max) bound *= f;
      CHECK(static_cast<double>(a.cost.leaf_count) <= bound);
      CHECK(solve_result_to_json(a, true, false) == solve_result_to_json(b, true, false));
    }
  }

  TEST_CASE("identity ordering reproduces solve_all") {
    const BoolSystem s = gen_random_system(desk_instance(12, 9));
    const SolveResult a = solve_all(s);
    const SolveResult b = solve_with_ordering(s, Ordering::identity(12));
    CHECK(a.solutions == b.solutions);
    CHECK(a.cost.same_counts(b.cost));
  }

  TEST_CASE("cost varies across orderings") {
    const BoolSystem s = gen_random_system(desk_instance(16, 3));
    std::vector<double> costs;
    for (unsigned o = 0; o < 50; ++o) {
      costs.push_back(static_cast<double>(
          solve_with_ordering(s, random_ordering(16, o), {.keep_sets = false}).cost.node_count));
    }
    const double mean = std::accumulate(costs.begin(), costs.end(), 0.0) / 50.0;
    double var = 0.0;
    for (const double c : costs) var += (c - mean) * (c - mean);
    CHECK(var > 0.0);
  }

  TEST_CASE("solution cap truncates") {
    const SolveResult r = solve_all(BoolSystem{10, {}}, {.cap = 100});
    CHECK(r.truncated);
    CHECK(r.solutions.size() == 100);
    const SolveResult full = solve_all(BoolSystem{10, {}});
    CHECK_FALSE(full.truncated);
    CHECK(full.solutions.size() == 1024);
  }

  TEST_CASE("json report shape") {
    const BoolSystem s = parse_system("# vars: 5\nx1*x2 + x3 + 1\nx2*x4 + x5\nx1 + x4 + x5\n");
    const auto j = nlohmann::json::parse(solve_result_to_json(solve_all(s), true));
    CHECK(j.at("solutions").size() == 4);
    CHECK(j.at("truncated") == false);
    CHECK(j.at("triangular_sets").is_array());
    for (const char* key : {"node_count", "leaf_count", "op_count", "wall_ms", "branch_max"}) {
      CHECK(j.at("cost").contains(key));
    }
    const auto no_wall = nlohmann::json::parse(solve_result_to_json(solve_all(s), false, false));
    CHECK_FALSE(no_wall.at("cost").contains("wall_ms"));
    CHECK_FALSE(no_wall.contains("triangular_sets"));
  }
}
