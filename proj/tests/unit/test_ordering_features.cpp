#include <map>
#include <numeric>

#include "bcsorder/errors.hpp"
#include "bcsorder/features.hpp"
#include "bcsorder/instances.hpp"
#include "bcsorder/ordering.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace bcsorder;

namespace {

const char* kWorkedExample = "# vars: 5\nx1*x2 + x3 + 1\nx2*x4 + x5\nx1 + x4 + x5\n";

}  // namespace

TEST_SUITE("ordering") {
  TEST_CASE("construction validates a bijection") {
    CHECK_NOTHROW(Ordering({2, 1, 3}));
    CHECK_THROWS_AS(Ordering({1, 1, 3}), InputError);
    CHECK_THROWS_AS(Ordering({0, 1, 2}), InputError);
    CHECK_THROWS_AS(Ordering({1, 2, 4}), InputError);
  }

  TEST_CASE("swap_neighbor") {
    const Ordering id4 = Ordering::identity(4);
    const Ordering s = swap_neighbor(id4, 1, 3);
    CHECK(std::vector<unsigned>(s.perm().begin(), s.perm().end()) == std::vector<unsigned>{3, 2, 1, 4});
    CHECK(swap_neighbor(s, 1, 3) == id4);
    CHECK_THROWS_AS(swap_neighbor(id4, 2, 2), InputError);
    CHECK_THROWS_AS(swap_neighbor(id4, 0, 2), InputError);
    CHECK_THROWS_AS(swap_neighbor(id4, 1, 5), InputError);
  }

  TEST_CASE("inverse") {
    const Ordering o = random_ordering(9, 4);
    const Ordering inv = o.inverse();
    for (unsigned i = 1; i <= 9; ++i) CHECK(inv.position(o.position(i)) == i);
  }

  TEST_CASE("random orderings are uniform over S_4") {
    std::map<std::vector<unsigned>, int> counts;
    constexpr int kDraws = 60000;
    for (int i = 0; i < kDraws; ++i) {
      const Ordering o = random_ordering(4, static_cast<std::uint64_t>(i));
      ++counts[std::vector<unsigned>(o.perm().begin(), o.perm().end())];
    }
    CHECK(counts.size() == 24);
    for (const auto& [perm, c] : counts) {
      CHECK(std::abs(static_cast<double>(c) / kDraws - 1.0 / 24.0) <= 0.005);
    }
  }

  TEST_CASE("json round-trip") {
    const Ordering o = random_ordering(7, 9);
    CHECK(ordering_from_json(ordering_to_json(o)) == o);
    CHECK_THROWS(ordering_from_json("[1, 1]"));
  }
}

TEST_SUITE("features") {
  TEST_CASE("spectrum of the worked example") {
    const Spectrum f = spectrum(parse_system(kWorkedExample));
    const std::vector<double> expect{2.0 / 9, 2.0 / 9, 1.0 / 9, 2.0 / 9, 2.0 / 9};
    REQUIRE(f.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) CHECK(f[i] == doctest::Approx(expect[i]).epsilon(1e-15));
  }

  TEST_CASE("degenerate spectra") {
    CHECK(spectrum(parse_system("# vars: 1\nx1\n")) == Spectrum{1.0});
    CHECK(spectrum(parse_system("# vars: 3\n1\n")) == Spectrum{0.0, 0.0, 0.0});
    CHECK(spectrum(BoolSystem{2, {}}) == Spectrum{0.0, 0.0});
  }

  TEST_CASE("apply_ordering renames variables") {
    const BoolSystem s = parse_system("# vars: 2\nx1*x2 + x1\n");
    const BoolSystem swapped = apply_ordering(s, swap_neighbor(Ordering::identity(2), 1, 2));
    CHECK(swapped == parse_system("# vars: 2\nx1*x2 + x2\n"));
    CHECK(apply_ordering(s, Ordering::identity(2)) == s);
    CHECK_THROWS_AS(apply_ordering(s, Ordering::identity(3)), InputError);
  }

  TEST_CASE("spectrum is permutation-equivariant") {
    Rng rng(12);
    for (int trial = 0; trial < 200; ++trial) {
      const auto n = 2 + static_cast<unsigned>(uniform_below(rng, 12));
      BoolSystem s{n, {}};
      for (int i = 0; i < 5; ++i) s.polys.push_back(testing::random_poly(rng, n, 5));
      const Ordering o = random_ordering(n, rng());
      const Spectrum direct = spectrum(apply_ordering(s, o));
      const Spectrum moved = permute_spectrum(spectrum(s), o);
      REQUIRE(direct.size() == moved.size());
      for (std::size_t i = 0; i < n; ++i) CHECK(direct[i] == doctest::Approx(moved[i]).epsilon(1e-15));
    }
  }

  TEST_CASE("spectrum entries are a distribution") {
    Rng rng(13);
    for (int trial = 0; trial < 100; ++trial) {
      const auto n = 1 + static_cast<unsigned>(uniform_below(rng, 12));
      BoolSystem s{n, {testing::nonconstant_poly(rng, n, 4)}};
      const Spectrum f = spectrum(s);
      CHECK(std::all_of(f.begin(), f.end(), [](double v) { return v >= 0.0; }));
      CHECK(std::abs(std::accumulate(f.begin(), f.end(), 0.0) - 1.0) <= 1e-12);
    }
  }

  TEST_CASE("renaming preserves the solution count") {
    Rng rng(14);
    for (int trial = 0; trial < 50; ++trial) {
      const auto n = 2 + static_cast<unsigned>(uniform_below(rng, 9));
      BoolSystem s{n, {}};
      for (int i = 0; i < 3; ++i) s.polys.push_back(testing::random_poly(rng, n, 4));
      const Ordering o = random_ordering(n, rng());
      const auto before = brute_force_solve(s);
      const auto after = brute_force_solve(apply_ordering(s, o));
      CHECK(before.size() == after.size());
      std::vector<Assignment> mapped;
      for (const Assignment a : after) mapped.push_back(pull_back(a, o));
      std::sort(mapped.begin(), mapped.end());
      CHECK(mapped == before);
    }
  }
}
