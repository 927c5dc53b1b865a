#include "chipfire/reduce.hpp"

#include "../support.hpp"
#include "doctest.h"

using namespace chipfire;
using testutil::rat;

namespace {

Graph ex1() {
  return Graph::parse("base a\nedge a b 1/2\nedge b c 1/3\n");
}

}  // namespace

TEST_CASE("worked example: two-phase reduction on the 1/2-1/3 path") {
  Graph g = ex1();
  Divisor d = Divisor::parse(g, "b -1\nc 1\n");  // values (0, -1/6, 1/3)
  ReductionResult res = reduce_divisor(d);
  CHECK(res.reduced.value(0) == rat(0));
  CHECK(res.reduced.value(1) == rat(1, 6));
  CHECK(res.reduced.value(2) == rat(0));
  CHECK(res.firing(0) == 0);
  CHECK(res.firing(1) == 0);
  CHECK(res.firing(2) == 1);
  CHECK(res.phase1_rounds == 1);
  CHECK(res.phase2_fires == 2);
  CHECK(apply_firing(d, res.firing) == res.reduced);
  CHECK(testutil::is_reduced_brute(res.reduced, g.base()));
}

TEST_CASE("phase 1 clears deficits off the base") {
  Graph g = ex1();
  Divisor d = Divisor::parse(g, "a -2\nb -3\nc -1\n");
  auto [fixed, f] = make_nonneg_off_base(d);
  // the sweep fires balls around the base, so f peaks there (no normalization)
  for (int x = 0; x < g.order(); ++x) CHECK(f(x) <= f(g.base()));
  for (int x = 0; x < g.order(); ++x)
    if (x != g.base()) CHECK(fixed.value(x).sign() >= 0);
  CHECK(apply_firing(d, f) == fixed);
  CHECK(fixed.degree() == d.degree());
}

TEST_CASE("burning test separates reduced from unreduced") {
  Graph g = ex1();
  Divisor reduced = Divisor::parse(g, "b 1\n");
  CHECK(dhar_burnt_set(reduced) == std::vector<int>{0, 1, 2});

  // enough value at b and c survives a fire from a: {b, c} stays unburnt
  Divisor fat = Divisor::parse(g, "b 4\nc 2\n");
  CHECK(dhar_burnt_set(fat) == std::vector<int>{0});

  Divisor neg = Divisor::parse(g, "b -1\n");
  CHECK_THROWS_AS(dhar_burnt_set(neg), ValidationError);
}

TEST_CASE("reduction properties over a random corpus") {
  SplitMix64 rng(41);
  for (int t = 0; t < 120; ++t) {
    Graph g = testutil::random_connected_graph(rng, 2, 6);
    Divisor d = testutil::random_divisor(rng, g, 5);
    ReductionResult res = reduce_divisor(d);

    // witness and normalization
    CHECK(res.firing(g.base()) == 0);
    CHECK(apply_firing(d, res.firing) == res.reduced);

    // (P1): nonnegative off the base; (P2): every base-avoiding set burns
    if (g.order() <= 10) CHECK(testutil::is_reduced_brute(res.reduced, g.base()));
    CHECK(dhar_burnt_set(res.reduced).size() == static_cast<std::size_t>(g.order()));

    // idempotence
    ReductionResult again = reduce_divisor(res.reduced);
    CHECK(again.reduced == res.reduced);
    for (int x = 0; x < g.order(); ++x) CHECK(again.firing(x) == 0);

    // the reduced form is a class invariant
    FiringFunction f(g.order());
    for (int x = 0; x < g.order(); ++x)
      f(x) = Int(static_cast<long>(rng.below(7)) - 3);
    CHECK(reduce_divisor(apply_firing(d, f)).reduced == res.reduced);
  }
}

TEST_CASE("scrambled schedules land on the same reduced divisor") {
  SplitMix64 rng(42);
  for (int t = 0; t < 60; ++t) {
    Graph g = testutil::random_connected_graph(rng, 2, 6);
    Divisor d = testutil::random_divisor(rng, g, 5);
    Divisor expected = reduce_divisor(d).reduced;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      ReductionResult res = reduce_divisor_randomized(d, rng.next());
      CHECK(res.reduced == expected);
      CHECK(apply_firing(d, res.firing) == res.reduced);
      (void)seed;
    }
  }
}

TEST_CASE("reduction at a non-default base") {
  Graph g = ex1();
  Divisor d = Divisor::parse(g, "a 1\nb -2\n");
  ReductionResult res = reduce_divisor(d, 2);
  CHECK(res.firing(2) == 0);
  for (int x = 0; x < 3; ++x)
    if (x != 2) CHECK(res.reduced.value(x).sign() >= 0);
  CHECK(testutil::is_reduced_brute(res.reduced, 2));
  CHECK_THROWS_AS(reduce_divisor(d, 7), ValidationError);
}

TEST_CASE("winnability: reduced test, brute test, class invariance") {
  Graph g = ex1();
  CHECK(is_winnable(Divisor::parse(g, "b 1\n")));
  CHECK_FALSE(is_winnable(Divisor::parse(g, "b -1\n")));
  CHECK(is_winnable(Divisor::parse(g, "b 1\n"), WinnableMode::brute));
  CHECK_FALSE(is_winnable(Divisor::parse(g, "b -1\n"), WinnableMode::brute));

  // winnable iff the reduced form is nonnegative at the base, so any
  // equivalent divisor answers the same
  SplitMix64 rng(43);
  for (int t = 0; t < 50; ++t) {
    Graph h = testutil::random_connected_graph(rng, 2, 5);
    Divisor d = testutil::random_divisor(rng, h, 3);
    bool w = is_winnable(d);
    FiringFunction f(h.order());
    for (int x = 0; x < h.order(); ++x)
      f(x) = Int(static_cast<long>(rng.below(5)) - 2);
    CHECK(is_winnable(apply_firing(d, f)) == w);
    if (w) CHECK(d.degree().sign() >= 0);  // effective divisors have deg >= 0
  }

  Graph big = testutil::random_connected_graph(rng, 6, 6);
  CHECK_THROWS_AS(is_winnable(Divisor(big), WinnableMode::brute), ValidationError);
}
