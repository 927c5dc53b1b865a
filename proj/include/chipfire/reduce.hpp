#pragma once

#include <cstdint>

#include "chipfire/divisor.hpp"

namespace chipfire {

struct ReductionResult {
  Divisor reduced;
  FiringFunction firing;  // reduced = apply_firing(input, firing), firing(base) = 0
  int phase1_rounds = 0;  // shell sweeps that actually fired
  int phase2_fires = 0;   // unburnt-set firing events
};

/// Phase 1: make every value off the base nonnegative by firing the balls
/// U_k = {x : d(base, x) < k} for k from the diameter down to 1, each just
/// often enough to clear the deficits on shell k. One sweep suffices because
/// firing U_k only moves value from shell k-1 to shell k.
/// Pass base = -1 to use the graph's own base vertex.
std::pair<Divisor, FiringFunction> make_nonneg_off_base(const Divisor& d, int base = -1);

/// Weighted burning test. Starting from {base}, a vertex burns as soon as its
/// value is smaller than the weight of its edges into the fire. Requires the
/// values off base to be nonnegative. Returns the burnt set (sorted); when it
/// is all of V the divisor is base-reduced.
std::vector<int> dhar_burnt_set(const Divisor& d, int base = -1);

/// Unique base-reduced representative of the divisor class, with the firing
/// function that realizes it and phase counters.
ReductionResult reduce_divisor(const Divisor& d, int base = -1);

/// Same reduced divisor through a scrambled schedule: random extra Phase-1
/// firings and random burn order / firing multiplicities in Phase 2.
/// Exercises the uniqueness of the reduced form.
ReductionResult reduce_divisor_randomized(const Divisor& d, std::uint64_t seed,
                                          int base = -1);

enum class WinnableMode { reduced, brute };

/// Whether the divisor class contains an effective divisor. `reduced` mode
/// reads the sign at the base of the reduced form; `brute` mode searches all
/// firing functions with f(base) = 0 and |f| <= bound (graphs with at most
/// 5 vertices only).
bool is_winnable(const Divisor& d, WinnableMode mode = WinnableMode::reduced,
                 int bound = 6, int base = -1);

}  // namespace chipfire
