#pragma once

#include "chipfire/graph.hpp"

namespace chipfire {

/// Exact Gaussian elimination with partial pivoting by largest |pivot|.
/// Throws ValidationError when the matrix is singular.
VecQ solve_linear(MatQ a, VecQ b);

}  // namespace chipfire
