#pragma once

#include "presslens/corpus.hpp"
#include "presslens/gns.hpp"

namespace presslens::cases {

/// Potential flow on (-1, 1)^2 with G = (-1/2, 1/2)^2 = U, times [0, 2], a = 1, f = 0.
GnsProblem potential_flow(int n, int M);

/// Taylor-Green vortex on (0, pi)^2 with G = (pi/4, 3pi/4)^2 = U, times [0, T], f = 0.
/// n must be a multiple of 4 so that G is a union of cells.
GnsProblem taylor_green(int n, int M, double viscosity = 1.0, double T = 1.0);

}  // namespace presslens::cases
