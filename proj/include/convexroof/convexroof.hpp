#pragma once

// Convex-roof entanglement measures via constrained optimization on the
// complex Stiefel manifold: two independent optimizers (geodesic conjugate
// gradient on U(k); quasi-Newton over Euler-Hurwitz angles), a bundle of
// pure-state monotones with analytic gradients, and spin-ring applications.

#include "convexroof/convex_roof.hpp"
#include "convexroof/density.hpp"
#include "convexroof/ensembles.hpp"
#include "convexroof/euler_hurwitz.hpp"
#include "convexroof/io.hpp"
#include "convexroof/linalg.hpp"
#include "convexroof/measures.hpp"
#include "convexroof/optim.hpp"
#include "convexroof/spin_ring.hpp"
#include "convexroof/stiefel_cg.hpp"
#include "convexroof/types.hpp"
