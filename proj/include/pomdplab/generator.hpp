#pragma once

#include <cstdint>

#include "pomdplab/model.hpp"

namespace pomdplab {

enum class GenStructure { NoisyPermutation, Random };

/// Seeded fixture generator (returns the sink-free core model).
///
/// noisy-permutation: Ob_h = (1-eta) * (injection) + eta * (uniform
/// column) with eta = 1 - gamma_target, so the uniform component
/// annihilates sum-zero vectors and the observability margin equals
/// gamma_target exactly (requires O >= S). random: all tables are drawn
/// stochastic and rejection-sampled until every step's margin reaches
/// gamma_target.
PomdpModel generate_model(int S, int A, int O, int H, double gamma_target,
                          GenStructure structure, std::uint64_t seed, int rejection_budget = 500);

}  // namespace pomdplab
