#pragma once

#include <cstddef>

#include "codes.hpp"
#include "gf2.hpp"
#include "rng.hpp"

namespace bbq {

struct ErasureSample {
    BitVec erased;  ///< 1 = location flagged as erased
    BitVec e_x;     ///< X-error support, subset of erased
    BitVec e_z;     ///< Z-error support, subset of erased
};

/// Draw order: one erasure coin per qubit 0..n-1, then one X coin per erased
/// qubit in index order, then one Z coin per erased qubit in index order.
ErasureSample sample_erasure(std::size_t n, double p, Rng& rng);

struct Syndromes {
    BitVec syn_x;  ///< hz * e_x
    BitVec syn_z;  ///< hx * e_z
};

Syndromes syndromes(const CssCode& code, const ErasureSample& sample);

}  // namespace bbq
