#pragma once

#include "haze/core/ops.hpp"

namespace haze {

// Non-overlapping n x n tiling folded into the batch dimension, plus the
// metadata needed for an exact inverse. Sample order is b*n^2 + pi*n + pj.
struct PatchGrid {
    Var data;  // (n^2*B, C, ph, pw)
    int grid_n = 1;
    int64_t batch = 0, channels = 0;
    int64_t height = 0, width = 0;  // pre-padding spatial size
    int64_t pad_h = 0, pad_w = 0;
};

// Reflection-pads H,W up to multiples of n, then tiles.
PatchGrid partition(const Var& x, int n);

// Exact inverse of partition, including pad removal.
Var reassemble(const PatchGrid& g);

// Spatial mean per patch and channel: (n^2*B, C).
Var patch_average_pool(const PatchGrid& g);

}  // namespace haze
