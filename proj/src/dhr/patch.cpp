#include "haze/dhr/patch.hpp"

namespace haze {

PatchGrid partition(const Var& x, int n) {
    if (n < 1) throw InvalidParameter("partition: n must be >= 1");
    const Tensor& xv = x.val();
    if (xv.ndim() != 4) throw InvalidInput("partition: expected (B,C,H,W) input");
    PatchGrid g;
    g.grid_n = n;
    g.batch = xv.dim(0);
    g.channels = xv.dim(1);
    g.height = xv.dim(2);
    g.width = xv.dim(3);
    g.pad_h = (n - g.height % n) % n;
    g.pad_w = (n - g.width % n) % n;
    Var padded = (g.pad_h || g.pad_w) ? reflection_pad2d(x, 0, g.pad_h, 0, g.pad_w) : x;
    g.data = tile_patches(padded, n);
    return g;
}

Var reassemble(const PatchGrid& g) {
    if (!g.data.defined()) throw InvalidInput("reassemble: empty grid");
    const Tensor& dv = g.data.val();
    if (dv.ndim() != 4 ||
        dv.dim(0) != static_cast<int64_t>(g.grid_n) * g.grid_n * g.batch ||
        dv.dim(1) != g.channels ||
        dv.dim(2) * g.grid_n != g.height + g.pad_h ||
        dv.dim(3) * g.grid_n != g.width + g.pad_w)
        throw InvalidInput("reassemble: grid metadata does not match data shape");
    Var full = untile_patches(g.data, g.grid_n);
    if (g.pad_h || g.pad_w) full = crop2d(full, 0, 0, g.height, g.width);
    return full;
}

Var patch_average_pool(const PatchGrid& g) {
    if (!g.data.defined()) throw InvalidInput("patch_average_pool: empty grid");
    return global_avg_pool(g.data);
}

}  // namespace haze
