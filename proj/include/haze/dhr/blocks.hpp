#pragma once

#include "haze/core/nn.hpp"
#include "haze/dhr/patch.hpp"

namespace haze {

// conv -> activation, then channel attention and pixel attention; the
// attention-modulated features are added back onto the activated conv
// output.
class AttentionBlock : public Module {
  public:
    AttentionBlock(Rng& rng, int64_t channels, int64_t reduction = 8);
    Var forward(const Var& x) const;
    // sigma(fc2(relu(fc1(gap(x_act))))), exposed for tests
    Var channel_gates(const Var& x_act) const;
    Var pixel_gates(const Var& x_scaled) const;

    Conv2d conv;
    Linear ca_fc1, ca_fc2;
    Conv2d pa_conv1, pa_conv2;
};

// Four parallel dilated 3x3 convs (rates 1..4) whose widths sum back to the
// input channel count: n - 3*floor(n/10) plus three branches of floor(n/10).
class DilatedBlock : public Module {
  public:
    DilatedBlock(Rng& rng, int64_t channels, int64_t reduction = 8);
    Var forward(const Var& x) const;
    static std::array<int64_t, 4> branch_widths(int64_t channels);

    Conv2d br1, br2, br3, br4;
    AttentionBlock fuse;
};

// Dual spatial/frequency patch block with a per-patch sigmoid-gated
// adaptive residual:
//   P_spa = Conv(P) (x) FC(PAP(P))
//   P_fre = iFFT(FFT(P) (x) FC(PAP(P)))
//   w     = sigma(W * PAP(P_spa + P_fre))        (one scalar per patch)
//   out   = w * P + (1 - w) * (P_spa + P_fre)
class APRBlock : public Module {
  public:
    APRBlock(Rng& rng, int64_t channels, int64_t reduction = 8);
    Var forward(const Var& p) const;  // p: (NP, C, h, w)
    PatchGrid forward(const PatchGrid& g) const;
    // Per-patch fusion weights for a given input, exposed for tests and
    // the patch-weight visualization.
    Var fusion_weights(const Var& p) const;
    // P_spa + P_fre before the adaptive residual.
    Var branch_features(const Var& p) const;

    Conv2d spa_conv;
    Linear spa_fc1, spa_fc2;
    Linear fre_fc1, fre_fc2;
    Linear fusion;  // zero-initialized: starts at w = 0.5
};

// Per-patch two-stage encoder/decoder with APR at the skips and bottleneck,
// attention in the decoder, and a trailing dilated block on the
// recombined map. Shape preserving for any input size.
class APEBlock : public Module {
  public:
    APEBlock(Rng& rng, int64_t channels, int64_t reduction = 8);

    struct Trace {
        Tensor enc1, enc2;  // per-patch encoder features, pre-reversal
    };
    Var forward(const Var& x, int grid_n) const { return run(x, grid_n, nullptr); }
    Var forward_traced(const Var& x, int grid_n, Trace* trace) const {
        return run(x, grid_n, trace);
    }

    Conv2d enc1, enc2;
    APRBlock apr_skip0, apr_skip1, apr_bottom;
    ConvTranspose2d up1, up2;
    Conv2d fuse1, fuse2;
    AttentionBlock attn1, attn2;
    DilatedBlock tail;

  private:
    Var run(const Var& x, int grid_n, Trace* trace) const;
};

}  // namespace haze
