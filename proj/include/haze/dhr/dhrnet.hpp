#pragma once

#include "haze/dhr/blocks.hpp"

namespace haze {

struct DHRConfig {
    int64_t base_width = 50;  // tuned so the default lands near 14M parameters
    int patch_size = 32;      // APE grid: n = round(min(H,W) / patch_size)
    bool use_ape = true;      // false swaps APE blocks for plain attention
    int64_t attn_reduction = 8;

    void validate() const;
};

// U-Net dehazer: three stride-2 downsampling and three upsampling stages,
// dilated block after every resampling, APE at the first-down and last-up
// stages, attention elsewhere, encoder-decoder skips, sigmoid output.
class DHRNet : public Module {
  private:
    // declared first: members below consume it in declaration order
    Rng init_rng_;
    DHRConfig cfg_;

  public:
    DHRNet(const DHRConfig& cfg, uint64_t seed);

    // (N,3,H,W) in [0,1] -> dehazed (N,3,H,W) in [0,1]; any H,W >= 1.
    Var forward(const Var& x) const;

    int grid_for(int64_t height, int64_t width) const;
    const DHRConfig& config() const { return cfg_; }

    Conv2d stem;
    Conv2d down1, down2, down3;
    DilatedBlock dil_d1, dil_d2, dil_d3;
    AttentionBlock attn_d2, attn_d3, mid;
    ConvTranspose2d up3, up2, up1;
    Conv2d fuse3, fuse2, fuse1;
    DilatedBlock dil_u3, dil_u2, dil_u1;
    AttentionBlock attn_u3, attn_u2;
    Conv2d head;
    std::unique_ptr<APEBlock> ape_first, ape_last;          // use_ape == true
    std::unique_ptr<AttentionBlock> alt_first, alt_last;    // use_ape == false
};

int64_t count_parameters(const Module& m);
// Analytic multiply-accumulate count of one forward pass at the given size.
int64_t count_macs(const DHRNet& net, int64_t height, int64_t width);

}  // namespace haze
