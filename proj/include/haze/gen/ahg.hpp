#pragma once

#include "haze/core/nn.hpp"
#include "haze/core/optim.hpp"
#include "haze/noise/perlin.hpp"

namespace haze {

enum class DensitySource { EncodedFromClear, EncodedFromHazy, Blended, Modulated };

// Single-channel haze concentration field paired with one image.
struct DensityMap {
    Tensor values;  // (1,H,W), in [0,1]
    DensitySource source = DensitySource::EncodedFromClear;
};

struct AhgConfig {
    int64_t base_width = 32;
    int64_t disc_width = 64;
    double lambda1 = 1.0;  // clear reconstruction weight
    double lambda2 = 0.1;  // adversarial weight

    void validate() const;
};

// Conv-ReLU-Conv with a residual add.
class ResBlock : public Module {
  public:
    ResBlock(Rng& rng, int64_t channels);
    Var forward(const Var& x) const;
    Conv2d c1, c2;
};

// Compact U-Net trunk: two stride-2 downsampling and two upsampling stages,
// two residual blocks after every resampling, skip connections. Emits a
// full-resolution feature map of base_width channels.
class AhgUNet : public Module {
  public:
    AhgUNet(Rng& rng, int64_t in_ch, int64_t width);
    Var forward(const Var& x) const;

    Conv2d stem, down1, down2;
    ResBlock r1a, r1b, r2a, r2b;
    ConvTranspose2d up1, up2;
    Conv2d skip1, skip2;
    ResBlock u1a, u1b, u2a, u2b;
};

// clear (+) hazy -> (M_c, M_h); two sigmoid heads over a shared trunk.
class AHGEncoder : public Module {
  public:
    AHGEncoder(Rng& rng, int64_t width);
    // inputs (N,3,H,W); outputs two (N,1,H,W) maps in [0,1]
    std::pair<Var, Var> forward(const Var& clear, const Var& hazy) const;

    AhgUNet trunk;
    Conv2d head_clear, head_hazy;
};

// clear (+) density -> 3-channel image in [0,1].
class AHGDecoder : public Module {
  public:
    AHGDecoder(Rng& rng, int64_t width);
    Var forward(const Var& clear, const Var& density) const;

    AhgUNet trunk;
    Conv2d head;
};

// 70x70-receptive-field patch discriminator for the least-squares GAN term.
class PatchDiscriminator : public Module {
  public:
    PatchDiscriminator(Rng& rng, int64_t width);
    Var forward(const Var& x) const;

    Conv2d c1, c2, c3, c4, c5;
};

class AHGModel {
  private:
    AhgConfig config_;
    Rng init_rng_;  // consumed by the members below, in order

  public:
    AHGModel(const AhgConfig& cfg, uint64_t seed);

    AHGEncoder encoder;
    AHGDecoder decoder;
    PatchDiscriminator discriminator;

    const AhgConfig& config() const { return config_; }
    std::vector<Var> generator_parameters() const;
};

// Convenience single-image wrappers around the batched encoder/decoder.
std::pair<DensityMap, DensityMap> encode(const AHGModel& model, const Tensor& clear,
                                         const Tensor& hazy);
Tensor decode(const AHGModel& model, const Tensor& clear, const DensityMap& density);

// alpha*m_c + (1-alpha)*m_h, clamped to [0,1] (the clamp only acts when
// alpha leaves [0,1]).
DensityMap blend_density(const DensityMap& m_c, const DensityMap& m_h, double alpha);

// Elementwise product with a positive multiplier field, clamped to [0,1].
DensityMap modulate_density(const DensityMap& m, const NoiseField& field);

struct AhgLossRecord {
    double l1_hazy = 0.0;
    double l1_clear = 0.0;
    double adv_g = 0.0;
    double adv_d = 0.0;
    double total = 0.0;  // generator objective
};

// One generator + one discriminator update on a paired batch.
AhgLossRecord ahg_train_step(AHGModel& model, const Var& clear_batch, const Var& hazy_batch,
                             Adam& gen_opt, Adam& disc_opt, double lr);

struct HazeSynthesisSpec {
    double alpha = 0.5;
    PerlinParams perlin;
    bool enable_modulation = true;
};

// blend -> optional Perlin modulation -> decode.
Tensor synthesize(const AHGModel& model, const Tensor& clear, const DensityMap& m_c,
                  const DensityMap& m_h, const HazeSynthesisSpec& spec);

}  // namespace haze
