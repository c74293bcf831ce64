#pragma once

#include "haze/core/nn.hpp"

namespace haze {

// Frozen perceptual feature extractor for the contrastive loss: three
// conv stages with taps after each stage, plus an FFT-based frequency
// representation. The default is a small fixed-seed random network so the
// test suite and desk-scale runs need no pretrained weights; real weights
// in the same topology can be loaded from a checkpoint.
class FeatureExtractor : public Module {
  public:
    explicit FeatureExtractor(uint64_t seed = 0x5EEDF00D,
                              std::vector<int64_t> stage_widths = {8, 16, 24});

    // Taps after the last activation of each stage, shallowest first.
    std::vector<Var> spatial_features(const Var& x) const;

    // Real and imaginary FFT parts stacked along channels.
    static Var frequency_features(const Var& x);

    void load_weights(const std::string& checkpoint_path);

  private:
    std::vector<std::unique_ptr<Conv2d>> convs_;  // two per stage
    size_t stages_ = 0;
};

}  // namespace haze
