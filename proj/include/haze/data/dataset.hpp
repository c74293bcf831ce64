#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "haze/core/rng.hpp"
#include "haze/core/tensor.hpp"

namespace haze {

// Probability of drawing a synthesized sample, decaying linearly from
// p_start at epoch 0 to p_end at the final epoch.
struct AugmentSchedule {
    double p_start = 0.5;
    double p_end = 0.1;

    void validate() const;
    double probability(int64_t epoch, int64_t total_epochs) const;
};

// root/{hazy,clear}/*.png, pairs matched by filename.
class PairedDataset {
  public:
    explicit PairedDataset(std::string root);

    size_t size() const { return names_.size(); }
    const std::string& name(size_t index) const { return names_.at(index); }
    // (hazy, clear), both (3,H,W) in [0,1] and identically sized.
    std::pair<Tensor, Tensor> load_pair(size_t index) const;

  private:
    std::string root_;
    std::vector<std::string> names_;
};

Tensor resize_bilinear(const Tensor& image, int64_t out_h, int64_t out_w);

// Identical random crop on both images with side a multiple of `target`
// (bounded by the image), then bilinear resize to target x target. Images
// smaller than `target` are resized up with a warning.
std::pair<Tensor, Tensor> random_crop_resize(const Tensor& hazy, const Tensor& clear, Rng& rng,
                                             int64_t target = 256);

// One training draw: with probability p(epoch) the input is synthesized
// from the clear image, otherwise the real hazy input is used. Negatives
// follow the contrastive policy: the instance's own real hazy input
// (weight 1) plus synthesized variants (weight 0.5) up to n_negatives.
struct TrainingItem {
    Tensor input, target;  // target is always the clear image
    std::vector<Tensor> negatives;
    std::vector<double> negative_weights;
    bool synthesized = false;
    size_t pair_index = 0;
};

using HazySynthesizer =
    std::function<Tensor(const Tensor& clear, const Tensor& hazy, Rng& rng)>;

TrainingItem sample_training_item(int64_t epoch, int64_t total_epochs,
                                  const AugmentSchedule& schedule, const PairedDataset& dataset,
                                  const HazySynthesizer* synthesizer, int n_negatives, Rng& rng);

// I = J*t + A*(1-t) with t = exp(-beta*depth); depth is (H,W), image (3,H,W).
Tensor apply_atmospheric_scattering(const Tensor& clear, const Tensor& depth, double beta,
                                    const std::array<double, 3>& airlight);

// Procedural clear/hazy pairs at `size` pixels: synthetic scenes with a
// depth field, hazed via the atmospheric scattering model. Writes
// root/{hazy,clear}/pair_XXX.png and meta.json with beta, airlight and
// seed per image. Deterministic in `seed`.
void generate_micro_dataset(int n_pairs, const std::string& out_dir, uint64_t seed,
                            int size = 128);

}  // namespace haze
