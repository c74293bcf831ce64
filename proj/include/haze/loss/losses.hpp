#pragma once

#include "haze/loss/extractor.hpp"

namespace haze {

// Anchor / positive / weighted negatives for the multi-negative
// contrastive loss. Weights default to 1 for real hazy negatives and 0.5
// for generated ones.
struct ContrastBatch {
    Var anchor;
    Var positive;
    std::vector<Var> negatives;
    std::vector<double> weights;

    void validate() const;
};

// Differentiable multi-scale SSIM, canonical 5-scale weights, Gaussian
// window 11 / sigma 1.5. Scales reduce automatically (with a one-time
// warning) when the image is too small; the remaining weights are
// renormalized. Value in [0,1] for nonnegative inputs.
Var ms_ssim(const Var& pred, const Var& target);
int ms_ssim_scales(int64_t height, int64_t width);

// ||E(a)-E(x)||_1 + ||F(a)-F(x)||_1, each term mean-reduced per element and
// summed over extractor taps.
Var pair_contrast(const Var& a, const Var& x, const FeatureExtractor& fe);

// L(A,P) / (L(A,P) + sum_i w_i * L(A,N_i))
Var mncd(const ContrastBatch& batch, const FeatureExtractor& fe);

// The same ratio on already-computed distances (stub-distance form).
double mncd_ratio(double positive_distance, const std::vector<double>& negative_distances,
                  const std::vector<double>& weights);

struct JointLossWeights {
    double lambda1 = 1.0;   // smooth L1
    double lambda2 = 0.5;   // 1 - MS-SSIM
    double lambda3 = 0.05;  // MNCD
    double smooth_l1_beta = 1.0;
};

struct JointLossResult {
    Var total;
    double smooth_l1 = 0.0;
    double ms_ssim_term = 0.0;  // 1 - MS-SSIM
    double mncd = 0.0;
};

// lambda1 * SmoothL1 + lambda2 * (1 - MS-SSIM) + lambda3 * MNCD.
// Pass contrast = nullptr (or lambda3 = 0) to drop the contrastive term.
JointLossResult joint_loss(const Var& pred, const Var& target, const ContrastBatch* contrast,
                           const FeatureExtractor* fe, const JointLossWeights& weights);

}  // namespace haze
