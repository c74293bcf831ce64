#include "haze/loss/losses.hpp"

#include <atomic>
#include <cmath>
#include <iostream>

namespace haze {

namespace {
constexpr double kC1 = 0.01 * 0.01;  // (K1*L)^2, L = 1
constexpr double kC2 = 0.03 * 0.03;
constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kMsSsimWeights[5] = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
constexpr double kEps = 1e-6;

struct SsimMaps {
    Var luminance;  // (2 mx my + C1) / (mx^2 + my^2 + C1)
    Var contrast;   // (2 sxy + C2) / (sxx + syy + C2)
};

SsimMaps ssim_maps(const Var& x, const Var& y) {
    Var mx = gaussian_blur_valid(x, kWindow, kSigma);
    Var my = gaussian_blur_valid(y, kWindow, kSigma);
    Var mxx = mul(mx, mx);
    Var myy = mul(my, my);
    Var mxy = mul(mx, my);
    Var sxx = sub(gaussian_blur_valid(mul(x, x), kWindow, kSigma), mxx);
    Var syy = sub(gaussian_blur_valid(mul(y, y), kWindow, kSigma), myy);
    Var sxy = sub(gaussian_blur_valid(mul(x, y), kWindow, kSigma), mxy);
    SsimMaps maps;
    maps.luminance = div(add_scalar(mul_scalar(mxy, 2.0), kC1), add_scalar(add(mxx, myy), kC1));
    maps.contrast = div(add_scalar(mul_scalar(sxy, 2.0), kC2), add_scalar(add(sxx, syy), kC2));
    return maps;
}
}  // namespace

int ms_ssim_scales(int64_t height, int64_t width) {
    int scales = 0;
    int64_t side = std::min(height, width);
    while (scales < 5 && side >= kWindow) {
        ++scales;
        side /= 2;
    }
    return scales;
}

Var ms_ssim(const Var& pred, const Var& target) {
    if (!pred.val().same_shape(target.val())) throw InvalidInput("ms_ssim: shape mismatch");
    if (pred.val().ndim() != 4) throw InvalidInput("ms_ssim: expected (N,C,H,W)");
    const int scales = ms_ssim_scales(pred.dim(2), pred.dim(3));
    if (scales < 1)
        throw InvalidInput("ms_ssim: image smaller than the " + std::to_string(kWindow) +
                           "-pixel window");
    if (scales < 5) {
        static std::atomic<bool> warned{false};
        if (!warned.exchange(true))
            std::cerr << "ms_ssim: input supports only " << scales
                      << " of 5 scales; weights renormalized\n";
    }
    double weight_sum = 0.0;
    for (int j = 0; j < scales; ++j) weight_sum += kMsSsimWeights[j];

    Var x = pred, y = target;
    Var value;
    for (int j = 0; j < scales; ++j) {
        const double wj = kMsSsimWeights[j] / weight_sum;
        SsimMaps maps = ssim_maps(x, y);
        Var cs = pow_scalar(clamp_min(mean_all(maps.contrast), kEps), wj);
        value = value.defined() ? mul(value, cs) : cs;
        if (j == scales - 1) {
            Var lum = pow_scalar(clamp_min(mean_all(maps.luminance), kEps), wj);
            value = mul(value, lum);
        } else {
            x = avg_pool2(x);
            y = avg_pool2(y);
        }
    }
    return value;
}

void ContrastBatch::validate() const {
    if (!anchor.defined() || !positive.defined())
        throw InvalidInput("ContrastBatch: anchor and positive are required");
    if (negatives.empty()) throw InvalidInput("ContrastBatch: at least one negative is required");
    if (negatives.size() != weights.size())
        throw InvalidInput("ContrastBatch: weight count does not match negatives");
    if (!anchor.val().same_shape(positive.val()))
        throw InvalidInput("ContrastBatch: positive shape mismatch");
    for (const Var& n : negatives)
        if (!n.val().same_shape(anchor.val()))
            throw InvalidInput("ContrastBatch: negative shape mismatch");
}

Var pair_contrast(const Var& a, const Var& x, const FeatureExtractor& fe) {
    if (!a.val().same_shape(x.val())) throw InvalidInput("pair_contrast: shape mismatch");
    std::vector<Var> fa = fe.spatial_features(a);
    std::vector<Var> fx = fe.spatial_features(x);
    Var total;
    for (size_t i = 0; i < fa.size(); ++i) {
        Var term = l1_loss(fa[i], fx[i]);
        total = total.defined() ? add(total, term) : term;
    }
    Var freq = l1_loss(FeatureExtractor::frequency_features(a),
                       FeatureExtractor::frequency_features(x));
    return add(total, freq);
}

Var mncd(const ContrastBatch& batch, const FeatureExtractor& fe) {
    batch.validate();
    Var num = pair_contrast(batch.anchor, batch.positive, fe);
    Var den = num;
    for (size_t i = 0; i < batch.negatives.size(); ++i) {
        Var term = mul_scalar(pair_contrast(batch.anchor, batch.negatives[i], fe),
                              batch.weights[i]);
        den = add(den, term);
    }
    if (den.val()(0) <= 0.0)
        throw InvalidInput("mncd: all contrastive distances are zero (degenerate batch)");
    return div(num, den);
}

double mncd_ratio(double positive_distance, const std::vector<double>& negative_distances,
                  const std::vector<double>& weights) {
    if (negative_distances.size() != weights.size())
        throw InvalidInput("mncd_ratio: weight count does not match distances");
    double den = positive_distance;
    for (size_t i = 0; i < negative_distances.size(); ++i)
        den += weights[i] * negative_distances[i];
    if (den <= 0.0) throw InvalidInput("mncd_ratio: degenerate distances");
    return positive_distance / den;
}

JointLossResult joint_loss(const Var& pred, const Var& target, const ContrastBatch* contrast,
                           const FeatureExtractor* fe, const JointLossWeights& weights) {
    if (!pred.val().same_shape(target.val())) throw InvalidInput("joint_loss: shape mismatch");
    JointLossResult result;
    Var rec = smooth_l1_loss(pred, target, weights.smooth_l1_beta);
    Var structural = add_scalar(neg(ms_ssim(pred, target)), 1.0);
    result.smooth_l1 = rec.val()(0);
    result.ms_ssim_term = structural.val()(0);
    Var total = add(mul_scalar(rec, weights.lambda1), mul_scalar(structural, weights.lambda2));
    if (contrast != nullptr && weights.lambda3 != 0.0) {
        if (fe == nullptr) throw InvalidInput("joint_loss: contrast batch without an extractor");
        Var contrastive = mncd(*contrast, *fe);
        result.mncd = contrastive.val()(0);
        total = add(total, mul_scalar(contrastive, weights.lambda3));
    }
    result.total = total;
    if (!std::isfinite(result.total.val()(0)))
        throw NumericError("joint_loss: non-finite total loss");
    return result;
}

}  // namespace haze
