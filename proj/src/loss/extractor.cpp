#include "haze/loss/extractor.hpp"

#include "haze/core/checkpoint.hpp"

namespace haze {

FeatureExtractor::FeatureExtractor(uint64_t seed, std::vector<int64_t> stage_widths) {
    if (stage_widths.empty()) throw ConfigError("FeatureExtractor: no stages configured");
    Rng rng(seed);
    int64_t in_ch = 3;
    stages_ = stage_widths.size();
    for (size_t s = 0; s < stages_; ++s) {
        const int64_t w = stage_widths[s];
        convs_.push_back(std::make_unique<Conv2d>(rng, in_ch, w, 3, 1, 1));
        convs_.push_back(std::make_unique<Conv2d>(rng, w, w, 3, 1, 1));
        in_ch = w;
    }
    for (size_t i = 0; i < convs_.size(); ++i)
        add_child("conv" + std::to_string(i), convs_[i].get());
    set_requires_grad(false);  // frozen during dehazing training
}

std::vector<Var> FeatureExtractor::spatial_features(const Var& x) const {
    std::vector<Var> taps;
    Var h = x;
    for (size_t s = 0; s < stages_; ++s) {
        if (s > 0) h = avg_pool2(h);
        h = relu(convs_[2 * s]->forward(h));
        h = relu(convs_[2 * s + 1]->forward(h));
        taps.push_back(h);
    }
    return taps;
}

Var FeatureExtractor::frequency_features(const Var& x) { return fft2c(x); }

void FeatureExtractor::load_weights(const std::string& checkpoint_path) {
    Checkpoint ckpt = load_checkpoint(checkpoint_path);
    for (auto& [name, param] : named_parameters()) {
        const Tensor* t = ckpt.find(name);
        if (!t) throw IoError("FeatureExtractor: checkpoint is missing tensor " + name);
        if (!t->same_shape(param.val()))
            throw IoError("FeatureExtractor: shape mismatch for " + name);
        std::copy(t->data(), t->data() + t->numel(), param.mutable_val().data());
    }
}

}  // namespace haze
