#include "haze/core/nn.hpp"

#include <cmath>

namespace haze {

std::vector<std::pair<std::string, Var>> Module::named_parameters(const std::string& prefix) const {
    std::vector<std::pair<std::string, Var>> out;
    for (const auto& [name, var] : params_) out.emplace_back(prefix + name, var);
    for (const auto& [name, child] : children_) {
        auto sub = child->named_parameters(prefix + name + ".");
        out.insert(out.end(), sub.begin(), sub.end());
    }
    return out;
}

std::vector<Var> Module::parameters() const {
    std::vector<Var> out;
    for (const auto& [name, var] : named_parameters()) out.push_back(var);
    return out;
}

int64_t Module::parameter_count() const {
    int64_t n = 0;
    for (const Var& p : parameters()) n += p.numel();
    return n;
}

void Module::set_requires_grad(bool rg) {
    for (const Var& p : parameters()) p.node()->requires_grad = rg;
}

Var Module::add_param(const std::string& name, Tensor init) {
    Var v(std::move(init), true);
    params_.emplace_back(name, v);
    return v;
}

void Module::add_child(const std::string& name, Module* m) { children_.emplace_back(name, m); }

Tensor init_conv_weight(Rng& rng, int64_t co, int64_t ci, int64_t kh, int64_t kw) {
    Tensor w({co, ci, kh, kw});
    const double bound = std::sqrt(6.0 / static_cast<double>(ci * kh * kw));
    for (int64_t i = 0; i < w.numel(); ++i) w(i) = rng.uniform(-bound, bound);
    return w;
}

Tensor init_linear_weight(Rng& rng, int64_t co, int64_t ci) {
    Tensor w({co, ci});
    const double bound = std::sqrt(6.0 / static_cast<double>(ci));
    for (int64_t i = 0; i < w.numel(); ++i) w(i) = rng.uniform(-bound, bound);
    return w;
}

Tensor init_bias(Rng& rng, int64_t co, int64_t fan_in) {
    Tensor b({co});
    const double bound = fan_in > 0 ? 1.0 / std::sqrt(static_cast<double>(fan_in)) : 0.0;
    for (int64_t i = 0; i < b.numel(); ++i) b(i) = rng.uniform(-bound, bound);
    return b;
}

Conv2d::Conv2d(Rng& rng, int64_t in_ch, int64_t out_ch, int kernel, int stride, int pad,
               int dilation, bool bias)
    : stride_(stride), pad_(pad), dilation_(dilation) {
    weight = add_param("weight", init_conv_weight(rng, out_ch, in_ch, kernel, kernel));
    if (bias) this->bias = add_param("bias", init_bias(rng, out_ch, in_ch * kernel * kernel));
}

ConvTranspose2d::ConvTranspose2d(Rng& rng, int64_t in_ch, int64_t out_ch, int kernel, int stride,
                                 int pad, int out_pad, bool bias)
    : stride_(stride), pad_(pad), out_pad_(out_pad) {
    // weight layout (Cin, Cout, kh, kw); fan-in per output element is
    // ci * k^2 / stride^2, but the simple conv rule works fine here.
    Tensor w({in_ch, out_ch, static_cast<int64_t>(kernel), static_cast<int64_t>(kernel)});
    const double bound = std::sqrt(6.0 / static_cast<double>(in_ch * kernel * kernel));
    for (int64_t i = 0; i < w.numel(); ++i) w(i) = rng.uniform(-bound, bound);
    weight = add_param("weight", std::move(w));
    if (bias) this->bias = add_param("bias", init_bias(rng, out_ch, in_ch * kernel * kernel));
}

Linear::Linear(Rng& rng, int64_t in_features, int64_t out_features, bool bias, bool zero_init) {
    if (zero_init) {
        weight = add_param("weight", Tensor({out_features, in_features}));
        if (bias) this->bias = add_param("bias", Tensor({out_features}));
        return;
    }
    weight = add_param("weight", init_linear_weight(rng, out_features, in_features));
    if (bias) this->bias = add_param("bias", init_bias(rng, out_features, in_features));
}

}  // namespace haze
