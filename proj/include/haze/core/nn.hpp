#pragma once

#include <string>
#include <utility>
#include <vector>

#include "haze/core/ops.hpp"
#include "haze/core/rng.hpp"

namespace haze {

// Base for anything that owns trainable parameters. Children are plain
// value members registered in the owner's constructor; registration order
// fixes parameter order, which the checkpoint format and the optimizer
// both rely on.
class Module {
  public:
    virtual ~Module() = default;
    Module() = default;
    Module(const Module&) = delete;
    Module& operator=(const Module&) = delete;

    std::vector<std::pair<std::string, Var>> named_parameters(const std::string& prefix = "") const;
    std::vector<Var> parameters() const;
    int64_t parameter_count() const;
    void set_requires_grad(bool rg);

  protected:
    Var add_param(const std::string& name, Tensor init);
    void add_child(const std::string& name, Module* m);

  private:
    std::vector<std::pair<std::string, Var>> params_;
    std::vector<std::pair<std::string, Module*>> children_;
};

// He-uniform for conv/linear weights, LeCun-style uniform for biases.
Tensor init_conv_weight(Rng& rng, int64_t co, int64_t ci, int64_t kh, int64_t kw);
Tensor init_linear_weight(Rng& rng, int64_t co, int64_t ci);
Tensor init_bias(Rng& rng, int64_t co, int64_t fan_in);

class Conv2d : public Module {
  public:
    Conv2d(Rng& rng, int64_t in_ch, int64_t out_ch, int kernel, int stride, int pad,
           int dilation = 1, bool bias = true);
    Var forward(const Var& x) const { return conv2d(x, weight, bias, stride_, pad_, dilation_); }

    Var weight, bias;

  private:
    int stride_, pad_, dilation_;
};

class ConvTranspose2d : public Module {
  public:
    ConvTranspose2d(Rng& rng, int64_t in_ch, int64_t out_ch, int kernel, int stride, int pad,
                    int out_pad, bool bias = true);
    Var forward(const Var& x) const {
        return conv_transpose2d(x, weight, bias, stride_, pad_, out_pad_);
    }

    Var weight, bias;

  private:
    int stride_, pad_, out_pad_;
};

class Linear : public Module {
  public:
    // zero_init=true gives an all-zero layer (used for the APR fusion gate,
    // which then starts at w = sigmoid(0) = 0.5).
    Linear(Rng& rng, int64_t in_features, int64_t out_features, bool bias = true,
           bool zero_init = false);
    Var forward(const Var& x) const { return linear(x, weight, bias); }

    Var weight, bias;
};

}  // namespace haze
