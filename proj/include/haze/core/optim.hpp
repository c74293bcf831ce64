#pragma once

#include <cstdint>
#include <vector>

#include "haze/core/var.hpp"

namespace haze {

struct AdamOptions {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

class Adam {
  public:
    explicit Adam(std::vector<Var> params, AdamOptions opts = {});

    void zero_grad();
    void step(double lr);

    int64_t step_count() const { return t_; }

    // Checkpoint hooks: first and second moment per parameter plus the step
    // counter, in parameter order.
    std::vector<Tensor>& moments1() { return m_; }
    std::vector<Tensor>& moments2() { return v_; }
    void set_step_count(int64_t t) { t_ = t; }

  private:
    std::vector<Var> params_;
    std::vector<Tensor> m_, v_;
    int64_t t_ = 0;
    AdamOptions opts_;
};

// lr(t) = lr_min + 0.5*(lr_max - lr_min)*(1 + cos(pi*t/total)), t in [0,total].
double cosine_lr(double lr_max, double lr_min, int64_t step, int64_t total_steps);

}  // namespace haze
