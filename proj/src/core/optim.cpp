#include "haze/core/optim.hpp"

#include <cmath>

#include "haze/core/errors.hpp"

namespace haze {

Adam::Adam(std::vector<Var> params, AdamOptions opts) : params_(std::move(params)), opts_(opts) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const Var& p : params_) {
        m_.emplace_back(p.val().shape());
        v_.emplace_back(p.val().shape());
    }
}

void Adam::zero_grad() {
    for (const Var& p : params_) p.zero_grad();
}

void Adam::step(double lr) {
    ++t_;
    const double bc1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(t_));
    for (size_t i = 0; i < params_.size(); ++i) {
        Var& p = params_[i];
        if (!p.has_grad()) continue;
        const double* g = p.grad().data();
        double* m = m_[i].data();
        double* v = v_[i].data();
        double* w = p.mutable_val().data();
        const int64_t n = p.numel();
        for (int64_t j = 0; j < n; ++j) {
            m[j] = opts_.beta1 * m[j] + (1.0 - opts_.beta1) * g[j];
            v[j] = opts_.beta2 * v[j] + (1.0 - opts_.beta2) * g[j] * g[j];
            const double mhat = m[j] / bc1;
            const double vhat = v[j] / bc2;
            w[j] -= lr * mhat / (std::sqrt(vhat) + opts_.eps);
        }
    }
}

double cosine_lr(double lr_max, double lr_min, int64_t step, int64_t total_steps) {
    if (total_steps <= 0) throw InvalidParameter("cosine_lr: total_steps must be positive");
    if (step < 0) step = 0;
    if (step > total_steps) step = total_steps;
    const double t = static_cast<double>(step) / static_cast<double>(total_steps);
    return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + std::cos(3.14159265358979323846 * t));
}

}  // namespace haze
