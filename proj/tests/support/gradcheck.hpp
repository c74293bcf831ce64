#pragma once

#include <cmath>
#include <functional>

#include "haze/core/tensor.hpp"

namespace haze::testing {

// Central-difference gradient of a scalar function wrt x. The function must
// rebuild its computation from the current contents of x on every call.
inline Tensor numeric_grad(const std::function<double()>& f, Tensor& x, double step = 1e-3) {
    Tensor g(x.shape());
    for (int64_t i = 0; i < x.numel(); ++i) {
        const double saved = x(i);
        x(i) = saved + step;
        const double fp = f();
        x(i) = saved - step;
        const double fm = f();
        x(i) = saved;
        g(i) = (fp - fm) / (2.0 * step);
    }
    return g;
}

struct GradCompare {
    double max_abs_diff = 0.0;
    double max_rel = 0.0;  // |a-f| / (max(|a|,|f|) + atol-floor)
    bool ok = true;
};

// allclose-style: |a - f| <= rtol * max(|a|, |f|) + atol, elementwise.
inline GradCompare compare_grads(const Tensor& analytic, const Tensor& numeric,
                                 double rtol = 1e-4, double atol = 1e-7) {
    GradCompare r;
    for (int64_t i = 0; i < analytic.numel(); ++i) {
        const double a = analytic(i);
        const double f = numeric(i);
        const double diff = std::fabs(a - f);
        const double scale = std::max(std::fabs(a), std::fabs(f));
        r.max_abs_diff = std::max(r.max_abs_diff, diff);
        if (diff > rtol * scale + atol) r.ok = false;
        if (scale > atol) r.max_rel = std::max(r.max_rel, diff / scale);
    }
    return r;
}

}  // namespace haze::testing
