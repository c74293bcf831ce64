#include <cmath>

#include "haze/core/ops.hpp"

namespace haze {

Var mean_all(const Var& a) {
    const int64_t n = a.numel();
    double acc = 0.0;
    const double* pa = a.val().data();
    for (int64_t i = 0; i < n; ++i) acc += pa[i];
    Tensor out({1});
    out(0) = acc / static_cast<double>(n);
    return make_op(std::move(out), {a}, [a, n](Node& node) {
        if (!a.requires_grad()) return;
        Tensor ga(a.shape());
        const double g = node.grad(0) / static_cast<double>(n);
        double* pg = ga.data();
        for (int64_t i = 0; i < n; ++i) pg[i] = g;
        accumulate_grad(a.node(), ga);
    });
}

Var sum_all(const Var& a) {
    const int64_t n = a.numel();
    double acc = 0.0;
    const double* pa = a.val().data();
    for (int64_t i = 0; i < n; ++i) acc += pa[i];
    Tensor out({1});
    out(0) = acc;
    return make_op(std::move(out), {a}, [a, n](Node& node) {
        if (!a.requires_grad()) return;
        Tensor ga(a.shape());
        const double g = node.grad(0);
        double* pg = ga.data();
        for (int64_t i = 0; i < n; ++i) pg[i] = g;
        accumulate_grad(a.node(), ga);
    });
}

Var global_avg_pool(const Var& x) {
    const Tensor& xv = x.val();
    if (xv.ndim() != 4) throw InvalidInput("global_avg_pool: expected 4-D input");
    const int64_t N = xv.dim(0), C = xv.dim(1), HW = xv.dim(2) * xv.dim(3);
    Tensor out({N, C});
    const double* px = xv.data();
    double* po = out.data();
    for (int64_t nc = 0; nc < N * C; ++nc) {
        double acc = 0.0;
        const int64_t base = nc * HW;
        for (int64_t i = 0; i < HW; ++i) acc += px[base + i];
        po[nc] = acc / static_cast<double>(HW);
    }
    return make_op(std::move(out), {x}, [x, N, C, HW](Node& node) {
        if (!x.requires_grad()) return;
        Tensor gx(x.shape());
        const double* g = node.grad.data();
        double* pg = gx.data();
        for (int64_t nc = 0; nc < N * C; ++nc) {
            const double v = g[nc] / static_cast<double>(HW);
            const int64_t base = nc * HW;
            for (int64_t i = 0; i < HW; ++i) pg[base + i] = v;
        }
        accumulate_grad(x.node(), gx);
    });
}

Var l1_loss(const Var& a, const Var& b) {
    if (!a.val().same_shape(b.val())) throw InvalidInput("l1_loss: shape mismatch");
    const int64_t n = a.numel();
    const double* pa = a.val().data();
    const double* pb = b.val().data();
    double acc = 0.0;
    for (int64_t i = 0; i < n; ++i) acc += std::fabs(pa[i] - pb[i]);
    Tensor out({1});
    out(0) = acc / static_cast<double>(n);
    return make_op(std::move(out), {a, b}, [a, b, n](Node& node) {
        const double g = node.grad(0) / static_cast<double>(n);
        const double* pa2 = a.val().data();
        const double* pb2 = b.val().data();
        if (a.requires_grad()) {
            Tensor ga(a.shape());
            double* pg = ga.data();
            for (int64_t i = 0; i < n; ++i) {
                const double d = pa2[i] - pb2[i];
                pg[i] = d > 0.0 ? g : (d < 0.0 ? -g : 0.0);
            }
            accumulate_grad(a.node(), ga);
        }
        if (b.requires_grad()) {
            Tensor gb(b.shape());
            double* pg = gb.data();
            for (int64_t i = 0; i < n; ++i) {
                const double d = pa2[i] - pb2[i];
                pg[i] = d > 0.0 ? -g : (d < 0.0 ? g : 0.0);
            }
            accumulate_grad(b.node(), gb);
        }
    });
}

Var smooth_l1_loss(const Var& a, const Var& b, double beta) {
    if (!a.val().same_shape(b.val())) throw InvalidInput("smooth_l1_loss: shape mismatch");
    if (beta <= 0.0) throw InvalidParameter("smooth_l1_loss: beta must be positive");
    const int64_t n = a.numel();
    const double* pa = a.val().data();
    const double* pb = b.val().data();
    double acc = 0.0;
    for (int64_t i = 0; i < n; ++i) {
        const double d = std::fabs(pa[i] - pb[i]);
        acc += d < beta ? 0.5 * d * d / beta : d - 0.5 * beta;
    }
    Tensor out({1});
    out(0) = acc / static_cast<double>(n);
    return make_op(std::move(out), {a, b}, [a, b, n, beta](Node& node) {
        const double g = node.grad(0) / static_cast<double>(n);
        const double* pa2 = a.val().data();
        const double* pb2 = b.val().data();
        if (a.requires_grad()) {
            Tensor ga(a.shape());
            double* pg = ga.data();
            for (int64_t i = 0; i < n; ++i) {
                const double d = pa2[i] - pb2[i];
                const double dd = std::fabs(d) < beta ? d / beta : (d > 0.0 ? 1.0 : -1.0);
                pg[i] = g * dd;
            }
            accumulate_grad(a.node(), ga);
        }
        if (b.requires_grad()) {
            Tensor gb(b.shape());
            double* pg = gb.data();
            for (int64_t i = 0; i < n; ++i) {
                const double d = pa2[i] - pb2[i];
                const double dd = std::fabs(d) < beta ? d / beta : (d > 0.0 ? 1.0 : -1.0);
                pg[i] = -g * dd;
            }
            accumulate_grad(b.node(), gb);
        }
    });
}

}  // namespace haze
