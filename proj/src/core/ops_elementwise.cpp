#include <cmath>

#include "haze/core/ops.hpp"

namespace haze {

namespace {

void check_same_shape(const Var& a, const Var& b, const char* what) {
    if (!a.val().same_shape(b.val()))
        throw InvalidInput(std::string(what) + ": shape mismatch " + shape_string(a.val()) +
                           " vs " + shape_string(b.val()));
}

}  // namespace

Var add(const Var& a, const Var& b) {
    check_same_shape(a, b, "add");
    Tensor out(a.shape());
    const double* pa = a.val().data();
    const double* pb = b.val().data();
    double* po = out.data();
    const int64_t n = out.numel();
    for (int64_t i = 0; i < n; ++i) po[i] = pa[i] + pb[i];
    return make_op(std::move(out), {a, b}, [a, b](Node& node) {
        accumulate_grad(a.node(), node.grad);
        accumulate_grad(b.node(), node.grad);
    });
}

Var sub(const Var& a, const Var& b) {
    check_same_shape(a, b, "sub");
    Tensor out(a.shape());
    const double* pa = a.val().data();
    const double* pb = b.val().data();
    double* po = out.data();
    const int64_t n = out.numel();
    for (int64_t i = 0; i < n; ++i) po[i] = pa[i] - pb[i];
    return make_op(std::move(out), {a, b}, [a, b](Node& node) {
        accumulate_grad(a.node(), node.grad);
        if (b.requires_grad()) {
            Tensor gb(b.shape());
            const double* g = node.grad.data();
            double* pg = gb.data();
            for (int64_t i = 0; i < gb.numel(); ++i) pg[i] = -g[i];
            accumulate_grad(b.node(), gb);
        }
    });
}

Var mul(const Var& a, const Var& b) {
    check_same_shape(a, b, "mul");
    Tensor out(a.shape());
    const double* pa = a.val().data();
    const double* pb = b.val().data();
    double* po = out.data();
    const int64_t n = out.numel();
    for (int64_t i = 0; i < n; ++i) po[i] = pa[i] * pb[i];
    return make_op(std::move(out), {a, b}, [a, b](Node& node) {
        const double* g = node.grad.data();
        const int64_t count = node.grad.numel();
        if (a.requires_grad()) {
            Tensor ga(a.shape());
            double* pg = ga.data();
            const double* pb2 = b.val().data();
            for (int64_t i = 0; i < count; ++i) pg[i] = g[i] * pb2[i];
            accumulate_grad(a.node(), ga);
        }
        if (b.requires_grad()) {
            Tensor gb(b.shape());
            double* pg = gb.data();
            const double* pa2 = a.val().data();
            for (int64_t i = 0; i < count; ++i) pg[i] = g[i] * pa2[i];
            accumulate_grad(b.node(), gb);
        }
    });
}

Var div(const Var& a, const Var& b) {
    check_same_shape(a, b, "div");
    Tensor out(a.shape());
    const double* pa = a.val().data();
    const double* pb = b.val().data();
    double* po = out.data();
    const int64_t n = out.numel();
    for (int64_t i = 0; i < n; ++i) po[i] = pa[i] / pb[i];
    return make_op(std::move(out), {a, b}, [a, b](Node& node) {
        const double* g = node.grad.data();
        const double* pa2 = a.val().data();
        const double* pb2 = b.val().data();
        const int64_t count = node.grad.numel();
        if (a.requires_grad()) {
            Tensor ga(a.shape());
            double* pg = ga.data();
            for (int64_t i = 0; i < count; ++i) pg[i] = g[i] / pb2[i];
            accumulate_grad(a.node(), ga);
        }
        if (b.requires_grad()) {
            Tensor gb(b.shape());
            double* pg = gb.data();
            for (int64_t i = 0; i < count; ++i) pg[i] = -g[i] * pa2[i] / (pb2[i] * pb2[i]);
            accumulate_grad(b.node(), gb);
        }
    });
}

Var neg(const Var& a) { return mul_scalar(a, -1.0); }

Var add_scalar(const Var& a, double s) {
    Tensor out(a.shape());
    const double* pa = a.val().data();
    double* po = out.data();
    for (int64_t i = 0; i < out.numel(); ++i) po[i] = pa[i] + s;
    return make_op(std::move(out), {a}, [a](Node& node) { accumulate_grad(a.node(), node.grad); });
}

Var mul_scalar(const Var& a, double s) {
    Tensor out(a.shape());
    const double* pa = a.val().data();
    double* po = out.data();
    for (int64_t i = 0; i < out.numel(); ++i) po[i] = pa[i] * s;
    return make_op(std::move(out), {a}, [a, s](Node& node) {
        if (!a.requires_grad()) return;
        Tensor ga(a.shape());
        const double* g = node.grad.data();
        double* pg = ga.data();
        for (int64_t i = 0; i < ga.numel(); ++i) pg[i] = g[i] * s;
        accumulate_grad(a.node(), ga);
    });
}

Var relu(const Var& a) {
    Tensor out(a.shape());
    const double* pa = a.val().data();
    double* po = out.data();
    for (int64_t i = 0; i < out.numel(); ++i) po[i] = pa[i] > 0.0 ? pa[i] : 0.0;
    return make_op(std::move(out), {a}, [a](Node& node) {
        if (!a.requires_grad()) return;
        Tensor ga(a.shape());
        const double* g = node.grad.data();
        const double* pa2 = a.val().data();
        double* pg = ga.data();
        for (int64_t i = 0; i < ga.numel(); ++i) pg[i] = pa2[i] > 0.0 ? g[i] : 0.0;
        accumulate_grad(a.node(), ga);
    });
}

Var leaky_relu(const Var& a, double slope) {
    Tensor out(a.shape());
    const double* pa = a.val().data();
    double* po = out.data();
    for (int64_t i = 0; i < out.numel(); ++i) po[i] = pa[i] > 0.0 ? pa[i] : slope * pa[i];
    return make_op(std::move(out), {a}, [a, slope](Node& node) {
        if (!a.requires_grad()) return;
        Tensor ga(a.shape());
        const double* g = node.grad.data();
        const double* pa2 = a.val().data();
        double* pg = ga.data();
        for (int64_t i = 0; i < ga.numel(); ++i) pg[i] = pa2[i] > 0.0 ? g[i] : slope * g[i];
        accumulate_grad(a.node(), ga);
    });
}

Var sigmoid(const Var& a) {
    Tensor out(a.shape());
    const double* pa = a.val().data();
    double* po = out.data();
    for (int64_t i = 0; i < out.numel(); ++i) po[i] = 1.0 / (1.0 + std::exp(-pa[i]));
    Tensor saved = out;  // shallow share
    return make_op(std::move(out), {a}, [a, saved](Node& node) {
        if (!a.requires_grad()) return;
        Tensor ga(a.shape());
        const double* g = node.grad.data();
        const double* y = saved.data();
        double* pg = ga.data();
        for (int64_t i = 0; i < ga.numel(); ++i) pg[i] = g[i] * y[i] * (1.0 - y[i]);
        accumulate_grad(a.node(), ga);
    });
}

Var abs_val(const Var& a) {
    Tensor out(a.shape());
    const double* pa = a.val().data();
    double* po = out.data();
    for (int64_t i = 0; i < out.numel(); ++i) po[i] = std::fabs(pa[i]);
    return make_op(std::move(out), {a}, [a](Node& node) {
        if (!a.requires_grad()) return;
        Tensor ga(a.shape());
        const double* g = node.grad.data();
        const double* pa2 = a.val().data();
        double* pg = ga.data();
        for (int64_t i = 0; i < ga.numel(); ++i)
            pg[i] = pa2[i] > 0.0 ? g[i] : (pa2[i] < 0.0 ? -g[i] : 0.0);
        accumulate_grad(a.node(), ga);
    });
}

Var square(const Var& a) { return mul(a, a); }

Var pow_scalar(const Var& a, double p) {
    Tensor out(a.shape());
    const double* pa = a.val().data();
    double* po = out.data();
    for (int64_t i = 0; i < out.numel(); ++i) po[i] = std::pow(pa[i], p);
    return make_op(std::move(out), {a}, [a, p](Node& node) {
        if (!a.requires_grad()) return;
        Tensor ga(a.shape());
        const double* g = node.grad.data();
        const double* pa2 = a.val().data();
        double* pg = ga.data();
        for (int64_t i = 0; i < ga.numel(); ++i) pg[i] = g[i] * p * std::pow(pa2[i], p - 1.0);
        accumulate_grad(a.node(), ga);
    });
}

Var clamp_min(const Var& a, double lo) {
    Tensor out(a.shape());
    const double* pa = a.val().data();
    double* po = out.data();
    for (int64_t i = 0; i < out.numel(); ++i) po[i] = pa[i] < lo ? lo : pa[i];
    return make_op(std::move(out), {a}, [a, lo](Node& node) {
        if (!a.requires_grad()) return;
        Tensor ga(a.shape());
        const double* g = node.grad.data();
        const double* pa2 = a.val().data();
        double* pg = ga.data();
        for (int64_t i = 0; i < ga.numel(); ++i) pg[i] = pa2[i] >= lo ? g[i] : 0.0;
        accumulate_grad(a.node(), ga);
    });
}

Var clamp(const Var& a, double lo, double hi) {
    Tensor out(a.shape());
    const double* pa = a.val().data();
    double* po = out.data();
    for (int64_t i = 0; i < out.numel(); ++i) po[i] = pa[i] < lo ? lo : (pa[i] > hi ? hi : pa[i]);
    return make_op(std::move(out), {a}, [a, lo, hi](Node& node) {
        if (!a.requires_grad()) return;
        Tensor ga(a.shape());
        const double* g = node.grad.data();
        const double* pa2 = a.val().data();
        double* pg = ga.data();
        for (int64_t i = 0; i < ga.numel(); ++i)
            pg[i] = (pa2[i] >= lo && pa2[i] <= hi) ? g[i] : 0.0;
        accumulate_grad(a.node(), ga);
    });
}

Var detach(const Var& x) { return x.detach(); }

}  // namespace haze
