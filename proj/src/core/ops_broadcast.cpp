#include "haze/core/ops.hpp"

namespace haze {

Var mul_channel(const Var& x, const Var& s) {
    const Tensor& xv = x.val();
    const Tensor& sv = s.val();
    if (xv.ndim() != 4 || sv.ndim() != 2 || sv.dim(0) != xv.dim(0) || sv.dim(1) != xv.dim(1))
        throw InvalidInput("mul_channel: expected x:(N,C,H,W), s:(N,C)");
    const int64_t N = xv.dim(0), C = xv.dim(1), HW = xv.dim(2) * xv.dim(3);
    Tensor out(xv.shape());
    const double* px = xv.data();
    const double* ps = sv.data();
    double* po = out.data();
    for (int64_t n = 0; n < N; ++n)
        for (int64_t c = 0; c < C; ++c) {
            const double scale = ps[n * C + c];
            const int64_t base = (n * C + c) * HW;
            for (int64_t i = 0; i < HW; ++i) po[base + i] = px[base + i] * scale;
        }
    return make_op(std::move(out), {x, s}, [x, s, N, C, HW](Node& node) {
        const double* g = node.grad.data();
        if (x.requires_grad()) {
            Tensor gx(x.shape());
            double* pg = gx.data();
            const double* ps2 = s.val().data();
            for (int64_t n = 0; n < N; ++n)
                for (int64_t c = 0; c < C; ++c) {
                    const double scale = ps2[n * C + c];
                    const int64_t base = (n * C + c) * HW;
                    for (int64_t i = 0; i < HW; ++i) pg[base + i] = g[base + i] * scale;
                }
            accumulate_grad(x.node(), gx);
        }
        if (s.requires_grad()) {
            Tensor gs(s.shape());
            double* pg = gs.data();
            const double* px2 = x.val().data();
            for (int64_t n = 0; n < N; ++n)
                for (int64_t c = 0; c < C; ++c) {
                    const int64_t base = (n * C + c) * HW;
                    double acc = 0.0;
                    for (int64_t i = 0; i < HW; ++i) acc += g[base + i] * px2[base + i];
                    pg[n * C + c] = acc;
                }
            accumulate_grad(s.node(), gs);
        }
    });
}

Var mul_sample(const Var& x, const Var& s) {
    const Tensor& xv = x.val();
    const Tensor& sv = s.val();
    if (xv.ndim() != 4 || sv.ndim() != 2 || sv.dim(0) != xv.dim(0) || sv.dim(1) != 1)
        throw InvalidInput("mul_sample: expected x:(N,C,H,W), s:(N,1)");
    const int64_t N = xv.dim(0), CHW = xv.numel() / xv.dim(0);
    Tensor out(xv.shape());
    const double* px = xv.data();
    const double* ps = sv.data();
    double* po = out.data();
    for (int64_t n = 0; n < N; ++n) {
        const double scale = ps[n];
        const int64_t base = n * CHW;
        for (int64_t i = 0; i < CHW; ++i) po[base + i] = px[base + i] * scale;
    }
    return make_op(std::move(out), {x, s}, [x, s, N, CHW](Node& node) {
        const double* g = node.grad.data();
        if (x.requires_grad()) {
            Tensor gx(x.shape());
            double* pg = gx.data();
            const double* ps2 = s.val().data();
            for (int64_t n = 0; n < N; ++n) {
                const double scale = ps2[n];
                const int64_t base = n * CHW;
                for (int64_t i = 0; i < CHW; ++i) pg[base + i] = g[base + i] * scale;
            }
            accumulate_grad(x.node(), gx);
        }
        if (s.requires_grad()) {
            Tensor gs(s.shape());
            double* pg = gs.data();
            const double* px2 = x.val().data();
            for (int64_t n = 0; n < N; ++n) {
                const int64_t base = n * CHW;
                double acc = 0.0;
                for (int64_t i = 0; i < CHW; ++i) acc += g[base + i] * px2[base + i];
                pg[n] = acc;
            }
            accumulate_grad(s.node(), gs);
        }
    });
}

Var mul_pixel(const Var& x, const Var& m) {
    const Tensor& xv = x.val();
    const Tensor& mv = m.val();
    if (xv.ndim() != 4 || mv.ndim() != 4 || mv.dim(0) != xv.dim(0) || mv.dim(1) != 1 ||
        mv.dim(2) != xv.dim(2) || mv.dim(3) != xv.dim(3))
        throw InvalidInput("mul_pixel: expected x:(N,C,H,W), m:(N,1,H,W)");
    const int64_t N = xv.dim(0), C = xv.dim(1), HW = xv.dim(2) * xv.dim(3);
    Tensor out(xv.shape());
    const double* px = xv.data();
    const double* pm = mv.data();
    double* po = out.data();
    for (int64_t n = 0; n < N; ++n)
        for (int64_t c = 0; c < C; ++c) {
            const int64_t base = (n * C + c) * HW;
            const int64_t mbase = n * HW;
            for (int64_t i = 0; i < HW; ++i) po[base + i] = px[base + i] * pm[mbase + i];
        }
    return make_op(std::move(out), {x, m}, [x, m, N, C, HW](Node& node) {
        const double* g = node.grad.data();
        if (x.requires_grad()) {
            Tensor gx(x.shape());
            double* pg = gx.data();
            const double* pm2 = m.val().data();
            for (int64_t n = 0; n < N; ++n)
                for (int64_t c = 0; c < C; ++c) {
                    const int64_t base = (n * C + c) * HW;
                    const int64_t mbase = n * HW;
                    for (int64_t i = 0; i < HW; ++i) pg[base + i] = g[base + i] * pm2[mbase + i];
                }
            accumulate_grad(x.node(), gx);
        }
        if (m.requires_grad()) {
            Tensor gm(m.shape());
            double* pg = gm.data();
            const double* px2 = x.val().data();
            for (int64_t n = 0; n < N; ++n) {
                const int64_t mbase = n * HW;
                for (int64_t c = 0; c < C; ++c) {
                    const int64_t base = (n * C + c) * HW;
                    for (int64_t i = 0; i < HW; ++i) pg[mbase + i] += g[base + i] * px2[base + i];
                }
            }
            accumulate_grad(m.node(), gm);
        }
    });
}

}  // namespace haze
