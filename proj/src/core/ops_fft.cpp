#include <fftw3.h>

#include <map>
#include <mutex>

#include "haze/core/ops.hpp"

namespace haze {

namespace {

// One cached plan + scratch buffer per (H, W, sign). FFTW planning is not
// thread safe and plan execution reuses the scratch, so the whole transform
// is serialized behind a mutex.
struct PlanEntry {
    fftw_plan plan = nullptr;
    fftw_complex* buf = nullptr;
    int64_t count = 0;
};

std::mutex g_fft_mutex;
std::map<std::tuple<int64_t, int64_t, int>, PlanEntry> g_plans;

PlanEntry& get_plan(int64_t H, int64_t W, int sign) {
    auto key = std::make_tuple(H, W, sign);
    auto it = g_plans.find(key);
    if (it != g_plans.end()) return it->second;
    PlanEntry e;
    e.count = H * W;
    e.buf = fftw_alloc_complex(static_cast<size_t>(e.count));
    e.plan = fftw_plan_dft_2d(static_cast<int>(H), static_cast<int>(W), e.buf, e.buf, sign,
                              FFTW_ESTIMATE);
    return g_plans.emplace(key, e).first->second;
}

// transform each (n,c) plane of a (N,2C,H,W) complex tensor or build one
// from a real (N,C,H,W) tensor. Helpers below keep the channel layout
// convention in one place: real parts at channel c, imaginary at C+c.

}  // namespace

Var fft2c(const Var& x) {
    const Tensor& xv = x.val();
    if (xv.ndim() != 4) throw InvalidInput("fft2c: expected 4-D input");
    const int64_t N = xv.dim(0), C = xv.dim(1), H = xv.dim(2), W = xv.dim(3);
    const int64_t HW = H * W;
    Tensor out({N, 2 * C, H, W});
    {
        std::lock_guard<std::mutex> lock(g_fft_mutex);
        PlanEntry& pe = get_plan(H, W, FFTW_FORWARD);
        for (int64_t n = 0; n < N; ++n)
            for (int64_t c = 0; c < C; ++c) {
                const double* src = xv.data() + (n * C + c) * HW;
                for (int64_t i = 0; i < HW; ++i) {
                    pe.buf[i][0] = src[i];
                    pe.buf[i][1] = 0.0;
                }
                fftw_execute(pe.plan);
                double* re = out.data() + (n * 2 * C + c) * HW;
                double* im = out.data() + (n * 2 * C + C + c) * HW;
                for (int64_t i = 0; i < HW; ++i) {
                    re[i] = pe.buf[i][0];
                    im[i] = pe.buf[i][1];
                }
            }
    }
    return make_op(std::move(out), {x}, [x, N, C, H, W, HW](Node& node) {
        if (!x.requires_grad()) return;
        // d/dx of (Re F, Im F) pulled back through the unnormalized inverse
        // transform; input is real so only the real part survives.
        Tensor gx(x.shape());
        std::lock_guard<std::mutex> lock(g_fft_mutex);
        PlanEntry& pe = get_plan(H, W, FFTW_BACKWARD);
        for (int64_t n = 0; n < N; ++n)
            for (int64_t c = 0; c < C; ++c) {
                const double* gre = node.grad.data() + (n * 2 * C + c) * HW;
                const double* gim = node.grad.data() + (n * 2 * C + C + c) * HW;
                for (int64_t i = 0; i < HW; ++i) {
                    pe.buf[i][0] = gre[i];
                    pe.buf[i][1] = gim[i];
                }
                fftw_execute(pe.plan);
                double* dst = gx.data() + (n * C + c) * HW;
                for (int64_t i = 0; i < HW; ++i) dst[i] = pe.buf[i][0];
            }
        accumulate_grad(x.node(), gx);
    });
}

Var ifft2c_real(const Var& y) {
    const Tensor& yv = y.val();
    if (yv.ndim() != 4 || yv.dim(1) % 2 != 0)
        throw InvalidInput("ifft2c_real: expected (N,2C,H,W) input");
    const int64_t N = yv.dim(0), C = yv.dim(1) / 2, H = yv.dim(2), W = yv.dim(3);
    const int64_t HW = H * W;
    const double scale = 1.0 / static_cast<double>(HW);
    Tensor out({N, C, H, W});
    {
        std::lock_guard<std::mutex> lock(g_fft_mutex);
        PlanEntry& pe = get_plan(H, W, FFTW_BACKWARD);
        for (int64_t n = 0; n < N; ++n)
            for (int64_t c = 0; c < C; ++c) {
                const double* re = yv.data() + (n * 2 * C + c) * HW;
                const double* im = yv.data() + (n * 2 * C + C + c) * HW;
                for (int64_t i = 0; i < HW; ++i) {
                    pe.buf[i][0] = re[i];
                    pe.buf[i][1] = im[i];
                }
                fftw_execute(pe.plan);
                double* dst = out.data() + (n * C + c) * HW;
                for (int64_t i = 0; i < HW; ++i) dst[i] = pe.buf[i][0] * scale;
            }
    }
    return make_op(std::move(out), {y}, [y, N, C, H, W, HW, scale](Node& node) {
        if (!y.requires_grad()) return;
        // grad wrt the complex input is FFT(grad)/HW, split back into
        // real/imaginary channels.
        Tensor gy(y.shape());
        std::lock_guard<std::mutex> lock(g_fft_mutex);
        PlanEntry& pe = get_plan(H, W, FFTW_FORWARD);
        for (int64_t n = 0; n < N; ++n)
            for (int64_t c = 0; c < C; ++c) {
                const double* g = node.grad.data() + (n * C + c) * HW;
                for (int64_t i = 0; i < HW; ++i) {
                    pe.buf[i][0] = g[i];
                    pe.buf[i][1] = 0.0;
                }
                fftw_execute(pe.plan);
                double* gre = gy.data() + (n * 2 * C + c) * HW;
                double* gim = gy.data() + (n * 2 * C + C + c) * HW;
                for (int64_t i = 0; i < HW; ++i) {
                    gre[i] = pe.buf[i][0] * scale;
                    gim[i] = pe.buf[i][1] * scale;
                }
            }
        accumulate_grad(y.node(), gy);
    });
}

}  // namespace haze
