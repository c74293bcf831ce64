#include <cmath>

#include "haze/core/ops.hpp"

namespace haze {

Var avg_pool2(const Var& x) {
    const Tensor& xv = x.val();
    if (xv.ndim() != 4) throw InvalidInput("avg_pool2: expected 4-D input");
    const int64_t N = xv.dim(0), C = xv.dim(1), H = xv.dim(2), W = xv.dim(3);
    const int64_t Ho = H / 2, Wo = W / 2;
    if (Ho < 1 || Wo < 1) throw InvalidInput("avg_pool2: input too small");
    Tensor out({N, C, Ho, Wo});
    const double* px = xv.data();
    double* po = out.data();
    for (int64_t nc = 0; nc < N * C; ++nc) {
        const double* src = px + nc * H * W;
        double* dst = po + nc * Ho * Wo;
        for (int64_t y = 0; y < Ho; ++y)
            for (int64_t xo = 0; xo < Wo; ++xo)
                dst[y * Wo + xo] = 0.25 * (src[(2 * y) * W + 2 * xo] + src[(2 * y) * W + 2 * xo + 1] +
                                           src[(2 * y + 1) * W + 2 * xo] +
                                           src[(2 * y + 1) * W + 2 * xo + 1]);
    }
    return make_op(std::move(out), {x}, [x, N, C, H, W, Ho, Wo](Node& node) {
        if (!x.requires_grad()) return;
        Tensor gx(x.shape());
        const double* g = node.grad.data();
        double* pg = gx.data();
        for (int64_t nc = 0; nc < N * C; ++nc) {
            double* dst = pg + nc * H * W;
            const double* src = g + nc * Ho * Wo;
            for (int64_t y = 0; y < Ho; ++y)
                for (int64_t xo = 0; xo < Wo; ++xo) {
                    const double v = 0.25 * src[y * Wo + xo];
                    dst[(2 * y) * W + 2 * xo] += v;
                    dst[(2 * y) * W + 2 * xo + 1] += v;
                    dst[(2 * y + 1) * W + 2 * xo] += v;
                    dst[(2 * y + 1) * W + 2 * xo + 1] += v;
                }
        }
        accumulate_grad(x.node(), gx);
    });
}

std::vector<double> gaussian_kernel1d(int ksize, double sigma) {
    if (ksize < 1 || ksize % 2 == 0) throw InvalidParameter("gaussian_kernel1d: odd size required");
    if (sigma <= 0.0) throw InvalidParameter("gaussian_kernel1d: sigma must be positive");
    std::vector<double> k(static_cast<size_t>(ksize));
    const int half = ksize / 2;
    double sum = 0.0;
    for (int i = 0; i < ksize; ++i) {
        const double d = static_cast<double>(i - half);
        k[static_cast<size_t>(i)] = std::exp(-0.5 * d * d / (sigma * sigma));
        sum += k[static_cast<size_t>(i)];
    }
    for (double& v : k) v /= sum;
    return k;
}

namespace {

// Valid 1-D correlation along the last axis: Wo = W - k + 1.
void blur_rows(const double* src, int64_t rows, int64_t W, const std::vector<double>& k,
               double* dst) {
    const int64_t ks = static_cast<int64_t>(k.size());
    const int64_t Wo = W - ks + 1;
    for (int64_t r = 0; r < rows; ++r) {
        const double* s = src + r * W;
        double* d = dst + r * Wo;
        for (int64_t x = 0; x < Wo; ++x) {
            double acc = 0.0;
            for (int64_t i = 0; i < ks; ++i) acc += s[x + i] * k[static_cast<size_t>(i)];
            d[x] = acc;
        }
    }
}

// Adjoint of blur_rows: scatter grad back to the wide axis.
void blur_rows_adjoint(const double* g, int64_t rows, int64_t W, const std::vector<double>& k,
                       double* dst) {
    const int64_t ks = static_cast<int64_t>(k.size());
    const int64_t Wo = W - ks + 1;
    for (int64_t r = 0; r < rows; ++r) {
        const double* s = g + r * Wo;
        double* d = dst + r * W;
        for (int64_t x = 0; x < Wo; ++x) {
            const double gv = s[x];
            for (int64_t i = 0; i < ks; ++i) d[x + i] += gv * k[static_cast<size_t>(i)];
        }
    }
}

// Transpose HxW -> WxH per image plane.
void transpose_plane(const double* src, int64_t H, int64_t W, double* dst) {
    for (int64_t y = 0; y < H; ++y)
        for (int64_t x = 0; x < W; ++x) dst[x * H + y] = src[y * W + x];
}

}  // namespace

Var gaussian_blur_valid(const Var& x, int ksize, double sigma) {
    const Tensor& xv = x.val();
    if (xv.ndim() != 4) throw InvalidInput("gaussian_blur_valid: expected 4-D input");
    const int64_t N = xv.dim(0), C = xv.dim(1), H = xv.dim(2), W = xv.dim(3);
    if (H < ksize || W < ksize)
        throw InvalidInput("gaussian_blur_valid: input smaller than the window");
    const std::vector<double> k = gaussian_kernel1d(ksize, sigma);
    const int64_t Ho = H - ksize + 1, Wo = W - ksize + 1;
    Tensor out({N, C, Ho, Wo});
    std::vector<double> tmp(static_cast<size_t>(H * Wo));
    std::vector<double> tmp_t(static_cast<size_t>(Wo * H));
    std::vector<double> tmp2(static_cast<size_t>(Wo * Ho));
    for (int64_t nc = 0; nc < N * C; ++nc) {
        const double* src = xv.data() + nc * H * W;
        // horizontal pass, then vertical via transpose
        blur_rows(src, H, W, k, tmp.data());
        transpose_plane(tmp.data(), H, Wo, tmp_t.data());
        blur_rows(tmp_t.data(), Wo, H, k, tmp2.data());
        transpose_plane(tmp2.data(), Wo, Ho, out.data() + nc * Ho * Wo);
    }
    return make_op(std::move(out), {x}, [x, k, N, C, H, W, Ho, Wo](Node& node) {
        if (!x.requires_grad()) return;
        Tensor gx(x.shape());
        std::vector<double> g_t(static_cast<size_t>(Wo * Ho));
        std::vector<double> up(static_cast<size_t>(Wo * H), 0.0);
        std::vector<double> up_t(static_cast<size_t>(H * Wo));
        for (int64_t nc = 0; nc < N * C; ++nc) {
            const double* g = node.grad.data() + nc * Ho * Wo;
            transpose_plane(g, Ho, Wo, g_t.data());
            std::fill(up.begin(), up.end(), 0.0);
            blur_rows_adjoint(g_t.data(), Wo, H, k, up.data());
            transpose_plane(up.data(), Wo, H, up_t.data());
            blur_rows_adjoint(up_t.data(), H, W, k, gx.data() + nc * H * W);
        }
        accumulate_grad(x.node(), gx);
    });
}

}  // namespace haze
