#include <cblas.h>

#include <cstring>

#include "haze/core/ops.hpp"

namespace haze {

namespace {

struct ConvDims {
    int64_t N, Ci, H, W, Co, kh, kw, Ho, Wo;
    int stride, pad, dilation;
};

int64_t conv_out_size(int64_t in, int64_t k, int stride, int pad, int dilation) {
    return (in + 2 * pad - dilation * (k - 1) - 1) / stride + 1;
}

// col: (Ci*kh*kw) x (Ho*Wo), zero-padded borders.
void im2col(const double* src, const ConvDims& d, double* col) {
    const int64_t HoWo = d.Ho * d.Wo;
    for (int64_t c = 0; c < d.Ci; ++c)
        for (int64_t ky = 0; ky < d.kh; ++ky)
            for (int64_t kx = 0; kx < d.kw; ++kx) {
                double* row = col + ((c * d.kh + ky) * d.kw + kx) * HoWo;
                for (int64_t oy = 0; oy < d.Ho; ++oy) {
                    const int64_t iy = oy * d.stride - d.pad + ky * d.dilation;
                    if (iy < 0 || iy >= d.H) {
                        std::memset(row + oy * d.Wo, 0, static_cast<size_t>(d.Wo) * sizeof(double));
                        continue;
                    }
                    const double* srow = src + (c * d.H + iy) * d.W;
                    for (int64_t ox = 0; ox < d.Wo; ++ox) {
                        const int64_t ix = ox * d.stride - d.pad + kx * d.dilation;
                        row[oy * d.Wo + ox] = (ix >= 0 && ix < d.W) ? srow[ix] : 0.0;
                    }
                }
            }
}

// Scatter-add of a col matrix back to the image.
void col2im(const double* col, const ConvDims& d, double* dst) {
    const int64_t HoWo = d.Ho * d.Wo;
    for (int64_t c = 0; c < d.Ci; ++c)
        for (int64_t ky = 0; ky < d.kh; ++ky)
            for (int64_t kx = 0; kx < d.kw; ++kx) {
                const double* row = col + ((c * d.kh + ky) * d.kw + kx) * HoWo;
                for (int64_t oy = 0; oy < d.Ho; ++oy) {
                    const int64_t iy = oy * d.stride - d.pad + ky * d.dilation;
                    if (iy < 0 || iy >= d.H) continue;
                    double* drow = dst + (c * d.H + iy) * d.W;
                    for (int64_t ox = 0; ox < d.Wo; ++ox) {
                        const int64_t ix = ox * d.stride - d.pad + kx * d.dilation;
                        if (ix >= 0 && ix < d.W) drow[ix] += row[oy * d.Wo + ox];
                    }
                }
            }
}

void gemm(bool ta, bool tb, int64_t m, int64_t n, int64_t k, double alpha, const double* A,
          int64_t lda, const double* B, int64_t ldb, double beta, double* C, int64_t ldc) {
    cblas_dgemm(CblasRowMajor, ta ? CblasTrans : CblasNoTrans, tb ? CblasTrans : CblasNoTrans,
                static_cast<int>(m), static_cast<int>(n), static_cast<int>(k), alpha, A,
                static_cast<int>(lda), B, static_cast<int>(ldb), beta, C, static_cast<int>(ldc));
}

}  // namespace

Var linear(const Var& x, const Var& w, const Var& b) {
    const Tensor& xv = x.val();
    const Tensor& wv = w.val();
    if (xv.ndim() != 2 || wv.ndim() != 2) throw InvalidInput("linear: expected 2-D x and w");
    const int64_t N = xv.dim(0), Ci = xv.dim(1), Co = wv.dim(0);
    if (wv.dim(1) != Ci)
        throw InvalidInput("linear: weight expects " + std::to_string(wv.dim(1)) +
                           " input features, got " + std::to_string(Ci));
    Tensor out({N, Co});
    if (MacCounter::active()) {
        MacCounter::add(N * Co * Ci);
    } else {
        gemm(false, true, N, Co, Ci, 1.0, xv.data(), Ci, wv.data(), Ci, 0.0, out.data(), Co);
    }
    if (b.defined()) {
        const double* pb = b.val().data();
        double* po = out.data();
        for (int64_t i = 0; i < N; ++i)
            for (int64_t j = 0; j < Co; ++j) po[i * Co + j] += pb[j];
    }
    return make_op(std::move(out), {x, w, b}, [x, w, b, N, Ci, Co](Node& node) {
        const double* g = node.grad.data();
        if (x.requires_grad()) {
            Tensor gx(x.shape());
            gemm(false, false, N, Ci, Co, 1.0, g, Co, w.val().data(), Ci, 0.0, gx.data(), Ci);
            accumulate_grad(x.node(), gx);
        }
        if (w.requires_grad()) {
            Tensor gw(w.shape());
            gemm(true, false, Co, Ci, N, 1.0, g, Co, x.val().data(), Ci, 0.0, gw.data(), Ci);
            accumulate_grad(w.node(), gw);
        }
        if (b.defined() && b.requires_grad()) {
            Tensor gb(b.shape());
            double* pg = gb.data();
            for (int64_t i = 0; i < N; ++i)
                for (int64_t j = 0; j < Co; ++j) pg[j] += g[i * Co + j];
            accumulate_grad(b.node(), gb);
        }
    });
}

Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad, int dilation) {
    const Tensor& xv = x.val();
    const Tensor& wv = w.val();
    if (xv.ndim() != 4 || wv.ndim() != 4) throw InvalidInput("conv2d: expected 4-D x and w");
    if (stride < 1 || dilation < 1 || pad < 0) throw InvalidParameter("conv2d: bad geometry");
    ConvDims d;
    d.N = xv.dim(0);
    d.Ci = xv.dim(1);
    d.H = xv.dim(2);
    d.W = xv.dim(3);
    d.Co = wv.dim(0);
    d.kh = wv.dim(2);
    d.kw = wv.dim(3);
    d.stride = stride;
    d.pad = pad;
    d.dilation = dilation;
    if (wv.dim(1) != d.Ci)
        throw InvalidInput("conv2d: channel mismatch: input has " + std::to_string(d.Ci) +
                           ", weight expects " + std::to_string(wv.dim(1)));
    d.Ho = conv_out_size(d.H, d.kh, stride, pad, dilation);
    d.Wo = conv_out_size(d.W, d.kw, stride, pad, dilation);
    if (d.Ho < 1 || d.Wo < 1) throw InvalidInput("conv2d: output would be empty");

    const int64_t K = d.Ci * d.kh * d.kw;
    const int64_t HoWo = d.Ho * d.Wo;
    Tensor out({d.N, d.Co, d.Ho, d.Wo});

    if (MacCounter::active()) {
        MacCounter::add(d.N * d.Co * K * HoWo);
    } else {
        std::vector<double> col(static_cast<size_t>(K * HoWo));
        for (int64_t n = 0; n < d.N; ++n) {
            im2col(xv.data() + n * d.Ci * d.H * d.W, d, col.data());
            gemm(false, false, d.Co, HoWo, K, 1.0, wv.data(), K, col.data(), HoWo, 0.0,
                 out.data() + n * d.Co * HoWo, HoWo);
        }
        if (b.defined()) {
            const double* pb = b.val().data();
            double* po = out.data();
            for (int64_t n = 0; n < d.N; ++n)
                for (int64_t c = 0; c < d.Co; ++c) {
                    const double bias = pb[c];
                    double* row = po + (n * d.Co + c) * HoWo;
                    for (int64_t i = 0; i < HoWo; ++i) row[i] += bias;
                }
        }
    }

    return make_op(std::move(out), {x, w, b}, [x, w, b, d, K, HoWo](Node& node) {
        const double* g = node.grad.data();
        std::vector<double> col(static_cast<size_t>(K * HoWo));
        Tensor gx, gw;
        if (x.requires_grad()) gx = Tensor(x.shape());
        if (w.requires_grad()) gw = Tensor(w.shape());
        for (int64_t n = 0; n < d.N; ++n) {
            const double* gn = g + n * d.Co * HoWo;
            if (w.requires_grad()) {
                im2col(x.val().data() + n * d.Ci * d.H * d.W, d, col.data());
                gemm(false, true, d.Co, K, HoWo, 1.0, gn, HoWo, col.data(), HoWo, 1.0, gw.data(),
                     K);
            }
            if (x.requires_grad()) {
                gemm(true, false, K, HoWo, d.Co, 1.0, w.val().data(), K, gn, HoWo, 0.0, col.data(),
                     HoWo);
                col2im(col.data(), d, gx.data() + n * d.Ci * d.H * d.W);
            }
        }
        if (x.requires_grad()) accumulate_grad(x.node(), gx);
        if (w.requires_grad()) accumulate_grad(w.node(), gw);
        if (b.defined() && b.requires_grad()) {
            Tensor gb(b.shape());
            double* pg = gb.data();
            for (int64_t n = 0; n < d.N; ++n)
                for (int64_t c = 0; c < d.Co; ++c) {
                    const double* row = g + (n * d.Co + c) * HoWo;
                    double acc = 0.0;
                    for (int64_t i = 0; i < HoWo; ++i) acc += row[i];
                    pg[c] += acc;
                }
            accumulate_grad(b.node(), gb);
        }
    });
}

Var conv_transpose2d(const Var& x, const Var& w, const Var& b, int stride, int pad, int out_pad) {
    const Tensor& xv = x.val();
    const Tensor& wv = w.val();
    if (xv.ndim() != 4 || wv.ndim() != 4)
        throw InvalidInput("conv_transpose2d: expected 4-D x and w");
    if (stride < 1 || pad < 0 || out_pad < 0 || out_pad >= stride)
        throw InvalidParameter("conv_transpose2d: bad geometry");
    const int64_t N = xv.dim(0), Ci = xv.dim(1), h = xv.dim(2), wd = xv.dim(3);
    const int64_t Co = wv.dim(1), kh = wv.dim(2), kw = wv.dim(3);
    if (wv.dim(0) != Ci)
        throw InvalidInput("conv_transpose2d: channel mismatch: input has " + std::to_string(Ci) +
                           ", weight expects " + std::to_string(wv.dim(0)));
    const int64_t H = (h - 1) * stride - 2 * pad + kh + out_pad;
    const int64_t W = (wd - 1) * stride - 2 * pad + kw + out_pad;
    if (H < 1 || W < 1) throw InvalidInput("conv_transpose2d: output would be empty");

    // Geometry of the equivalent forward conv (output -> input).
    ConvDims d;
    d.N = N;
    d.Ci = Co;
    d.H = H;
    d.W = W;
    d.Co = Ci;
    d.kh = kh;
    d.kw = kw;
    d.Ho = h;
    d.Wo = wd;
    d.stride = stride;
    d.pad = pad;
    d.dilation = 1;

    const int64_t K = Co * kh * kw;
    const int64_t hw = h * wd;
    Tensor out({N, Co, H, W});

    if (MacCounter::active()) {
        MacCounter::add(N * Ci * K * hw);
    } else {
        std::vector<double> col(static_cast<size_t>(K * hw));
        for (int64_t n = 0; n < N; ++n) {
            // col = W^T (K x Ci) * x_n (Ci x hw)
            gemm(true, false, K, hw, Ci, 1.0, wv.data(), K, xv.data() + n * Ci * hw, hw, 0.0,
                 col.data(), hw);
            col2im(col.data(), d, out.data() + n * Co * H * W);
        }
        if (b.defined()) {
            const double* pb = b.val().data();
            double* po = out.data();
            const int64_t HW = H * W;
            for (int64_t n = 0; n < N; ++n)
                for (int64_t c = 0; c < Co; ++c) {
                    const double bias = pb[c];
                    double* row = po + (n * Co + c) * HW;
                    for (int64_t i = 0; i < HW; ++i) row[i] += bias;
                }
        }
    }

    return make_op(std::move(out), {x, w, b}, [x, w, b, d, K, hw, N, Ci, Co, H, W](Node& node) {
        const double* g = node.grad.data();
        std::vector<double> col(static_cast<size_t>(K * hw));
        Tensor gx, gw;
        if (x.requires_grad()) gx = Tensor(x.shape());
        if (w.requires_grad()) gw = Tensor(w.shape());
        for (int64_t n = 0; n < N; ++n) {
            im2col(g + n * Co * H * W, d, col.data());
            if (x.requires_grad()) {
                // gx_n (Ci x hw) = W (Ci x K) * col (K x hw)
                gemm(false, false, Ci, hw, K, 1.0, w.val().data(), K, col.data(), hw, 0.0,
                     gx.data() + n * Ci * hw, hw);
            }
            if (w.requires_grad()) {
                // gw (Ci x K) += x_n (Ci x hw) * col^T (hw x K)
                gemm(false, true, Ci, K, hw, 1.0, x.val().data() + n * Ci * hw, hw, col.data(), hw,
                     1.0, gw.data(), K);
            }
        }
        if (x.requires_grad()) accumulate_grad(x.node(), gx);
        if (w.requires_grad()) accumulate_grad(w.node(), gw);
        if (b.defined() && b.requires_grad()) {
            Tensor gb(b.shape());
            double* pg = gb.data();
            const int64_t HW = H * W;
            for (int64_t n = 0; n < N; ++n)
                for (int64_t c = 0; c < Co; ++c) {
                    const double* row = g + (n * Co + c) * HW;
                    double acc = 0.0;
                    for (int64_t i = 0; i < HW; ++i) acc += row[i];
                    pg[c] += acc;
                }
            accumulate_grad(b.node(), gb);
        }
    });
}

}  // namespace haze
