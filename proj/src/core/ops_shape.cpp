#include <cstring>

#include "haze/core/ops.hpp"

namespace haze {

Var reshape(const Var& a, std::vector<int64_t> shape) {
    Tensor out = a.val().clone().reshaped(std::move(shape));
    std::vector<int64_t> orig = a.shape();
    return make_op(std::move(out), {a}, [a, orig](Node& node) {
        if (!a.requires_grad()) return;
        accumulate_grad(a.node(), node.grad.reshaped(orig));
    });
}

Var concat(const std::vector<Var>& xs, int dim) {
    if (xs.empty()) throw InvalidInput("concat: empty input list");
    const int ndim = xs[0].val().ndim();
    if (dim < 0 || dim >= ndim) throw InvalidInput("concat: bad dim");
    std::vector<int64_t> shape = xs[0].shape();
    int64_t total = shape[dim];
    for (size_t i = 1; i < xs.size(); ++i) {
        const auto& s = xs[i].shape();
        if (static_cast<int>(s.size()) != ndim) throw InvalidInput("concat: rank mismatch");
        for (int d = 0; d < ndim; ++d)
            if (d != dim && s[d] != shape[static_cast<size_t>(d)])
                throw InvalidInput("concat: shape mismatch");
        total += s[static_cast<size_t>(dim)];
    }
    std::vector<int64_t> out_shape = shape;
    out_shape[static_cast<size_t>(dim)] = total;

    // outer = product of dims before `dim`, inner = product after.
    int64_t outer = 1, inner = 1;
    for (int d = 0; d < dim; ++d) outer *= out_shape[static_cast<size_t>(d)];
    for (int d = dim + 1; d < ndim; ++d) inner *= out_shape[static_cast<size_t>(d)];

    Tensor out(out_shape);
    double* po = out.data();
    const int64_t out_stride = total * inner;
    int64_t offset = 0;
    for (const Var& x : xs) {
        const int64_t cd = x.val().dim(dim);
        const double* px = x.val().data();
        for (int64_t o = 0; o < outer; ++o)
            std::memcpy(po + o * out_stride + offset * inner, px + o * cd * inner,
                        static_cast<size_t>(cd * inner) * sizeof(double));
        offset += cd;
    }

    std::vector<Var> inputs = xs;
    return make_op(std::move(out), inputs, [inputs, dim, outer, inner, total](Node& node) {
        const double* g = node.grad.data();
        const int64_t out_stride = total * inner;
        int64_t offset = 0;
        for (const Var& x : inputs) {
            const int64_t cd = x.val().dim(dim);
            if (x.requires_grad()) {
                Tensor gx(x.shape());
                double* pg = gx.data();
                for (int64_t o = 0; o < outer; ++o)
                    std::memcpy(pg + o * cd * inner, g + o * out_stride + offset * inner,
                                static_cast<size_t>(cd * inner) * sizeof(double));
                accumulate_grad(x.node(), gx);
            }
            offset += cd;
        }
    });
}

Var slice_dim0(const Var& x, int64_t begin, int64_t count) {
    const Tensor& xv = x.val();
    if (begin < 0 || count < 1 || begin + count > xv.dim(0))
        throw InvalidInput("slice_dim0: range out of bounds");
    std::vector<int64_t> shape = xv.shape();
    shape[0] = count;
    const int64_t inner = xv.numel() / xv.dim(0);
    Tensor out(shape);
    std::memcpy(out.data(), xv.data() + begin * inner,
                static_cast<size_t>(count * inner) * sizeof(double));
    return make_op(std::move(out), {x}, [x, begin, count, inner](Node& node) {
        if (!x.requires_grad()) return;
        Tensor gx(x.shape());
        std::memcpy(gx.data() + begin * inner, node.grad.data(),
                    static_cast<size_t>(count * inner) * sizeof(double));
        accumulate_grad(x.node(), gx);
    });
}

namespace {

// Reflected index into [0, n): ... 2 1 | 0 1 2 ... n-1 | n-2 n-3 ...
int64_t reflect_index(int64_t i, int64_t n) {
    if (n == 1) return 0;
    const int64_t period = 2 * (n - 1);
    int64_t m = i % period;
    if (m < 0) m += period;
    return m < n ? m : period - m;
}

}  // namespace

Var reflection_pad2d(const Var& x, int64_t top, int64_t bottom, int64_t left, int64_t right) {
    const Tensor& xv = x.val();
    if (xv.ndim() != 4) throw InvalidInput("reflection_pad2d: expected 4-D input");
    const int64_t N = xv.dim(0), C = xv.dim(1), H = xv.dim(2), W = xv.dim(3);
    if (top < 0 || bottom < 0 || left < 0 || right < 0)
        throw InvalidInput("reflection_pad2d: negative padding");
    // pads wider than the input fall back to periodic reflection
    const int64_t Ho = H + top + bottom, Wo = W + left + right;
    Tensor out({N, C, Ho, Wo});
    const double* px = xv.data();
    double* po = out.data();
    for (int64_t nc = 0; nc < N * C; ++nc) {
        const double* src = px + nc * H * W;
        double* dst = po + nc * Ho * Wo;
        for (int64_t y = 0; y < Ho; ++y) {
            const int64_t sy = reflect_index(y - top, H);
            for (int64_t xpos = 0; xpos < Wo; ++xpos)
                dst[y * Wo + xpos] = src[sy * W + reflect_index(xpos - left, W)];
        }
    }
    return make_op(std::move(out), {x}, [x, top, left, N, C, H, W, Ho, Wo](Node& node) {
        if (!x.requires_grad()) return;
        Tensor gx(x.shape());
        const double* g = node.grad.data();
        double* pg = gx.data();
        for (int64_t nc = 0; nc < N * C; ++nc) {
            double* dst = pg + nc * H * W;
            const double* src = g + nc * Ho * Wo;
            for (int64_t y = 0; y < Ho; ++y) {
                const int64_t sy = reflect_index(y - top, H);
                for (int64_t xpos = 0; xpos < Wo; ++xpos)
                    dst[sy * W + reflect_index(xpos - left, W)] += src[y * Wo + xpos];
            }
        }
        accumulate_grad(x.node(), gx);
    });
}

Var crop2d(const Var& x, int64_t top, int64_t left, int64_t height, int64_t width) {
    const Tensor& xv = x.val();
    if (xv.ndim() != 4) throw InvalidInput("crop2d: expected 4-D input");
    const int64_t N = xv.dim(0), C = xv.dim(1), H = xv.dim(2), W = xv.dim(3);
    if (top < 0 || left < 0 || top + height > H || left + width > W)
        throw InvalidInput("crop2d: window out of bounds");
    Tensor out({N, C, height, width});
    const double* px = xv.data();
    double* po = out.data();
    for (int64_t nc = 0; nc < N * C; ++nc)
        for (int64_t y = 0; y < height; ++y)
            std::memcpy(po + (nc * height + y) * width, px + (nc * H + top + y) * W + left,
                        static_cast<size_t>(width) * sizeof(double));
    return make_op(std::move(out), {x}, [x, top, left, height, width, N, C, H, W](Node& node) {
        if (!x.requires_grad()) return;
        Tensor gx(x.shape());
        const double* g = node.grad.data();
        double* pg = gx.data();
        for (int64_t nc = 0; nc < N * C; ++nc)
            for (int64_t y = 0; y < height; ++y)
                std::memcpy(pg + (nc * H + top + y) * W + left, g + (nc * height + y) * width,
                            static_cast<size_t>(width) * sizeof(double));
        accumulate_grad(x.node(), gx);
    });
}

Var tile_patches(const Var& x, int n) {
    const Tensor& xv = x.val();
    if (xv.ndim() != 4) throw InvalidInput("tile_patches: expected 4-D input");
    if (n < 1) throw InvalidParameter("tile_patches: n must be >= 1");
    const int64_t B = xv.dim(0), C = xv.dim(1), H = xv.dim(2), W = xv.dim(3);
    if (H % n != 0 || W % n != 0)
        throw InvalidInput("tile_patches: spatial size not divisible by n");
    const int64_t ph = H / n, pw = W / n;
    Tensor out({static_cast<int64_t>(n) * n * B, C, ph, pw});
    const double* px = xv.data();
    double* po = out.data();
    for (int64_t b = 0; b < B; ++b)
        for (int64_t pi = 0; pi < n; ++pi)
            for (int64_t pj = 0; pj < n; ++pj) {
                const int64_t op = (b * n + pi) * n + pj;
                for (int64_t c = 0; c < C; ++c)
                    for (int64_t y = 0; y < ph; ++y)
                        std::memcpy(po + ((op * C + c) * ph + y) * pw,
                                    px + ((b * C + c) * H + pi * ph + y) * W + pj * pw,
                                    static_cast<size_t>(pw) * sizeof(double));
            }
    return make_op(std::move(out), {x}, [x, n, B, C, H, W, ph, pw](Node& node) {
        if (!x.requires_grad()) return;
        Tensor gx(x.shape());
        const double* g = node.grad.data();
        double* pg = gx.data();
        for (int64_t b = 0; b < B; ++b)
            for (int64_t pi = 0; pi < n; ++pi)
                for (int64_t pj = 0; pj < n; ++pj) {
                    const int64_t op = (b * n + pi) * n + pj;
                    for (int64_t c = 0; c < C; ++c)
                        for (int64_t y = 0; y < ph; ++y)
                            std::memcpy(pg + ((b * C + c) * H + pi * ph + y) * W + pj * pw,
                                        g + ((op * C + c) * ph + y) * pw,
                                        static_cast<size_t>(pw) * sizeof(double));
                }
        accumulate_grad(x.node(), gx);
    });
}

Var untile_patches(const Var& p, int n) {
    const Tensor& pv = p.val();
    if (pv.ndim() != 4) throw InvalidInput("untile_patches: expected 4-D input");
    if (n < 1) throw InvalidParameter("untile_patches: n must be >= 1");
    const int64_t NP = pv.dim(0), C = pv.dim(1), ph = pv.dim(2), pw = pv.dim(3);
    if (NP % (static_cast<int64_t>(n) * n) != 0)
        throw InvalidInput("untile_patches: batch not divisible by n^2");
    const int64_t B = NP / (static_cast<int64_t>(n) * n);
    const int64_t H = ph * n, W = pw * n;
    Tensor out({B, C, H, W});
    const double* px = pv.data();
    double* po = out.data();
    for (int64_t b = 0; b < B; ++b)
        for (int64_t pi = 0; pi < n; ++pi)
            for (int64_t pj = 0; pj < n; ++pj) {
                const int64_t op = (b * n + pi) * n + pj;
                for (int64_t c = 0; c < C; ++c)
                    for (int64_t y = 0; y < ph; ++y)
                        std::memcpy(po + ((b * C + c) * H + pi * ph + y) * W + pj * pw,
                                    px + ((op * C + c) * ph + y) * pw,
                                    static_cast<size_t>(pw) * sizeof(double));
            }
    return make_op(std::move(out), {p}, [p, n, B, C, H, W, ph, pw](Node& node) {
        if (!p.requires_grad()) return;
        Tensor gp(p.shape());
        const double* g = node.grad.data();
        double* pg = gp.data();
        for (int64_t b = 0; b < B; ++b)
            for (int64_t pi = 0; pi < n; ++pi)
                for (int64_t pj = 0; pj < n; ++pj) {
                    const int64_t op = (b * n + pi) * n + pj;
                    for (int64_t c = 0; c < C; ++c)
                        for (int64_t y = 0; y < ph; ++y)
                            std::memcpy(pg + ((op * C + c) * ph + y) * pw,
                                        g + ((b * C + c) * H + pi * ph + y) * W + pj * pw,
                                        static_cast<size_t>(pw) * sizeof(double));
                }
        accumulate_grad(p.node(), gp);
    });
}

}  // namespace haze
