#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "haze/core/nn.hpp"
#include "haze/core/ops.hpp"
#include "haze/core/optim.hpp"
#include "haze/core/rng.hpp"
#include "support/gradcheck.hpp"

using namespace haze;
using haze::testing::compare_grads;
using haze::testing::numeric_grad;

namespace {

Tensor random_tensor(std::vector<int64_t> shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Tensor t(std::move(shape));
    for (int64_t i = 0; i < t.numel(); ++i) t(i) = rng.uniform(lo, hi);
    return t;
}

// Projects out to a scalar with fixed random weights so every element of the
// gradient is exercised.
double project_loss(const Var& out, const Tensor& proj) {
    Var p(proj, false);
    return sum_all(mul(out, p)).val()(0);
}

// Central differences sample f at x +- h; keep inputs away from kinks.
void nudge_away_from(Tensor& t, std::initializer_list<double> kinks, double margin = 5e-3) {
    for (int64_t i = 0; i < t.numel(); ++i)
        for (double k : kinks)
            if (std::fabs(t(i) - k) < margin) t(i) = k + (t(i) >= k ? margin : -margin) * 2.0;
}

void check_unary(const std::function<Var(const Var&)>& op, double lo, double hi,
                 std::initializer_list<double> kinks = {}, double rtol = 1e-5) {
    Rng rng(42);
    Tensor x = random_tensor({2, 3, 4, 5}, rng, lo, hi);
    nudge_away_from(x, kinks);
    Tensor proj = random_tensor({2, 3, 4, 5}, rng);
    Var vx(x, true);
    auto f = [&]() { return project_loss(op(vx), proj); };
    Var loss = sum_all(mul(op(vx), Var(proj, false)));
    loss.backward();
    auto cmp = compare_grads(vx.grad(), numeric_grad(f, x), rtol);
    CHECK(cmp.ok);
}

}  // namespace

TEST_CASE("elementwise gradients match finite differences") {
    check_unary([](const Var& v) { return relu(v); }, -1.0, 1.0, {0.0});
    check_unary([](const Var& v) { return leaky_relu(v, 0.2); }, -1.0, 1.0, {0.0});
    check_unary([](const Var& v) { return sigmoid(v); }, -2.0, 2.0);
    check_unary([](const Var& v) { return abs_val(v); }, -1.0, 1.0, {0.0});
    check_unary([](const Var& v) { return square(v); }, -1.0, 1.0);
    check_unary([](const Var& v) { return pow_scalar(v, 0.7); }, 0.2, 1.5);
    check_unary([](const Var& v) { return add_scalar(mul_scalar(v, 2.5), 0.3); }, -1.0, 1.0);
    check_unary([](const Var& v) { return clamp(v, -0.5, 0.5); }, -1.0, 1.0, {-0.5, 0.5});
    check_unary([](const Var& v) { return clamp_min(v, 0.25); }, -1.0, 1.0, {0.25});
}

TEST_CASE("binary op gradients") {
    Rng rng(7);
    Tensor a = random_tensor({3, 4}, rng, 0.5, 2.0);
    Tensor b = random_tensor({3, 4}, rng, 0.5, 2.0);
    Tensor proj = random_tensor({3, 4}, rng);
    Var va(a, true), vb(b, true);

    for (int which = 0; which < 4; ++which) {
        auto apply = [&]() {
            switch (which) {
                case 0: return add(va, vb);
                case 1: return sub(va, vb);
                case 2: return mul(va, vb);
                default: return div(va, vb);
            }
        };
        Var loss = sum_all(mul(apply(), Var(proj, false)));
        va.zero_grad();
        vb.zero_grad();
        loss.backward();
        auto fa = [&]() { return project_loss(apply(), proj); };
        CHECK(compare_grads(va.grad(), numeric_grad(fa, a), 1e-4).ok);
        CHECK(compare_grads(vb.grad(), numeric_grad(fa, b), 1e-4).ok);
    }
}

TEST_CASE("broadcast multiply gradients") {
    Rng rng(11);
    Tensor x = random_tensor({2, 4, 3, 3}, rng);
    Tensor proj = random_tensor({2, 4, 3, 3}, rng);

    SUBCASE("per channel") {
        Tensor s = random_tensor({2, 4}, rng);
        Var vx(x, true), vs(s, true);
        Var loss = sum_all(mul(mul_channel(vx, vs), Var(proj, false)));
        loss.backward();
        auto f = [&]() { return project_loss(mul_channel(vx, vs), proj); };
        CHECK(compare_grads(vx.grad(), numeric_grad(f, x), 1e-6).ok);
        CHECK(compare_grads(vs.grad(), numeric_grad(f, s), 1e-6).ok);
    }
    SUBCASE("per sample") {
        Tensor s = random_tensor({2, 1}, rng);
        Var vx(x, true), vs(s, true);
        Var loss = sum_all(mul(mul_sample(vx, vs), Var(proj, false)));
        loss.backward();
        auto f = [&]() { return project_loss(mul_sample(vx, vs), proj); };
        CHECK(compare_grads(vx.grad(), numeric_grad(f, x), 1e-6).ok);
        CHECK(compare_grads(vs.grad(), numeric_grad(f, s), 1e-6).ok);
    }
    SUBCASE("per pixel") {
        Tensor m = random_tensor({2, 1, 3, 3}, rng);
        Var vx(x, true), vm(m, true);
        Var loss = sum_all(mul(mul_pixel(vx, vm), Var(proj, false)));
        loss.backward();
        auto f = [&]() { return project_loss(mul_pixel(vx, vm), proj); };
        CHECK(compare_grads(vx.grad(), numeric_grad(f, x), 1e-6).ok);
        CHECK(compare_grads(vm.grad(), numeric_grad(f, m), 1e-6).ok);
    }
}

TEST_CASE("reduction gradients and values") {
    Rng rng(13);
    Tensor a = random_tensor({2, 3, 4, 4}, rng, 0.0, 1.0);
    Tensor b = random_tensor({2, 3, 4, 4}, rng, 1.5, 2.5);  // keeps |a-b| away from 0
    Var va(a, true), vb(b, false);

    SUBCASE("l1") {
        Var loss = l1_loss(va, vb);
        loss.backward();
        auto f = [&]() { return l1_loss(va, vb).val()(0); };
        CHECK(compare_grads(va.grad(), numeric_grad(f, a), 1e-6).ok);
    }
    SUBCASE("smooth l1 values") {
        Tensor p({1, 1, 1, 1}), q({1, 1, 1, 1});
        p(0) = 0.5;
        q(0) = 0.0;
        CHECK(smooth_l1_loss(Var(p), Var(q), 1.0).val()(0) == doctest::Approx(0.125));
        p(0) = 2.0;
        CHECK(smooth_l1_loss(Var(p), Var(q), 1.0).val()(0) == doctest::Approx(1.5));
        CHECK(smooth_l1_loss(Var(q), Var(q), 1.0).val()(0) == 0.0);
    }
    SUBCASE("smooth l1 gradient, both branches") {
        // quadratic branch: |d| < 1
        Tensor c = random_tensor({2, 3, 4, 4}, rng, 0.3, 0.9);
        Var vc(c, true);
        Var ql = smooth_l1_loss(vc, Var(Tensor({2, 3, 4, 4}, 0.0)), 1.0);
        ql.backward();
        auto fq = [&]() {
            return smooth_l1_loss(vc, Var(Tensor({2, 3, 4, 4}, 0.0)), 1.0).val()(0);
        };
        CHECK(compare_grads(vc.grad(), numeric_grad(fq, c), 1e-5).ok);
        // linear branch: |d| > 1 everywhere
        Tensor e = random_tensor({2, 3, 4, 4}, rng, 2.2, 3.0);
        Var ve(e, false);
        Tensor a2 = random_tensor({2, 3, 4, 4}, rng, 0.0, 1.0);
        Var va2(a2, true);
        Var loss = smooth_l1_loss(va2, ve, 1.0);
        loss.backward();
        auto f = [&]() { return smooth_l1_loss(va2, ve, 1.0).val()(0); };
        CHECK(compare_grads(va2.grad(), numeric_grad(f, a2), 1e-5).ok);
    }
    SUBCASE("means") {
        Var loss = mean_all(va);
        loss.backward();
        CHECK(va.grad()(0) == doctest::Approx(1.0 / 96.0));
        Var g = global_avg_pool(va);
        CHECK(g.shape() == std::vector<int64_t>{2, 3});
        double manual = 0.0;
        for (int64_t i = 0; i < 16; ++i) manual += a(i);
        CHECK(g.val()(0, 0) == doctest::Approx(manual / 16.0));
    }
}

TEST_CASE("shape op roundtrips and gradients") {
    Rng rng(17);
    Tensor x = random_tensor({2, 3, 6, 6}, rng);

    SUBCASE("concat/slice") {
        Tensor y = random_tensor({2, 2, 6, 6}, rng);
        Var vx(x, true), vy(y, true);
        Var c = concat({vx, vy}, 1);
        CHECK(c.shape() == std::vector<int64_t>{2, 5, 6, 6});
        Tensor proj = random_tensor({2, 5, 6, 6}, rng);
        Var loss = sum_all(mul(c, Var(proj, false)));
        loss.backward();
        auto f = [&]() { return project_loss(concat({vx, vy}, 1), proj); };
        CHECK(compare_grads(vx.grad(), numeric_grad(f, x), 1e-6).ok);
        CHECK(compare_grads(vy.grad(), numeric_grad(f, y), 1e-6).ok);
    }
    SUBCASE("reflection pad then crop recovers input") {
        Var vx(x, true);
        Var padded = reflection_pad2d(vx, 2, 1, 3, 2);
        CHECK(padded.shape() == std::vector<int64_t>{2, 3, 9, 11});
        Var back = crop2d(padded, 2, 3, 6, 6);
        for (int64_t i = 0; i < x.numel(); ++i) CHECK(back.val()(i) == x(i));
        Tensor proj = random_tensor({2, 3, 9, 11}, rng);
        Var loss = sum_all(mul(reflection_pad2d(vx, 2, 1, 3, 2), Var(proj, false)));
        loss.backward();
        auto f = [&]() { return project_loss(reflection_pad2d(vx, 2, 1, 3, 2), proj); };
        CHECK(compare_grads(vx.grad(), numeric_grad(f, x), 1e-6).ok);
    }
    SUBCASE("tile/untile are exact inverses") {
        Var vx(x, false);
        for (int n : {1, 2, 3}) {
            Var tiled = tile_patches(vx, n);
            CHECK(tiled.dim(0) == 2 * n * n);
            CHECK(tiled.dim(2) == 6 / n);
            Var back = untile_patches(tiled, n);
            for (int64_t i = 0; i < x.numel(); ++i) CHECK(back.val()(i) == x(i));
        }
    }
}

namespace {

// Direct conv reference, zero padding.
Tensor naive_conv2d(const Tensor& x, const Tensor& w, const Tensor& b, int stride, int pad,
                    int dilation) {
    const int64_t N = x.dim(0), Ci = x.dim(1), H = x.dim(2), W = x.dim(3);
    const int64_t Co = w.dim(0), kh = w.dim(2), kw = w.dim(3);
    const int64_t Ho = (H + 2 * pad - dilation * (kh - 1) - 1) / stride + 1;
    const int64_t Wo = (W + 2 * pad - dilation * (kw - 1) - 1) / stride + 1;
    Tensor out({N, Co, Ho, Wo});
    for (int64_t n = 0; n < N; ++n)
        for (int64_t co = 0; co < Co; ++co)
            for (int64_t oy = 0; oy < Ho; ++oy)
                for (int64_t ox = 0; ox < Wo; ++ox) {
                    double acc = b.defined() ? b(co) : 0.0;
                    for (int64_t ci = 0; ci < Ci; ++ci)
                        for (int64_t ky = 0; ky < kh; ++ky)
                            for (int64_t kx = 0; kx < kw; ++kx) {
                                const int64_t iy = oy * stride - pad + ky * dilation;
                                const int64_t ix = ox * stride - pad + kx * dilation;
                                if (iy >= 0 && iy < H && ix >= 0 && ix < W)
                                    acc += x(n, ci, iy, ix) * w(co, ci, ky, kx);
                            }
                    out(n, co, oy, ox) = acc;
                }
    return out;
}

}  // namespace

TEST_CASE("conv2d matches naive reference and finite differences") {
    Rng rng(23);
    for (auto [stride, pad, dilation] :
         std::vector<std::tuple<int, int, int>>{{1, 1, 1}, {2, 1, 1}, {1, 2, 2}, {1, 3, 3}}) {
        Tensor x = random_tensor({2, 3, 7, 8}, rng);
        Tensor w = random_tensor({4, 3, 3, 3}, rng, -0.5, 0.5);
        Tensor b = random_tensor({4}, rng, -0.2, 0.2);
        Var vx(x, true), vw(w, true), vb(b, true);
        Var out = conv2d(vx, vw, vb, stride, pad, dilation);
        Tensor ref = naive_conv2d(x, w, b, stride, pad, dilation);
        REQUIRE(out.val().same_shape(ref));
        for (int64_t i = 0; i < ref.numel(); ++i)
            CHECK(out.val()(i) == doctest::Approx(ref(i)).epsilon(1e-12));

        Tensor proj = random_tensor(ref.shape(), rng);
        Var loss = sum_all(mul(out, Var(proj, false)));
        loss.backward();
        auto f = [&]() { return project_loss(conv2d(vx, vw, vb, stride, pad, dilation), proj); };
        CHECK(compare_grads(vx.grad(), numeric_grad(f, x), 1e-5).ok);
        CHECK(compare_grads(vw.grad(), numeric_grad(f, w), 1e-5).ok);
        CHECK(compare_grads(vb.grad(), numeric_grad(f, b), 1e-5).ok);
    }
}

TEST_CASE("conv_transpose2d shapes, adjoint property, finite differences") {
    Rng rng(29);
    Tensor x = random_tensor({2, 3, 5, 6}, rng);
    Tensor w = random_tensor({3, 4, 4, 4}, rng, -0.5, 0.5);
    Tensor b = random_tensor({4}, rng, -0.2, 0.2);
    Var vx(x, true), vw(w, true), vb(b, true);
    Var out = conv_transpose2d(vx, vw, vb, 2, 1, 0);
    CHECK(out.shape() == std::vector<int64_t>{2, 4, 10, 12});

    Tensor proj = random_tensor(out.val().shape(), rng);
    Var loss = sum_all(mul(out, Var(proj, false)));
    loss.backward();
    auto f = [&]() { return project_loss(conv_transpose2d(vx, vw, vb, 2, 1, 0), proj); };
    CHECK(compare_grads(vx.grad(), numeric_grad(f, x), 1e-5).ok);
    CHECK(compare_grads(vw.grad(), numeric_grad(f, w), 1e-5).ok);
    CHECK(compare_grads(vb.grad(), numeric_grad(f, b), 1e-5).ok);

    SUBCASE("3x3 stride-2 with output padding doubles the size") {
        Tensor w3 = random_tensor({3, 2, 3, 3}, rng);
        Var o = conv_transpose2d(Var(x), Var(w3), Var(), 2, 1, 1);
        CHECK(o.shape() == std::vector<int64_t>{2, 2, 10, 12});
    }
}

TEST_CASE("linear layer gradient") {
    Rng rng(31);
    Tensor x = random_tensor({5, 4}, rng);
    Tensor w = random_tensor({3, 4}, rng);
    Tensor b = random_tensor({3}, rng);
    Var vx(x, true), vw(w, true), vb(b, true);
    Tensor proj = random_tensor({5, 3}, rng);
    Var loss = sum_all(mul(linear(vx, vw, vb), Var(proj, false)));
    loss.backward();
    auto f = [&]() { return project_loss(linear(vx, vw, vb), proj); };
    CHECK(compare_grads(vx.grad(), numeric_grad(f, x), 1e-6).ok);
    CHECK(compare_grads(vw.grad(), numeric_grad(f, w), 1e-6).ok);
    CHECK(compare_grads(vb.grad(), numeric_grad(f, b), 1e-6).ok);
}

TEST_CASE("pooling and blur") {
    Rng rng(37);
    SUBCASE("avg_pool2 gradient") {
        Tensor x = random_tensor({1, 2, 6, 6}, rng);
        Var vx(x, true);
        Tensor proj = random_tensor({1, 2, 3, 3}, rng);
        Var loss = sum_all(mul(avg_pool2(vx), Var(proj, false)));
        loss.backward();
        auto f = [&]() { return project_loss(avg_pool2(vx), proj); };
        CHECK(compare_grads(vx.grad(), numeric_grad(f, x), 1e-6).ok);
    }
    SUBCASE("gaussian blur matches direct window sum and gradcheck") {
        Tensor x = random_tensor({1, 1, 14, 15}, rng);
        Var vx(x, true);
        Var out = gaussian_blur_valid(vx, 11, 1.5);
        CHECK(out.shape() == std::vector<int64_t>{1, 1, 4, 5});
        auto k = gaussian_kernel1d(11, 1.5);
        double direct = 0.0;  // window at (1,2)
        for (int dy = 0; dy < 11; ++dy)
            for (int dx = 0; dx < 11; ++dx)
                direct += x(0, 0, 1 + dy, 2 + dx) * k[size_t(dy)] * k[size_t(dx)];
        CHECK(out.val()(0, 0, 1, 2) == doctest::Approx(direct).epsilon(1e-12));

        Tensor proj = random_tensor({1, 1, 4, 5}, rng);
        Var loss = sum_all(mul(gaussian_blur_valid(vx, 11, 1.5), Var(proj, false)));
        loss.backward();
        auto f = [&]() { return project_loss(gaussian_blur_valid(vx, 11, 1.5), proj); };
        CHECK(compare_grads(vx.grad(), numeric_grad(f, x), 1e-6).ok);
    }
}

TEST_CASE("fft ops: roundtrip and gradients") {
    Rng rng(41);
    Tensor x = random_tensor({2, 3, 6, 5}, rng);
    SUBCASE("ifft(fft(x)) == x") {
        Var vx(x, false);
        Var back = ifft2c_real(fft2c(vx));
        double max_err = 0.0;
        for (int64_t i = 0; i < x.numel(); ++i)
            max_err = std::max(max_err, std::fabs(back.val()(i) - x(i)));
        CHECK(max_err < 1e-12);
    }
    SUBCASE("fft2c gradient") {
        Var vx(x, true);
        Tensor proj = random_tensor({2, 6, 6, 5}, rng);
        Var loss = sum_all(mul(fft2c(vx), Var(proj, false)));
        loss.backward();
        auto f = [&]() { return project_loss(fft2c(vx), proj); };
        CHECK(compare_grads(vx.grad(), numeric_grad(f, x), 1e-5).ok);
    }
    SUBCASE("ifft2c_real gradient") {
        Tensor y = random_tensor({1, 4, 4, 5}, rng);
        Var vy(y, true);
        Tensor proj = random_tensor({1, 2, 4, 5}, rng);
        Var loss = sum_all(mul(ifft2c_real(vy), Var(proj, false)));
        loss.backward();
        auto f = [&]() { return project_loss(ifft2c_real(vy), proj); };
        CHECK(compare_grads(vy.grad(), numeric_grad(f, y), 1e-5).ok);
    }
}

TEST_CASE("grad accumulates when a value is used twice") {
    Tensor x({2, 2}, 0.0);
    x(0) = 1.0;
    x(1) = 2.0;
    x(2) = -1.0;
    x(3) = 0.5;
    Var vx(x, true);
    Var loss = sum_all(mul(vx, vx));  // d/dx sum(x^2) = 2x
    loss.backward();
    for (int64_t i = 0; i < 4; ++i) CHECK(vx.grad()(i) == doctest::Approx(2.0 * x(i)));
}

TEST_CASE("detach stops gradients") {
    Tensor x({3}, 2.0);
    Var vx(x, true);
    Var y = mul(vx.detach(), vx);
    sum_all(y).backward();
    for (int64_t i = 0; i < 3; ++i) CHECK(vx.grad()(i) == doctest::Approx(2.0));
}

TEST_CASE("NoGradGuard produces graph-free results") {
    Tensor x({3}, 1.0);
    Var vx(x, true);
    NoGradGuard guard;
    Var y = mul(vx, vx);
    CHECK_FALSE(y.requires_grad());
}

TEST_CASE("adam converges on a quadratic") {
    Tensor x({4}, 5.0);
    Var vx(x, true);
    Adam opt({vx});
    for (int i = 0; i < 400; ++i) {
        opt.zero_grad();
        Var loss = sum_all(mul(vx, vx));
        loss.backward();
        opt.step(0.1);
    }
    for (int64_t i = 0; i < 4; ++i) CHECK(std::fabs(vx.val()(i)) < 1e-2);
}

TEST_CASE("cosine lr endpoints and midpoint") {
    CHECK(cosine_lr(1e-4, 1e-6, 0, 100) == doctest::Approx(1e-4).epsilon(1e-12));
    CHECK(cosine_lr(1e-4, 1e-6, 100, 100) == doctest::Approx(1e-6).epsilon(1e-12));
    CHECK(cosine_lr(1e-4, 1e-6, 50, 100) == doctest::Approx((1e-4 + 1e-6) / 2).epsilon(1e-9));
}

TEST_CASE("mac counter: analytic conv cost") {
    Rng rng(43);
    Tensor x({1, 3, 8, 8});
    Tensor w = init_conv_weight(rng, 16, 3, 3, 3);
    int64_t macs = 0;
    {
        NoGradGuard ng;
        MacCountGuard guard;
        conv2d(Var(x), Var(w), Var(), 1, 1, 1);
        macs = MacCounter::total();
    }
    CHECK(macs == 3 * 3 * 3 * 16 * 64);
}
