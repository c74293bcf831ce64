#pragma once

#include <vector>

#include "haze/core/var.hpp"

namespace haze {

// ---- elementwise ----
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var div(const Var& a, const Var& b);
Var neg(const Var& a);
Var add_scalar(const Var& a, double s);
Var mul_scalar(const Var& a, double s);
Var relu(const Var& a);
Var leaky_relu(const Var& a, double slope);
Var sigmoid(const Var& a);
Var abs_val(const Var& a);
Var square(const Var& a);
// x^p for x > 0 (inputs are clamped upstream where needed)
Var pow_scalar(const Var& a, double p);
Var clamp_min(const Var& a, double lo);
Var clamp(const Var& a, double lo, double hi);

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(const Var& a, const Var& b) { return mul(a, b); }
inline Var operator*(double s, const Var& a) { return mul_scalar(a, s); }
inline Var operator*(const Var& a, double s) { return mul_scalar(a, s); }
inline Var operator+(const Var& a, double s) { return add_scalar(a, s); }
inline Var operator-(const Var& a, double s) { return add_scalar(a, -s); }

// ---- broadcast multiplies ----
// x:(N,C,H,W) * s:(N,C) -> per-channel scale
Var mul_channel(const Var& x, const Var& s);
// x:(N,C,H,W) * s:(N,1) -> per-sample scalar
Var mul_sample(const Var& x, const Var& s);
// x:(N,C,H,W) * m:(N,1,H,W) -> per-pixel gate
Var mul_pixel(const Var& x, const Var& m);

// ---- reductions ----
Var mean_all(const Var& a);                     // -> scalar (shape {1})
Var sum_all(const Var& a);                      // -> scalar
Var global_avg_pool(const Var& x);              // (N,C,H,W) -> (N,C)
Var l1_loss(const Var& a, const Var& b);        // mean |a-b| -> scalar
Var smooth_l1_loss(const Var& a, const Var& b, double beta);  // -> scalar

// ---- shape ----
Var reshape(const Var& a, std::vector<int64_t> shape);
Var concat(const std::vector<Var>& xs, int dim);
Var slice_dim0(const Var& x, int64_t begin, int64_t count);
Var reflection_pad2d(const Var& x, int64_t top, int64_t bottom, int64_t left, int64_t right);
Var crop2d(const Var& x, int64_t top, int64_t left, int64_t height, int64_t width);
// (B,C,H,W) -> (n^2*B, C, H/n, W/n); H,W must divide by n. Out sample index
// is b*n^2 + pi*n + pj.
Var tile_patches(const Var& x, int n);
Var untile_patches(const Var& p, int n);

// ---- linear / conv ----
// x:(N,Cin) w:(Cout,Cin) b:(Cout)|undefined -> (N,Cout)
Var linear(const Var& x, const Var& w, const Var& b);
// x:(N,Cin,H,W) w:(Cout,Cin,kh,kw) b:(Cout)|undefined
Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad, int dilation = 1);
// w:(Cin,Cout,kh,kw); Hout = (H-1)*stride - 2*pad + kh + out_pad
Var conv_transpose2d(const Var& x, const Var& w, const Var& b, int stride, int pad, int out_pad);

// ---- pooling / fixed filters ----
Var avg_pool2(const Var& x);  // 2x2, stride 2, floor
// Separable Gaussian, valid region only: (N,C,H-k+1,W-k+1)
Var gaussian_blur_valid(const Var& x, int ksize, double sigma);

// ---- frequency domain ----
// (N,C,H,W) -> (N,2C,H,W): channels [0,C) real part, [C,2C) imaginary part
Var fft2c(const Var& x);
// (N,2C,H,W) -> (N,C,H,W): real part of the normalized inverse transform
Var ifft2c_real(const Var& y);

Var detach(const Var& x);

// Gaussian window coefficients (sums to 1).
std::vector<double> gaussian_kernel1d(int ksize, double sigma);

}  // namespace haze
