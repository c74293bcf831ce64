#pragma once

#include <string>
#include <vector>

#include "haze/core/tensor.hpp"

namespace haze {

// 10*log10(peak^2 / MSE), capped at 99.0 dB (the zero-MSE sentinel).
double psnr(const Tensor& pred, const Tensor& target, double peak = 1.0);

// Single-scale SSIM, Gaussian window 11 / sigma 1.5, K1=0.01, K2=0.03,
// computed per channel and averaged. Needs spatial size >= 11.
double ssim(const Tensor& pred, const Tensor& target);

struct EvalReport {
    struct Row {
        std::string name;
        double psnr = 0.0;
        double ssim = 0.0;
    };
    std::vector<Row> rows;
    double mean_psnr = 0.0;
    double mean_ssim = 0.0;

    void finalize();  // fills the aggregates from the rows
    std::string to_csv() const;
    std::string to_json() const;
};

}  // namespace haze
