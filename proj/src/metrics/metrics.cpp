#include "haze/metrics/metrics.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "haze/core/errors.hpp"
#include "haze/core/ops.hpp"

namespace haze {

double psnr(const Tensor& pred, const Tensor& target, double peak) {
    if (!pred.same_shape(target))
        throw InvalidInput("psnr: shape mismatch " + shape_string(pred) + " vs " +
                           shape_string(target));
    if (peak <= 0.0) throw InvalidParameter("psnr: peak must be positive");
    double mse = 0.0;
    for (int64_t i = 0; i < pred.numel(); ++i) {
        const double d = pred(i) - target(i);
        mse += d * d;
    }
    mse /= static_cast<double>(pred.numel());
    if (mse == 0.0) return 99.0;
    return std::min(99.0, 10.0 * std::log10(peak * peak / mse));
}

double ssim(const Tensor& pred, const Tensor& target) {
    if (!pred.same_shape(target)) throw InvalidInput("ssim: shape mismatch");
    Tensor a = pred, b = target;
    if (a.ndim() == 3) {
        a = a.reshaped({1, a.dim(0), a.dim(1), a.dim(2)});
        b = b.reshaped({1, b.dim(0), b.dim(1), b.dim(2)});
    }
    if (a.ndim() != 4) throw InvalidInput("ssim: expected (C,H,W) or (N,C,H,W)");
    if (a.dim(2) < 11 || a.dim(3) < 11)
        throw InvalidInput("ssim: spatial size must be at least 11");

    constexpr double C1 = 0.01 * 0.01;
    constexpr double C2 = 0.03 * 0.03;
    NoGradGuard no_grad;
    Var x{a}, y{b};
    Var mx = gaussian_blur_valid(x, 11, 1.5);
    Var my = gaussian_blur_valid(y, 11, 1.5);
    Var mxx = mul(mx, mx), myy = mul(my, my), mxy = mul(mx, my);
    Var sxx = sub(gaussian_blur_valid(mul(x, x), 11, 1.5), mxx);
    Var syy = sub(gaussian_blur_valid(mul(y, y), 11, 1.5), myy);
    Var sxy = sub(gaussian_blur_valid(mul(x, y), 11, 1.5), mxy);
    Var lum = div(add_scalar(mul_scalar(mxy, 2.0), C1), add_scalar(add(mxx, myy), C1));
    Var con = div(add_scalar(mul_scalar(sxy, 2.0), C2), add_scalar(add(sxx, syy), C2));
    Var ssim_map = mul(lum, con);
    return mean_all(ssim_map).val()(0);
}

void EvalReport::finalize() {
    mean_psnr = 0.0;
    mean_ssim = 0.0;
    if (rows.empty()) return;
    for (const Row& r : rows) {
        mean_psnr += r.psnr;
        mean_ssim += r.ssim;
    }
    mean_psnr /= static_cast<double>(rows.size());
    mean_ssim /= static_cast<double>(rows.size());
}

std::string EvalReport::to_csv() const {
    std::ostringstream os;
    os << "name,psnr,ssim\n";
    os.precision(10);
    for (const Row& r : rows) os << r.name << "," << r.psnr << "," << r.ssim << "\n";
    return os.str();
}

std::string EvalReport::to_json() const {
    nlohmann::json j;
    j["count"] = rows.size();
    j["mean_psnr"] = mean_psnr;
    j["mean_ssim"] = mean_ssim;
    return j.dump(2) + "\n";
}

}  // namespace haze
