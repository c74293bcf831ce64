#include "haze/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "haze/core/errors.hpp"
#include "haze/data/png_io.hpp"
#include "haze/noise/perlin.hpp"

namespace fs = std::filesystem;

namespace haze {

void AugmentSchedule::validate() const {
    if (p_end < 0.0 || p_start > 1.0 || p_end > p_start)
        throw ConfigError("AugmentSchedule: need 0 <= p_end <= p_start <= 1");
}

double AugmentSchedule::probability(int64_t epoch, int64_t total_epochs) const {
    validate();
    if (total_epochs <= 1 || epoch >= total_epochs - 1) return p_end;
    if (epoch < 0) epoch = 0;
    const double t = static_cast<double>(epoch) / static_cast<double>(total_epochs - 1);
    return p_start + (p_end - p_start) * t;
}

PairedDataset::PairedDataset(std::string root) : root_(std::move(root)) {
    const fs::path hazy_dir = fs::path(root_) / "hazy";
    const fs::path clear_dir = fs::path(root_) / "clear";
    if (!fs::is_directory(hazy_dir) || !fs::is_directory(clear_dir))
        throw DataIntegrityError("dataset root must contain hazy/ and clear/: " + root_);
    for (const auto& entry : fs::directory_iterator(hazy_dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".png") continue;
        const std::string name = entry.path().filename().string();
        if (!fs::exists(clear_dir / name))
            throw DataIntegrityError("hazy image has no clear counterpart: " + name);
        names_.push_back(name);
    }
    std::sort(names_.begin(), names_.end());
    if (names_.empty()) throw DataIntegrityError("no .png pairs found under " + root_);
}

std::pair<Tensor, Tensor> PairedDataset::load_pair(size_t index) const {
    if (index >= names_.size()) throw InvalidInput("load_pair: index out of range");
    const fs::path root(root_);
    Tensor hazy = read_png((root / "hazy" / names_[index]).string());
    Tensor clear = read_png((root / "clear" / names_[index]).string());
    if (!hazy.same_shape(clear))
        throw DataIntegrityError("pair size mismatch for " + names_[index]);
    return {hazy, clear};
}

Tensor resize_bilinear(const Tensor& image, int64_t out_h, int64_t out_w) {
    if (image.ndim() != 3) throw InvalidInput("resize_bilinear: expected (C,H,W)");
    const int64_t C = image.dim(0), H = image.dim(1), W = image.dim(2);
    Tensor out({C, out_h, out_w});
    const double sy = static_cast<double>(H) / out_h;
    const double sx = static_cast<double>(W) / out_w;
    for (int64_t c = 0; c < C; ++c)
        for (int64_t y = 0; y < out_h; ++y) {
            double fy = (y + 0.5) * sy - 0.5;
            fy = std::max(0.0, std::min(fy, static_cast<double>(H - 1)));
            const int64_t y0 = static_cast<int64_t>(fy);
            const int64_t y1 = std::min(y0 + 1, H - 1);
            const double wy = fy - y0;
            for (int64_t x = 0; x < out_w; ++x) {
                double fx = (x + 0.5) * sx - 0.5;
                fx = std::max(0.0, std::min(fx, static_cast<double>(W - 1)));
                const int64_t x0 = static_cast<int64_t>(fx);
                const int64_t x1 = std::min(x0 + 1, W - 1);
                const double wx = fx - x0;
                out(c, y, x) = (1 - wy) * ((1 - wx) * image(c, y0, x0) + wx * image(c, y0, x1)) +
                               wy * ((1 - wx) * image(c, y1, x0) + wx * image(c, y1, x1));
            }
        }
    return out;
}

namespace {
Tensor crop3(const Tensor& img, int64_t top, int64_t left, int64_t side) {
    Tensor out({img.dim(0), side, side});
    for (int64_t c = 0; c < img.dim(0); ++c)
        for (int64_t y = 0; y < side; ++y)
            for (int64_t x = 0; x < side; ++x) out(c, y, x) = img(c, top + y, left + x);
    return out;
}
}  // namespace

std::pair<Tensor, Tensor> random_crop_resize(const Tensor& hazy, const Tensor& clear, Rng& rng,
                                             int64_t target) {
    if (!hazy.same_shape(clear)) throw InvalidInput("random_crop_resize: pair shape mismatch");
    const int64_t H = hazy.dim(1), W = hazy.dim(2);
    const int64_t min_side = std::min(H, W);
    if (min_side < target) {
        std::cerr << "random_crop_resize: input " << H << "x" << W << " smaller than " << target
                  << ", resizing up\n";
        return {resize_bilinear(hazy, target, target), resize_bilinear(clear, target, target)};
    }
    const int64_t max_mult = min_side / target;
    const int64_t side = target * (1 + static_cast<int64_t>(rng.uniform_int(
                                           static_cast<uint64_t>(max_mult))));
    const int64_t top = H > side ? static_cast<int64_t>(rng.uniform_int(H - side + 1)) : 0;
    const int64_t left = W > side ? static_cast<int64_t>(rng.uniform_int(W - side + 1)) : 0;
    Tensor ch = crop3(hazy, top, left, side);
    Tensor cc = crop3(clear, top, left, side);
    if (side == target) return {ch, cc};
    return {resize_bilinear(ch, target, target), resize_bilinear(cc, target, target)};
}

TrainingItem sample_training_item(int64_t epoch, int64_t total_epochs,
                                  const AugmentSchedule& schedule, const PairedDataset& dataset,
                                  const HazySynthesizer* synthesizer, int n_negatives, Rng& rng) {
    if (n_negatives < 1) throw InvalidParameter("sample_training_item: n_negatives must be >= 1");
    TrainingItem item;
    item.pair_index = static_cast<size_t>(rng.uniform_int(dataset.size()));
    auto [hazy, clear] = dataset.load_pair(item.pair_index);
    const double p = schedule.probability(epoch, total_epochs);
    const bool synth = synthesizer != nullptr && rng.uniform() < p;
    item.target = clear;
    item.synthesized = synth;
    item.input = synth ? (*synthesizer)(clear, hazy, rng) : hazy;

    // contrastive negatives: the real hazy input first, then synthesized
    // variants of the same clear image
    item.negatives.push_back(hazy);
    item.negative_weights.push_back(1.0);
    if (synthesizer != nullptr)
        while (static_cast<int>(item.negatives.size()) < n_negatives) {
            item.negatives.push_back((*synthesizer)(clear, hazy, rng));
            item.negative_weights.push_back(0.5);
        }
    return item;
}

Tensor apply_atmospheric_scattering(const Tensor& clear, const Tensor& depth, double beta,
                                    const std::array<double, 3>& airlight) {
    if (clear.ndim() != 3 || depth.ndim() != 2 || clear.dim(1) != depth.dim(0) ||
        clear.dim(2) != depth.dim(1))
        throw InvalidInput("apply_atmospheric_scattering: shape mismatch");
    if (beta < 0.0) throw InvalidParameter("apply_atmospheric_scattering: beta must be >= 0");
    const int64_t H = clear.dim(1), W = clear.dim(2);
    Tensor hazy({3, H, W});
    for (int64_t y = 0; y < H; ++y)
        for (int64_t x = 0; x < W; ++x) {
            const double t = std::exp(-beta * depth(y, x));
            for (int c = 0; c < 3; ++c)
                hazy(c, y, x) = clear(c, y, x) * t + airlight[size_t(c)] * (1.0 - t);
        }
    return hazy;
}

void generate_micro_dataset(int n_pairs, const std::string& out_dir, uint64_t seed, int size) {
    if (n_pairs < 1) throw InvalidParameter("generate_micro_dataset: n_pairs must be >= 1");
    const fs::path root(out_dir);
    std::error_code ec;
    fs::create_directories(root / "hazy", ec);
    fs::create_directories(root / "clear", ec);
    if (!fs::is_directory(root / "hazy") || !fs::is_directory(root / "clear"))
        throw IoError("cannot create dataset directories under " + out_dir);

    nlohmann::json meta = nlohmann::json::object();
    meta["seed"] = seed;
    meta["size"] = size;
    nlohmann::json images = nlohmann::json::array();

    const int64_t S = size;
    for (int i = 0; i < n_pairs; ++i) {
        Rng rng(mix_u64(seed, static_cast<uint64_t>(i)));
        Tensor clear({3, S, S});
        Tensor depth({S, S});

        // background: color gradient along a random direction
        const double angle = rng.uniform(0.0, 6.28318530717958647692);
        const double dx = std::cos(angle), dy = std::sin(angle);
        double c0[3], c1[3];
        for (int c = 0; c < 3; ++c) {
            c0[c] = rng.uniform(0.05, 0.95);
            c1[c] = rng.uniform(0.05, 0.95);
        }
        const double depth_near = rng.uniform(0.35, 0.55);
        const double depth_far = rng.uniform(0.75, 1.0);
        for (int64_t y = 0; y < S; ++y)
            for (int64_t x = 0; x < S; ++x) {
                const double t =
                    0.5 + 0.5 * ((x * dx + y * dy) / (S * std::max(std::fabs(dx) + std::fabs(dy),
                                                                   1e-9)));
                const double tt = std::min(1.0, std::max(0.0, t));
                for (int c = 0; c < 3; ++c) clear(c, y, x) = c0[c] + (c1[c] - c0[c]) * tt;
                depth(y, x) = depth_near + (depth_far - depth_near) * tt;
            }

        // a light multiplicative texture so scenes are not piecewise flat
        PerlinParams tex;
        tex.octaves = 3;
        tex.persistence = 0.6;
        tex.base_cell = std::max(8, size / 8);
        tex.seed = mix_u64(seed, static_cast<uint64_t>(i), 0x7E57ULL);
        NoiseField noise = perlin_distribution(size, size, tex);
        for (int64_t y = 0; y < S; ++y)
            for (int64_t x = 0; x < S; ++x) {
                const double m = 1.0 + 0.15 * noise.values(y, x);
                for (int c = 0; c < 3; ++c)
                    clear(c, y, x) = std::min(1.0, std::max(0.0, clear(c, y, x) * m));
            }

        // foreground shapes with their own depth
        const int shapes = 3 + static_cast<int>(rng.uniform_int(3));
        for (int s = 0; s < shapes; ++s) {
            const bool circle = rng.uniform() < 0.5;
            const double cx = rng.uniform(0.1, 0.9) * S;
            const double cy = rng.uniform(0.1, 0.9) * S;
            const double r = rng.uniform(0.06, 0.22) * S;
            const double shape_depth = rng.uniform(0.05, 0.45);
            double color[3];
            for (int c = 0; c < 3; ++c) color[c] = rng.uniform(0.05, 0.95);
            for (int64_t y = 0; y < S; ++y)
                for (int64_t x = 0; x < S; ++x) {
                    double inside;
                    if (circle) {
                        const double d = std::hypot(x - cx, y - cy);
                        inside = std::min(1.0, std::max(0.0, r - d + 1.0));  // 1px soft edge
                    } else {
                        const double ddx = r - std::fabs(x - cx);
                        const double ddy = r - std::fabs(y - cy);
                        inside = std::min(1.0, std::max(0.0, std::min(ddx, ddy) + 1.0));
                    }
                    if (inside <= 0.0) continue;
                    for (int c = 0; c < 3; ++c)
                        clear(c, y, x) = (1 - inside) * clear(c, y, x) + inside * color[c];
                    depth(y, x) = (1 - inside) * depth(y, x) + inside * shape_depth;
                }
        }

        const double beta = rng.uniform(0.6, 2.2);
        std::array<double, 3> airlight;
        const double gray = rng.uniform(0.75, 0.95);
        for (int c = 0; c < 3; ++c) airlight[c] = std::min(1.0, gray + rng.uniform(-0.03, 0.03));
        Tensor hazy = apply_atmospheric_scattering(clear, depth, beta, airlight);

        char name[32];
        std::snprintf(name, sizeof(name), "pair_%03d.png", i);
        write_png((root / "clear" / name).string(), clear);
        write_png((root / "hazy" / name).string(), hazy);

        nlohmann::json entry;
        entry["name"] = name;
        entry["beta"] = beta;
        entry["airlight"] = {airlight[0], airlight[1], airlight[2]};
        entry["seed"] = mix_u64(seed, static_cast<uint64_t>(i));
        images.push_back(entry);
    }
    meta["images"] = images;
    std::ofstream os(root / "meta.json");
    if (!os) throw IoError("cannot write meta.json under " + out_dir);
    os << meta.dump(2) << "\n";
}

}  // namespace haze
