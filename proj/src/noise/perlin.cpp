#include "haze/noise/perlin.hpp"

#include <cmath>

#include "haze/core/errors.hpp"
#include "haze/core/rng.hpp"
#include "haze/data/png_io.hpp"

namespace haze {

namespace {
constexpr double kTwoPi = 6.28318530717958647692;

inline double fade(double t) { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); }

inline void lattice_gradient(uint64_t seed, int64_t ix, int64_t iy, double* gx, double* gy) {
    const uint64_t h =
        mix_u64(seed, static_cast<uint64_t>(ix) * 0x9E3779B97F4A7C15ULL + 0x632BE59BD9B4E019ULL,
                static_cast<uint64_t>(iy));
    const double angle = kTwoPi * u64_to_unit_double(h);
    *gx = std::cos(angle);
    *gy = std::sin(angle);
}
}  // namespace

void PerlinParams::validate() const {
    if (octaves < 1) throw InvalidParameter("PerlinParams: octaves must be >= 1");
    if (persistence <= 0.0) throw InvalidParameter("PerlinParams: persistence must be > 0");
    if (frequency_scale <= 1.0) throw InvalidParameter("PerlinParams: frequency_scale must be > 1");
    if (base_cell < 2) throw InvalidParameter("PerlinParams: base_cell must be >= 2");
}

std::vector<double> octave_weights(double persistence, int octaves) {
    if (persistence <= 0.0) throw InvalidParameter("octave_weights: persistence must be > 0");
    if (octaves < 1) throw InvalidParameter("octave_weights: octaves must be >= 1");
    std::vector<double> w(static_cast<size_t>(octaves));
    double sum = 0.0;
    double pk = 1.0;
    for (int i = 0; i < octaves; ++i) {
        w[static_cast<size_t>(i)] = pk;
        sum += pk;
        pk *= persistence;
    }
    for (double& v : w) v /= sum;
    return w;
}

double perlin_point(double gx, double gy, uint64_t seed) {
    const int64_t ix0 = static_cast<int64_t>(std::floor(gx));
    const int64_t iy0 = static_cast<int64_t>(std::floor(gy));
    const double fx = gx - static_cast<double>(ix0);
    const double fy = gy - static_cast<double>(iy0);

    double g00x, g00y, g10x, g10y, g01x, g01y, g11x, g11y;
    lattice_gradient(seed, ix0, iy0, &g00x, &g00y);
    lattice_gradient(seed, ix0 + 1, iy0, &g10x, &g10y);
    lattice_gradient(seed, ix0, iy0 + 1, &g01x, &g01y);
    lattice_gradient(seed, ix0 + 1, iy0 + 1, &g11x, &g11y);

    const double d00 = g00x * fx + g00y * fy;
    const double d10 = g10x * (fx - 1.0) + g10y * fy;
    const double d01 = g01x * fx + g01y * (fy - 1.0);
    const double d11 = g11x * (fx - 1.0) + g11y * (fy - 1.0);

    const double ux = fade(fx);
    const double uy = fade(fy);
    const double a = d00 + ux * (d10 - d00);
    const double b = d01 + ux * (d11 - d01);
    return a + uy * (b - a);
}

Tensor perlin2d(int height, int width, int cell, uint64_t seed) {
    if (height < 1 || width < 1) throw InvalidParameter("perlin2d: empty output");
    if (cell < 2) throw InvalidParameter("perlin2d: cell must be >= 2");
    Tensor out({height, width});
    const double inv = 1.0 / static_cast<double>(cell);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            out(y, x) = perlin_point(static_cast<double>(x) * inv, static_cast<double>(y) * inv,
                                     seed);
    return out;
}

uint64_t perlin_octave_seed(uint64_t seed, int octave) {
    return mix_u64(seed, 0x5851F42D4C957F2DULL, static_cast<uint64_t>(octave));
}

void perlin_octave_offsets(const PerlinParams& params, int octave, double* u, double* v) {
    const uint64_t hu = mix_u64(params.seed, static_cast<uint64_t>(octave), 1);
    const uint64_t hv = mix_u64(params.seed, static_cast<uint64_t>(octave), 2);
    *u = u64_to_unit_double(hu) * static_cast<double>(params.base_cell);
    *v = u64_to_unit_double(hv) * static_cast<double>(params.base_cell);
}

NoiseField perlin_distribution(int height, int width, const PerlinParams& params) {
    params.validate();
    if (height < 1 || width < 1) throw InvalidParameter("perlin_distribution: empty output");
    const std::vector<double> weights = octave_weights(params.persistence, params.octaves);
    NoiseField field;
    field.params = params;
    field.values = Tensor({height, width});
    const double invL = 1.0 / static_cast<double>(params.base_cell);
    double freq = 1.0;
    for (int i = 0; i < params.octaves; ++i) {
        double u, v;
        perlin_octave_offsets(params, i, &u, &v);
        const uint64_t oseed = perlin_octave_seed(params.seed, i);
        const double w = weights[static_cast<size_t>(i)];
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x)
                field.values(y, x) +=
                    w * perlin_point((freq * static_cast<double>(x) + u) * invL,
                                     (freq * static_cast<double>(y) + v) * invL, oseed);
        freq *= params.frequency_scale;
    }
    return field;
}

NoiseField normalize_field(const NoiseField& field, double lo, double hi) {
    if (lo >= hi) throw InvalidParameter("normalize_field: lo must be < hi");
    NoiseField out;
    out.params = field.params;
    out.values = field.values.clone();
    double vmin = out.values(0);
    double vmax = vmin;
    for (int64_t i = 0; i < out.values.numel(); ++i) {
        vmin = std::min(vmin, out.values(i));
        vmax = std::max(vmax, out.values(i));
    }
    if (vmax == vmin) {
        out.values.fill(0.5 * (lo + hi));
        return out;
    }
    const double scale = (hi - lo) / (vmax - vmin);
    for (int64_t i = 0; i < out.values.numel(); ++i)
        out.values(i) = lo + (out.values(i) - vmin) * scale;
    return out;
}

void write_noise_png16(const NoiseField& field, const std::string& path, double lo, double hi) {
    if (lo >= hi) throw InvalidParameter("write_noise_png16: lo must be < hi");
    const int64_t h = field.values.dim(0), w = field.values.dim(1);
    std::vector<uint16_t> pixels(static_cast<size_t>(h * w));
    const double scale = 65535.0 / (hi - lo);
    for (int64_t i = 0; i < h * w; ++i) {
        double v = (field.values(i) - lo) * scale;
        v = v < 0.0 ? 0.0 : (v > 65535.0 ? 65535.0 : v);
        pixels[static_cast<size_t>(i)] = static_cast<uint16_t>(std::lround(v));
    }
    write_png_gray16(path, pixels.data(), static_cast<int>(w), static_cast<int>(h));
}

}  // namespace haze
