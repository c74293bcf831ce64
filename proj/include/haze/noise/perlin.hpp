#pragma once

#include <cstdint>
#include <vector>

#include "haze/core/tensor.hpp"

namespace haze {

// Multi-octave gradient noise used to spatially modulate haze density.
// Identical parameters give bit-identical fields across platforms and runs.
struct PerlinParams {
    int octaves = 4;
    double persistence = 0.5;
    double frequency_scale = 2.0;
    int base_cell = 64;  // pixels per lattice cell at the base octave
    uint64_t seed = 0;

    void validate() const;
};

struct NoiseField {
    Tensor values;  // (H, W)
    PerlinParams params;
};

// w_i = p^i / sum_j p^j, i in [0, octaves)
std::vector<double> octave_weights(double persistence, int octaves);

// Single-octave classic Perlin: quintic fade, unit gradients hashed from
// (seed, lattice point). Zero at lattice nodes, |value| <= 1.
Tensor perlin2d(int height, int width, int cell, uint64_t seed);

// Point evaluation on lattice coordinates (pixel / cell). Exposed so the
// octave sum can be cross-checked directly.
double perlin_point(double gx, double gy, uint64_t seed);

// Per-octave derived quantities.
uint64_t perlin_octave_seed(uint64_t seed, int octave);
// Random offsets u_i, v_i drawn uniformly from [0, base_cell).
void perlin_octave_offsets(const PerlinParams& params, int octave, double* u, double* v);

// PerlinDist(x,y) = sum_i w_i * Perlin(k^i x + u_i, k^i y + v_i)
NoiseField perlin_distribution(int height, int width, const PerlinParams& params);

// Affine rescale: min -> lo, max -> hi; a constant field maps to the
// midpoint (lo+hi)/2.
NoiseField normalize_field(const NoiseField& field, double lo, double hi);

// 16-bit grayscale export, [lo,hi] -> [0,65535].
void write_noise_png16(const NoiseField& field, const std::string& path, double lo, double hi);

}  // namespace haze
