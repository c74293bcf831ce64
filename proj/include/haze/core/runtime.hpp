#pragma once

namespace haze {

// Deterministic mode pins the BLAS backend to one thread so repeated runs
// with the same seed produce byte-identical artifacts.
void set_deterministic(bool enabled);
bool is_deterministic();

}  // namespace haze
