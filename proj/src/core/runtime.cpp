#include "haze/core/runtime.hpp"

#include <cblas.h>

namespace haze {

namespace {
bool g_deterministic = false;
}

void set_deterministic(bool enabled) {
    g_deterministic = enabled;
    if (enabled) openblas_set_num_threads(1);
}

bool is_deterministic() { return g_deterministic; }

}  // namespace haze
