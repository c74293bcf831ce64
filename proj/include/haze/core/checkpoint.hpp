#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "haze/core/tensor.hpp"

namespace haze {

// Versioned binary container: magic + version, a JSON header (kind, config
// snapshot, counters, tensor manifest), then raw little-endian doubles.
// Save/load/save of the same state is byte-identical.
struct Checkpoint {
    static constexpr uint32_t kFormatVersion = 1;

    std::string kind;  // "ahg" | "dhr" | ...
    nlohmann::json config = nlohmann::json::object();
    int64_t epoch = 0;
    int64_t step = 0;
    nlohmann::json extra = nlohmann::json::object();
    std::vector<std::pair<std::string, Tensor>> tensors;

    const Tensor* find(const std::string& name) const;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace haze
